//! Spectral representation of real functions on the d-torus.
//!
//! Functions are finite Hermitian-symmetric sets of Fourier atoms on
//! `[-pi, pi]^d` with normalized measure, so every Barron-scale norm is an
//! exact finite sum and Parseval gives the exact `L^2` norm.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{CoreError, Result};

/// Coefficients with modulus below this are dropped after arithmetic.
pub const PRUNE_EPS: f64 = 1e-15;

/// Imaginary residue allowed when evaluating a nominally real function.
pub const IMAG_TOL: f64 = 1e-10;

/// Default cap on the number of stored atoms a product may produce.
pub const ATOM_BUDGET: usize = 200_000;

/// Sanity bound on lattice components.
const COMPONENT_LIMIT: i64 = 1 << 20;

/// A lattice frequency on the d-torus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Frequency(pub Vec<i64>);

impl Frequency {
    pub fn new(k: Vec<i64>) -> Result<Self> {
        if k.is_empty() {
            return Err(CoreError::InvalidParam("frequency dimension must be >= 1".into()));
        }
        if k.iter().any(|&c| c.abs() > COMPONENT_LIMIT) {
            return Err(CoreError::InvalidParam(format!(
                "frequency component exceeds limit {COMPONENT_LIMIT}"
            )));
        }
        Ok(Frequency(k))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Squared Euclidean length of the lattice point.
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|&c| (c * c) as f64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn negate(&self) -> Frequency {
        Frequency(self.0.iter().map(|&c| -c).collect())
    }

    /// True when this frequency belongs to the canonical half lattice:
    /// the first nonzero component is positive.
    pub fn is_canonical(&self) -> bool {
        match self.0.iter().find(|&&c| c != 0) {
            Some(&c) => c > 0,
            None => true,
        }
    }
}

/// Japanese bracket `<k> = sqrt(1 + |k|^2)`.
pub fn bracket(k: &Frequency) -> f64 {
    (1.0 + k.norm_sq()).sqrt()
}

/// A real-valued function represented by finitely many Fourier atoms.
///
/// Invariants: the coefficient at `-k` is the conjugate of the one at `k`,
/// no stored coefficient has modulus below [`PRUNE_EPS`], and the support
/// is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    d: usize,
    atoms: BTreeMap<Frequency, Complex64>,
}

impl SpectralFunction {
    pub fn zero(d: usize) -> Self {
        SpectralFunction { d, atoms: BTreeMap::new() }
    }

    /// The constant function with value `c`.
    pub fn constant(d: usize, c: f64) -> Self {
        let mut f = Self::zero(d);
        if c.abs() >= PRUNE_EPS {
            f.atoms.insert(Frequency(vec![0; d]), Complex64::new(c, 0.0));
        }
        f
    }

    /// Build from raw atoms, validating Hermitian symmetry.
    pub fn new(d: usize, atoms: BTreeMap<Frequency, Complex64>) -> Result<Self> {
        for (k, c) in &atoms {
            if k.dim() != d {
                return Err(CoreError::DimensionMismatch { expected: d, got: k.dim() });
            }
            let mirror = k.negate();
            let cm = atoms.get(&mirror).copied().unwrap_or_default();
            let residue = (cm - c.conj()).norm();
            if residue > 1e-12 * (1.0 + c.norm()) {
                return Err(CoreError::SymmetryViolation { residue });
            }
        }
        let mut f = SpectralFunction { d, atoms };
        f.prune();
        Ok(f)
    }

    /// Insert the atom `c` at `k` together with its conjugate mirror at `-k`.
    /// For `k = 0` the imaginary part is discarded (a real atom).
    pub fn insert_pair(&mut self, k: Frequency, c: Complex64) -> Result<()> {
        if k.dim() != self.d {
            return Err(CoreError::DimensionMismatch { expected: self.d, got: k.dim() });
        }
        if k.is_zero() {
            let cur = self.atoms.entry(k).or_insert(Complex64::default());
            *cur += Complex64::new(c.re, 0.0);
        } else {
            let mirror = k.negate();
            *self.atoms.entry(k).or_insert(Complex64::default()) += c;
            *self.atoms.entry(mirror).or_insert(Complex64::default()) += c.conj();
        }
        self.prune();
        Ok(())
    }

    fn prune(&mut self) {
        self.atoms.retain(|_, c| c.norm() >= PRUNE_EPS);
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Frequency, &Complex64)> {
        self.atoms.iter()
    }

    pub fn coefficient(&self, k: &Frequency) -> Complex64 {
        self.atoms.get(k).copied().unwrap_or_default()
    }

    pub fn support(&self) -> impl Iterator<Item = &Frequency> {
        self.atoms.keys()
    }

    /// Barron norm `sum_k |c_k| <k>^s`.
    pub fn barron_norm(&self, s: f64) -> f64 {
        self.atoms
            .iter()
            .map(|(k, c)| c.norm() * bracket(k).powf(s))
            .sum()
    }

    /// Multiply each coefficient by `<k>^s` (the Fourier action of `L^{s/2}`).
    pub fn apply_bracket_power(&self, s: f64) -> SpectralFunction {
        self.map_multiplier(|k| bracket(k).powf(s))
    }

    /// Divide each coefficient by `t + <k>^{2n}` (the resolvent of `L^n`).
    pub fn apply_resolvent(&self, t: f64, n: u32) -> Result<SpectralFunction> {
        if t <= 0.0 {
            return Err(CoreError::NonpositiveShift(t));
        }
        if n == 0 {
            return Err(CoreError::InvalidParam("resolvent power n must be >= 1".into()));
        }
        Ok(self.map_multiplier(|k| 1.0 / (t + bracket(k).powi(2 * n as i32))))
    }

    /// Apply a positive, even multiplier to every coefficient.
    pub fn map_multiplier<F: Fn(&Frequency) -> f64>(&self, m: F) -> SpectralFunction {
        let mut atoms = BTreeMap::new();
        for (k, c) in &self.atoms {
            let v = *c * m(k);
            if v.norm() >= PRUNE_EPS {
                atoms.insert(k.clone(), v);
            }
        }
        SpectralFunction { d: self.d, atoms }
    }

    /// Point evaluation `sum_k c_k e^{i<k,x>}`; the imaginary residue must
    /// stay below [`IMAG_TOL`] relative to the coefficient mass.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(CoreError::DimensionMismatch { expected: self.d, got: x.len() });
        }
        let mut acc = Complex64::default();
        for (k, c) in &self.atoms {
            let phase: f64 = k.0.iter().zip(x).map(|(&ki, &xi)| ki as f64 * xi).sum();
            acc += c * Complex64::new(0.0, phase).exp();
        }
        let scale = 1.0 + self.barron_norm(0.0);
        if acc.im.abs() > IMAG_TOL * scale {
            return Err(CoreError::SymmetryViolation { residue: acc.im.abs() });
        }
        Ok(acc.re)
    }

    /// `L^2` norm on the torus with normalized measure (Parseval).
    pub fn l2_norm(&self) -> f64 {
        self.atoms
            .values()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, a: f64) -> SpectralFunction {
        self.map_multiplier(|_| a)
    }

    pub fn add(&self, other: &SpectralFunction) -> Result<SpectralFunction> {
        if self.d != other.d {
            return Err(CoreError::DimensionMismatch { expected: self.d, got: other.d });
        }
        let mut atoms = self.atoms.clone();
        for (k, c) in &other.atoms {
            *atoms.entry(k.clone()).or_insert(Complex64::default()) += c;
        }
        let mut f = SpectralFunction { d: self.d, atoms };
        f.prune();
        Ok(f)
    }

    pub fn sub(&self, other: &SpectralFunction) -> Result<SpectralFunction> {
        self.add(&other.scale(-1.0))
    }

    /// Pointwise product via exact frequency-domain convolution.
    pub fn multiply(&self, other: &SpectralFunction) -> Result<SpectralFunction> {
        if self.d != other.d {
            return Err(CoreError::DimensionMismatch { expected: self.d, got: other.d });
        }
        let needed = self.atoms.len().saturating_mul(other.atoms.len());
        if needed > ATOM_BUDGET {
            return Err(CoreError::AtomBudget { needed, budget: ATOM_BUDGET });
        }
        let mut atoms: BTreeMap<Frequency, Complex64> = BTreeMap::new();
        for (ka, ca) in &self.atoms {
            for (kb, cb) in &other.atoms {
                let k = Frequency(ka.0.iter().zip(&kb.0).map(|(&a, &b)| a + b).collect());
                *atoms.entry(k).or_insert(Complex64::default()) += ca * cb;
            }
        }
        let mut f = SpectralFunction { d: self.d, atoms };
        f.prune();
        Ok(f)
    }

    /// Ratio `||u||_s / (||u||_r^theta ||u||_t^{1-theta})`, always in `(0, 1]`.
    pub fn interpolation_gap(&self, trip: &InterpolationTriple) -> Result<f64> {
        if self.is_zero() {
            return Err(CoreError::ZeroFunction);
        }
        let theta = trip.theta();
        let num = self.barron_norm(trip.s);
        let den = self.barron_norm(trip.r).powf(theta) * self.barron_norm(trip.t).powf(1.0 - theta);
        Ok(num / den)
    }

    /// Random real function: `n_pairs` conjugate atom pairs with components
    /// in `[-k_max, k_max]`, coefficients uniform in the unit disk.
    pub fn random_real<R: Rng>(d: usize, n_pairs: usize, k_max: i64, rng: &mut R) -> SpectralFunction {
        let mut f = SpectralFunction::zero(d);
        for _ in 0..n_pairs {
            let k = Frequency((0..d).map(|_| rng.gen_range(-k_max..=k_max)).collect());
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            f.insert_pair(k, c).expect("dimension is consistent by construction");
        }
        f
    }

    /// Serialize to the line-oriented half-lattice text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "d={}", self.d).unwrap();
        for (k, c) in &self.atoms {
            if !k.is_canonical() {
                continue;
            }
            for comp in &k.0 {
                write!(out, "{comp} ").unwrap();
            }
            writeln!(out, "{:e} {:e}", c.re, c.im).unwrap();
        }
        out
    }

    /// Parse the half-lattice text format; mirror atoms are implied.
    pub fn from_text(text: &str) -> Result<SpectralFunction> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| CoreError::Parse("empty input".into()))?;
        let d: usize = header
            .trim()
            .strip_prefix("d=")
            .ok_or_else(|| CoreError::Parse(format!("expected 'd=<d>' header, got '{header}'")))?
            .parse()
            .map_err(|e| CoreError::Parse(format!("bad dimension: {e}")))?;
        if d == 0 {
            return Err(CoreError::Parse("dimension must be >= 1".into()));
        }
        let mut f = SpectralFunction::zero(d);
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != d + 2 {
                return Err(CoreError::Parse(format!(
                    "expected {} fields, got {} in line '{line}'",
                    d + 2,
                    fields.len()
                )));
            }
            let k: Vec<i64> = fields[..d]
                .iter()
                .map(|s| s.parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| CoreError::Parse(format!("bad frequency: {e}")))?;
            let re: f64 = fields[d].parse().map_err(|e| CoreError::Parse(format!("bad re: {e}")))?;
            let im: f64 = fields[d + 1].parse().map_err(|e| CoreError::Parse(format!("bad im: {e}")))?;
            let freq = Frequency::new(k)?;
            if !freq.is_canonical() {
                return Err(CoreError::Parse(format!(
                    "non-canonical frequency in line '{line}' (store only the half lattice)"
                )));
            }
            f.insert_pair(freq, Complex64::new(re, im))?;
        }
        Ok(f)
    }
}

/// Smoothness triple `r < s < t` with `theta = (t - s)/(t - r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationTriple {
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

impl InterpolationTriple {
    pub fn new(r: f64, s: f64, t: f64) -> Result<Self> {
        if !(r < s && s < t) {
            return Err(CoreError::InvalidParam(format!(
                "interpolation triple requires r < s < t, got ({r}, {s}, {t})"
            )));
        }
        Ok(InterpolationTriple { r, s, t })
    }

    pub fn theta(&self) -> f64 {
        (self.t - self.s) / (self.t - self.r)
    }
}
