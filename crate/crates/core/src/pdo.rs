//! Forward maps as Fourier multipliers: ellipticity and link-condition
//! certification, conditional stability, and the Schroedinger composition.
//!
//! Symbols are x-independent, so every operator acts diagonally on the
//! atom representation.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::spectral::{bracket, Frequency, SpectralFunction};

/// A positive multiplier `phi(k)` defining a forward map.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolDescriptor {
    /// `phi(k) = <k>^s`.
    BracketPower(f64),
    /// `phi(k) = 1 / (alpha + |k|^2)`, `alpha > 0`.
    Resolvent(f64),
    /// Product of the parts.
    Product(Vec<SymbolDescriptor>),
}

impl SymbolDescriptor {
    pub fn validate(&self) -> Result<()> {
        match self {
            SymbolDescriptor::BracketPower(_) => Ok(()),
            SymbolDescriptor::Resolvent(alpha) => {
                if *alpha > 0.0 {
                    Ok(())
                } else {
                    Err(CoreError::InvalidParam(format!(
                        "resolvent symbol requires alpha > 0, got {alpha}"
                    )))
                }
            }
            SymbolDescriptor::Product(parts) => parts.iter().try_for_each(|p| p.validate()),
        }
    }

    pub fn eval(&self, k: &Frequency) -> f64 {
        match self {
            SymbolDescriptor::BracketPower(s) => bracket(k).powf(*s),
            SymbolDescriptor::Resolvent(alpha) => 1.0 / (alpha + k.norm_sq()),
            SymbolDescriptor::Product(parts) => parts.iter().map(|p| p.eval(k)).product(),
        }
    }
}

/// Apply the multiplier `phi` coefficient-wise.
pub fn apply_symbol(phi: &SymbolDescriptor, u: &SpectralFunction) -> Result<SpectralFunction> {
    phi.validate()?;
    Ok(u.map_multiplier(|k| phi.eval(k)))
}

/// Inf and sup of `phi(k) <k>^a` over the lattice ball `|k| <= cutoff`.
pub fn ellipticity_bounds(
    phi: &SymbolDescriptor,
    a: f64,
    d: usize,
    cutoff: i64,
) -> Result<(f64, f64)> {
    phi.validate()?;
    if cutoff < 1 {
        return Err(CoreError::InvalidParam("ellipticity cutoff must be >= 1".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in lattice_ball(d, cutoff) {
        let v = phi.eval(&k) * bracket(&k).powf(a);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// All lattice points of dimension `d` with Euclidean length `<= radius`.
pub fn lattice_ball(d: usize, radius: i64) -> Vec<Frequency> {
    let mut out = Vec::new();
    let mut current = vec![0i64; d];
    fill_ball(d, radius * radius, 0, &mut current, &mut out);
    out
}

fn fill_ball(d: usize, r_sq: i64, depth: usize, current: &mut Vec<i64>, out: &mut Vec<Frequency>) {
    if depth == d {
        out.push(Frequency(current.clone()));
        return;
    }
    let used: i64 = current[..depth].iter().map(|c| c * c).sum();
    let budget = r_sq - used;
    let max = (budget as f64).sqrt().floor() as i64;
    for c in -max..=max {
        current[depth] = c;
        fill_ball(d, r_sq, depth + 1, current, out);
    }
    current[depth] = 0;
}

/// Empirical link constants of Assumption-style two-sided bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    pub a: f64,
    pub m: f64,
    pub big_m: f64,
    pub num_pairs: usize,
    /// Trial indices realizing the min and max ratio.
    pub worst_pair_ids: (usize, usize),
}

impl LinkReport {
    /// Flat key=value block for the CLI harness.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "a={}", self.a).unwrap();
        writeln!(s, "m={:.12e}", self.m).unwrap();
        writeln!(s, "M={:.12e}", self.big_m).unwrap();
        writeln!(s, "num_pairs={}", self.num_pairs).unwrap();
        writeln!(s, "worst_min_id={}", self.worst_pair_ids.0).unwrap();
        writeln!(s, "worst_max_id={}", self.worst_pair_ids.1).unwrap();
        s
    }
}

/// Randomized certification of the link condition: over `trials` random
/// pairs, the ratio `||F u1 - F u2||_{B^0} / ||u1 - u2||_{B^{-a}}`.
pub fn link_constants(
    phi: &SymbolDescriptor,
    a: f64,
    d: usize,
    k_max: i64,
    trials: usize,
    seed: u64,
) -> Result<LinkReport> {
    phi.validate()?;
    if trials == 0 {
        return Err(CoreError::InvalidParam("link_constants requires trials >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = f64::INFINITY;
    let mut big_m = f64::NEG_INFINITY;
    let mut ids = (0usize, 0usize);
    let mut used = 0usize;
    for trial in 0..trials {
        let u1 = SpectralFunction::random_real(d, 12, k_max, &mut rng);
        let u2 = SpectralFunction::random_real(d, 12, k_max, &mut rng);
        let diff = u1.sub(&u2)?;
        if diff.is_zero() {
            continue;
        }
        let num = apply_symbol(phi, &diff)?.barron_norm(0.0);
        let den = diff.barron_norm(-a);
        let ratio = num / den;
        if ratio < m {
            m = ratio;
            ids.0 = trial;
        }
        if ratio > big_m {
            big_m = ratio;
            ids.1 = trial;
        }
        used += 1;
    }
    Ok(LinkReport { a, m, big_m, num_pairs: used, worst_pair_ids: ids })
}

/// Smoothness ball `M(R)` around a reference element.
#[derive(Debug, Clone)]
pub struct SmoothnessClass {
    pub p: f64,
    pub radius: f64,
    pub reference: SpectralFunction,
}

impl SmoothnessClass {
    pub fn new(p: f64, radius: f64, reference: SpectralFunction) -> Result<Self> {
        if p <= 0.0 || radius <= 0.0 {
            return Err(CoreError::InvalidParam(format!(
                "smoothness class requires p > 0 and R > 0, got p={p}, R={radius}"
            )));
        }
        Ok(SmoothnessClass { p, radius, reference })
    }

    pub fn contains(&self, z: &SpectralFunction) -> Result<bool> {
        Ok(z.sub(&self.reference)?.barron_norm(self.p) <= self.radius + 1e-12)
    }

    /// A random member: reference plus a perturbation with
    /// `B^p` norm uniform in `(0, R]`.
    pub fn sample<R: Rng>(&self, k_max: i64, rng: &mut R) -> Result<SpectralFunction> {
        let d = self.reference.dim();
        let w = SpectralFunction::random_real(d, 10, k_max, rng);
        let norm = w.barron_norm(self.p);
        let target = self.radius * rng.gen_range(1e-3..=1.0f64);
        let scaled = if norm > 0.0 { w.scale(target / norm) } else { w };
        self.reference.add(&scaled)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub max_ratio: f64,
    pub num_pairs: usize,
}

impl StabilityReport {
    pub fn to_kv(&self) -> String {
        format!("max_ratio={:.12e}\nnum_pairs={}\n", self.max_ratio, self.num_pairs)
    }
}

/// Over random pairs in `M(R)`, the worst observed ratio
/// `||u1 - u2||_{L^2} / ||F u1 - F u2||_{B^0}^{p/(p+a)}`.
pub fn conditional_stability_check(
    phi: &SymbolDescriptor,
    a: f64,
    cls: &SmoothnessClass,
    k_max: i64,
    trials: usize,
    seed: u64,
) -> Result<StabilityReport> {
    phi.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let expo = cls.p / (cls.p + a);
    let mut max_ratio = 0.0f64;
    let mut used = 0usize;
    for _ in 0..trials {
        let u1 = cls.sample(k_max, &mut rng)?;
        let u2 = cls.sample(k_max, &mut rng)?;
        let diff = u1.sub(&u2)?;
        if diff.is_zero() {
            continue;
        }
        let data_gap = apply_symbol(phi, &diff)?.barron_norm(0.0);
        let ratio = diff.l2_norm() / data_gap.powf(expo);
        max_ratio = max_ratio.max(ratio);
        used += 1;
    }
    Ok(StabilityReport { max_ratio, num_pairs: used })
}

/// Worst-case reconstruction error bound `(2R)^{a/(p+a)} delta^{p/(p+a)}`.
pub fn modulus_bound(radius: f64, a: f64, p: f64, delta: f64) -> f64 {
    (2.0 * radius).powf(a / (p + a)) * delta.powf(p / (p + a))
}

/// One application of `T_{alpha,W} y = (alpha - Delta)^{-1} (W y)`.
pub fn schroedinger_apply_t(
    alpha: f64,
    w: &SpectralFunction,
    y: &SpectralFunction,
) -> Result<SpectralFunction> {
    if alpha <= 0.0 {
        return Err(CoreError::InvalidParam(format!("alpha must be positive, got {alpha}")));
    }
    let product = w.multiply(y)?;
    Ok(product.map_multiplier(|k| 1.0 / (alpha + k.norm_sq())))
}

/// Forward map `(I + T)^{-1} (alpha - Delta)^{-1} u` by a truncated
/// Neumann series; the geometric tail keeps the a-posteriori `B^0` error
/// below `tol`.
pub fn schroedinger_forward(
    alpha: f64,
    w: &SpectralFunction,
    u: &SpectralFunction,
    tol: f64,
) -> Result<SpectralFunction> {
    if alpha <= 0.0 {
        return Err(CoreError::InvalidParam(format!("alpha must be positive, got {alpha}")));
    }
    let q = w.barron_norm(0.0) / alpha;
    if q >= 1.0 {
        return Err(CoreError::ContractionViolation { q });
    }
    let v0 = u.map_multiplier(|k| 1.0 / (alpha + k.norm_sq()));
    let cut = tol * (1.0 - q);
    let mut sum = v0.clone();
    let mut term = v0;
    // ||T^j v0|| <= q^j ||v0||, so the loop terminates for q < 1.
    loop {
        term = schroedinger_apply_t(alpha, w, &term)?.scale(-1.0);
        if term.barron_norm(0.0) < cut {
            break;
        }
        sum = sum.add(&term)?;
    }
    Ok(sum)
}
