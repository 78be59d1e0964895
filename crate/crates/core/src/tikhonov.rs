//! Barron-penalized Tikhonov regularization for multiplier forward maps.
//!
//! With the data-space norm taken as the `B^0` coefficient sum, the
//! functional `J(u) = ||F(u) - y||^2 + lambda ||u||_{B^p}` is exactly
//! minimizable: phase alignment reduces each coefficient to a scalar
//! `t_k in [0, 1]`, the objective is convex in `t`, and the KKT
//! conditions yield a greedy ascending-cost-ratio rule with at most one
//! fractional coordinate.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::pdo::{ellipticity_bounds, modulus_bound, SymbolDescriptor};
use crate::report::{fit_rate, FitResult};
use crate::rng::stream;
use crate::spectral::{bracket, Frequency, SpectralFunction};

/// Atom pairs drawn when synthesizing a truth function.
const TRUTH_PAIRS: usize = 24;

/// A fully specified inverse problem instance.
#[derive(Debug, Clone)]
pub struct InverseProblemSpec {
    pub phi: SymbolDescriptor,
    /// Smoothing order of the forward map.
    pub a: f64,
    /// Smoothness of the truth.
    pub p: f64,
    /// Radius of the smoothness ball holding the truth.
    pub radius: f64,
    pub d: usize,
    pub k_max: i64,
}

impl InverseProblemSpec {
    pub fn new(
        phi: SymbolDescriptor,
        a: f64,
        p: f64,
        radius: f64,
        d: usize,
        k_max: i64,
    ) -> Result<Self> {
        if a <= 0.0 || p <= 0.0 || radius <= 0.0 || d == 0 || k_max < 1 {
            return Err(CoreError::InvalidParam(
                "inverse problem requires a, p, R > 0, d >= 1, k_max >= 1".into(),
            ));
        }
        let (lo, hi) = ellipticity_bounds(&phi, a, d, k_max)?;
        if !(lo > 0.0 && hi.is_finite()) {
            return Err(CoreError::InvalidParam("symbol is not elliptic on the cutoff ball".into()));
        }
        Ok(InverseProblemSpec { phi, a, p, radius, d, k_max })
    }
}

/// Observed data with its noise level.
#[derive(Debug, Clone)]
pub struct NoisyData {
    pub y_delta: SpectralFunction,
    pub delta: f64,
    pub true_y: Option<SpectralFunction>,
}

/// Exact minimizer of the Tikhonov functional.
#[derive(Debug, Clone)]
pub struct TikhonovSolution {
    pub u_delta: SpectralFunction,
    pub objective: f64,
    pub active_set: Vec<Frequency>,
    /// The canonical frequency with a fractional inversion factor, if any.
    pub fractional_index: Option<Frequency>,
}

/// Random sparse truth with `||u||_{B^p} = radius` exactly.
///
/// Atom radii are log-uniform in `[1, k_max]` and magnitudes follow
/// `<k>^{-p}`, so the `B^p` mass spreads across frequency scales.
pub fn make_truth(
    p: f64,
    radius: f64,
    d: usize,
    k_max: i64,
    seed: u64,
) -> Result<SpectralFunction> {
    if d == 0 || k_max < 1 {
        return Err(CoreError::InvalidParam("make_truth requires d >= 1 and k_max >= 1".into()));
    }
    if radius == 0.0 {
        return Ok(SpectralFunction::zero(d));
    }
    let mut rng = stream(seed, &[]);
    let mut u = SpectralFunction::zero(d);
    while u.is_zero() {
        for _ in 0..TRUTH_PAIRS {
            let r = (rng.gen_range(0.0..(k_max as f64).ln().max(1e-9))).exp();
            let k = Frequency(random_lattice_direction(d, r, k_max, &mut rng));
            let mag = bracket(&k).powf(-p);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let c = Complex64::from_polar(mag, phase);
            u.insert_pair(k, c)?;
        }
    }
    let norm = u.barron_norm(p);
    Ok(u.scale(radius / norm))
}

fn random_lattice_direction<R: Rng>(d: usize, r: f64, k_max: i64, rng: &mut R) -> Vec<i64> {
    // random direction scaled to radius r, rounded to the lattice
    loop {
        let dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
        let len = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len < 1e-6 {
            continue;
        }
        let k: Vec<i64> = dir
            .iter()
            .map(|x| ((x / len * r).round() as i64).clamp(-k_max, k_max))
            .collect();
        return k;
    }
}

/// Perturb `y` by a Hermitian-symmetric noise element with
/// `B^0` norm exactly `delta`, touching the support of `y` plus up to
/// three fresh frequencies.
pub fn add_noise(y: &SpectralFunction, delta: f64, seed: u64) -> Result<NoisyData> {
    if delta < 0.0 {
        return Err(CoreError::InvalidParam(format!("noise level must be >= 0, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(NoisyData { y_delta: y.clone(), delta, true_y: Some(y.clone()) });
    }
    let d = y.dim();
    let mut rng = stream(seed, &[]);
    let mut eta = SpectralFunction::zero(d);
    for k in y.support() {
        if !k.is_canonical() {
            continue;
        }
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        eta.insert_pair(k.clone(), c)?;
    }
    // fresh frequencies just outside the occupied band
    let band = y
        .support()
        .flat_map(|k| k.0.iter().map(|c| c.abs()))
        .max()
        .unwrap_or(0);
    let mut fresh = 0;
    let mut attempts = 0;
    while fresh < 3 && attempts < 100 {
        attempts += 1;
        let k = Frequency(
            (0..d)
                .map(|i| if i == 0 { band + 1 + fresh as i64 } else { rng.gen_range(-2..=2) })
                .collect(),
        );
        if y.coefficient(&k).norm() > 0.0 {
            continue;
        }
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        eta.insert_pair(k, c)?;
        fresh += 1;
    }
    let norm = eta.barron_norm(0.0);
    if norm == 0.0 {
        return Err(CoreError::InvalidParam("noise synthesis produced a zero element".into()));
    }
    let eta = eta.scale(delta / norm);
    Ok(NoisyData { y_delta: y.add(&eta)?, delta, true_y: Some(y.clone()) })
}

/// Exact global minimizer of
/// `J(u) = ||F(u) - y||_{B^0}^2 + lambda ||u||_{B^p}`.
///
/// Frequencies are processed as conjugate pairs in ascending cost ratio
/// `lambda <k>^p / phi(k)`; the residual sum is driven down while the
/// marginal gain `2 S` exceeds the ratio, which is the KKT condition of
/// the convex reduced objective.
pub fn solve_tikhonov(
    phi: &SymbolDescriptor,
    y_delta: &SpectralFunction,
    lambda: f64,
    p: f64,
) -> Result<TikhonovSolution> {
    phi.validate()?;
    if lambda < 0.0 {
        return Err(CoreError::InvalidParam(format!("lambda must be >= 0, got {lambda}")));
    }
    struct Group {
        key: Frequency,
        members: Vec<Frequency>,
        mass: f64,
        ratio: f64,
    }
    let mut groups: Vec<Group> = Vec::new();
    for (k, c) in y_delta.atoms() {
        if !k.is_canonical() {
            continue;
        }
        let phi_k = phi.eval(k);
        if !(phi_k > 0.0 && phi_k.is_finite()) {
            return Err(CoreError::InvalidParam(format!(
                "symbol is not elliptic at frequency {:?}",
                k.0
            )));
        }
        let members = if k.is_zero() { vec![k.clone()] } else { vec![k.clone(), k.negate()] };
        let mass = members.len() as f64 * c.norm();
        let ratio = lambda * bracket(k).powf(p) / phi_k;
        groups.push(Group { key: k.clone(), members, mass, ratio });
    }
    groups.sort_by(|a, b| {
        a.ratio
            .partial_cmp(&b.ratio)
            .unwrap()
            .then_with(|| a.key.cmp(&b.key))
    });

    let mut residual: f64 = groups.iter().map(|g| g.mass).sum();
    let mut u = SpectralFunction::zero(y_delta.dim());
    let mut fractional_index = None;
    for g in &groups {
        if 2.0 * residual <= g.ratio {
            break;
        }
        let target = g.ratio / 2.0;
        let reduce = g.mass.min(residual - target);
        let t = reduce / g.mass;
        residual -= reduce;
        for k in &g.members {
            if k.is_canonical() {
                let c = y_delta.coefficient(k) * (t / phi.eval(k));
                u.insert_pair(k.clone(), c)?;
            }
        }
        if t < 1.0 {
            fractional_index = Some(g.key.clone());
            break;
        }
    }
    let objective = tikhonov_objective(phi, y_delta, &u, lambda, p)?;
    let active_set: Vec<Frequency> = u.support().cloned().collect();
    Ok(TikhonovSolution { u_delta: u, objective, active_set, fractional_index })
}

/// Re-evaluate the functional at `u`.
pub fn tikhonov_objective(
    phi: &SymbolDescriptor,
    y_delta: &SpectralFunction,
    u: &SpectralFunction,
    lambda: f64,
    p: f64,
) -> Result<f64> {
    let fu = u.map_multiplier(|k| phi.eval(k));
    let fidelity = fu.sub(y_delta)?.barron_norm(0.0);
    Ok(fidelity * fidelity + lambda * u.barron_norm(p))
}

/// Neuron count matching the noise level: `ceil((1/delta)^{2p/(a+p)})`.
pub fn neuron_budget(delta: f64, a: f64, p: f64) -> Result<u64> {
    if !(0.0 < delta && delta < 1.0) {
        return Err(CoreError::InvalidParam(format!("neuron_budget requires 0 < delta < 1, got {delta}")));
    }
    Ok((1.0 / delta).powf(2.0 * p / (a + p)).ceil() as u64)
}

/// One solved replication of the rate experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub delta: f64,
    pub rep: usize,
    pub error: f64,
    /// Per-sample stability bound carried along for the assertion.
    pub bound: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct TikhonovRateReport {
    pub rows: Vec<RateRow>,
    /// Descending noise levels with the median error per level.
    pub deltas: Vec<f64>,
    pub median_errors: Vec<f64>,
    pub fit: FitResult,
    pub theory_slope: f64,
    /// Median-error increases while delta decreases; one is tolerated.
    pub monotonicity_inversions: usize,
}

/// Solve fresh random instances over a descending noise grid with the
/// a-priori rule `lambda = delta^2` and fit the log-log error slope.
pub fn rate_experiment(
    spec: &InverseProblemSpec,
    delta_grid: &[f64],
    reps: usize,
    seed: u64,
) -> Result<TikhonovRateReport> {
    if reps < 10 {
        return Err(CoreError::InvalidParam("rate_experiment requires reps >= 10".into()));
    }
    if delta_grid.is_empty()
        || delta_grid.iter().any(|&d| !(0.0 < d && d < 1.0))
        || delta_grid.windows(2).any(|w| w[0] <= w[1])
    {
        return Err(CoreError::InvalidParam(
            "delta_grid must be strictly descending within (0, 1)".into(),
        ));
    }
    let radius = spec.radius;
    let stability_const = ((1.0 + radius).sqrt() + 1.0) * 1.0;
    let tasks: Vec<(usize, usize)> = (0..delta_grid.len())
        .flat_map(|di| (0..reps).map(move |rep| (di, rep)))
        .collect();
    let rows: Vec<RateRow> = tasks
        .into_par_iter()
        .map(|(di, rep)| -> Result<RateRow> {
            let delta = delta_grid[di];
            let fail = |msg: String| CoreError::SolveFailure { delta, rep, msg };
            let truth_seed = crate::rng::derive_seed(seed, &[di as u64, rep as u64, 0]);
            let noise_seed = crate::rng::derive_seed(seed, &[di as u64, rep as u64, 1]);
            let truth = make_truth(spec.p, radius, spec.d, spec.k_max, truth_seed)?;
            let y = truth.map_multiplier(|k| spec.phi.eval(k));
            let noisy = add_noise(&y, delta, noise_seed)?;
            let lambda = delta * delta;
            let sol = solve_tikhonov(&spec.phi, &noisy.y_delta, lambda, spec.p)?;
            // minimizer-comparison invariants from the a-priori rule
            let j_truth = tikhonov_objective(&spec.phi, &noisy.y_delta, &truth, lambda, spec.p)?;
            if sol.objective > j_truth * (1.0 + 1e-10) + 1e-14 {
                return Err(fail(format!(
                    "minimizer objective {} exceeds truth objective {}",
                    sol.objective, j_truth
                )));
            }
            let fu = sol.u_delta.map_multiplier(|k| spec.phi.eval(k));
            let data_res = fu.sub(&noisy.y_delta)?.barron_norm(0.0);
            if data_res > (1.0 + radius).sqrt() * delta * (1.0 + 1e-10) {
                return Err(fail(format!("data residual {data_res} above sqrt(1+R) delta")));
            }
            let error = truth.sub(&sol.u_delta)?.l2_norm();
            let bound = modulus_bound(radius + 1.0, spec.a, spec.p, stability_const * delta);
            if error > 1.01 * bound {
                return Err(fail(format!("error {error} above stability bound {bound}")));
            }
            Ok(RateRow { delta, rep, error, bound, lambda })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut deltas = Vec::new();
    let mut medians = Vec::new();
    for (di, &delta) in delta_grid.iter().enumerate() {
        let mut errs: Vec<f64> = rows
            .iter()
            .filter(|r| r.rep < reps && (r.delta - delta).abs() < 1e-300 && di < delta_grid.len())
            .filter(|r| r.delta == delta)
            .map(|r| r.error)
            .collect();
        errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if errs.len() % 2 == 1 {
            errs[errs.len() / 2]
        } else {
            0.5 * (errs[errs.len() / 2 - 1] + errs[errs.len() / 2])
        };
        deltas.push(delta);
        medians.push(median);
    }
    let mut inversions = 0;
    for w in medians.windows(2) {
        // deltas descend, so medians should too (up to randomness)
        if w[1] > w[0] {
            inversions += 1;
        }
    }
    let pairs: Vec<(f64, f64)> = deltas.iter().copied().zip(medians.iter().copied()).collect();
    let fit = fit_rate(&pairs)?;
    Ok(TikhonovRateReport {
        rows,
        deltas,
        median_errors: medians,
        fit,
        theory_slope: spec.p / (spec.a + spec.p),
        monotonicity_inversions: inversions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn make_truth_examples() {
        assert!(make_truth(2.0, 0.0, 2, 8, 1).unwrap().is_zero());
        let u = make_truth(2.0, 1.5, 2, 8, 2).unwrap();
        assert!((u.barron_norm(2.0) - 1.5).abs() <= 1e-12 * 1.5);
        let v = make_truth(2.0, 1.5, 2, 8, 2).unwrap();
        assert_eq!(u, v);
        assert!(make_truth(2.0, 1.0, 0, 8, 3).is_err());
    }

    #[test]
    fn add_noise_examples() {
        let y = make_truth(2.0, 1.0, 2, 6, 5).unwrap();
        let clean = add_noise(&y, 0.0, 9).unwrap();
        assert_eq!(clean.y_delta, y);

        let noisy = add_noise(&y, 0.25, 9).unwrap();
        let eta = noisy.y_delta.sub(&y).unwrap();
        assert!((eta.barron_norm(0.0) - 0.25).abs() <= 1e-12);
        // symmetry of the perturbed data
        for (k, c) in noisy.y_delta.atoms() {
            let mirror = noisy.y_delta.coefficient(&k.negate());
            assert!((mirror - c.conj()).norm() <= 1e-12 * (1.0 + c.norm()));
        }
        // at least one pure-noise frequency outside supp(y)
        let fresh = noisy
            .y_delta
            .support()
            .filter(|k| y.coefficient(k).norm() == 0.0)
            .count();
        assert!(fresh >= 1);
    }

    #[test]
    fn solver_without_regularization_inverts_pointwise() {
        let phi = SymbolDescriptor::BracketPower(-2.0);
        let y = make_truth(2.0, 1.0, 2, 6, 11).unwrap();
        let sol = solve_tikhonov(&phi, &y, 0.0, 2.0).unwrap();
        assert!(sol.objective.abs() <= 1e-20);
        let expect = y.map_multiplier(|k| 1.0 / phi.eval(k));
        for (k, c) in expect.atoms() {
            assert!((sol.u_delta.coefficient(k) - c).norm() <= 1e-12 * (1.0 + c.norm()));
        }
        assert!(sol.fractional_index.is_none());
    }

    #[test]
    fn solver_single_frequency_closed_form() {
        // |y| = 1 at k = 0 so phi = w = 1: t = 1 - lambda/(2) and
        // objective (1-t)^2 + lambda t.
        let phi = SymbolDescriptor::BracketPower(-2.0);
        let y = SpectralFunction::constant(2, 1.0);
        let lambda = 1.0;
        let sol = solve_tikhonov(&phi, &y, lambda, 2.0).unwrap();
        let c0 = sol.u_delta.coefficient(&Frequency(vec![0, 0])).re;
        assert!((c0 - 0.5).abs() <= 1e-12);
        assert!((sol.objective - 0.75).abs() <= 1e-12);
        assert_eq!(sol.fractional_index, Some(Frequency(vec![0, 0])));

        // golden-section oracle on t in [0, 1]
        let f = |t: f64| (1.0 - t) * (1.0 - t) + lambda * t;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let gr = (5.0f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - gr * (hi - lo);
            let m2 = lo + gr * (hi - lo);
            if f(m1) < f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        // golden section resolves a flat quadratic minimum to ~sqrt(eps)
        assert!((c0 - 0.5 * (lo + hi)).abs() <= 1e-6);
    }

    #[test]
    fn solver_support_and_thresholding() {
        // a pure-noise high frequency with a large cost ratio is dropped
        let phi = SymbolDescriptor::BracketPower(-2.0);
        let truth = make_truth(2.0, 1.0, 2, 4, 21).unwrap();
        let y = truth.map_multiplier(|k| phi.eval(k));
        let noisy = add_noise(&y, 0.05, 22).unwrap();
        let sol = solve_tikhonov(&phi, &noisy.y_delta, 0.2, 2.0).unwrap();
        for k in sol.u_delta.support() {
            assert!(noisy.y_delta.coefficient(k).norm() > 0.0);
        }
        // with lambda this large the band-edge noise atoms get t = 0
        let dropped = noisy
            .y_delta
            .support()
            .filter(|k| sol.u_delta.coefficient(k).norm() == 0.0)
            .count();
        assert!(dropped >= 1, "expected thresholded frequencies");
    }

    /// Cyclic per-coordinate grid search plus local refinement; an
    /// implementation-independent upper-bound oracle for the minimum.
    fn brute_force_objective(masses: &[f64], ratios: &[f64]) -> f64 {
        let n = masses.len();
        let mut t = vec![0.0f64; n];
        let objective = |t: &[f64]| {
            let s: f64 = t.iter().zip(masses).map(|(&ti, &m)| (1.0 - ti) * m).sum();
            let pen: f64 = t.iter().zip(masses).zip(ratios).map(|((&ti, &m), &r)| ti * m * r).sum();
            s * s + pen
        };
        let mut best = objective(&t);
        for _sweep in 0..200 {
            let mut improved = false;
            for i in 0..n {
                let old = t[i];
                let mut local_best = best;
                let mut local_t = old;
                for step in 0..=1000 {
                    let ti = step as f64 * 1e-3;
                    t[i] = ti;
                    let v = objective(&t);
                    if v < local_best {
                        local_best = v;
                        local_t = ti;
                    }
                }
                // local refinement around the winning grid point
                let coarse_t = local_t;
                for fine in -100i32..=100 {
                    let ti = (coarse_t + fine as f64 * 1e-5).clamp(0.0, 1.0);
                    t[i] = ti;
                    let v = objective(&t);
                    if v < local_best {
                        local_best = v;
                        local_t = ti;
                    }
                }
                if local_best < best - 1e-15 {
                    best = local_best;
                    t[i] = local_t;
                    improved = true;
                } else {
                    t[i] = old;
                }
            }
            if !improved {
                break;
            }
        }
        best
    }

    #[test]
    fn greedy_beats_brute_force_grid() {
        let phi = SymbolDescriptor::BracketPower(-2.0);
        let p = 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        for _ in 0..40 {
            let mut y = SpectralFunction::zero(2);
            let pairs = rng.gen_range(1..=3);
            for _ in 0..pairs {
                let k = Frequency(vec![rng.gen_range(-3..=3), rng.gen_range(-3..=3)]);
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                y.insert_pair(k, c).unwrap();
            }
            if y.is_zero() {
                continue;
            }
            let lambda = rng.gen_range(0.0..1.5f64);
            let sol = solve_tikhonov(&phi, &y, lambda, p).unwrap();

            let mut masses = Vec::new();
            let mut ratios = Vec::new();
            for (k, c) in y.atoms() {
                if !k.is_canonical() {
                    continue;
                }
                let members = if k.is_zero() { 1.0 } else { 2.0 };
                masses.push(members * c.norm());
                ratios.push(lambda * bracket(k).powf(p) / phi.eval(k));
            }
            let brute = brute_force_objective(&masses, &ratios);
            assert!(
                sol.objective <= brute + 1e-6,
                "greedy {} vs brute {}",
                sol.objective,
                brute
            );
        }
    }

    #[test]
    fn neuron_budget_examples() {
        assert_eq!(neuron_budget(0.1, 2.0, 2.0).unwrap(), 10);
        assert_eq!(neuron_budget(0.01, 2.0, 2.0).unwrap(), 100);
        // exponent 2p/(a+p) = 4/3: 10^{4/3} = 21.54... -> 22
        assert_eq!(neuron_budget(0.1, 2.0, 4.0).unwrap(), 22);
        assert!(neuron_budget(1.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn rate_experiment_validation() {
        let spec =
            InverseProblemSpec::new(SymbolDescriptor::BracketPower(-2.0), 2.0, 2.0, 1.0, 2, 8)
                .unwrap();
        assert!(rate_experiment(&spec, &[0.25, 0.125], 5, 1).is_err());
        assert!(rate_experiment(&spec, &[0.125, 0.25], 10, 1).is_err());
        assert!(rate_experiment(&spec, &[1.5, 0.25], 10, 1).is_err());
    }

    #[test]
    fn rate_experiment_zero_noise_recovers_truth() {
        // the lambda = delta^2 rule degenerates to plain inversion
        let phi = SymbolDescriptor::BracketPower(-2.0);
        let truth = make_truth(2.0, 1.0, 2, 6, 31).unwrap();
        let y = truth.map_multiplier(|k| phi.eval(k));
        let sol = solve_tikhonov(&phi, &y, 0.0, 2.0).unwrap();
        assert!(truth.sub(&sol.u_delta).unwrap().l2_norm() <= 1e-12);
    }

    #[test]
    fn rate_experiment_small_run() {
        let spec =
            InverseProblemSpec::new(SymbolDescriptor::BracketPower(-2.0), 2.0, 2.0, 1.0, 2, 16)
                .unwrap();
        let grid = [0.25, 0.125, 0.0625, 0.03125];
        let rep = rate_experiment(&spec, &grid, 10, 7).unwrap();
        assert_eq!(rep.rows.len(), 40);
        for r in &rep.rows {
            assert!(r.error <= 1.01 * r.bound);
            assert!((r.lambda - r.delta * r.delta).abs() < 1e-15);
        }
        assert_eq!(rep.theory_slope, 0.5);
        assert!(rep.fit.slope > 0.0, "error should shrink with delta");
    }
}
