//! 2-D Radon transform on Gaussian mixtures and the sinogram-norm
//! identity.
//!
//! Fourier convention: `u_hat(xi) = (2 pi)^{-2} int u(x) e^{-i<xi,x>} dx`,
//! and the 1-D transform in the sinogram offset carries `(2 pi)^{-1}`.
//! Under these conventions the projection-slice relation reads
//! `F_1 Ru(xi, kappa) = 2 pi u_hat(xi kappa)`.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::{CoreError, Result};
use crate::quad::gauss_legendre_on;

/// Projection-slice constant for the conventions above.
pub const C_SLICE: f64 = TAU;

/// Sinogram-to-Barron ratio at the identity indices `(s, s_sino, t) =
/// (-1, 0, 1)`: the slice constant times the double cover of the plane
/// by `(xi, kappa) in R x [0, 2 pi)`. Pinned as a regression value.
pub const IDENTITY_RATIO: f64 = 4.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTerm {
    pub amplitude: f64,
    pub center: [f64; 2],
    pub sigma: f64,
}

/// Finite sum of isotropic Gaussians `A exp(-|x - m|^2 / (2 sigma^2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    terms: Vec<GaussianTerm>,
}

impl GaussianMixture {
    pub fn new(terms: Vec<GaussianTerm>) -> Result<Self> {
        if terms.iter().any(|t| !(t.sigma > 0.0) || !t.amplitude.is_finite()) {
            return Err(CoreError::InvalidParam("each Gaussian term needs sigma > 0".into()));
        }
        Ok(GaussianMixture { terms })
    }

    pub fn single(amplitude: f64, center: [f64; 2], sigma: f64) -> Result<Self> {
        Self::new(vec![GaussianTerm { amplitude, center, sigma }])
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    pub fn is_trivial(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude == 0.0)
    }

    pub fn evaluate(&self, x: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let dx = x[0] - t.center[0];
                let dy = x[1] - t.center[1];
                t.amplitude * (-(dx * dx + dy * dy) / (2.0 * t.sigma * t.sigma)).exp()
            })
            .sum()
    }

    /// `u_hat(xi)`; each term contributes
    /// `A sigma^2 (2 pi)^{-1} e^{-sigma^2 |xi|^2 / 2} e^{-i<xi,m>}`.
    pub fn fourier(&self, xi: [f64; 2]) -> Complex64 {
        let norm_sq = xi[0] * xi[0] + xi[1] * xi[1];
        self.terms
            .iter()
            .map(|t| {
                let mag =
                    t.amplitude * t.sigma * t.sigma / TAU * (-t.sigma * t.sigma * norm_sq / 2.0).exp();
                let phase = -(xi[0] * t.center[0] + xi[1] * t.center[1]);
                Complex64::from_polar(mag, phase)
            })
            .sum()
    }

    /// Largest frequency radius still carrying mass above ~1e-18.
    fn frequency_cutoff(&self) -> f64 {
        let sigma_min = self
            .terms
            .iter()
            .filter(|t| t.amplitude != 0.0)
            .map(|t| t.sigma)
            .fold(f64::INFINITY, f64::min);
        if sigma_min.is_finite() {
            9.0 / sigma_min
        } else {
            1.0
        }
    }
}

/// A point `(zeta, kappa)` of the sinogram cylinder; `kappa` is the
/// angle of the direction on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinogramPoint {
    pub zeta: f64,
    pub kappa: f64,
}

impl SinogramPoint {
    pub fn direction(&self) -> [f64; 2] {
        [self.kappa.cos(), self.kappa.sin()]
    }
}

/// `Ru(zeta, kappa)`: line integral over `<x, kappa> = zeta`, in closed
/// form — each Gaussian term projects to
/// `A sqrt(2 pi) sigma e^{-(zeta - <m, kappa>)^2 / (2 sigma^2)}`.
pub fn radon_transform(u: &GaussianMixture, pt: &SinogramPoint) -> f64 {
    let dir = pt.direction();
    u.terms()
        .iter()
        .map(|t| {
            let shift = pt.zeta - (t.center[0] * dir[0] + t.center[1] * dir[1]);
            t.amplitude * TAU.sqrt() * t.sigma * (-shift * shift / (2.0 * t.sigma * t.sigma)).exp()
        })
        .sum()
}

/// Node counts for the polar quadratures. The radial direction uses
/// Gauss-Legendre on a band adapted to the mixture's spectral decay;
/// the angular direction uses uniform panels (spectrally accurate for
/// periodic integrands).
#[derive(Debug, Clone, Copy)]
pub struct PolarQuadrature {
    pub radial_nodes: usize,
    pub angular_panels: usize,
}

impl PolarQuadrature {
    pub const DEFAULT: PolarQuadrature =
        PolarQuadrature { radial_nodes: 320, angular_panels: 256 };

    fn doubled(self) -> Self {
        PolarQuadrature {
            radial_nodes: self.radial_nodes * 2,
            angular_panels: self.angular_panels * 2,
        }
    }
}

const REFINEMENT_TOL: f64 = 1e-6;

fn check_refined(coarse: f64, fine: f64) -> Result<f64> {
    let delta = (fine - coarse).abs() / (1.0 + fine.abs());
    if delta > REFINEMENT_TOL {
        return Err(CoreError::QuadratureNotConverged { delta });
    }
    Ok(fine)
}

/// Single-level sinogram-norm quadrature without the refinement check.
pub fn sinogram_norm_raw(u: &GaussianMixture, s_sino: f64, t: f64, quad: PolarQuadrature) -> f64 {
    let r_max = u.frequency_cutoff();
    // split the xi axis at zero: |xi| and the t-weight kink there
    let (xs, ws) = gauss_legendre_on(quad.radial_nodes, 0.0, r_max);
    let d_kappa = TAU / quad.angular_panels as f64;
    let mut total = 0.0;
    for j in 0..quad.angular_panels {
        let kappa = j as f64 * d_kappa;
        let dir = [kappa.cos(), kappa.sin()];
        for (&xi, &w) in xs.iter().zip(&ws) {
            let weight = bracket1(xi).powf(s_sino) * (xi.abs() / bracket1(xi)).powf(t);
            for sign in [1.0, -1.0] {
                let point = [sign * xi * dir[0], sign * xi * dir[1]];
                total += w * d_kappa * C_SLICE * u.fourier(point).norm() * weight;
            }
        }
    }
    total
}

/// Sinogram norm
/// `int_{S^1} int_R |F_1 Ru(xi, kappa)| <xi>^{s_sino} (|xi|/<xi>)^t dxi dkappa`,
/// evaluated through the projection-slice relation.
pub fn sinogram_norm(
    u: &GaussianMixture,
    s_sino: f64,
    t: f64,
    quad: PolarQuadrature,
) -> Result<f64> {
    if u.is_trivial() {
        return Ok(0.0);
    }
    let coarse = sinogram_norm_raw(u, s_sino, t, quad);
    let fine = sinogram_norm_raw(u, s_sino, t, quad.doubled());
    check_refined(coarse, fine)
}

fn bracket1(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

/// Single-level polar Barron-norm quadrature without the refinement check.
pub fn barron_norm_radial_raw(u: &GaussianMixture, s: f64, quad: PolarQuadrature) -> f64 {
    let r_max = u.frequency_cutoff();
    let (xs, ws) = gauss_legendre_on(quad.radial_nodes, 0.0, r_max);
    let d_kappa = TAU / quad.angular_panels as f64;
    let mut total = 0.0;
    for j in 0..quad.angular_panels {
        let kappa = j as f64 * d_kappa;
        let dir = [kappa.cos(), kappa.sin()];
        for (&r, &w) in xs.iter().zip(&ws) {
            let point = [r * dir[0], r * dir[1]];
            total += w * d_kappa * u.fourier(point).norm() * bracket1(r).powf(s) * r;
        }
    }
    total
}

/// `int_{R^2} |u_hat(xi)| <xi>^s dxi` in polar coordinates.
pub fn barron_norm_radial(u: &GaussianMixture, s: f64) -> Result<f64> {
    if u.is_trivial() {
        return Ok(0.0);
    }
    let quad = PolarQuadrature::DEFAULT;
    let coarse = barron_norm_radial_raw(u, s, quad);
    let fine = barron_norm_radial_raw(u, s, quad.doubled());
    check_refined(coarse, fine)
}

#[derive(Debug, Clone)]
pub struct IdentityRow {
    pub member_id: usize,
    pub barron_norm: f64,
    pub sinogram_norm: f64,
    pub ratio: f64,
    /// `sinogram_norm(u, 0, 1) <= sinogram_norm(u, 0, 0)` for this member.
    pub t_monotone: bool,
}

#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub rows: Vec<IdentityRow>,
    pub mean_ratio: f64,
    /// Coefficient of variation of the ratios.
    pub cv: f64,
    pub pass: bool,
    pub skipped: usize,
}

impl IdentityReport {
    pub fn to_kv(&self) -> Vec<(String, String)> {
        vec![
            ("members".into(), self.rows.len().to_string()),
            ("skipped".into(), self.skipped.to_string()),
            ("mean_ratio".into(), crate::report::fmt_float(self.mean_ratio)),
            ("cv".into(), crate::report::fmt_float(self.cv)),
            ("t_monotone".into(), self.rows.iter().all(|r| r.t_monotone).to_string()),
            ("status".into(), if self.pass { "PASS".into() } else { "FAIL".into() }),
        ]
    }
}

/// Verify `||u||_{B^{-1}}` is proportional to the `(s_sino, t) = (0, 1)`
/// sinogram norm across a family: the ratios must agree to within a 1%
/// coefficient of variation, and the `t`-weight must be contractive.
pub fn identity_check(family: &[GaussianMixture]) -> Result<IdentityReport> {
    if family.is_empty() {
        return Err(CoreError::InvalidParam("identity_check requires a nonempty family".into()));
    }
    let quad = PolarQuadrature::DEFAULT;
    let mut rows = Vec::new();
    let mut skipped = 0;
    for (member_id, u) in family.iter().enumerate() {
        let barron = barron_norm_radial(u, -1.0)?;
        if barron == 0.0 {
            skipped += 1;
            continue;
        }
        let sino = sinogram_norm(u, 0.0, 1.0, quad)?;
        let unweighted = sinogram_norm(u, 0.0, 0.0, quad)?;
        rows.push(IdentityRow {
            member_id,
            barron_norm: barron,
            sinogram_norm: sino,
            ratio: sino / barron,
            t_monotone: sino <= unweighted * (1.0 + 1e-12),
        });
    }
    if rows.is_empty() {
        return Err(CoreError::ZeroFunction);
    }
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r.ratio).sum::<f64>() / n;
    let var = rows.iter().map(|r| (r.ratio - mean).powi(2)).sum::<f64>() / n;
    let cv = var.sqrt() / mean;
    let pass = cv < 0.01 && rows.iter().all(|r| r.t_monotone);
    Ok(IdentityReport { rows, mean_ratio: mean, cv, pass, skipped })
}

/// The six-member family used by the identity experiment: centered,
/// shifted, narrow, wide, a two-width mixture, and a three-bump
/// mixture with signed amplitudes.
pub fn standard_family() -> Vec<GaussianMixture> {
    let term = |amplitude, center, sigma| GaussianTerm { amplitude, center, sigma };
    vec![
        GaussianMixture::new(vec![term(1.0, [0.0, 0.0], 1.0)]).unwrap(),
        GaussianMixture::new(vec![term(1.0, [0.7, -0.3], 1.0)]).unwrap(),
        GaussianMixture::new(vec![term(2.0, [0.0, 0.0], 0.5)]).unwrap(),
        GaussianMixture::new(vec![term(0.5, [0.0, 0.0], 2.0)]).unwrap(),
        GaussianMixture::new(vec![term(1.0, [0.0, 0.0], 0.8), term(0.6, [1.0, 0.5], 1.4)])
            .unwrap(),
        GaussianMixture::new(vec![
            term(1.0, [-1.0, 0.0], 0.9),
            term(-0.4, [0.5, 0.5], 1.1),
            term(0.7, [0.0, -1.2], 0.7),
        ])
        .unwrap(),
    ]
}
