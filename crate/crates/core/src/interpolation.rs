//! Interpolation of a missing value: approximating `1` by characters
//! `e_x`, `x ≠ 0`, in `L^p(μ)`.
//!
//! For `p > 1` the distance is `(∫ w^{-q/p} dλ)^{-p/q}` with `q` the
//! conjugate exponent, and the projection is
//! `φ = 1 − (∫ w^{-q/p} dλ)^{-1} w^{-q/p}`. The singular part of `μ` is
//! approximated exactly, so it only enters through `w`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hardy::DIVERGENCE_RATIO;
use crate::measure::{check_abs_continuity, GridFunction, SpectralMeasure};

/// Relative threshold for "essential infimum is zero".
pub const TAU_ESSINF: f64 = 1e-12;
/// Relative band above the minimum that counts as attaining it.
pub const TAU_B: f64 = 1e-6;
/// Minimum number of grid cells the minimizing set must cover.
pub const MIN_B_CELLS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum L1Classification {
    ProjectionIsOne,
    InfinitelyMany,
    NoneExists,
}

#[derive(Debug, Clone)]
pub struct InterpProjection {
    pub phi: GridFunction,
    /// `∫ w^{-q/p} dλ` (`∞` when degenerate, `p > 1` only).
    pub normalizer: f64,
    /// The distance is zero and `φ ≡ 1`.
    pub degenerate: bool,
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::UnsupportedExponent(p));
    }
    Ok(())
}

fn inverse_power_integral(mu: &SpectralMeasure, r: f64) -> f64 {
    let l = mu.log_density();
    mu.haar_integral(|i| (-r * l[i]).exp())
}

/// Whether `w^{-r}` is integrable, for `r > 0`.
pub fn inverse_power_integrable(mu: &SpectralMeasure, r: f64) -> bool {
    if let Some(b) = mu.hints().inverse_power_bound {
        return r < b;
    }
    if mu.density().contains(&0.0) {
        return false;
    }
    match mu.refinement_pair() {
        Ok((coarse, fine)) => {
            let (a, b) = (inverse_power_integral(&coarse, r), inverse_power_integral(&fine, r));
            b.is_finite() && a.is_finite() && b / a <= DIVERGENCE_RATIO
        }
        Err(_) => inverse_power_integral(mu, r).is_finite(),
    }
}

fn ess_inf(mu: &SpectralMeasure) -> f64 {
    mu.density().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// `d_p(μ)` for interpolation of one missing value.
pub fn interp_distance(mu: &SpectralMeasure, p: f64) -> Result<f64> {
    check_p(p)?;
    if p < 1.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(ess_inf(mu));
    }
    let r = 1.0 / (p - 1.0);
    if !inverse_power_integrable(mu, r) {
        return Ok(0.0);
    }
    Ok(inverse_power_integral(mu, r).powf(-(p - 1.0)))
}

fn minimizing_set(mu: &SpectralMeasure, band: f64) -> f64 {
    let w = mu.density();
    let min = ess_inf(mu);
    let max = mu.max_density();
    let cut = min + band * (max - min);
    mu.haar_integral(|i| if w[i] <= cut { 1.0 } else { 0.0 })
}

/// Existence and uniqueness of the `L¹` projection.
///
/// The minimizing set must cover at least [`MIN_B_CELLS`] cells and must not
/// shrink when the band is narrowed by four orders of magnitude; a smooth
/// minimum shrinks like the square root of the band.
pub fn l1_classification(mu: &SpectralMeasure) -> L1Classification {
    let max = mu.max_density();
    if ess_inf(mu) <= TAU_ESSINF * max {
        return L1Classification::ProjectionIsOne;
    }
    let wide = minimizing_set(mu, TAU_B);
    let narrow = minimizing_set(mu, TAU_B * 1e-4);
    if wide >= MIN_B_CELLS / mu.grid_size() as f64 && narrow >= 0.5 * wide {
        L1Classification::InfinitelyMany
    } else {
        L1Classification::NoneExists
    }
}

/// Metric projection `φ_p(μ)`.
pub fn interp_projection(mu: &SpectralMeasure, p: f64) -> Result<InterpProjection> {
    check_p(p)?;
    let mesh = mu.mesh().clone();
    let one = Complex64::new(1.0, 0.0);
    if p < 1.0 {
        return Ok(InterpProjection {
            phi: GridFunction::constant(mesh, one),
            normalizer: f64::INFINITY,
            degenerate: true,
        });
    }
    if p == 1.0 {
        return match l1_classification(mu) {
            L1Classification::ProjectionIsOne => Ok(InterpProjection {
                phi: GridFunction::constant(mesh, one),
                normalizer: f64::INFINITY,
                degenerate: true,
            }),
            L1Classification::InfinitelyMany => {
                // one of the minimizers: error concentrated uniformly on the
                // set where w attains its infimum
                let w = mu.density();
                let min = ess_inf(mu);
                let cut = min + TAU_B * (mu.max_density() - min);
                let lb = minimizing_set(mu, TAU_B);
                let vals = w
                    .iter()
                    .map(|&x| if x <= cut { one - 1.0 / lb } else { one })
                    .collect();
                Ok(InterpProjection {
                    phi: GridFunction::new(mesh, vals)?,
                    normalizer: lb,
                    degenerate: false,
                })
            }
            L1Classification::NoneExists => Err(Error::ProjectionDoesNotExist(
                "essential infimum of the density is not attained on a set of positive measure".into(),
            )),
        };
    }
    let r = 1.0 / (p - 1.0);
    if !inverse_power_integrable(mu, r) {
        return Ok(InterpProjection {
            phi: GridFunction::constant(mesh, one),
            normalizer: f64::INFINITY,
            degenerate: true,
        });
    }
    let j = inverse_power_integral(mu, r);
    let vals = mu
        .log_density()
        .iter()
        .map(|&l| Complex64::new(1.0 - (-r * l).exp() / j, 0.0))
        .collect();
    Ok(InterpProjection {
        phi: GridFunction::new(mesh, vals)?,
        normalizer: j,
        degenerate: false,
    })
}

fn cross_integral(nu: &SpectralMeasure, mu: &SpectralMeasure, q: f64) -> Result<f64> {
    let mesh = nu.mesh().union(mu.mesh())?;
    let (wm, lm) = mu.values_on(&mesh);
    let (_, ln) = nu.values_on(&mesh);
    Ok((0..mesh.len())
        .map(|i| if wm[i] == 0.0 { 0.0 } else { mesh.weight(i) * (lm[i] - q * ln[i]).exp() })
        .sum())
}

/// `d_p(ν, μ) = ∫ |1 − φ_p(ν)|^p dμ`; needs `μ ≪ ν`.
///
/// For `p > 1` this is `(∫ v^{-q/p} dλ)^{-p} ∫ v^{-q} w dλ`. A value that
/// keeps growing under grid refinement is reported as `∞`.
pub fn interp_cross_error(nu: &SpectralMeasure, mu: &SpectralMeasure, p: f64) -> Result<f64> {
    check_p(p)?;
    check_abs_continuity(mu, nu)?;
    if p <= 1.0 {
        let proj = interp_projection(nu, p)?;
        let mesh = nu.mesh().union(mu.mesh())?;
        let (wm, _) = mu.values_on(&mesh);
        let phi = proj.phi.on_mesh(&mesh);
        return Ok((0..mesh.len())
            .map(|i| mesh.weight(i) * wm[i] * (Complex64::new(1.0, 0.0) - phi[i]).norm().powf(p))
            .sum());
    }
    let r = 1.0 / (p - 1.0);
    if !inverse_power_integrable(nu, r) {
        return Ok(0.0);
    }
    let q = p / (p - 1.0);
    let j = inverse_power_integral(nu, r);
    let val = j.powf(-p) * cross_integral(nu, mu, q)?;
    if let (Some(Ok(nf)), Some(Ok(mf))) = (nu.resampled(2 * nu.grid_size()), mu.resampled(2 * mu.grid_size())) {
        let fine = inverse_power_integral(&nf, r).powf(-p) * cross_integral(&nf, &mf, q)?;
        if !(fine.is_finite()) || fine / val > DIVERGENCE_RATIO {
            return Ok(f64::INFINITY);
        }
    }
    Ok(val)
}
