//! m-step prediction: approximating `1` by characters `e_x`, `x ≥ m`.
//!
//! With `h = Σ b_j z^j` the outer function of `w`, the distance is
//! `Σ_{j<m} |b_j|²` for every `p`, and the projection is
//! `φ = 1 − (Π^{(m)}(h)/h)^{2/p}`, where `Π^{(m)}` keeps the first `m`
//! Taylor coefficients. The complex power is taken along the branch that is
//! real and positive at `z = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hardy::{
    log_integrable, outer_coefficients, outer_log_boundary, roots_in_disc, truncate, PowerSeries,
    RootReport, DIVERGENCE_RATIO,
};
use crate::interpolation::check_p;
use crate::measure::{check_abs_continuity, GridFunction, SpectralMeasure};

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Input("number of steps m must be at least 1".into()));
    }
    Ok(())
}

/// `exp ∫ log w dλ`, zero when `log w` is not integrable.
pub fn szego_distance(mu: &SpectralMeasure) -> Result<f64> {
    if !log_integrable(mu) {
        return Ok(0.0);
    }
    let l = mu.log_density();
    Ok(mu.haar_integral(|i| l[i].max(-708.0)).exp())
}

/// `d_p(μ; S_m) = Σ_{j<m} |b_j|²`.
pub fn mstep_distance(mu: &SpectralMeasure, m: usize) -> Result<f64> {
    check_m(m)?;
    if !log_integrable(mu) {
        return Ok(0.0);
    }
    Ok(truncate(&outer_coefficients(mu, m)?, m).energy())
}

#[derive(Debug, Clone)]
pub struct MstepProjection {
    pub phi: GridFunction,
    /// `log w` not integrable: distance zero, `φ ≡ 1`.
    pub degenerate: bool,
    /// Taylor coefficients `b_0..b_{m-1}`.
    pub truncated: Option<PowerSeries>,
    pub roots: Option<RootReport>,
}

fn integer_power(p: f64) -> Option<i32> {
    if p == 1.0 {
        Some(2)
    } else if p == 2.0 {
        Some(1)
    } else {
        None
    }
}

/// `log Π(z)` for `|z| ≤ 1` when `Π` has no roots in the closed disc.
fn log_poly(b0: f64, roots: &[Complex64], z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    roots.iter().fold(Complex64::new(b0.ln(), 0.0), |acc, r| acc + (one - z / r).ln())
}

/// Metric projection `φ_p(μ; S_m)`.
pub fn mstep_projection(mu: &SpectralMeasure, m: usize, p: f64) -> Result<MstepProjection> {
    check_m(m)?;
    check_p(p)?;
    let one = Complex64::new(1.0, 0.0);
    if !log_integrable(mu) {
        return Ok(MstepProjection {
            phi: GridFunction::constant(mu.mesh().clone(), one),
            degenerate: true,
            truncated: None,
            roots: None,
        });
    }
    let pi = truncate(&outer_coefficients(mu, m)?, m);
    let f = outer_log_boundary(mu)?;
    let mesh = mu.mesh().clone();
    let report = roots_in_disc(&pi, m);
    let vals: Vec<Complex64> = match integer_power(p) {
        Some(k) => (0..mesh.len())
            .map(|i| {
                let z = Complex64::from_polar(1.0, mesh.mid(i));
                one - pi.eval(z).powi(k) * (-f[i] * k as f64).exp()
            })
            .collect(),
        None => {
            if !report.root_free() {
                return Err(Error::Condition518Violated(p));
            }
            let b0 = pi.coeffs[0].re;
            (0..mesh.len())
                .map(|i| {
                    let z = Complex64::from_polar(1.0, mesh.mid(i));
                    one - ((log_poly(b0, &report.roots, z) - f[i]) * (2.0 / p)).exp()
                })
                .collect()
        }
    };
    Ok(MstepProjection {
        phi: GridFunction::new(mesh, vals)?,
        degenerate: false,
        truncated: Some(pi),
        roots: Some(report),
    })
}

fn cross_integral(pi: &PowerSeries, nu: &SpectralMeasure, mu: &SpectralMeasure) -> Result<f64> {
    let mesh = nu.mesh().union(mu.mesh())?;
    let (wm, lm) = mu.values_on(&mesh);
    let (_, ln) = nu.values_on(&mesh);
    let mut s = 0.0;
    for i in 0..mesh.len() {
        if wm[i] == 0.0 {
            continue;
        }
        let z = Complex64::from_polar(1.0, mesh.mid(i));
        s += mesh.weight(i) * pi.eval(z).norm_sqr() * (lm[i] - ln[i]).exp();
    }
    Ok(s)
}

/// `d_p(ν, μ; S_m) = ∫ |Π^{(m)}(h_ν)|² (w/w_ν) dλ`; needs `μ ≪ ν`.
pub fn mstep_cross_error(nu: &SpectralMeasure, mu: &SpectralMeasure, m: usize, p: f64) -> Result<f64> {
    check_m(m)?;
    check_p(p)?;
    check_abs_continuity(mu, nu)?;
    if !log_integrable(nu) {
        return Ok(0.0);
    }
    let pi = truncate(&outer_coefficients(nu, m)?, m);
    if integer_power(p).is_none() && !roots_in_disc(&pi, m).root_free() {
        return Err(Error::Condition518Violated(p));
    }
    let val = cross_integral(&pi, nu, mu)?;
    if let (Some(Ok(nf)), Some(Ok(mf))) = (nu.resampled(2 * nu.grid_size()), mu.resampled(2 * mu.grid_size())) {
        let fine = cross_integral(&pi, &nf, &mf)?;
        if !fine.is_finite() || fine / val > DIVERGENCE_RATIO {
            return Ok(f64::INFINITY);
        }
    }
    Ok(val)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EnergyBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `∫ |Π^{(m)}(g)|² |h|²/|g|² dλ` with `Σ_{j<m} |(z^k h)^_j|²`,
/// where `h` is given by its outer part and `k = inner_shift`.
pub fn energy_bound_check(
    h_outer: &PowerSeries,
    g: &PowerSeries,
    inner_shift: usize,
    m: usize,
    grid_size: usize,
) -> Result<EnergyBound> {
    check_m(m)?;
    crate::mesh::check_grid_size(grid_size)?;
    let hv = h_outer.boundary_values(grid_size);
    let gv = g.boundary_values(grid_size);
    let pv = truncate(g, m).boundary_values(grid_size);
    let mut lhs = 0.0;
    for k in 0..grid_size {
        let hg = hv[k].norm_sqr();
        if hg == 0.0 {
            continue;
        }
        let gg = gv[k].norm_sqr();
        lhs += pv[k].norm_sqr() * hg / gg;
    }
    lhs /= grid_size as f64;
    let rhs: f64 = (inner_shift..m)
        .filter_map(|j| h_outer.coeffs.get(j - inner_shift))
        .map(|c| c.norm_sqr())
        .sum();
    Ok(EnergyBound {
        lhs,
        rhs,
        holds: lhs >= rhs - 1e-10 * rhs.max(1.0),
    })
}

/// `∫ log(w_0 / min(w_0, w_n)) dλ`; `∞` when `w_n` vanishes where `w_0` does not.
pub fn log_ratio_diagnostic(mu0: &SpectralMeasure, mun: &SpectralMeasure) -> Result<f64> {
    let mesh = mu0.mesh().union(mun.mesh())?;
    let (w0, l0) = mu0.values_on(&mesh);
    let (_, ln) = mun.values_on(&mesh);
    let mut s = 0.0;
    for i in 0..mesh.len() {
        if w0[i] == 0.0 {
            continue;
        }
        if ln[i] == f64::NEG_INFINITY {
            return Ok(f64::INFINITY);
        }
        s += mesh.weight(i) * (l0[i] - ln[i]).max(0.0);
    }
    Ok(s)
}
