//! Outer functions, power series and boundary values in the Hardy space.
//!
//! For a density `w` with `log w` integrable, the outer function is
//! `h(z) = exp(a_0/2 + Σ_{j≥1} a_j z^j)` with `a_j = ∫ e^{-ijγ} log w dλ`,
//! so that `|h|² = w` on the circle.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{fft_forward, fft_inverse, mesh_moments};
use crate::measure::{GridFunction, SpectralMeasure};

/// Roots closer than this to the unit circle are reported as ambiguous.
pub const TAU_ROOT: f64 = 1e-9;
/// Ratio of `∫ log⁻ w` between two resolutions above which the integral is
/// treated as divergent.
pub const DIVERGENCE_RATIO: f64 = 1.5;
/// Log-values below this are clipped before transforms.
const LOG_FLOOR: f64 = -708.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    pub coeffs: Vec<Complex64>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Horner evaluation at `z`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Values on the circle at `γ_k = (k + ½)·2π/n`, via one FFT.
    pub fn boundary_values(&self, n: usize) -> Vec<Complex64> {
        let h = TAU / n as f64;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (j, &c) in self.coeffs.iter().enumerate() {
            buf[j % n] += c * Complex64::from_polar(1.0, (j as f64 * h * 0.5).rem_euclid(TAU));
        }
        fft_inverse(&mut buf);
        buf
    }

    /// `Σ |c_j|²`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Decides whether `log w` is integrable.
///
/// Analytic hints win. Otherwise a density vanishing on a set of positive
/// measure is degenerate, and `∫ log⁻ w` is compared between two resolutions.
pub fn log_integrable(mu: &SpectralMeasure) -> bool {
    if let Some(b) = mu.hints().log_integrable {
        return b;
    }
    if mu.log_density().contains(&f64::NEG_INFINITY) {
        return false;
    }
    let log_minus = |m: &SpectralMeasure| m.haar_integral(|i| (-m.log_density()[i]).max(0.0));
    match mu.refinement_pair() {
        Ok((coarse, fine)) => {
            let (a, b) = (log_minus(&coarse), log_minus(&fine));
            if !b.is_finite() || fine.log_density().contains(&f64::NEG_INFINITY) {
                return false;
            }
            !(a > 0.0 && b / a > DIVERGENCE_RATIO)
        }
        Err(_) => log_minus(mu).is_finite(),
    }
}

fn clipped(l: f64) -> f64 {
    l.max(LOG_FLOOR)
}

/// Coefficients `a_0..a_{m-1}` of the log-density.
pub fn log_density_fourier(mu: &SpectralMeasure, m: usize) -> Result<PowerSeries> {
    if m == 0 {
        return Err(Error::InvalidSeries("series order must be positive".into()));
    }
    if !log_integrable(mu) {
        return Err(Error::SzegoDegenerate);
    }
    let logs: Vec<f64> = mu.log_density().iter().map(|&l| clipped(l)).collect();
    Ok(PowerSeries::new(mesh_moments(mu.mesh(), &logs, m - 1)))
}

/// `b = exp` of the series `a_0/2 + Σ_{j≥1} a_j z^j`.
pub fn series_exp(a: &PowerSeries) -> PowerSeries {
    let m = a.len();
    if m == 0 {
        return PowerSeries::new(Vec::new());
    }
    let mut b = Vec::with_capacity(m);
    b.push((a.coeffs[0] * 0.5).exp());
    for n in 1..m {
        let mut s = Complex64::new(0.0, 0.0);
        for k in 1..=n {
            s += a.coeffs[k] * b[n - k] * k as f64;
        }
        b.push(s / n as f64);
    }
    PowerSeries::new(b)
}

/// Inverse of [`series_exp`]; needs a real positive constant term.
pub fn series_log(b: &PowerSeries) -> Result<PowerSeries> {
    let m = b.len();
    if m == 0 {
        return Err(Error::InvalidSeries("empty series".into()));
    }
    let b0 = b.coeffs[0];
    if !(b0.re > 0.0) || b0.im.abs() > 1e-12 * b0.re {
        return Err(Error::InvalidSeries(format!("constant term {b0} is not positive")));
    }
    let mut a = Vec::with_capacity(m);
    a.push(Complex64::new(2.0 * b0.re.ln(), 0.0));
    for n in 1..m {
        let mut s = b.coeffs[n] * n as f64;
        for k in 1..n {
            s -= a[k] * b.coeffs[n - k] * k as f64;
        }
        a.push(s / (b0 * n as f64));
    }
    Ok(PowerSeries::new(a))
}

/// Taylor coefficients of the outer function up to order `m`.
pub fn outer_coefficients(mu: &SpectralMeasure, m: usize) -> Result<PowerSeries> {
    Ok(series_exp(&log_density_fourier(mu, m)?))
}

/// `log h` on the circle, `½ log w + i·C[½ log w]`, at the nodes of the
/// measure's mesh.
pub fn outer_log_boundary(mu: &SpectralMeasure) -> Result<Vec<Complex64>> {
    if !log_integrable(mu) {
        return Err(Error::SzegoDegenerate);
    }
    let mesh = mu.mesh();
    let n = mesh.grid_size();
    let h = mesh.cell_width();
    let logs: Vec<f64> = mu.log_density().iter().map(|&l| clipped(l)).collect();
    let cells = mesh.cell_means(&logs);
    let mut buf: Vec<Complex64> = cells.iter().map(|&l| Complex64::new(l, 0.0)).collect();
    fft_forward(&mut buf);
    let inv = 1.0 / n as f64;
    buf[0] *= 0.5 * inv;
    for (j, v) in buf.iter_mut().enumerate().skip(1) {
        if j < n / 2 {
            *v *= inv;
        } else if j == n / 2 {
            *v *= 0.5 * inv;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    fft_inverse(&mut buf);
    let mut out = Vec::with_capacity(mesh.len());
    for k in 0..n {
        let r = mesh.cell_nodes(k);
        if r.len() == 1 {
            out.push(buf[k]);
            continue;
        }
        for i in r {
            let t = mesh.mid(i) / h - 0.5;
            let k0 = t.floor();
            let frac = t - k0;
            let a = buf[(k0 as i64).rem_euclid(n as i64) as usize].im;
            let b = buf[(k0 as i64 + 1).rem_euclid(n as i64) as usize].im;
            out.push(Complex64::new(0.5 * logs[i], a + frac * (b - a)));
        }
    }
    Ok(out)
}

/// Boundary values `h(e^{iγ})` of the outer function, `|h|² = w`.
pub fn outer_boundary(mu: &SpectralMeasure) -> Result<GridFunction> {
    let f = outer_log_boundary(mu)?;
    let vals = f
        .iter()
        .zip(mu.density())
        .map(|(z, &w)| if w == 0.0 { Complex64::new(0.0, 0.0) } else { z.exp() })
        .collect();
    GridFunction::new(mu.mesh().clone(), vals)
}

/// `Π^{(m)}`: the first `m` coefficients.
pub fn truncate(b: &PowerSeries, m: usize) -> PowerSeries {
    PowerSeries::new(b.coeffs.iter().take(m).cloned().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootReport {
    /// Roots with `|z| < 1 − τ_root`.
    pub inside: usize,
    /// `min | |z| − 1 |` over all roots, `∞` without roots.
    pub boundary_gap: f64,
    pub roots: Vec<Complex64>,
}

impl RootReport {
    pub fn root_free(&self) -> bool {
        self.inside == 0 && self.boundary_gap > TAU_ROOT
    }
}

/// Roots of `Σ_{j<m} b_j z^j` from companion-matrix eigenvalues.
pub fn roots_in_disc(b: &PowerSeries, m: usize) -> RootReport {
    let c: Vec<Complex64> = b.coeffs.iter().take(m).cloned().collect();
    let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let deg = c.iter().rposition(|x| x.norm() > 1e-14 * scale).unwrap_or(0);
    if deg == 0 {
        return RootReport {
            inside: 0,
            boundary_gap: f64::INFINITY,
            roots: Vec::new(),
        };
    }
    let lead = c[deg];
    let mut comp = DMatrix::<Complex64>::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -c[deg - 1 - j] / lead;
    }
    for i in 1..deg {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    let roots: Vec<Complex64> = comp
        .schur()
        .eigenvalues()
        .map(|v| v.iter().cloned().collect())
        .unwrap_or_default();
    let inside = roots.iter().filter(|r| r.norm() < 1.0 - TAU_ROOT).count();
    let boundary_gap = roots.iter().map(|r| (r.norm() - 1.0).abs()).fold(f64::INFINITY, f64::min);
    RootReport {
        inside,
        boundary_gap,
        roots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cd() -> (f64, f64) {
        let s3 = 3f64.sqrt();
        (((2.0 + s3) / 2.0).sqrt(), ((2.0 - s3) / 2.0).sqrt())
    }

    #[test]
    fn outer_coefficients_of_two_plus_cos() {
        // w = |c + d e^{iγ}|² with c² + d² = 2, 2cd = 1
        let (c, d) = cd();
        let mu = SpectralMeasure::from_fn(1 << 12, |g| 2.0 + g.cos()).unwrap();
        let a = log_density_fourier(&mu, 64).unwrap();
        assert!((a.coeffs[0].re - 2.0 * c.ln()).abs() < 1e-12);
        assert!((a.coeffs[1].re - d / c).abs() < 1e-12);
        let b = series_exp(&a);
        assert!((b.coeffs[0].re - c).abs() < 1e-12);
        assert!((b.coeffs[1].re - d).abs() < 1e-12);
        assert!(b.coeffs[2].norm() < 1e-12);
    }

    #[test]
    fn series_exp_of_single_term() {
        let (c, d) = cd();
        let a = PowerSeries::from_real(&[2.0 * c.ln(), d / c, 0.0, 0.0]);
        let b = series_exp(&a);
        assert!((b.coeffs[0].re - c).abs() < 1e-15);
        assert!((b.coeffs[1].re - d).abs() < 1e-15);
        // c·exp((d/c) z): third coefficient d²/(2c)
        assert!((b.coeffs[2].re - d * d / (2.0 * c)).abs() < 1e-15);
    }

    #[test]
    fn series_log_rejects_nonpositive_constant() {
        assert!(series_log(&PowerSeries::from_real(&[0.0, 1.0])).is_err());
        assert!(series_log(&PowerSeries::from_real(&[-1.0, 1.0])).is_err());
    }

    #[test]
    fn outer_boundary_modulus_matches_density() {
        let mu = SpectralMeasure::from_fn(1 << 10, |g| 2.0 + g.cos()).unwrap();
        let h = outer_boundary(&mu).unwrap();
        let (c, d) = cd();
        for (i, v) in h.values().iter().enumerate() {
            let g = mu.mesh().mid(i);
            let exact = Complex64::new(c, 0.0) + Complex64::from_polar(d, g);
            assert!((v - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn degenerate_log_is_detected() {
        let mu = SpectralMeasure::from_samples(
            (0..256).map(|k| if k < 10 { 0.0 } else { 1.0 }).collect(),
            vec![],
        )
        .unwrap();
        assert!(!log_integrable(&mu));
        assert_eq!(outer_boundary(&mu).unwrap_err(), Error::SzegoDegenerate);
    }

    #[test]
    fn roots_of_linear_factor() {
        let r = roots_in_disc(&PowerSeries::from_real(&[1.0, 0.5]), 2);
        assert_eq!(r.inside, 0);
        assert!((r.roots[0] + 2.0).norm() < 1e-12);
        let r = roots_in_disc(&PowerSeries::from_real(&[0.5, 1.0]), 2);
        assert_eq!(r.inside, 1);
        let r = roots_in_disc(&PowerSeries::from_real(&[1.0, 1.0]), 2);
        assert!(!r.root_free());
        assert_eq!(roots_in_disc(&PowerSeries::from_real(&[3.0]), 1).inside, 0);
    }

    #[test]
    fn boundary_values_match_horner() {
        let s = PowerSeries::from_real(&[1.0, -0.3, 0.2]);
        let v = s.boundary_values(16);
        for (k, x) in v.iter().enumerate() {
            let g = (k as f64 + 0.5) * TAU / 16.0;
            assert!((x - s.eval(Complex64::from_polar(1.0, g))).norm() < 1e-13);
        }
    }
}
