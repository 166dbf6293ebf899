//! Metrics for the four convergence modes of spectral measures: norm,
//! weak, weak* and in measure.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::ser_num;
use crate::measure::{check_abs_continuity, tv_distance, SpectralMeasure, ATOM_TOL};

/// Finest dyadic level of the default weak-convergence test sets.
pub const DYADIC_LEVELS: u32 = 10;
pub const DEFAULT_DEGREE: usize = 64;
/// A metric sequence "converges" when its last value is below this.
pub const TREND_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceMetrics {
    #[serde(serialize_with = "ser_num")]
    pub tv: f64,
    #[serde(serialize_with = "ser_num")]
    pub in_measure_deviation: f64,
    #[serde(serialize_with = "ser_num")]
    pub weak_gap: f64,
    #[serde(serialize_with = "ser_num")]
    pub weakstar_gap: f64,
}

/// `μ0 + λ + (atoms of μn)`, which dominates both measures.
pub fn default_reference(mu0: &SpectralMeasure, mun: &SpectralMeasure) -> Result<SpectralMeasure> {
    let nu = mu0.plus(&SpectralMeasure::haar(mu0.grid_size())?)?;
    let mut atoms = nu.atoms().to_vec();
    for a in mun.atoms() {
        if !atoms.iter().any(|b| (b.location - a.location).abs() < ATOM_TOL) {
            atoms.push(crate::measure::Atom::new(a.location, a.mass));
        }
    }
    nu.with_atoms(atoms)
}

/// `ν({|dμ0/dν − dμn/dν| > ε})`; `ν` defaults to [`default_reference`].
pub fn deviation_measure(
    mu0: &SpectralMeasure,
    mun: &SpectralMeasure,
    nu: Option<&SpectralMeasure>,
    eps: f64,
) -> Result<f64> {
    match nu {
        Some(nu) => deviation(Some(mu0), mun, nu, eps),
        None => deviation(Some(mu0), mun, &default_reference(mu0, mun)?, eps),
    }
}

/// In-measure distance from `μn` to the zero measure, `ν({dμn/dν > ε})`.
/// The zero measure is not a [`SpectralMeasure`], so it gets its own entry.
pub fn deviation_from_zero(mun: &SpectralMeasure, nu: &SpectralMeasure, eps: f64) -> Result<f64> {
    deviation(None, mun, nu, eps)
}

fn deviation(mu0: Option<&SpectralMeasure>, mun: &SpectralMeasure, nu: &SpectralMeasure, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Input("ε must be positive".into()));
    }
    if let Some(m) = mu0 {
        check_abs_continuity(m, nu)?;
    }
    check_abs_continuity(mun, nu)?;
    let mut mesh = mun.mesh().union(nu.mesh())?;
    if let Some(m) = mu0 {
        mesh = mesh.union(m.mesh())?;
    }
    let (a, la) = match mu0 {
        Some(m) => m.values_on(&mesh),
        None => (vec![0.0; mesh.len()], vec![f64::NEG_INFINITY; mesh.len()]),
    };
    let (b, lb) = mun.values_on(&mesh);
    let (c, lc) = nu.values_on(&mesh);
    let ratio = |x: f64, lx: f64, y: f64, ly: f64| {
        if x == 0.0 || y == 0.0 {
            0.0
        } else if x.is_finite() && y.is_finite() {
            x / y
        } else {
            (lx - ly).exp()
        }
    };
    let mut s = 0.0;
    for i in 0..mesh.len() {
        if c[i] == 0.0 {
            continue;
        }
        let d = ratio(a[i], la[i], c[i], lc[i]) - ratio(b[i], lb[i], c[i], lc[i]);
        if d.abs() > eps {
            s += mesh.weight(i) * c[i];
        }
    }
    let mass_at = |m: &SpectralMeasure, x: f64| {
        m.atoms()
            .iter()
            .filter(|a| (a.location - x).abs() < ATOM_TOL)
            .map(|a| a.mass)
            .sum::<f64>()
    };
    for y in nu.atoms() {
        let m0 = mu0.map_or(0.0, |m| mass_at(m, y.location));
        if ((m0 - mass_at(mun, y.location)) / y.mass).abs() > eps {
            s += y.mass;
        }
    }
    Ok(s)
}

/// Dyadic intervals `[k·2π/2^l, (k+1)·2π/2^l)` for `l = 0..=levels`.
pub fn dyadic_intervals(levels: u32) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for l in 0..=levels {
        let m = 1usize << l;
        let w = TAU / m as f64;
        out.extend((0..m).map(|k| (k as f64 * w, if k + 1 == m { TAU } else { (k + 1) as f64 * w })));
    }
    out
}

/// `max_B |μn(B) − μ0(B)|` over `intervals`, defaulting to all dyadic
/// intervals of length at least `2π/2^10`.
pub fn weak_gap(mu0: &SpectralMeasure, mun: &SpectralMeasure, intervals: Option<&[(f64, f64)]>) -> f64 {
    match intervals {
        Some(iv) => iv
            .iter()
            .map(|&(a, b)| (mun.mass_in(a, b) - mu0.mass_in(a, b)).abs())
            .fold(0.0, f64::max),
        None => {
            // finest level first, coarser levels by pairwise sums
            let m = 1usize << DYADIC_LEVELS;
            let w = TAU / m as f64;
            let mut diff: Vec<f64> = (0..m)
                .map(|k| {
                    let (a, b) = (k as f64 * w, if k + 1 == m { TAU } else { (k + 1) as f64 * w });
                    mun.mass_in(a, b) - mu0.mass_in(a, b)
                })
                .collect();
            let mut gap = diff.iter().map(|d| d.abs()).fold(0.0, f64::max);
            while diff.len() > 1 {
                diff = diff.chunks(2).map(|c| c[0] + c[1]).collect();
                gap = diff.iter().map(|d| d.abs()).fold(gap, f64::max);
            }
            gap
        }
    }
}

/// `max_{|x| ≤ X} |μ̂n(x) − μ̂0(x)|`.
pub fn weakstar_gap(mu0: &SpectralMeasure, mun: &SpectralMeasure, degree: usize) -> f64 {
    let a = mu0.fourier_coefficients(degree);
    let b = mun.fourier_coefficients(degree);
    a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn modes_report(
    mu0: &SpectralMeasure,
    mun: &SpectralMeasure,
    nu: Option<&SpectralMeasure>,
    eps: f64,
    degree: usize,
) -> Result<ConvergenceMetrics> {
    Ok(ConvergenceMetrics {
        tv: tv_distance(mu0, mun)?,
        in_measure_deviation: deviation_measure(mu0, mun, nu, eps)?,
        weak_gap: weak_gap(mu0, mun, None),
        weakstar_gap: weakstar_gap(mu0, mun, degree),
    })
}

/// Trend rule for a metric along increasing `n`: the last value is below
/// [`TREND_TOL`] and no step grows by more than a factor of two.
pub fn converges(values: &[f64]) -> bool {
    match values.last() {
        Some(&last) if last < TREND_TOL => values.windows(2).all(|w| w[1] <= 2.0 * w[0] + f64::EPSILON),
        _ => false,
    }
}
