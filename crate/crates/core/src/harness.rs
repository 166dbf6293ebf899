//! Stability sweeps along a family `μ_n → μ_0` and their reports.
//!
//! For each `n` a row records the estimated error `d_p(μ_n)`, the error of
//! the estimated prediction under the true measure `d_p(μ_n, μ_0)`, the
//! estimated error of the true prediction `d_p(μ_0, μ_n)`, the drift
//! `∫ |φ_0 − φ_n|^p dμ_0` and the convergence metrics. Verdicts R1–R3 ask
//! whether the first two tend to `d_p(μ_0)` and the drift to zero.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::convergence::{modes_report, ConvergenceMetrics, DEFAULT_DEGREE};
use crate::error::{Error, Result};
use crate::families::{make_family, FamilyPair, FamilySpec};
use crate::finite_obs::{finite_cross_error, solve_lp, solve_p2};
use crate::fourier::{eval_trig, eval_trig_at};
use crate::interpolation::{interp_cross_error, interp_distance, interp_projection};
use crate::measure::{check_abs_continuity, GridFunction, SpectralMeasure};
use crate::msteps::{mstep_cross_error, mstep_distance, mstep_projection};
use crate::periodic::{
    atomic_periodic_cross_error, atomic_periodic_distance2, atomic_periodic_drift, periodic_cross_error,
    periodic_distance, periodic_drift,
};

/// Relative tolerance of the trend rule.
pub const TREND_RTOL: f64 = 5e-2;
/// Level used for the in-measure deviation in sweep rows.
pub const SWEEP_EPS: f64 = 1e-3;
/// Observation offset of the real-line family.
pub const LINE_OFFSET: f64 = 0.5;

/// JSON number with 12 significant digits; `∞` becomes `"inf"`.
pub fn ser_num<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_nan() {
        s.serialize_none()
    } else if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(round_sig(*v, 12))
    }
}

/// Like [`ser_num`]; `None` becomes `"N/A"`.
pub fn ser_opt_num<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_num(x, s),
        None => s.serialize_str("N/A"),
    }
}

pub fn round_sig(v: f64, digits: usize) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{:.*e}", digits - 1, v).parse().unwrap_or(v)
}

/// CSV cell with 6 significant digits.
pub fn csv_num(v: Option<f64>) -> String {
    match v {
        None => "N/A".into(),
        Some(x) if x.is_nan() => "nan".into(),
        Some(x) if x.is_infinite() => if x > 0.0 { "inf" } else { "-inf" }.into(),
        Some(x) => format!("{}", round_sig(x, 6)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Problem {
    Interp,
    Msteps { m: usize },
    Finite { freqs: Vec<i64> },
    Periodic { q: usize, x: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HoldsTrend,
    Fails,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdicts {
    pub r1: Verdict,
    pub r2: Verdict,
    pub r3: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRow {
    pub n: usize,
    /// `d_p(μ_n)`.
    #[serde(serialize_with = "ser_num")]
    pub distance: f64,
    /// `d_p(μ_n, μ_0) = ∫ |1 − φ_n|^p dμ_0`; needs `μ_0 ≪ μ_n`.
    #[serde(serialize_with = "ser_opt_num")]
    pub cross_n0: Option<f64>,
    /// `d_p(μ_0, μ_n) = ∫ |1 − φ_0|^p dμ_n`; needs `μ_n ≪ μ_0`.
    #[serde(serialize_with = "ser_opt_num")]
    pub cross_0n: Option<f64>,
    #[serde(serialize_with = "ser_opt_num")]
    pub drift: Option<f64>,
    pub metrics: Option<ConvergenceMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub family: String,
    pub problem: Problem,
    #[serde(serialize_with = "ser_num")]
    pub p: f64,
    pub grid_size: usize,
    /// `d_p(μ_0)`.
    #[serde(serialize_with = "ser_num")]
    pub target: f64,
    /// `‖μ_0‖`, the scale of the trend tolerance.
    #[serde(serialize_with = "ser_num")]
    pub limit_mass: f64,
    pub rows: Vec<StabilityRow>,
    pub verdicts: Verdicts,
}

impl StabilityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,distance,cross_n0,cross_0n,drift,tv,in_measure_deviation,weak_gap,weakstar_gap\n",
        );
        for r in &self.rows {
            let m = r.metrics;
            let cells = [
                Some(r.distance),
                r.cross_n0,
                r.cross_0n,
                r.drift,
                m.map(|m| m.tv),
                m.map(|m| m.in_measure_deviation),
                m.map(|m| m.weak_gap),
                m.map(|m| m.weakstar_gap),
            ];
            out.push_str(&r.n.to_string());
            for c in cells {
                out.push(',');
                out.push_str(&csv_num(c));
            }
            out.push('\n');
        }
        out
    }
}

/// Parses `start:end:step` or a comma separated list.
pub fn parse_n_list(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Input(format!("cannot parse n list '{s}'"));
    let list: Vec<usize> = if s.contains(':') {
        let parts: Vec<usize> = s.split(':').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        let (a, b, step) = match parts[..] {
            [a, b] => (a, b, 1),
            [a, b, c] => (a, b, c),
            _ => return Err(bad()),
        };
        if step == 0 || a > b {
            return Err(bad());
        }
        (a..=b).step_by(step).collect()
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if list.is_empty() || list.contains(&0) {
        return Err(bad());
    }
    Ok(list)
}

/// A metric projection as a function on the circle.
enum Prediction {
    Grid(GridFunction),
    Trig { freqs: Vec<i64>, coeffs: Vec<Complex64> },
}

fn prediction(mu: &SpectralMeasure, problem: &Problem, p: f64) -> Result<Prediction> {
    Ok(match problem {
        Problem::Interp => Prediction::Grid(interp_projection(mu, p)?.phi),
        Problem::Msteps { m } => Prediction::Grid(mstep_projection(mu, *m, p)?.phi),
        Problem::Finite { freqs } => Prediction::Trig {
            freqs: freqs.clone(),
            coeffs: if p == 2.0 { solve_p2(mu, freqs)?.coeffs } else { solve_lp(mu, freqs, p)?.coeffs },
        },
        Problem::Periodic { .. } => unreachable!("periodic drift is computed on the folded measures"),
    })
}

fn values_on(pred: &Prediction, mesh: &crate::mesh::Mesh) -> Vec<Complex64> {
    match pred {
        Prediction::Grid(g) => g.on_mesh(mesh),
        Prediction::Trig { freqs, coeffs } => eval_trig(mesh, freqs, coeffs),
    }
}

fn value_at(pred: &Prediction, g: f64) -> Complex64 {
    match pred {
        Prediction::Grid(f) => f.value_at(g),
        Prediction::Trig { freqs, coeffs } => eval_trig_at(freqs, coeffs, g),
    }
}

/// `∫ |φ_0 − φ_n|^p dμ_0`.
fn drift(mu0: &SpectralMeasure, mun: &SpectralMeasure, problem: &Problem, p: f64) -> Result<f64> {
    if let Problem::Periodic { q, x } = problem {
        return periodic_drift(mu0, mun, *q, *x, p);
    }
    let f0 = prediction(mu0, problem, p)?;
    let fnn = prediction(mun, problem, p)?;
    let mut mesh = mu0.mesh().union(mun.mesh())?;
    for f in [&f0, &fnn] {
        if let Prediction::Grid(g) = f {
            mesh = mesh.union(g.mesh())?;
        }
    }
    let (w, _) = mu0.values_on(&mesh);
    let a = values_on(&f0, &mesh);
    let b = values_on(&fnn, &mesh);
    let mut s = 0.0;
    for i in 0..mesh.len() {
        if w[i] != 0.0 {
            s += mesh.weight(i) * w[i] * (a[i] - b[i]).norm().powf(p);
        }
    }
    for at in mu0.atoms() {
        s += at.mass * (value_at(&f0, at.location) - value_at(&fnn, at.location)).norm().powf(p);
    }
    Ok(s)
}

pub fn problem_distance(mu: &SpectralMeasure, problem: &Problem, p: f64) -> Result<f64> {
    match problem {
        Problem::Interp => interp_distance(mu, p),
        Problem::Msteps { m } => {
            crate::interpolation::check_p(p)?;
            mstep_distance(mu, *m)
        }
        Problem::Finite { freqs } => {
            if p == 2.0 {
                Ok(solve_p2(mu, freqs)?.distance)
            } else {
                Ok(solve_lp(mu, freqs, p)?.distance)
            }
        }
        Problem::Periodic { q, x } => periodic_distance(mu, *q, *x, p),
    }
}

/// `∫ |1 − φ_p(ν)|^p dμ`, `None` unless `μ ≪ ν`.
pub fn problem_cross_error(nu: &SpectralMeasure, mu: &SpectralMeasure, problem: &Problem, p: f64) -> Result<Option<f64>> {
    if check_abs_continuity(mu, nu).is_err() {
        return Ok(None);
    }
    let v = match problem {
        Problem::Interp => interp_cross_error(nu, mu, p)?,
        Problem::Msteps { m } => mstep_cross_error(nu, mu, *m, p)?,
        Problem::Finite { freqs } => finite_cross_error(nu, mu, freqs, p)?,
        Problem::Periodic { q, x } => periodic_cross_error(nu, mu, *q, *x, p)?,
    };
    Ok(Some(v))
}

fn circle_row(mu0: &SpectralMeasure, mun: &SpectralMeasure, n: usize, problem: &Problem, p: f64) -> Result<StabilityRow> {
    Ok(StabilityRow {
        n,
        distance: problem_distance(mun, problem, p)?,
        cross_n0: problem_cross_error(mun, mu0, problem, p)?,
        cross_0n: problem_cross_error(mu0, mun, problem, p)?,
        drift: Some(drift(mu0, mun, problem, p)?),
        metrics: Some(modes_report(mu0, mun, None, SWEEP_EPS, DEFAULT_DEGREE)?),
    })
}

/// The trend rule: the last `⌈k/3⌉` values lie within
/// `TREND_RTOL · max(|target|, scale)` of the target, and no deviation from
/// the target grows by more than a factor of two from one row to the next.
pub fn trend_verdict(values: &[Option<f64>], target: f64, scale: f64) -> Verdict {
    let Some(vals) = values.iter().copied().collect::<Option<Vec<f64>>>() else {
        return Verdict::NotApplicable;
    };
    if vals.is_empty() {
        return Verdict::NotApplicable;
    }
    let tol = TREND_RTOL * target.abs().max(scale);
    let dev: Vec<f64> = vals.iter().map(|v| (v - target).abs()).collect();
    if dev.iter().any(|d| !d.is_finite()) {
        return Verdict::Fails;
    }
    let tail = vals.len().div_ceil(3);
    let close = dev[dev.len() - tail..].iter().all(|&d| d <= tol);
    let slack = 1e-12 * target.abs().max(scale);
    let steady = dev.windows(2).all(|w| w[1] <= 2.0 * w[0] + slack);
    if close && steady {
        Verdict::HoldsTrend
    } else {
        Verdict::Fails
    }
}

fn verdicts(rows: &[StabilityRow], target: f64, scale: f64) -> Verdicts {
    Verdicts {
        r1: trend_verdict(&rows.iter().map(|r| Some(r.distance)).collect::<Vec<_>>(), target, scale),
        r2: trend_verdict(&rows.iter().map(|r| r.cross_n0).collect::<Vec<_>>(), target, scale),
        r3: trend_verdict(&rows.iter().map(|r| r.drift).collect::<Vec<_>>(), 0.0, scale),
    }
}

/// Runs the problem along the family for every `n`; rows are computed in
/// parallel and reported in the order of `n_list`.
pub fn stability_sweep(spec: &FamilySpec, n_list: &[usize], problem: &Problem, p: f64, grid: usize) -> Result<StabilityReport> {
    if n_list.is_empty() {
        return Err(Error::Input("empty n list".into()));
    }
    let periodic_only = matches!(spec.name.as_str(), "ex7.5a" | "ex7.5b" | "ex7.7");
    if periodic_only && !matches!(problem, Problem::Periodic { .. }) {
        return Err(Error::UnsupportedProblem(format!("{} requires the periodic problem", spec.name)));
    }
    if spec.name == "ex7.7" {
        return line_sweep(spec, n_list, problem, p);
    }
    let member = |n: usize| make_family(&FamilySpec { n, ..spec.clone() }, grid)?.circle();
    let (mu0, _) = member(n_list[0])?;
    let target = problem_distance(&mu0, problem, p)?;
    let rows: Vec<Result<StabilityRow>> = std::thread::scope(|s| {
        let handles: Vec<_> = n_list
            .iter()
            .map(|&n| {
                let mu0 = &mu0;
                s.spawn(move || {
                    let (_, mun) = member(n)?;
                    circle_row(mu0, &mun, n, problem, p)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep row panicked")).collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let scale = mu0.total_mass();
    Ok(StabilityReport {
        family: spec.name.clone(),
        problem: problem.clone(),
        p,
        grid_size: grid,
        target,
        limit_mass: scale,
        verdicts: verdicts(&rows, target, scale),
        rows,
    })
}

fn line_sweep(spec: &FamilySpec, n_list: &[usize], problem: &Problem, p: f64) -> Result<StabilityReport> {
    if p != 2.0 {
        return Err(Error::UnsupportedExponent(p));
    }
    let mut rows = Vec::new();
    let mut target = 0.0;
    let mut scale = 0.0;
    for &n in n_list {
        let FamilyPair::Line { atoms0, atomsn } = make_family(&FamilySpec { n, ..spec.clone() }, 8)? else {
            unreachable!()
        };
        target = atomic_periodic_distance2(&atoms0, LINE_OFFSET);
        scale = atoms0.iter().map(|a| a.mass).sum();
        rows.push(StabilityRow {
            n,
            distance: atomic_periodic_distance2(&atomsn, LINE_OFFSET),
            cross_n0: Some(atomic_periodic_cross_error(&atomsn, &atoms0, LINE_OFFSET)),
            cross_0n: None,
            drift: Some(atomic_periodic_drift(&atoms0, &atomsn, LINE_OFFSET)),
            metrics: None,
        });
    }
    Ok(StabilityReport {
        family: spec.name.clone(),
        problem: problem.clone(),
        p,
        grid_size: 0,
        target,
        limit_mass: scale,
        verdicts: verdicts(&rows, target, scale),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DinfCheck {
    #[serde(serialize_with = "ser_num")]
    pub d_inf_mu0: f64,
    #[serde(serialize_with = "ser_num")]
    pub d_inf_mun: f64,
    /// Minimizing coefficient `α` of `1 − α e_1` for `μ_n`.
    #[serde(serialize_with = "ser_num")]
    pub alpha_mun: f64,
}

/// `p = ∞` with `S = {1}`: `μ_0 = δ_0` against `μ_n = δ_0 + λ/n`.
///
/// The essential supremum over `μ_n` is a maximum over the atom and a fine
/// grid; the objective depends on `α` only through real `α` for the optimum,
/// and is convex, so a golden-section search over `[−2, 2]` finds it.
pub fn dinf_singleton_check() -> DinfCheck {
    const GRID: usize = 4096;
    let sup_atom = |a: f64| (1.0 - a).abs();
    let sup_haar = |a: f64| {
        (0..=GRID)
            .map(|k| (Complex64::new(1.0, 0.0) - Complex64::from_polar(a, TAU * k as f64 / GRID as f64)).norm())
            .fold(0.0, f64::max)
    };
    let (_, d0) = golden_min(sup_atom, -2.0, 2.0);
    let (an, dn) = golden_min(|a| sup_atom(a).max(sup_haar(a)), -2.0, 2.0);
    DinfCheck {
        d_inf_mu0: d0,
        d_inf_mun: dn,
        alpha_mun: an,
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
