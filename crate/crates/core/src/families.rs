//! Named measure families `(μ_0, μ_n)` and the measure description format.
//!
//! Densities are taken verbatim from the examples they reproduce; each
//! generator sets the analytic integrability facts so that the numerical
//! heuristics are not consulted for them.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI, TAU};
use std::sync::Arc;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::measure::{AnalyticHints, Atom, FnProfile, Piecewise, Side, SpectralMeasure};

pub const FAMILIES: &[&str] = &[
    "ex3.2a", "ex3.2b", "ex3.5", "ex3.6a", "ex3.6b", "ex3.6c", "ex3.6d", "ex4.11", "ex5.1", "ex5.2", "ex5.8",
    "ex5.14", "ex6.5", "ex7.5a", "ex7.5b", "ex7.7", "thm3.10", "custom-json",
];

#[derive(Debug, Clone, Default)]
pub struct FamilySpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub n: usize,
    /// Measure document for `custom-json`:
    /// `{"mu0": <measure>, "members": [{"n": 4, "measure": <measure>}, ...]}`.
    pub document: Option<Value>,
}

impl FamilySpec {
    pub fn new(name: &str, n: usize) -> Self {
        Self {
            name: name.to_string(),
            n,
            ..Self::default()
        }
    }

    pub fn param(mut self, key: &str, v: f64) -> Self {
        self.params.insert(key.to_string(), v);
        self
    }
}

/// A family member and its limit.
#[derive(Debug, Clone)]
pub enum FamilyPair {
    Circle { mu0: SpectralMeasure, mun: SpectralMeasure },
    /// Purely atomic measures on the real line.
    Line { atoms0: Vec<Atom>, atomsn: Vec<Atom> },
}

impl FamilyPair {
    pub fn circle(self) -> Result<(SpectralMeasure, SpectralMeasure)> {
        match self {
            FamilyPair::Circle { mu0, mun } => Ok((mu0, mun)),
            FamilyPair::Line { .. } => Err(Error::UnsupportedProblem("family lives on the real line".into())),
        }
    }
}

fn hints(log: bool, bound: f64) -> AnalyticHints {
    AnalyticHints {
        log_integrable: Some(log),
        inverse_power_bound: Some(bound),
    }
}

fn build(p: Piecewise, grid: usize, atoms: Vec<Atom>, h: AnalyticHints) -> Result<SpectralMeasure> {
    SpectralMeasure::from_profile(Arc::new(p), grid, atoms, h)
}

fn smooth(f: impl Fn(f64) -> f64 + Send + Sync + 'static, grid: usize, h: AnalyticHints) -> Result<SpectralMeasure> {
    SpectralMeasure::from_profile(Arc::new(FnProfile(f)), grid, Vec::new(), h)
}

fn need(params: &BTreeMap<String, f64>, key: &str, family: &str) -> Result<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| Error::InvalidFamily(format!("{family} needs parameter '{key}'")))
}

fn positive(v: f64, key: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidFamily(format!("parameter '{key}' must be positive")))
    }
}

/// `log(γ/(2πe)) < −1` on `(0, 2π)`; keeps `γ log³` away from zero.
fn shifted_log(g: f64) -> f64 {
    (g / (TAU * E)).ln()
}

/// Builds `μ_0` (`n = None`) or `μ_n` of a circle family.
pub fn family_measure(name: &str, params: &BTreeMap<String, f64>, n: Option<usize>, grid: usize) -> Result<SpectralMeasure> {
    let nf = match n {
        Some(0) => return Err(Error::InvalidFamily("family index n must be at least 1".into())),
        Some(k) => Some(k as f64),
        None => None,
    };
    let inv = |k: f64| 1.0 / k;
    match (name, nf) {
        ("ex3.2a" | "ex3.6a" | "ex5.14", None) => SpectralMeasure::haar(grid),
        ("ex3.2a", Some(k)) => build(Piecewise::new().constant(inv(k), TAU, 1.0), grid, vec![], hints(false, 0.0)),
        ("ex3.2b" | "ex3.6d", None) => build(
            Piecewise::new().piece(0.0, TAU, f64::sqrt).singular(0.0, Side::Right),
            grid,
            vec![],
            hints(true, 2.0),
        ),
        ("ex3.2b", Some(k)) => {
            let c = if params.get("second").is_some_and(|&s| s != 0.0) {
                1.0 / (k * k)
            } else {
                positive(need(params, "a", name)?, "a")? / k
            };
            build(
                Piecewise::new().constant(0.0, inv(k), c).piece(inv(k), TAU, f64::sqrt),
                grid,
                vec![],
                hints(true, f64::INFINITY),
            )
        }
        ("ex3.5", None) => {
            SpectralMeasure::atomic(grid, vec![Atom::new(0.0, 1.0)]).map(|m| m.with_hints(hints(false, 0.0)))
        }
        ("ex3.5", Some(k)) => SpectralMeasure::haar(grid)?.scaled(1.0 / k)?.with_atoms(vec![Atom::new(0.0, 1.0)]),
        ("ex3.6a", Some(k)) => build(
            Piecewise::new()
                .piece(0.0, inv(k), |g| g)
                .constant(inv(k), TAU, 1.0)
                .singular(0.0, Side::Right),
            grid,
            vec![],
            hints(true, 1.0),
        ),
        ("ex3.6b", None) => build(
            Piecewise::new().piece(0.0, TAU, |g| g).singular(0.0, Side::Right),
            grid,
            vec![],
            hints(true, 1.0),
        ),
        // vanishes linearly at 2π, so w_n^{-1} is not integrable
        ("ex3.6b", Some(k)) => build(
            Piecewise::new()
                .constant(0.0, inv(k), inv(k))
                .piece(inv(k), TAU - inv(k), |g| g)
                .piece(TAU - inv(k), TAU, |g| TAU - g)
                .singular(TAU, Side::Left),
            grid,
            vec![],
            hints(true, 1.0),
        ),
        ("ex3.6c", _) => {
            let a = positive(need(params, "a", name)?, "a")?;
            match nf {
                None => build(
                    Piecewise::new().piece(0.0, TAU, move |g| a * g).singular(0.0, Side::Right),
                    grid,
                    vec![],
                    hints(true, 1.0),
                ),
                Some(k) => build(
                    Piecewise::new()
                        .constant(0.0, inv(k), a / (k * k))
                        .piece(inv(k), TAU, move |g| a * g),
                    grid,
                    vec![],
                    hints(true, f64::INFINITY),
                ),
            }
        }
        ("ex3.6d", Some(k)) => {
            let a = positive(need(params, "a", name)?, "a")?;
            build(
                Piecewise::new()
                    .constant(0.0, inv(k), a * k.powf(-0.75))
                    .piece(inv(k), TAU, f64::sqrt),
                grid,
                vec![],
                hints(true, f64::INFINITY),
            )
        }
        ("ex4.11" | "ex5.8", None) => smooth(|_| 2.0, grid, hints(true, f64::INFINITY)),
        ("ex4.11" | "ex5.8", Some(k)) => smooth(move |g| 2.0 + (k * g).cos(), grid, hints(true, f64::INFINITY)),
        ("ex5.1", None) => build(
            Piecewise::new()
                .log_piece(0.0, TAU, |g| 1.0 / (g * shifted_log(g).powi(3)))
                .singular(0.0, Side::Right),
            grid,
            vec![],
            hints(true, 0.0),
        ),
        ("ex5.1", Some(k)) => build(
            Piecewise::new()
                .log_piece(0.0, inv(k), |g| 1.0 / (g * shifted_log(g)))
                .log_piece(inv(k), TAU, |g| 1.0 / (g * shifted_log(g).powi(3)))
                .singular(0.0, Side::Right),
            grid,
            vec![],
            hints(false, 0.0),
        ),
        ("ex5.2", None) => build(
            Piecewise::new().log_piece(0.0, TAU, |g| -1.0 / g).singular(0.0, Side::Right),
            grid,
            vec![],
            hints(false, 0.0),
        ),
        ("ex5.2", Some(k)) => build(
            Piecewise::new()
                .log_piece(0.0, inv(k), move |_| k * k)
                .log_piece(inv(k), TAU, |g| -1.0 / g),
            grid,
            vec![],
            hints(true, f64::INFINITY),
        ),
        ("ex5.14", Some(k)) => {
            let b = need(params, "b", name)?;
            if !(b > 1.0) {
                return Err(Error::InvalidFamily("ex5.14 needs b > 1".into()));
            }
            build(
                Piecewise::new().constant(0.0, inv(k), k.powf(-b)).constant(inv(k), TAU, 1.0),
                grid,
                vec![],
                hints(true, f64::INFINITY),
            )
        }
        ("ex6.5", None) => SpectralMeasure::haar(grid)?.with_atoms(vec![Atom::new(0.0, 1.0 / TAU)]),
        ("ex6.5", Some(k)) => build(
            Piecewise::new().constant(0.0, inv(k), k).constant(inv(k), TAU, 1.0),
            grid,
            vec![],
            hints(true, f64::INFINITY),
        ),
        ("ex7.5a", None) => build(Piecewise::new().constant(0.0, PI, 1.0), grid, vec![], hints(false, 0.0)),
        ("ex7.5a", Some(k)) => build(
            Piecewise::new()
                .constant(0.0, inv(k), k)
                .constant(inv(k), PI, 1.0)
                .constant(PI, PI + inv(k), k),
            grid,
            vec![],
            hints(false, 0.0),
        ),
        ("ex7.5b", None) => SpectralMeasure::haar(grid),
        ("ex7.5b", Some(k)) => smooth(move |g| 1.0 + ((2.0 * k + 1.0) * g).cos(), grid, hints(true, 0.5)),
        ("thm3.10", None) => smooth(|g| 2.0 + g.cos(), grid, hints(true, f64::INFINITY)),
        ("thm3.10", Some(k)) => build(
            Piecewise::new()
                .piece(0.0, inv(k), move |g| (1.0 + 1.0 / k) * (2.0 + g.cos()) + 1.0)
                .piece(inv(k), TAU, move |g| (1.0 + 1.0 / k) * (2.0 + g.cos())),
            grid,
            vec![],
            hints(true, f64::INFINITY),
        ),
        ("constant", _) => {
            let c = positive(need(params, "c", name)?, "c")?;
            smooth(move |_| c, grid, hints(true, f64::INFINITY))
        }
        ("cos", _) => {
            // a + b cos(kγ)
            let a = need(params, "a", name)?;
            let b = params.get("b").copied().unwrap_or(1.0);
            let k = params.get("k").copied().unwrap_or(1.0);
            if a < b.abs() {
                return Err(Error::InvalidFamily("cos family needs a ≥ |b|".into()));
            }
            let h = if a > b.abs() { hints(true, f64::INFINITY) } else { hints(true, 0.5) };
            smooth(move |g| a + b * (k * g).cos(), grid, h)
        }
        ("ex7.7", _) => Err(Error::UnsupportedProblem("ex7.7 lives on the real line".into())),
        _ => Err(Error::InvalidFamily(format!("unknown family '{name}'"))),
    }
}

/// Atoms of the real-line family: `μ_0 = δ_0`, `μ_n = δ_0 + δ_{(2n+1)2π}`.
pub fn line_family(n: usize) -> (Vec<Atom>, Vec<Atom>) {
    (
        vec![Atom::new(0.0, 1.0)],
        vec![Atom::new(0.0, 1.0), Atom::new((2 * n + 1) as f64 * TAU, 1.0)],
    )
}

pub fn make_family(spec: &FamilySpec, grid: usize) -> Result<FamilyPair> {
    match spec.name.as_str() {
        "ex7.7" => {
            let (atoms0, atomsn) = line_family(spec.n);
            Ok(FamilyPair::Line { atoms0, atomsn })
        }
        "custom-json" => {
            let doc = spec
                .document
                .as_ref()
                .ok_or_else(|| Error::InvalidFamily("custom-json needs a document".into()))?;
            let mu0 = measure_from_json(
                doc.get("mu0").ok_or_else(|| Error::Input("custom-json document lacks 'mu0'".into()))?,
                grid,
            )?;
            let member = doc
                .get("members")
                .and_then(Value::as_array)
                .and_then(|ms| ms.iter().find(|m| m.get("n").and_then(Value::as_u64) == Some(spec.n as u64)))
                .and_then(|m| m.get("measure"))
                .ok_or_else(|| Error::Input(format!("custom-json document has no member n = {}", spec.n)))?;
            Ok(FamilyPair::Circle {
                mu0,
                mun: measure_from_json(member, grid)?,
            })
        }
        name => Ok(FamilyPair::Circle {
            mu0: family_measure(name, &spec.params, None, grid)?,
            mun: family_measure(name, &spec.params, Some(spec.n), grid)?,
        }),
    }
}

fn parse_atoms(v: Option<&Value>) -> Result<Vec<Atom>> {
    match v {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::Input(format!("atoms: {e}"))),
    }
}

/// Parses `{"grid_size": N, "density": {"family": .., "params": {..}} |
/// {"samples": [..]}, "atoms": [{"location": γ, "mass": m}]}`.
///
/// A family density without an `n` parameter is the family's limit `w_0`.
pub fn measure_from_json(v: &Value, default_grid: usize) -> Result<SpectralMeasure> {
    let grid = match v.get("grid_size") {
        Some(g) => g
            .as_u64()
            .ok_or_else(|| Error::Input("grid_size must be a positive integer".into()))? as usize,
        None => default_grid,
    };
    let atoms = parse_atoms(v.get("atoms"))?;
    let density = v.get("density").ok_or_else(|| Error::Input("measure lacks 'density'".into()))?;
    let base = if let Some(s) = density.get("samples") {
        let samples: Vec<f64> = serde_json::from_value(s.clone()).map_err(|e| Error::Input(format!("samples: {e}")))?;
        if v.get("grid_size").is_some() && samples.len() != grid {
            return Err(Error::Input(format!("{} samples for grid size {grid}", samples.len())));
        }
        if samples.iter().all(|&x| x == 0.0) {
            return SpectralMeasure::atomic(samples.len(), atoms);
        }
        SpectralMeasure::from_samples(samples, Vec::new())?
    } else if let Some(name) = density.get("family").and_then(Value::as_str) {
        let mut params: BTreeMap<String, f64> = match density.get("params") {
            None => BTreeMap::new(),
            Some(p) => serde_json::from_value(p.clone()).map_err(|e| Error::Input(format!("params: {e}")))?,
        };
        let n = params.remove("n").map(|k| k as usize);
        family_measure(name, &params, n, grid)?
    } else {
        return Err(Error::Input("density needs 'samples' or 'family'".into()));
    };
    if atoms.is_empty() {
        return Ok(base);
    }
    let mut all = base.atoms().to_vec();
    all.extend(atoms);
    base.with_atoms(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    const N: usize = 1 << 10;

    #[test]
    fn gap_family() {
        let (mu0, mun) = make_family(&FamilySpec::new("ex3.2a", 10), N).unwrap().circle().unwrap();
        assert!((mu0.total_mass() - 1.0).abs() < 1e-12);
        assert!((mun.total_mass() - (1.0 - 1.0 / (10.0 * TAU))).abs() < 1e-12);
    }

    #[test]
    fn atom_family() {
        let (mu0, mun) = make_family(&FamilySpec::new("ex6.5", 12), N).unwrap().circle().unwrap();
        assert!((mu0.total_mass() - (1.0 + 1.0 / TAU)).abs() < 1e-12);
        assert!((mun.mass_in(0.0, 1.0 / 12.0) - 1.0 / TAU).abs() < 1e-14);
    }

    #[test]
    fn missing_and_unknown() {
        assert!(matches!(
            make_family(&FamilySpec::new("ex3.6c", 3), N),
            Err(Error::InvalidFamily(_))
        ));
        assert!(matches!(make_family(&FamilySpec::new("nope", 3), N), Err(Error::InvalidFamily(_))));
        assert!(make_family(&FamilySpec::new("ex3.6c", 3).param("a", 1.0), N).is_ok());
    }

    #[test]
    fn huge_densities_are_kept_in_log_space() {
        let mun = family_measure("ex5.2", &BTreeMap::new(), Some(30), N).unwrap();
        assert!(mun.log_density().contains(&900.0));
    }

    #[test]
    fn json_measures() {
        let m = measure_from_json(&json!({"density": {"family": "cos", "params": {"a": 2.0}}}), N).unwrap();
        assert!((m.total_mass() - 2.0).abs() < 1e-12);
        let m = measure_from_json(
            &json!({"grid_size": 8, "density": {"samples": [1,1,1,1,1,1,1,1]}, "atoms": [{"location": 0.0, "mass": 0.5}]}),
            N,
        )
        .unwrap();
        assert!((m.total_mass() - 1.5).abs() < 1e-15);
        let m = measure_from_json(&json!({"density": {"family": "ex4.11", "params": {"n": 3}}}), N).unwrap();
        assert!((m.fourier_coefficient(3).re - 0.5).abs() < 1e-12);
        assert!(measure_from_json(&json!({"grid_size": 16, "density": {"samples": [1.0]}}), N).is_err());
        assert!(measure_from_json(&json!({"density": {}}), N).is_err());
    }

    #[test]
    fn custom_document() {
        let doc = json!({
            "mu0": {"density": {"family": "constant", "params": {"c": 2.0}}},
            "members": [{"n": 4, "measure": {"density": {"family": "ex4.11", "params": {"n": 4}}}}]
        });
        let spec = FamilySpec { document: Some(doc), ..FamilySpec::new("custom-json", 4) };
        let (mu0, mun) = make_family(&spec, N).unwrap().circle().unwrap();
        assert!((mu0.total_mass() - mun.total_mass()).abs() < 1e-12);
        let spec = FamilySpec { n: 5, ..spec };
        assert!(make_family(&spec, N).is_err());
    }
}
