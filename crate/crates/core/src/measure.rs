//! Finite positive Borel measures on the circle and grid functions.
//!
//! A measure is an absolutely continuous part, sampled on the nodes of a
//! [`Mesh`], plus a finite list of atoms. Integration is against normalized
//! Haar measure `dλ = dγ/2π`. Every density sample carries its logarithm so
//! that densities like `e^{n²}` or `e^{-1/γ}` keep finite log-integrals even
//! when the value itself overflows or underflows.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{add_phased, mesh_moments};
use crate::mesh::Mesh;

/// Relative threshold below which a density sample counts as zero for
/// absolute-continuity checks.
pub const TAU_AC: f64 = 1e-12;
/// Atoms closer than this are the same point.
pub const ATOM_TOL: f64 = 1e-12;
/// Number of dyadic levels used when grading a cell toward a singular point.
const GRADE_LEVELS: usize = 48;
/// Sub-cells per dyadic level inside a graded cell.
const GRADE_SPLIT: usize = 4;
/// Neighbouring cells refined around a singular point, and their split count.
const NEAR_CELLS: usize = 16;
const NEAR_SPLIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

impl Atom {
    pub fn new(location: f64, mass: f64) -> Self {
        Self { location, mass }
    }
}

/// Facts about the density that are known analytically and override the
/// numerical integrability heuristics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AnalyticHints {
    pub log_integrable: Option<bool>,
    /// `w^{-r}` is integrable exactly when `r < bound`.
    pub inverse_power_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Both,
}

/// A point near which the density (or its reciprocal or logarithm) behaves
/// like a power or worse, so quadrature needs geometric grading there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singularity {
    pub at: f64,
    pub side: Side,
}

/// A density that can be evaluated anywhere, used to build measures on any
/// grid and to refine them.
pub trait DensityProfile: Send + Sync {
    fn value(&self, gamma: f64) -> f64;
    fn log_value(&self, gamma: f64) -> f64 {
        self.value(gamma).ln()
    }
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
    fn singularities(&self) -> Vec<Singularity> {
        Vec::new()
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
struct Segment {
    start: f64,
    end: f64,
    value: RealFn,
    log: Option<RealFn>,
}

/// Density given piece by piece on half-open intervals of `[0, 2π)`.
/// Points not covered by any piece have density zero.
#[derive(Clone, Default)]
pub struct Piecewise {
    segments: Vec<Segment>,
    singular: Vec<Singularity>,
}

impl Piecewise {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn piece(mut self, start: f64, end: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.segments.push(Segment {
            start,
            end,
            value: Arc::new(f),
            log: None,
        });
        self
    }

    pub fn constant(self, start: f64, end: f64, c: f64) -> Self {
        self.piece(start, end, move |_| c)
    }

    /// Piece given through its logarithm; the value is `exp` of it.
    pub fn log_piece(mut self, start: f64, end: f64, logf: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let logf: RealFn = Arc::new(logf);
        let l2 = logf.clone();
        self.segments.push(Segment {
            start,
            end,
            value: Arc::new(move |g| l2(g).exp()),
            log: Some(logf),
        });
        self
    }

    pub fn singular(mut self, at: f64, side: Side) -> Self {
        self.singular.push(Singularity { at, side });
        self
    }

    fn find(&self, gamma: f64) -> Option<&Segment> {
        self.segments
            .iter()
            .find(|s| gamma >= s.start && gamma < s.end)
    }
}

impl DensityProfile for Piecewise {
    fn value(&self, gamma: f64) -> f64 {
        self.find(gamma).map_or(0.0, |s| (s.value)(gamma))
    }

    fn log_value(&self, gamma: f64) -> f64 {
        match self.find(gamma) {
            Some(Segment { log: Some(l), .. }) => l(gamma),
            Some(s) => (s.value)(gamma).ln(),
            None => f64::NEG_INFINITY,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().flat_map(|s| [s.start, s.end]).collect()
    }

    fn singularities(&self) -> Vec<Singularity> {
        self.singular.clone()
    }
}

/// Smooth density given by a closure on the whole circle.
pub struct FnProfile<F>(pub F);

impl<F: Fn(f64) -> f64 + Send + Sync> DensityProfile for FnProfile<F> {
    fn value(&self, gamma: f64) -> f64 {
        (self.0)(gamma)
    }
}

fn graded_cuts(n: usize, s: Singularity) -> Vec<f64> {
    let h = TAU / n as f64;
    let mut cuts = vec![s.at];
    let sides: &[f64] = match s.side {
        Side::Left => &[-1.0],
        Side::Right => &[1.0],
        Side::Both => &[-1.0, 1.0],
    };
    let floor = 1e-13 * s.at.abs().max(1.0);
    for &dir in sides {
        let mut outer = h;
        for _ in 0..GRADE_LEVELS {
            let inner = outer * 0.5;
            if inner < floor {
                break;
            }
            for j in 0..GRADE_SPLIT {
                let t = inner + (outer - inner) * j as f64 / GRADE_SPLIT as f64;
                cuts.push(s.at + dir * t);
            }
            outer = inner;
        }
        for c in 1..=NEAR_CELLS {
            let base = s.at + dir * c as f64 * h;
            for j in 0..NEAR_SPLIT {
                cuts.push(base + dir * h * j as f64 / NEAR_SPLIT as f64);
            }
        }
    }
    cuts.iter_mut().for_each(|c| *c = c.rem_euclid(TAU));
    cuts
}

/// Mesh for a profile: breakpoints become cuts, singular points get graded.
pub fn profile_mesh(profile: &dyn DensityProfile, n: usize) -> Result<Mesh> {
    let mut cuts = profile.breakpoints();
    for s in profile.singularities() {
        cuts.extend(graded_cuts(n, s));
    }
    Mesh::with_cuts(n, cuts)
}

#[derive(Clone)]
pub struct SpectralMeasure {
    mesh: Arc<Mesh>,
    density: Vec<f64>,
    log_density: Vec<f64>,
    atoms: Vec<Atom>,
    hints: AnalyticHints,
    profile: Option<Arc<dyn DensityProfile>>,
}

impl fmt::Debug for SpectralMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralMeasure")
            .field("grid_size", &self.grid_size())
            .field("nodes", &self.mesh.len())
            .field("atoms", &self.atoms)
            .field("hints", &self.hints)
            .field("has_profile", &self.profile.is_some())
            .finish()
    }
}

fn normalize_atoms(atoms: Vec<Atom>) -> Result<Vec<Atom>> {
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        if !a.location.is_finite() || !a.mass.is_finite() || a.mass < 0.0 {
            return Err(Error::InvalidMeasure(format!("bad atom {a:?}")));
        }
        if a.mass == 0.0 {
            continue;
        }
        let loc = a.location.rem_euclid(TAU);
        let loc = if TAU - loc < ATOM_TOL { 0.0 } else { loc };
        if let Some(b) = out.iter_mut().find(|b| circ_dist(b.location, loc) < ATOM_TOL) {
            b.mass += a.mass;
        } else {
            out.push(Atom::new(loc, a.mass));
        }
    }
    out.sort_by(|a, b| a.location.partial_cmp(&b.location).unwrap());
    Ok(out)
}

fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn check_samples(vals: &[f64], logs: &[f64]) -> Result<()> {
    for (v, l) in vals.iter().zip(logs) {
        if v.is_nan() || *v < 0.0 || l.is_nan() {
            return Err(Error::InvalidMeasure(format!("density sample {v} is not a nonnegative number")));
        }
        if v.is_infinite() && l.is_infinite() {
            return Err(Error::InvalidMeasure("density sample is infinite".into()));
        }
    }
    Ok(())
}

impl SpectralMeasure {
    /// Raw constructor from node values on a mesh.
    pub fn from_parts(
        mesh: Arc<Mesh>,
        density: Vec<f64>,
        log_density: Vec<f64>,
        atoms: Vec<Atom>,
    ) -> Result<Self> {
        if density.len() != mesh.len() || log_density.len() != mesh.len() {
            return Err(Error::InvalidMeasure("sample count does not match mesh".into()));
        }
        check_samples(&density, &log_density)?;
        let m = Self {
            mesh,
            density,
            log_density,
            atoms: normalize_atoms(atoms)?,
            hints: AnalyticHints::default(),
            profile: None,
        };
        m.check_mass()?;
        Ok(m)
    }

    fn check_mass(&self) -> Result<()> {
        let mass = self.total_mass();
        if !(mass > 0.0) {
            return Err(Error::InvalidMeasure("total mass must be positive".into()));
        }
        Ok(())
    }

    /// Density samples at the cell centers of a uniform grid.
    pub fn from_samples(samples: Vec<f64>, atoms: Vec<Atom>) -> Result<Self> {
        let mesh = Arc::new(Mesh::uniform(samples.len())?);
        let logs = samples.iter().map(|v| v.ln()).collect();
        Self::from_parts(mesh, samples, logs, atoms)
    }

    pub fn from_profile(
        profile: Arc<dyn DensityProfile>,
        n: usize,
        atoms: Vec<Atom>,
        hints: AnalyticHints,
    ) -> Result<Self> {
        let mesh = profile_mesh(profile.as_ref(), n)?;
        let mut density = Vec::with_capacity(mesh.len());
        let mut logs = Vec::with_capacity(mesh.len());
        for i in 0..mesh.len() {
            let g = mesh.mid(i);
            let l = profile.log_value(g);
            let v = profile.value(g);
            density.push(v);
            logs.push(if v == 0.0 && l.is_nan() { f64::NEG_INFINITY } else { l });
        }
        let mut m = Self::from_parts(Arc::new(mesh), density, logs, atoms)?;
        m.hints = hints;
        m.profile = Some(profile);
        Ok(m)
    }

    /// Smooth density from a closure.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::from_profile(Arc::new(FnProfile(f)), n, Vec::new(), AnalyticHints::default())
    }

    /// Normalized Haar measure (density 1).
    pub fn haar(n: usize) -> Result<Self> {
        let mut m = Self::from_samples(vec![1.0; n], Vec::new())?;
        m.hints = AnalyticHints {
            log_integrable: Some(true),
            inverse_power_bound: Some(f64::INFINITY),
        };
        m.profile = Some(Arc::new(FnProfile(|_| 1.0)));
        Ok(m)
    }

    /// Purely atomic measure on the given grid.
    pub fn atomic(n: usize, atoms: Vec<Atom>) -> Result<Self> {
        let mut m = Self::from_parts(Arc::new(Mesh::uniform(n)?), vec![0.0; n], vec![f64::NEG_INFINITY; n], atoms)?;
        m.profile = Some(Arc::new(FnProfile(|_| 0.0)));
        Ok(m)
    }

    pub fn with_hints(mut self, hints: AnalyticHints) -> Self {
        self.hints = hints;
        self
    }

    pub fn with_atoms(mut self, atoms: Vec<Atom>) -> Result<Self> {
        self.atoms = normalize_atoms(atoms)?;
        self.check_mass()?;
        Ok(self)
    }

    pub fn grid_size(&self) -> usize {
        self.mesh.grid_size()
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn log_density(&self) -> &[f64] {
        &self.log_density
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn hints(&self) -> AnalyticHints {
        self.hints
    }

    pub fn profile(&self) -> Option<&Arc<dyn DensityProfile>> {
        self.profile.as_ref()
    }

    pub fn ac_mass(&self) -> f64 {
        (0..self.mesh.len())
            .map(|i| self.mesh.weight(i) * self.density[i])
            .sum()
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.ac_mass() + self.atom_mass()
    }

    pub fn max_density(&self) -> f64 {
        self.density.iter().cloned().fold(0.0, f64::max)
    }

    /// `∫ f dλ` over the absolutely continuous part for a per-node integrand.
    pub fn haar_integral(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.mesh.len()).map(|i| self.mesh.weight(i) * f(i)).sum()
    }

    /// Same measure rebuilt from its profile on a grid of size `n`.
    pub fn resampled(&self, n: usize) -> Option<Result<Self>> {
        let p = self.profile.clone()?;
        Some(Self::from_profile(p, n, self.atoms.clone(), self.hints))
    }

    /// The measure on a grid twice as fine, when it can be rebuilt from a
    /// profile; otherwise the measure on a grid half as fine, obtained by
    /// merging neighbouring cells. Returns `(coarse, fine)`.
    pub fn refinement_pair(&self) -> Result<(Self, Self)> {
        if let Some(r) = self.resampled(2 * self.grid_size()) {
            return Ok((self.clone(), r?));
        }
        let n = self.grid_size();
        if n < 16 {
            return Err(Error::InvalidGrid("grid too small to coarsen".into()));
        }
        let dens = self.mesh.cell_means(&self.density);
        let logs = self.mesh.cell_means(&self.log_density);
        let mut cd = Vec::with_capacity(n / 2);
        let mut cl = Vec::with_capacity(n / 2);
        for k in 0..n / 2 {
            cd.push(0.5 * (dens[2 * k] + dens[2 * k + 1]));
            let (a, b) = (dens[2 * k], dens[2 * k + 1]);
            cl.push(if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
                (0.5 * (a + b)).ln()
            } else {
                logs[2 * k].max(logs[2 * k + 1])
            });
        }
        let coarse = Self::from_parts(Arc::new(Mesh::uniform(n / 2)?), cd, cl, self.atoms.clone())?
            .with_hints(self.hints);
        Ok((coarse, self.clone()))
    }

    /// Node values (density, log-density) looked up on a refinement of the mesh.
    pub fn values_on(&self, mesh: &Mesh) -> (Vec<f64>, Vec<f64>) {
        (
            self.mesh.resample(&self.density, mesh),
            self.mesh.resample(&self.log_density, mesh),
        )
    }

    /// `μ̂(j) = ∫ e^{-ijγ} dμ(γ)` for `j = 0..=k_max`.
    pub fn fourier_coefficients(&self, k_max: usize) -> Vec<Complex64> {
        self.weighted_fourier(None, &|_| 1.0, k_max)
    }

    pub fn fourier_coefficient(&self, j: i64) -> Complex64 {
        let c = self.fourier_coefficients(j.unsigned_abs() as usize)[j.unsigned_abs() as usize];
        if j < 0 {
            c.conj()
        } else {
            c
        }
    }

    /// `∫ g(γ) e^{-ijγ} dμ(γ)` for real `g`, with `g` given per node on the
    /// measure's mesh and by a closure on atoms.
    pub fn weighted_fourier(
        &self,
        g: Option<&[f64]>,
        atom_g: &dyn Fn(&Atom) -> f64,
        k_max: usize,
    ) -> Vec<Complex64> {
        let vals: Vec<f64> = match g {
            Some(g) => self.density.iter().zip(g).map(|(w, g)| if *w == 0.0 { 0.0 } else { w * g }).collect(),
            None => self.density.clone(),
        };
        let mut out = mesh_moments(&self.mesh, &vals, k_max);
        for a in &self.atoms {
            add_phased(&mut out, a.location, a.mass * atom_g(a));
        }
        out
    }

    /// `μ([a, b))` for `0 <= a <= b <= 2π`.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        let mut s = 0.0;
        let k0 = ((a / self.mesh.cell_width()) as usize).min(self.grid_size() - 1);
        for i in self.mesh.cell_nodes(k0).start..self.mesh.len() {
            let (lo, hi) = (self.mesh.lo(i), self.mesh.hi(i));
            if lo >= b {
                break;
            }
            let ov = hi.min(b) - lo.max(a);
            if ov > 0.0 {
                s += self.density[i] * ov / TAU;
            }
        }
        s + self
            .atoms
            .iter()
            .filter(|x| x.location >= a && x.location < b)
            .map(|x| x.mass)
            .sum::<f64>()
    }

    /// Scalar multiple `c·μ`, `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidMeasure("scale must be positive".into()));
        }
        let mut m = self.clone();
        m.density.iter_mut().for_each(|v| *v *= c);
        m.log_density.iter_mut().for_each(|v| *v += c.ln());
        m.atoms.iter_mut().for_each(|a| a.mass *= c);
        if let Some(p) = self.profile.clone() {
            m.profile = Some(Arc::new(Scaled(p, c)));
        }
        Ok(m)
    }

    /// `μ + ν` on the common refinement of the two meshes.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        let mesh = self.mesh.union(&other.mesh)?;
        let (a, la) = self.values_on(&mesh);
        let (b, lb) = other.values_on(&mesh);
        let dens: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let logs: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| log_add(*x, *y)).collect();
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        let mut m = Self::from_parts(Arc::new(mesh), dens, logs, atoms)?;
        if let (Some(p), Some(q)) = (&self.profile, &other.profile) {
            m.profile = Some(Arc::new(Sum(p.clone(), q.clone())));
        }
        m.hints = AnalyticHints {
            log_integrable: match (self.hints.log_integrable, other.hints.log_integrable) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                _ => None,
            },
            inverse_power_bound: match (self.hints.inverse_power_bound, other.hints.inverse_power_bound) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (Some(x), None) if x.is_infinite() => Some(x),
                (None, Some(y)) if y.is_infinite() => Some(y),
                _ => None,
            },
        };
        Ok(m)
    }

    /// Index of the node carrying the sample used for `γ` (nearest-sample
    /// convention for atoms).
    pub fn node_of(&self, gamma: f64) -> usize {
        self.mesh.locate(gamma)
    }
}

fn log_add(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let m = x.max(y);
    m + ((x - m).exp() + (y - m).exp()).ln()
}

struct Scaled(Arc<dyn DensityProfile>, f64);

impl DensityProfile for Scaled {
    fn value(&self, g: f64) -> f64 {
        self.1 * self.0.value(g)
    }
    fn log_value(&self, g: f64) -> f64 {
        self.0.log_value(g) + self.1.ln()
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints()
    }
    fn singularities(&self) -> Vec<Singularity> {
        self.0.singularities()
    }
}

struct Sum(Arc<dyn DensityProfile>, Arc<dyn DensityProfile>);

impl DensityProfile for Sum {
    fn value(&self, g: f64) -> f64 {
        self.0.value(g) + self.1.value(g)
    }
    fn log_value(&self, g: f64) -> f64 {
        log_add(self.0.log_value(g), self.1.log_value(g))
    }
    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.0.breakpoints();
        b.extend(self.1.breakpoints());
        b
    }
    fn singularities(&self) -> Vec<Singularity> {
        let mut s = self.0.singularities();
        s.extend(self.1.singularities());
        s
    }
}

/// Complex samples on the nodes of a mesh.
#[derive(Debug, Clone)]
pub struct GridFunction {
    mesh: Arc<Mesh>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(mesh: Arc<Mesh>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::InvalidGrid("value count does not match mesh".into()));
        }
        Ok(Self { mesh, values })
    }

    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..mesh.len()).map(|i| f(mesh.mid(i))).collect();
        Self { mesh, values }
    }

    pub fn constant(mesh: Arc<Mesh>, c: Complex64) -> Self {
        let values = vec![c; mesh.len()];
        Self { mesh, values }
    }

    pub fn grid_size(&self) -> usize {
        self.mesh.grid_size()
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value_at(&self, gamma: f64) -> Complex64 {
        self.values[self.mesh.locate(gamma)]
    }

    pub fn on_mesh(&self, mesh: &Mesh) -> Vec<Complex64> {
        self.mesh.resample(&self.values, mesh)
    }
}

/// `∫ f dμ`; atoms use the value of the node containing the atom.
pub fn integrate(mu: &SpectralMeasure, f: &GridFunction) -> Result<Complex64> {
    if mu.grid_size() != f.grid_size() {
        return Err(Error::GridMismatch {
            left: mu.grid_size(),
            right: f.grid_size(),
        });
    }
    let mesh = mu.mesh.union(&f.mesh)?;
    let (w, _) = mu.values_on(&mesh);
    let fv = f.on_mesh(&mesh);
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..mesh.len() {
        if w[i] != 0.0 {
            s += fv[i] * (w[i] * mesh.weight(i));
        }
    }
    for a in &mu.atoms {
        s += f.value_at(a.location) * a.mass;
    }
    Ok(s)
}

fn atoms_match(a: &[Atom], loc: f64) -> Option<f64> {
    a.iter()
        .find(|x| circ_dist(x.location, loc) < ATOM_TOL)
        .map(|x| x.mass)
}

/// Total variation norm `‖μ − ν‖`.
pub fn tv_distance(mu: &SpectralMeasure, nu: &SpectralMeasure) -> Result<f64> {
    let mesh = mu.mesh.union(&nu.mesh)?;
    let (a, _) = mu.values_on(&mesh);
    let (b, _) = nu.values_on(&mesh);
    let mut s: f64 = (0..mesh.len())
        .map(|i| {
            let d = (a[i] - b[i]).abs();
            if d == 0.0 {
                0.0
            } else {
                d * mesh.weight(i)
            }
        })
        .sum();
    for x in &mu.atoms {
        s += (x.mass - atoms_match(&nu.atoms, x.location).unwrap_or(0.0)).abs();
    }
    for y in &nu.atoms {
        if atoms_match(&mu.atoms, y.location).is_none() {
            s += y.mass;
        }
    }
    Ok(s)
}

/// Pointwise minimum `μ ∧ ν` of two measures.
pub fn min_measure(mu: &SpectralMeasure, nu: &SpectralMeasure) -> Result<SpectralMeasure> {
    let mesh = mu.mesh.union(&nu.mesh)?;
    let (a, la) = mu.values_on(&mesh);
    let (b, lb) = nu.values_on(&mesh);
    let dens = a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect();
    let logs = la.iter().zip(&lb).map(|(x, y)| x.min(*y)).collect();
    let atoms = mu
        .atoms
        .iter()
        .filter_map(|x| atoms_match(&nu.atoms, x.location).map(|m| Atom::new(x.location, x.mass.min(m))))
        .collect();
    SpectralMeasure::from_parts(Arc::new(mesh), dens, logs, atoms)
}

/// Checks `μ ≪ ν`.
pub fn check_abs_continuity(mu: &SpectralMeasure, nu: &SpectralMeasure) -> Result<()> {
    let mesh = mu.mesh.union(&nu.mesh)?;
    let (a, _) = mu.values_on(&mesh);
    let (b, _) = nu.values_on(&mesh);
    let ta = TAU_AC * mu.max_density();
    let tb = TAU_AC * nu.max_density();
    // graded cells next to a zero of ν are below `tb` but carry no μ-mass
    let tm = TAU_AC * mu.ac_mass();
    for i in 0..mesh.len() {
        if b[i] <= tb && a[i] > ta && a[i] * mesh.weight(i) > tm {
            return Err(Error::NotAbsolutelyContinuous(format!(
                "reference density vanishes near γ = {:.6}",
                mesh.mid(i)
            )));
        }
    }
    for x in &mu.atoms {
        if atoms_match(&nu.atoms, x.location).is_none() {
            return Err(Error::NotAbsolutelyContinuous(format!(
                "atom at γ = {:.6} not charged by the reference",
                x.location
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RadonNikodym {
    pub density: GridFunction,
    /// `(location, μ({x}) / ν({x}))` for atoms of `ν`.
    pub atoms: Vec<(f64, f64)>,
}

/// `dμ/dν`, with the convention `0/0 = 0`.
pub fn radon_nikodym(mu: &SpectralMeasure, nu: &SpectralMeasure) -> Result<RadonNikodym> {
    check_abs_continuity(mu, nu)?;
    let mesh = Arc::new(mu.mesh.union(&nu.mesh)?);
    let (a, la) = mu.values_on(&mesh);
    let (b, lb) = nu.values_on(&mesh);
    let vals = (0..mesh.len())
        .map(|i| {
            let r = if a[i] == 0.0 || b[i] == 0.0 {
                0.0
            } else if a[i].is_finite() && b[i].is_finite() {
                a[i] / b[i]
            } else {
                (la[i] - lb[i]).exp()
            };
            Complex64::new(r, 0.0)
        })
        .collect();
    let atoms = nu
        .atoms
        .iter()
        .map(|y| (y.location, atoms_match(&mu.atoms, y.location).unwrap_or(0.0) / y.mass))
        .collect();
    Ok(RadonNikodym {
        density: GridFunction::new(mesh, vals)?,
        atoms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_has_unit_mass_and_coefficients() {
        let m = SpectralMeasure::haar(1024).unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
        let c = m.fourier_coefficients(4);
        assert!((c[0].re - 1.0).abs() < 1e-14);
        assert!(c[1].norm() < 1e-14);
    }

    #[test]
    fn rejects_invalid_input() {
        assert!(SpectralMeasure::from_samples(vec![1.0; 100], vec![]).is_err());
        assert!(SpectralMeasure::from_samples(vec![-1.0; 64], vec![]).is_err());
        assert!(SpectralMeasure::from_samples(vec![0.0; 64], vec![]).is_err());
        assert!(SpectralMeasure::from_samples(vec![1.0; 64], vec![Atom::new(0.0, -1.0)]).is_err());
    }

    #[test]
    fn indicator_breakpoints_are_exact() {
        // density n on [0, 1/n), 1 elsewhere
        let n = 7.0;
        let p = Piecewise::new().constant(0.0, 1.0 / n, n).constant(1.0 / n, TAU, 1.0);
        let m = SpectralMeasure::from_profile(Arc::new(p), 256, vec![], AnalyticHints::default()).unwrap();
        let exact = (1.0 + TAU - 1.0 / n) / TAU;
        assert!((m.total_mass() - exact).abs() < 1e-14);
        assert!((m.mass_in(0.0, 1.0 / n) - 1.0 / TAU).abs() < 1e-14);
    }

    #[test]
    fn graded_singularity_integrates_inverse_sqrt() {
        // ∫ γ^{-1/2} dλ = 2√(2π)/(2π)
        let p = Piecewise::new().piece(0.0, TAU, |g| g.sqrt()).singular(0.0, Side::Right);
        let m = SpectralMeasure::from_profile(Arc::new(p), 1 << 12, vec![], AnalyticHints::default()).unwrap();
        let j = m.haar_integral(|i| 1.0 / m.density()[i]);
        let exact = 2.0 * TAU.sqrt() / TAU;
        assert!((j - exact).abs() / exact < 2e-5, "{j} vs {exact}");
    }

    #[test]
    fn graded_zero_keeps_absolute_continuity() {
        let p = Piecewise::new().piece(0.0, TAU, |g| g).singular(0.0, Side::Right);
        let w = SpectralMeasure::from_profile(Arc::new(p), 1 << 10, vec![], AnalyticHints::default()).unwrap();
        let haar = SpectralMeasure::haar(1 << 10).unwrap();
        assert!(check_abs_continuity(&haar, &w).is_ok());
        let gap = SpectralMeasure::from_profile(
            Arc::new(Piecewise::new().constant(0.1, TAU, 1.0)),
            1 << 10,
            vec![],
            AnalyticHints::default(),
        )
        .unwrap();
        assert!(check_abs_continuity(&haar, &gap).is_err());
    }

    #[test]
    fn atom_coefficients() {
        let m = SpectralMeasure::haar(64)
            .unwrap()
            .with_atoms(vec![Atom::new(0.5, 2.0)])
            .unwrap();
        let c = m.fourier_coefficient(3);
        let exact = Complex64::from_polar(2.0, -1.5);
        assert!((c - exact).norm() < 1e-13);
        assert!((m.fourier_coefficient(-3) - exact.conj()).norm() < 1e-13);
    }

    #[test]
    fn tv_and_min() {
        let a = SpectralMeasure::from_fn(64, |g| 2.0 + g.cos()).unwrap();
        let b = SpectralMeasure::haar(64).unwrap();
        let tv = tv_distance(&a, &b).unwrap();
        assert!((tv - 1.0).abs() < 1e-12);
        let mn = min_measure(&a, &b).unwrap();
        assert!((mn.total_mass() - 1.0).abs() < 1e-12);
        assert!(check_abs_continuity(&a, &b).is_ok());
    }

    #[test]
    fn radon_nikodym_detects_singular_parts() {
        let a = SpectralMeasure::haar(64).unwrap().with_atoms(vec![Atom::new(1.0, 1.0)]).unwrap();
        let b = SpectralMeasure::haar(64).unwrap();
        assert!(matches!(radon_nikodym(&a, &b), Err(Error::NotAbsolutelyContinuous(_))));
        let rn = radon_nikodym(&b, &a).unwrap();
        assert!((rn.density.values()[3].re - 1.0).abs() < 1e-15);
        assert_eq!(rn.atoms, vec![(1.0, 0.0)]);
    }

    #[test]
    fn integrate_checks_grid() {
        let a = SpectralMeasure::haar(64).unwrap();
        let f = GridFunction::constant(Arc::new(Mesh::uniform(32).unwrap()), Complex64::new(1.0, 0.0));
        assert!(matches!(integrate(&a, &f), Err(Error::GridMismatch { .. })));
    }
}
