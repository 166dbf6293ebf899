//! Periodically observed processes: approximating `1` by characters in a
//! coset `x + qℤ`.
//!
//! The circle splits into `q` translates `α_j + T`, `α_j = 2πj/q`,
//! `T = [0, 2π/q)`. Folding `μ` onto `T` gives `μ̃(E) = μ(E + A)` and the
//! weights `h^{(α)} = dμ^{(α)}/dμ̃`, which sum to one. The projection acts
//! fibrewise: on each `t ∈ T` only the `q` values `h^{(α_j)}(t)` matter.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interpolation::check_p;
use crate::measure::{check_abs_continuity, Atom, GridFunction, SpectralMeasure, ATOM_TOL};
use crate::mesh::Mesh;

fn check_q(n: usize, q: usize) -> Result<()> {
    if q < 2 || !n.is_multiple_of(q) || n / q < 2 {
        return Err(Error::Input(format!("period q = {q} must be at least 2 and divide the grid size {n}")));
    }
    Ok(())
}

/// `e^{-i x α_j}` for `α_j = 2πj/q`, with the phase reduced exactly.
fn coset_phase(x: i64, j: usize, q: usize) -> Complex64 {
    let r = (x * j as i64).rem_euclid(q as i64) as f64 / q as f64;
    Complex64::from_polar(1.0, -TAU * r)
}

/// Fibre values of one or more measures on a common partition of `T`.
#[derive(Debug, Clone)]
pub struct FoldedMeasure {
    pub q: usize,
    pub grid_size: usize,
    /// Sub-intervals of `T`.
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// `w̃ = Σ_j w(t + α_j)` per node.
    pub density: Vec<f64>,
    /// `h^{(α_j)}` per node, `q` entries each; `0/0` is read as `1/q`.
    pub weights: Vec<Vec<f64>>,
    /// Raw slice densities `w(t + α_j)`.
    pub slices: Vec<Vec<f64>>,
    pub atoms: Vec<FoldedAtom>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldedAtom {
    pub location: f64,
    /// Mass on each translate `α_j + t`.
    pub masses: Vec<f64>,
}

impl FoldedAtom {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn weights(&self) -> Vec<f64> {
        normalized(&self.masses)
    }
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter().map(|x| x / s).collect()
    } else {
        vec![1.0 / v.len() as f64; v.len()]
    }
}

impl FoldedMeasure {
    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        (self.hi[i] - self.lo[i]) / TAU
    }

    pub fn mass(&self) -> f64 {
        (0..self.len()).map(|i| self.weight(i) * self.density[i]).sum::<f64>()
            + self.atoms.iter().map(|a| a.total()).sum::<f64>()
    }

    fn locate(&self, t: f64) -> usize {
        match self.hi.binary_search_by(|h| h.partial_cmp(&t).unwrap()) {
            Ok(i) => (i + 1).min(self.len() - 1),
            Err(i) => i.min(self.len() - 1),
        }
    }
}

/// Common partition of `T` for several measures; returns the node intervals.
fn fold_partition(measures: &[&SpectralMeasure], q: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = measures[0].grid_size();
    for m in measures {
        if m.grid_size() != n {
            return Err(Error::GridMismatch { left: n, right: m.grid_size() });
        }
    }
    check_q(n, q)?;
    let cells = n / q;
    let h = TAU / n as f64;
    let period = TAU / q as f64;
    let mut cuts: Vec<Vec<f64>> = vec![Vec::new(); cells];
    for m in measures {
        let mesh = m.mesh();
        for c in mesh.split_cells() {
            let j = c / cells;
            let k = c % cells;
            for i in mesh.cell_nodes(c).skip(1) {
                cuts[k].push(mesh.lo(i) - j as f64 * period);
            }
        }
    }
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for (k, cs) in cuts.iter_mut().enumerate() {
        let a = k as f64 * h;
        let b = if k + 1 == cells { period } else { (k + 1) as f64 * h };
        cs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut prev = a;
        for &c in cs.iter() {
            if c - prev > 1e-14 && b - c > 1e-14 {
                lo.push(prev);
                hi.push(c);
                prev = c;
            }
        }
        lo.push(prev);
        hi.push(b);
    }
    Ok((lo, hi))
}

fn fold_on(mu: &SpectralMeasure, q: usize, lo: &[f64], hi: &[f64]) -> FoldedMeasure {
    let period = TAU / q as f64;
    let mesh = mu.mesh();
    let w = mu.density();
    let mut density = Vec::with_capacity(lo.len());
    let mut weights = Vec::with_capacity(lo.len());
    let mut slices = Vec::with_capacity(lo.len());
    for i in 0..lo.len() {
        let t = 0.5 * (lo[i] + hi[i]);
        let s: Vec<f64> = (0..q).map(|j| w[mesh.locate(t + j as f64 * period)]).collect();
        density.push(s.iter().sum());
        weights.push(normalized(&s));
        slices.push(s);
    }
    let mut atoms: Vec<FoldedAtom> = Vec::new();
    for a in mu.atoms() {
        let t = a.location.rem_euclid(period);
        let (t, j) = if period - t < ATOM_TOL {
            (0.0, ((a.location / period).round() as usize) % q)
        } else {
            (t, ((a.location - t) / period).round() as usize % q)
        };
        match atoms.iter_mut().find(|b| (b.location - t).abs() < ATOM_TOL) {
            Some(b) => b.masses[j] += a.mass,
            None => {
                let mut masses = vec![0.0; q];
                masses[j] = a.mass;
                atoms.push(FoldedAtom { location: t, masses });
            }
        }
    }
    FoldedMeasure {
        q,
        grid_size: mu.grid_size(),
        lo: lo.to_vec(),
        hi: hi.to_vec(),
        density,
        weights,
        slices,
        atoms,
    }
}

/// `μ̃` and the fibre weights `h^{(α)}`; `q` must divide the grid size.
pub fn fold_measure(mu: &SpectralMeasure, q: usize) -> Result<FoldedMeasure> {
    let (lo, hi) = fold_partition(&[mu], q)?;
    Ok(fold_on(mu, q, &lo, &hi))
}

/// Folds two measures onto the same partition of `T`.
fn fold_pair(a: &SpectralMeasure, b: &SpectralMeasure, q: usize) -> Result<(FoldedMeasure, FoldedMeasure)> {
    let (lo, hi) = fold_partition(&[a, b], q)?;
    Ok((fold_on(a, q, &lo, &hi), fold_on(b, q, &lo, &hi)))
}

/// Optimal fibre value `ψ̃(t)` for `y = 0`.
///
/// `p = 2`: `Σ_j e_{-x}(α_j) h_j`. For `q = 2` and other `p`, with
/// `A = h_0^{1/(p−1)}`, `B = h_1^{1/(p−1)}`: `(A − B)/(A + B)` when
/// `e_x(π) = −1`; for `p < 1` the fibre problem is concave and the optimum
/// sits at `±1`.
fn fibre_optimum(h: &[f64], x: i64, q: usize, p: f64) -> Result<Complex64> {
    if p == 2.0 {
        return Ok(h.iter().enumerate().map(|(j, &hj)| coset_phase(x, j, q) * hj).sum());
    }
    if q != 2 {
        return Err(Error::UnsupportedProblem(format!(
            "periodic problem with p = {p} is only available for q = 2"
        )));
    }
    if p == 1.0 {
        return Err(Error::UnsupportedExponent(p));
    }
    if x.rem_euclid(2) == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let (h0, h1) = (h[0], h[1]);
    let g = if p < 1.0 {
        if h0 >= h1 {
            1.0
        } else {
            -1.0
        }
    } else {
        let e = 1.0 / (p - 1.0);
        let (a, b) = (h0.powf(e), h1.powf(e));
        if a + b == 0.0 {
            0.0
        } else {
            (a - b) / (a + b)
        }
    };
    Ok(Complex64::new(g, 0.0))
}

/// `Σ_j |1 − e_x(α_j) ψ|^p h_j`, the fibre error.
fn fibre_error(h: &[f64], psi: Complex64, x: i64, q: usize, p: f64) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    h.iter()
        .enumerate()
        .map(|(j, &hj)| if hj == 0.0 { 0.0 } else { hj * (one - coset_phase(x, j, q).conj() * psi).norm().powf(p) })
        .sum()
}

fn psi_values(f: &FoldedMeasure, x: i64, p: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let nodes = f
        .weights
        .iter()
        .map(|h| fibre_optimum(h, x, f.q, p))
        .collect::<Result<Vec<_>>>()?;
    let atoms = f
        .atoms
        .iter()
        .map(|a| fibre_optimum(&a.weights(), x, f.q, p))
        .collect::<Result<Vec<_>>>()?;
    Ok((nodes, atoms))
}

/// `d_p(μ; x + qℤ) = ∫_T Σ_α |1 − e_x(α) ψ̃|^p h^{(α)} dμ̃`.
pub fn periodic_distance(mu: &SpectralMeasure, q: usize, x: i64, p: f64) -> Result<f64> {
    check_p(p)?;
    let f = fold_measure(mu, q)?;
    let (psi, psi_a) = psi_values(&f, x, p)?;
    let ac: f64 = (0..f.len())
        .map(|i| {
            if f.density[i] == 0.0 {
                0.0
            } else {
                f.weight(i) * f.density[i] * fibre_error(&f.weights[i], psi[i], x, q, p)
            }
        })
        .sum();
    let at: f64 = f
        .atoms
        .iter()
        .zip(&psi_a)
        .map(|(a, &s)| a.total() * fibre_error(&a.weights(), s, x, q, p))
        .sum();
    Ok(ac + at)
}

/// `d_2 = ∫_T (1 − |φ̃|²) dμ̃`.
pub fn periodic_distance2(mu: &SpectralMeasure, q: usize, x: i64) -> Result<f64> {
    let f = fold_measure(mu, q)?;
    let (psi, psi_a) = psi_values(&f, x, 2.0)?;
    let ac: f64 = (0..f.len())
        .map(|i| if f.density[i] == 0.0 { 0.0 } else { f.weight(i) * f.density[i] * (1.0 - psi[i].norm_sqr()) })
        .sum();
    let at: f64 = f
        .atoms
        .iter()
        .zip(&psi_a)
        .map(|(a, s)| a.total() * (1.0 - s.norm_sqr()))
        .sum();
    Ok(ac + at)
}

/// The same distance through `∫_T Σ_{α,β} (1 − e_x(β − α)) h^{(α)} h^{(β)} dμ̃`.
pub fn periodic_distance2_double_sum(mu: &SpectralMeasure, q: usize, x: i64) -> Result<f64> {
    let f = fold_measure(mu, q)?;
    let local = |h: &[f64]| -> f64 {
        let mut s = 0.0;
        for (a, &ha) in h.iter().enumerate() {
            for (b, &hb) in h.iter().enumerate() {
                // e_x(β − α) = conj(e_{-x}(β)) e_{-x}(α)
                let e = coset_phase(x, b, q).conj() * coset_phase(x, a, q);
                s += (1.0 - e.re) * ha * hb;
            }
        }
        s
    };
    let ac: f64 = (0..f.len())
        .map(|i| if f.density[i] == 0.0 { 0.0 } else { f.weight(i) * f.density[i] * local(&f.weights[i]) })
        .sum();
    let at: f64 = f.atoms.iter().map(|a| a.total() * local(&a.weights())).sum();
    Ok(ac + at)
}

#[derive(Debug, Clone)]
pub struct PeriodicProjection {
    pub folded: FoldedMeasure,
    /// `φ̃^{(y)}` on the nodes of the folded partition.
    pub fibre: Vec<Complex64>,
    /// `V_x φ̃` on the full circle.
    pub phi: GridFunction,
    /// `(location, value)` of `V_x φ̃` on the atoms of `μ`.
    pub atom_values: Vec<(f64, Complex64)>,
}

/// `φ̃^{(y)} = e_y Σ_α e_{y−x}(α) h^{(α)}` (for `p = 2`), or the `q = 2`
/// fibre optimum for other `p` with `y = 0`, unfolded by
/// `(V_x f)(γ) = e_x(α) f(γ − α)` on `α + T`.
pub fn periodic_projection(mu: &SpectralMeasure, q: usize, x: i64, y: i64, p: f64) -> Result<PeriodicProjection> {
    check_p(p)?;
    if p != 2.0 && y != 0 {
        return Err(Error::UnsupportedProblem("target y ≠ 0 needs p = 2".into()));
    }
    let f = fold_measure(mu, q)?;
    let fibre_at = |h: &[f64], t: f64| -> Result<Complex64> {
        if y == 0 {
            return fibre_optimum(h, x, q, p);
        }
        let s: Complex64 = h.iter().enumerate().map(|(j, &hj)| coset_phase(x - y, j, q) * hj).sum();
        Ok(Complex64::from_polar(1.0, (y as f64 * t).rem_euclid(TAU)) * s)
    };
    let fibre = (0..f.len())
        .map(|i| fibre_at(&f.weights[i], 0.5 * (f.lo[i] + f.hi[i])))
        .collect::<Result<Vec<_>>>()?;
    let period = TAU / q as f64;
    let mut cuts = Vec::new();
    for i in 1..f.len() {
        for j in 0..q {
            cuts.push(f.lo[i] + j as f64 * period);
        }
    }
    let mesh = Arc::new(Mesh::with_cuts(mu.grid_size(), cuts)?);
    let unfold = |g: f64, val: &dyn Fn(f64) -> Complex64| -> Complex64 {
        let j = ((g / period) as usize).min(q - 1);
        let t = g - j as f64 * period;
        coset_phase(x, j, q).conj() * val(t)
    };
    let vals = (0..mesh.len())
        .map(|i| unfold(mesh.mid(i), &|t| fibre[f.locate(t)]))
        .collect();
    let mut atom_values = Vec::new();
    for a in mu.atoms() {
        let t = a.location.rem_euclid(period);
        let fa = f.atoms.iter().find(|b| (b.location - t).abs() < ATOM_TOL || (period - (t - b.location).abs()) < ATOM_TOL);
        let v = match fa {
            Some(b) => {
                let w = b.weights();
                unfold(a.location, &|t| fibre_at(&w, t).unwrap_or(Complex64::new(0.0, 0.0)))
            }
            None => Complex64::new(0.0, 0.0),
        };
        atom_values.push((a.location, v));
    }
    Ok(PeriodicProjection {
        folded: f,
        fibre,
        phi: GridFunction::new(mesh, vals)?,
        atom_values,
    })
}

/// `∫ |1 − φ_p(ν)|^p dμ`; needs `μ ≪ ν`.
pub fn periodic_cross_error(nu: &SpectralMeasure, mu: &SpectralMeasure, q: usize, x: i64, p: f64) -> Result<f64> {
    check_p(p)?;
    check_abs_continuity(mu, nu)?;
    let (fn_, fm) = fold_pair(nu, mu, q)?;
    let (psi, _) = psi_values(&fn_, x, p)?;
    let one = Complex64::new(1.0, 0.0);
    let mut s = 0.0;
    for i in 0..fm.len() {
        for j in 0..q {
            let w = fm.slices[i][j];
            if w != 0.0 {
                s += fm.weight(i) * w * (one - coset_phase(x, j, q).conj() * psi[i]).norm().powf(p);
            }
        }
    }
    for a in &fm.atoms {
        let b = fn_
            .atoms
            .iter()
            .find(|b| (b.location - a.location).abs() < ATOM_TOL)
            .ok_or_else(|| Error::NotAbsolutelyContinuous("folded atom missing".into()))?;
        let psi_a = fibre_optimum(&b.weights(), x, q, p)?;
        for j in 0..q {
            if a.masses[j] != 0.0 {
                s += a.masses[j] * (one - coset_phase(x, j, q).conj() * psi_a).norm().powf(p);
            }
        }
    }
    Ok(s)
}

/// `∫ |φ_p(μ_0) − φ_p(μ_n)|^p dμ_0 = ∫_T |ψ̃_0 − ψ̃_n|^p dμ̃_0`.
pub fn periodic_drift(mu0: &SpectralMeasure, mun: &SpectralMeasure, q: usize, x: i64, p: f64) -> Result<f64> {
    check_p(p)?;
    let (f0, fnn) = fold_pair(mu0, mun, q)?;
    let (p0, _) = psi_values(&f0, x, p)?;
    let (pn, _) = psi_values(&fnn, x, p)?;
    let mut s = 0.0;
    for i in 0..f0.len() {
        if f0.density[i] != 0.0 {
            s += f0.weight(i) * f0.density[i] * (p0[i] - pn[i]).norm().powf(p);
        }
    }
    for a in &f0.atoms {
        let v0 = fibre_optimum(&a.weights(), x, q, p)?;
        let vn = match fnn.atoms.iter().find(|b| (b.location - a.location).abs() < ATOM_TOL) {
            Some(b) => fibre_optimum(&b.weights(), x, q, p)?,
            None => fibre_optimum(&vec![1.0 / q as f64; q], x, q, p)?,
        };
        s += a.total() * (v0 - vn).norm().powf(p);
    }
    Ok(s)
}

/// Fibre value for atoms on the line folded by `2πℤ`: `α = 2πk`,
/// `e_{-x}(α) = e^{-2πi x k}` with the phase reduced exactly.
fn line_phase(x: f64, k: i64) -> Complex64 {
    let r = (x * k as f64).rem_euclid(1.0);
    Complex64::from_polar(1.0, -TAU * r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineFibre {
    pub location: f64,
    pub mass: f64,
    /// `φ̃(t) = Σ_α e_{-x}(α) h^{(α)}(t)`.
    pub value: Complex64,
}

fn fold_line(atoms: &[Atom]) -> Vec<(f64, Vec<(i64, f64)>)> {
    let mut out: Vec<(f64, Vec<(i64, f64)>)> = Vec::new();
    for a in atoms {
        let k = (a.location / TAU).floor();
        let mut t = a.location - k * TAU;
        let mut k = k as i64;
        if TAU - t < ATOM_TOL {
            t = 0.0;
            k += 1;
        }
        match out.iter_mut().find(|(s, _)| (s - t).abs() < ATOM_TOL) {
            Some((_, v)) => v.push((k, a.mass)),
            None => out.push((t, vec![(k, a.mass)])),
        }
    }
    out
}

/// `L²` projection for a purely atomic measure on `ℝ`, observed on `x + ℤ`
/// with the dual folded by `A = 2πℤ`.
pub fn atomic_periodic_projection(atoms: &[Atom], x: f64) -> Vec<LineFibre> {
    fold_line(atoms)
        .into_iter()
        .map(|(t, parts)| {
            let mass: f64 = parts.iter().map(|p| p.1).sum();
            let value = if mass > 0.0 {
                parts.iter().map(|&(k, m)| line_phase(x, k) * (m / mass)).sum()
            } else {
                Complex64::new(0.0, 0.0)
            };
            LineFibre { location: t, mass, value }
        })
        .collect()
}

pub fn atomic_periodic_distance2(atoms: &[Atom], x: f64) -> f64 {
    atomic_periodic_projection(atoms, x)
        .iter()
        .map(|f| f.mass * (1.0 - f.value.norm_sqr()))
        .sum()
}

/// `∫_T |φ̃_0 − φ̃_n|² dμ̃_0`; fibres not charged by `μ̃_n` take `φ̃_n = 0`.
pub fn atomic_periodic_drift(atoms0: &[Atom], atomsn: &[Atom], x: f64) -> f64 {
    let f0 = atomic_periodic_projection(atoms0, x);
    let fnn = atomic_periodic_projection(atomsn, x);
    f0.iter()
        .map(|a| {
            let vn = fnn
                .iter()
                .find(|b| (b.location - a.location).abs() < ATOM_TOL)
                .map_or(Complex64::new(0.0, 0.0), |b| b.value);
            a.mass * (a.value - vn).norm_sqr()
        })
        .sum()
}

/// `∫ |1 − φ_2(ν)|² dμ` for atoms on the line; fibres of `μ` not charged by
/// `ν` take `φ̃ = 0`.
pub fn atomic_periodic_cross_error(nu: &[Atom], mu: &[Atom], x: f64) -> f64 {
    let f = atomic_periodic_projection(nu, x);
    let one = Complex64::new(1.0, 0.0);
    fold_line(mu)
        .into_iter()
        .map(|(t, parts)| {
            let v = f
                .iter()
                .find(|b| (b.location - t).abs() < ATOM_TOL)
                .map_or(Complex64::new(0.0, 0.0), |b| b.value);
            parts
                .iter()
                .map(|&(k, m)| m * (one - line_phase(x, k).conj() * v).norm_sqr())
                .sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_obs::solve_p2;
    use crate::measure::{AnalyticHints, Piecewise};
    use std::f64::consts::PI;

    fn ex75a(n: f64) -> SpectralMeasure {
        let p = Piecewise::new()
            .constant(0.0, 1.0 / n, n)
            .constant(1.0 / n, PI, 1.0)
            .constant(PI, PI + 1.0 / n, n);
        SpectralMeasure::from_profile(Arc::new(p), 1 << 12, vec![], AnalyticHints::default()).unwrap()
    }

    #[test]
    fn fold_weights_sum_to_one() {
        let mu = ex75a(8.0);
        let f = fold_measure(&mu, 2).unwrap();
        for h in &f.weights {
            assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        assert!((f.mass() - mu.total_mass()).abs() < 1e-12);
        assert!(fold_measure(&mu, 3).is_err());
    }

    #[test]
    fn haar_distance_is_one() {
        let lam = SpectralMeasure::haar(1024).unwrap();
        assert!((periodic_distance2(&lam, 2, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((periodic_distance2(&lam, 4, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spike_family_distance() {
        for n in [8.0, 16.0, 32.0] {
            let d = periodic_distance2(&ex75a(n), 2, 1).unwrap();
            assert!((d - 1.0 / PI).abs() < 1e-12, "{d}");
        }
    }

    #[test]
    fn odd_cosine_family_distance() {
        // w = 1 + cos((2n+1)γ): w̃ = 2 and φ̃ = cos((2n+1)γ), so d = 2 ∫_T sin² dλ = 1/2
        for n in [1.0, 4.0] {
            let mu = SpectralMeasure::from_fn(1 << 12, move |g| 1.0 + ((2.0 * n + 1.0) * g).cos()).unwrap();
            let d = periodic_distance2(&mu, 2, 1).unwrap();
            assert!((d - 0.5).abs() < 1e-12, "{d}");
            let ds = periodic_distance2_double_sum(&mu, 2, 1).unwrap();
            assert!((d - ds).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_truncated_finite_solve() {
        let mu = SpectralMeasure::from_fn(1 << 12, |g| 2.0 + g.cos() + 0.4 * (2.0 * g).sin()).unwrap();
        for (q, x) in [(2usize, 1i64), (4, 1), (4, 3), (8, 5)] {
            let d = periodic_distance2(&mu, q, x).unwrap();
            let freqs: Vec<i64> = (-96..=96).filter(|s| (s - x).rem_euclid(q as i64) == 0 && *s != 0).collect();
            let f = solve_p2(&mu, &freqs).unwrap().distance;
            assert!((d - f).abs() < 1e-9, "q = {q}: {d} vs {f}");
        }
    }

    #[test]
    fn projection_residual_is_orthogonal() {
        let mu = SpectralMeasure::from_fn(1 << 12, |g| 2.0 + g.cos() + 0.4 * (2.0 * g).sin()).unwrap();
        let proj = periodic_projection(&mu, 4, 1, 0, 2.0).unwrap();
        let mesh = proj.phi.mesh().clone();
        let (w, _) = mu.values_on(&mesh);
        for k in -4..=4i64 {
            let x = 1 + 4 * k;
            let s: Complex64 = (0..mesh.len())
                .map(|i| {
                    (Complex64::new(1.0, 0.0) - proj.phi.values()[i])
                        * Complex64::from_polar(mesh.weight(i) * w[i], -(x as f64) * mesh.mid(i))
                })
                .sum();
            assert!(s.norm() < 1e-10, "x = {x}: {s}");
        }
    }

    #[test]
    fn card2_general_p_is_stationary() {
        let mu = SpectralMeasure::from_fn(1 << 10, |g| 2.0 + g.cos() + 0.4 * (3.0 * g).sin()).unwrap();
        for p in [1.5, 3.0] {
            let f = fold_measure(&mu, 2).unwrap();
            for h in f.weights.iter().step_by(37) {
                let g = fibre_optimum(h, 1, 2, p).unwrap();
                let e = fibre_error(h, g, 1, 2, p);
                for d in [-1e-4, 1e-4] {
                    assert!(fibre_error(h, g + d, 1, 2, p) >= e - 1e-15);
                }
                // closed form 2^p (A + B)^{1−p} h_0 h_1
                let r = 1.0 / (p - 1.0);
                let closed = 2f64.powf(p) * (h[0].powf(r) + h[1].powf(r)).powf(1.0 - p) * h[0] * h[1];
                assert!((e - closed).abs() < 1e-13);
            }
        }
        let mu = ex75a(8.0);
        assert!((periodic_distance(&mu, 2, 1, 1.5).unwrap() - 1.0 / PI).abs() < 1e-12);
        assert!(matches!(periodic_distance(&mu, 2, 1, 1.0), Err(Error::UnsupportedExponent(_))));
        assert!(matches!(periodic_distance(&mu, 4, 1, 1.5), Err(Error::UnsupportedProblem(_))));
    }

    #[test]
    fn line_atoms_drift() {
        let a0 = [Atom::new(0.0, 1.0)];
        for n in [1.0, 5.0, 50.0] {
            let an = [Atom::new(0.0, 1.0), Atom::new((2.0 * n + 1.0) * TAU, 1.0)];
            assert!((atomic_periodic_drift(&a0, &an, 0.5) - 1.0).abs() < 1e-12);
            assert!(atomic_periodic_projection(&an, 0.5)[0].value.norm() < 1e-15);
        }
        let an = [Atom::new(0.0, 1.0), Atom::new(2.0 * TAU, 0.5)];
        assert!(atomic_periodic_drift(&a0, &an, 0.5).abs() < 1e-15);
        // δ_0 + δ_{6π}: φ̃(0) = 0, so the error of φ over either measure is its mass
        let an = [Atom::new(0.0, 1.0), Atom::new(3.0 * TAU, 1.0)];
        assert!((atomic_periodic_cross_error(&an, &a0, 0.5) - 1.0).abs() < 1e-15);
        assert!((atomic_periodic_cross_error(&an, &an, 0.5) - atomic_periodic_distance2(&an, 0.5)).abs() < 1e-15);
        assert!((atomic_periodic_distance2(&an, 0.5) - 2.0).abs() < 1e-15);
    }
}
