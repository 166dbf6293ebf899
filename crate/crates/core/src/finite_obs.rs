//! Approximating `1` by a finite set of characters `{e_x : x ∈ S}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{eval_trig, eval_trig_at};
use crate::interpolation::check_p;
use crate::measure::{check_abs_continuity, SpectralMeasure};

/// Relative eigenvalue cutoff of the pseudo-solve.
pub const RANK_TOL: f64 = 1e-12;
/// Floor applied to residual moduli before forming IRLS weights.
pub const IRLS_FLOOR: f64 = 1e-12;
/// Weight damping for `p < 2`.
pub const IRLS_DAMPING: f64 = 0.5;
pub const IRLS_TOL: f64 = 1e-10;
pub const IRLS_MAX_ITER: usize = 500;
/// Residual norm below which an added character counts as dependent.
pub const DEPENDENCE_TOL: f64 = 1e-9;

/// `μ̂(j)` for `|j| ≤ K`.
struct FourierTable(Vec<Complex64>);

impl FourierTable {
    fn new(c: Vec<Complex64>) -> Self {
        Self(c)
    }

    fn get(&self, j: i64) -> Complex64 {
        let c = self.0[j.unsigned_abs() as usize];
        if j < 0 {
            c.conj()
        } else {
            c
        }
    }
}

fn check_freqs(freqs: &[i64]) -> Result<()> {
    if freqs.is_empty() {
        return Err(Error::Input("frequency set is empty".into()));
    }
    if freqs.contains(&0) {
        return Err(Error::Input("frequency set must not contain 0".into()));
    }
    let mut s = freqs.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != freqs.len() {
        return Err(Error::Input("duplicate frequencies".into()));
    }
    Ok(())
}

fn span(freqs: &[i64]) -> usize {
    let max = freqs.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as usize;
    2 * max
}

fn gram_from(table: &FourierTable, freqs: &[i64]) -> DMatrix<Complex64> {
    let k = freqs.len();
    DMatrix::from_fn(k, k, |i, j| table.get(freqs[i] - freqs[j]))
}

/// `G[i][j] = ∫ e_{x_j} conj(e_{x_i}) dμ = μ̂(x_i − x_j)`.
pub fn gram_matrix(mu: &SpectralMeasure, freqs: &[i64]) -> Result<DMatrix<Complex64>> {
    check_freqs(freqs)?;
    let table = FourierTable::new(mu.fourier_coefficients(span(freqs)));
    Ok(gram_from(&table, freqs))
}

/// Minimum-norm solution of a Hermitian positive semidefinite system.
fn pseudo_solve(g: &DMatrix<Complex64>, rhs: &DVector<Complex64>) -> (DVector<Complex64>, usize) {
    let eig = g.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut x = DVector::zeros(rhs.len());
    let mut rank = 0;
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > RANK_TOL * max {
            rank += 1;
            let v = eig.eigenvectors.column(k);
            let c = v.adjoint() * rhs;
            x += v * (c[(0, 0)] / l);
        }
    }
    (x, rank)
}

fn quad_form(g: &DMatrix<Complex64>, a: &DVector<Complex64>) -> f64 {
    (a.adjoint() * g * a)[(0, 0)].re
}

#[derive(Debug, Clone, PartialEq)]
pub struct P2Solution {
    pub coeffs: Vec<Complex64>,
    pub distance: f64,
    pub rank: usize,
}

/// `L²` projection through the normal equations `G a = r`, `r_i = μ̂(x_i)`.
pub fn solve_p2(mu: &SpectralMeasure, freqs: &[i64]) -> Result<P2Solution> {
    check_freqs(freqs)?;
    let table = FourierTable::new(mu.fourier_coefficients(span(freqs)));
    let g = gram_from(&table, freqs);
    let rhs = DVector::from_iterator(freqs.len(), freqs.iter().map(|&x| table.get(x)));
    let (a, rank) = pseudo_solve(&g, &rhs);
    let cross: Complex64 = a.iter().zip(rhs.iter()).map(|(a, r)| a * r.conj()).sum();
    let distance = (table.get(0).re - 2.0 * cross.re + quad_form(&g, &a)).max(0.0);
    Ok(P2Solution {
        coeffs: a.iter().cloned().collect(),
        distance,
        rank,
    })
}

fn residuals(mu: &SpectralMeasure, freqs: &[i64], coeffs: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let one = Complex64::new(1.0, 0.0);
    let tau = eval_trig(mu.mesh(), freqs, coeffs);
    let r = tau.into_iter().map(|t| one - t).collect();
    let ra = mu
        .atoms()
        .iter()
        .map(|a| one - eval_trig_at(freqs, coeffs, a.location))
        .collect();
    (r, ra)
}

/// `∫ |1 − Σ a_j e_{x_j}|^p dμ` by quadrature.
pub fn objective(mu: &SpectralMeasure, freqs: &[i64], coeffs: &[Complex64], p: f64) -> f64 {
    let (r, ra) = residuals(mu, freqs, coeffs);
    let w = mu.density();
    let ac = mu.haar_integral(|i| if w[i] == 0.0 { 0.0 } else { w[i] * r[i].norm().powf(p) });
    ac + mu
        .atoms()
        .iter()
        .zip(&ra)
        .map(|(a, r)| a.mass * r.norm().powf(p))
        .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub coeffs: Vec<Complex64>,
    pub distance: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted iteration, starting from the `L²` solution.
    pub objective_trace: Vec<f64>,
}

/// `L^p` projection by iteratively reweighted least squares, `p ≥ 1`.
///
/// Each step solves the weighted normal equations with weights
/// `|1 − τ|^{p−2}` and then backtracks along the step until the objective
/// decreases, so the trace is monotone.
pub fn solve_lp(mu: &SpectralMeasure, freqs: &[i64], p: f64) -> Result<LpSolution> {
    check_p(p)?;
    if p < 1.0 {
        return Err(Error::UnsupportedExponent(p));
    }
    let start = solve_p2(mu, freqs)?;
    let mut a = DVector::from_vec(start.coeffs.clone());
    let mut f = objective(mu, freqs, a.as_slice(), p);
    let mut trace = vec![f];
    if p == 2.0 {
        return Ok(LpSolution {
            coeffs: start.coeffs,
            distance: f,
            iterations: 0,
            converged: true,
            objective_trace: trace,
        });
    }
    let k_max = span(freqs);
    let mut prev_w: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < IRLS_MAX_ITER {
        iterations += 1;
        let (r, ra) = residuals(mu, freqs, a.as_slice());
        let weight = |z: &Complex64| z.norm().max(IRLS_FLOOR).powf(p - 2.0);
        let mut u: Vec<f64> = r.iter().map(weight).collect();
        let mut ua: Vec<f64> = ra.iter().map(weight).collect();
        if p < 2.0 {
            if let Some((pu, pa)) = &prev_w {
                u.iter_mut().zip(pu).for_each(|(x, y)| *x = IRLS_DAMPING * *x + (1.0 - IRLS_DAMPING) * y);
                ua.iter_mut().zip(pa).for_each(|(x, y)| *x = IRLS_DAMPING * *x + (1.0 - IRLS_DAMPING) * y);
            }
            prev_w = Some((u.clone(), ua.clone()));
        } else {
            let umax = u.iter().chain(&ua).cloned().fold(0.0, f64::max);
            u.iter_mut().chain(ua.iter_mut()).for_each(|x| *x = x.max(IRLS_FLOOR * umax));
        }
        let atoms = mu.atoms().to_vec();
        let atom_u = |at: &crate::measure::Atom| {
            atoms
                .iter()
                .position(|b| b.location == at.location)
                .map_or(0.0, |k| ua[k])
        };
        let table = FourierTable::new(mu.weighted_fourier(Some(&u), &atom_u, k_max));
        let g = gram_from(&table, freqs);
        let rhs = DVector::from_iterator(freqs.len(), freqs.iter().map(|&x| table.get(x)));
        let (target, _) = pseudo_solve(&g, &rhs);
        let dir = &target - &a;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand = &a + &dir * Complex64::new(t, 0.0);
            let fc = objective(mu, freqs, cand.as_slice(), p);
            if fc <= f {
                accepted = Some((cand, fc));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            converged = true;
            break;
        };
        let change = (&cand - &a).iter().map(|z| z.norm()).fold(0.0, f64::max);
        a = cand;
        f = fc;
        trace.push(f);
        if change < IRLS_TOL {
            converged = true;
            break;
        }
    }
    Ok(LpSolution {
        coeffs: a.iter().cloned().collect(),
        distance: f,
        iterations,
        converged,
        objective_trace: trace,
    })
}

/// Coefficients of `φ_p(ν; S)` plugged into the objective of `μ`.
pub fn finite_cross_error(nu: &SpectralMeasure, mu: &SpectralMeasure, freqs: &[i64], p: f64) -> Result<f64> {
    check_p(p)?;
    check_abs_continuity(mu, nu)?;
    let coeffs = if p == 2.0 {
        solve_p2(nu, freqs)?.coeffs
    } else {
        solve_lp(nu, freqs, p)?.coeffs
    };
    Ok(objective(mu, freqs, &coeffs, p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Augmented {
    /// `S` followed by the added frequency.
    pub freqs: Vec<i64>,
    /// For each target `y`, coefficients of `Q e_y` over `freqs`.
    pub projections: Vec<Vec<Complex64>>,
}

/// `L²` projections onto `span{e_s : s ∈ S ∪ {x}}` updated from those onto
/// `span{e_s : s ∈ S}` by `Q e_y = P e_y + ⟨e_y, r⟩ r / ‖r‖²`, `r = e_x − P e_x`.
pub fn augment_projection(mu: &SpectralMeasure, freqs: &[i64], x: i64, targets: &[i64]) -> Result<Augmented> {
    check_freqs(freqs)?;
    if freqs.contains(&x) {
        return Err(Error::Input(format!("frequency {x} already in the set")));
    }
    let mut all = freqs.to_vec();
    all.push(x);
    let reach = all
        .iter()
        .chain(targets)
        .map(|v| v.unsigned_abs())
        .max()
        .unwrap_or(0) as usize;
    let table = FourierTable::new(mu.fourier_coefficients(2 * reach));
    let g = gram_from(&table, freqs);
    let project = |y: i64| {
        let rhs = DVector::from_iterator(freqs.len(), freqs.iter().map(|&s| table.get(s - y)));
        pseudo_solve(&g, &rhs).0
    };
    let px = project(x);
    let r = DVector::from_iterator(all.len(), px.iter().map(|c| -c).chain([Complex64::new(1.0, 0.0)]));
    let g_all = gram_from(&table, &all);
    let rr = quad_form(&g_all, &r);
    if rr.max(0.0).sqrt() <= DEPENDENCE_TOL * table.get(0).re.sqrt() {
        return Err(Error::DependentCharacter);
    }
    let projections = targets
        .iter()
        .map(|&y| {
            let py = project(y);
            // ⟨e_y, r⟩ = Σ_j conj(r_j) μ̂(t_j − y)
            let inner: Complex64 = all.iter().zip(r.iter()).map(|(&t, rj)| rj.conj() * table.get(t - y)).sum();
            let scale = inner / rr;
            py.iter()
                .cloned()
                .chain([Complex64::new(0.0, 0.0)])
                .zip(r.iter())
                .map(|(a, rj)| a + rj * scale)
                .collect()
        })
        .collect();
    Ok(Augmented { freqs: all, projections })
}
