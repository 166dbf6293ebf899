//! FFT-backed moments and trigonometric-polynomial evaluation on a mesh.
//!
//! Unsplit cells are handled by one FFT over the cell centers
//! `γ_k = (k + ½)·2π/N`; nodes of split cells are summed directly.

use std::cell::RefCell;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::mesh::Mesh;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_forward(data: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(data.len()));
    fft.process(data);
}

/// Unnormalized inverse transform.
pub(crate) fn fft_inverse(data: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(data.len()));
    fft.process(data);
}

/// `∫ v(γ) e^{-ijγ} dλ(γ)` for `j = 0..=k_max`, with `v` given per node.
pub fn mesh_moments(mesh: &Mesh, vals: &[f64], k_max: usize) -> Vec<Complex64> {
    let n = mesh.grid_size();
    let h = mesh.cell_width();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut extras: Vec<(f64, f64)> = Vec::new();
    for (k, slot) in buf.iter_mut().enumerate() {
        let r = mesh.cell_nodes(k);
        if r.len() == 1 {
            *slot = Complex64::new(vals[r.start], 0.0);
        } else {
            for i in r {
                extras.push((mesh.mid(i), mesh.weight(i) * vals[i]));
            }
        }
    }
    fft_forward(&mut buf);
    let inv_n = 1.0 / n as f64;
    let mut out: Vec<Complex64> = (0..=k_max)
        .map(|j| buf[j % n] * Complex64::from_polar(inv_n, -(j as f64) * h * 0.5))
        .collect();
    for (g, c) in extras {
        add_phased(&mut out, g, c);
    }
    out
}

/// Adds `c·e^{-ijg}` to `out[j]` for every `j`.
pub(crate) fn add_phased(out: &mut [Complex64], g: f64, c: f64) {
    if c == 0.0 {
        return;
    }
    let step = Complex64::from_polar(1.0, -g);
    let mut z = Complex64::new(c, 0.0);
    for (j, o) in out.iter_mut().enumerate() {
        // re-anchor periodically to keep rounding from accumulating
        if j % 64 == 0 {
            z = Complex64::from_polar(c, -(j as f64) * g);
        }
        *o += z;
        z *= step;
    }
}

/// Evaluates `Σ c_j e^{i x_j γ}` at every node midpoint.
pub fn eval_trig(mesh: &Mesh, freqs: &[i64], coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = mesh.grid_size();
    let half = (n / 2) as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); mesh.len()];
    if freqs.is_empty() {
        return out;
    }
    if freqs.iter().all(|x| x.abs() < half) {
        let h = mesh.cell_width();
        let mut spec = vec![Complex64::new(0.0, 0.0); n];
        for (&x, &c) in freqs.iter().zip(coeffs) {
            spec[x.rem_euclid(n as i64) as usize] += c * Complex64::from_polar(1.0, x as f64 * h * 0.5);
        }
        fft_inverse(&mut spec);
        for k in 0..n {
            let r = mesh.cell_nodes(k);
            if r.len() == 1 {
                out[r.start] = spec[k];
            } else {
                for i in r {
                    out[i] = eval_trig_at(freqs, coeffs, mesh.mid(i));
                }
            }
        }
    } else {
        for (i, o) in out.iter_mut().enumerate() {
            *o = eval_trig_at(freqs, coeffs, mesh.mid(i));
        }
    }
    out
}

pub fn eval_trig_at(freqs: &[i64], coeffs: &[Complex64], gamma: f64) -> Complex64 {
    freqs
        .iter()
        .zip(coeffs)
        .map(|(&x, &c)| c * Complex64::from_polar(1.0, (x as f64 * gamma).rem_euclid(TAU)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_cosine_are_exact() {
        let mesh = Mesh::with_cuts(64, vec![0.013, 1.7]).unwrap();
        let v: Vec<f64> = (0..mesh.len()).map(|i| 2.0 + mesh.mid(i).cos()).collect();
        let m = mesh_moments(&mesh, &v, 3);
        assert!((m[0].re - 2.0).abs() < 1e-4);
        assert!((m[1] - Complex64::new(0.5, 0.0)).norm() < 1e-4);
        let uni = Mesh::uniform(64).unwrap();
        let v: Vec<f64> = (0..uni.len()).map(|i| 2.0 + uni.mid(i).cos()).collect();
        let m = mesh_moments(&uni, &v, 3);
        assert!((m[0].re - 2.0).abs() < 1e-14);
        assert!((m[1] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!(m[2].norm() < 1e-14);
    }

    #[test]
    fn trig_eval_matches_direct() {
        let mesh = Mesh::with_cuts(32, vec![0.3]).unwrap();
        let f = [-3i64, 0, 5];
        let c = [Complex64::new(1.0, 2.0), Complex64::new(0.5, 0.0), Complex64::new(0.0, -1.0)];
        let fast = eval_trig(&mesh, &f, &c);
        for i in 0..mesh.len() {
            let d = eval_trig_at(&f, &c, mesh.mid(i));
            assert!((fast[i] - d).norm() < 1e-12);
        }
    }
}
