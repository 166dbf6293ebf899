//! Cell partition of the circle `[0, 2π)`.
//!
//! The base partition has `N` equal cells. A cell may be split into sub-cells
//! so that piecewise densities with breakpoints off the uniform grid, and
//! densities with algebraic singularities, integrate accurately. Every
//! quadrature in the crate is a midpoint rule over the nodes of a mesh.

use std::f64::consts::TAU;
use std::ops::Range;

use crate::error::{Error, Result};

/// Cuts closer than this to an existing boundary are dropped.
const CUT_EPS: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    n: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cell_start: Vec<usize>,
}

pub fn check_grid_size(n: usize) -> Result<()> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "grid size must be a power of two >= 8, got {n}"
        )));
    }
    Ok(())
}

impl Mesh {
    pub fn uniform(n: usize) -> Result<Self> {
        Self::with_cuts(n, Vec::new())
    }

    /// Base partition with additional cut points (anything in `(0, 2π)`).
    pub fn with_cuts(n: usize, mut cuts: Vec<f64>) -> Result<Self> {
        check_grid_size(n)?;
        let h = TAU / n as f64;
        cuts.retain(|c| c.is_finite() && *c > 0.0 && *c < TAU);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut lo = Vec::with_capacity(n + cuts.len());
        let mut hi = Vec::with_capacity(n + cuts.len());
        let mut cell_start = Vec::with_capacity(n + 1);
        let mut it = cuts.into_iter().peekable();
        for k in 0..n {
            cell_start.push(lo.len());
            let a = k as f64 * h;
            let b = if k + 1 == n { TAU } else { (k + 1) as f64 * h };
            let mut prev = a;
            while let Some(&c) = it.peek() {
                if c >= b {
                    break;
                }
                it.next();
                if c - prev > CUT_EPS && b - c > CUT_EPS {
                    lo.push(prev);
                    hi.push(c);
                    prev = c;
                }
            }
            lo.push(prev);
            hi.push(b);
        }
        cell_start.push(lo.len());
        Ok(Self {
            n,
            lo,
            hi,
            cell_start,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.lo.len() == self.n
    }

    pub fn cell_width(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn lo(&self, i: usize) -> f64 {
        self.lo[i]
    }

    pub fn hi(&self, i: usize) -> f64 {
        self.hi[i]
    }

    pub fn mid(&self, i: usize) -> f64 {
        0.5 * (self.lo[i] + self.hi[i])
    }

    /// Normalized Haar measure of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        (self.hi[i] - self.lo[i]) / TAU
    }

    pub fn cell_nodes(&self, k: usize) -> Range<usize> {
        self.cell_start[k]..self.cell_start[k + 1]
    }

    pub fn is_split(&self, k: usize) -> bool {
        self.cell_start[k + 1] - self.cell_start[k] > 1
    }

    pub fn split_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&k| self.is_split(k))
    }

    /// Cut points that are not base cell boundaries.
    pub fn cuts(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for k in self.split_cells() {
            for i in self.cell_nodes(k).skip(1) {
                out.push(self.lo[i]);
            }
        }
        out
    }

    /// Common refinement of two meshes with the same base grid.
    pub fn union(&self, other: &Mesh) -> Result<Mesh> {
        if self.n != other.n {
            return Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            });
        }
        if self == other {
            return Ok(self.clone());
        }
        let mut cuts = self.cuts();
        cuts.extend(other.cuts());
        Mesh::with_cuts(self.n, cuts)
    }

    /// Node containing `gamma` (taken modulo 2π).
    pub fn locate(&self, gamma: f64) -> usize {
        let g = gamma.rem_euclid(TAU);
        let k = ((g / self.cell_width()) as usize).min(self.n - 1);
        let r = self.cell_nodes(k);
        for i in r.clone() {
            if g < self.hi[i] {
                return i;
            }
        }
        r.end - 1
    }

    /// Values indexed by this mesh, looked up at the nodes of `target`.
    ///
    /// `target` must refine `self`; each target node takes the value of the
    /// node containing its midpoint.
    pub fn resample<T: Copy>(&self, vals: &[T], target: &Mesh) -> Vec<T> {
        debug_assert_eq!(vals.len(), self.len());
        if self == target {
            return vals.to_vec();
        }
        let mut out = Vec::with_capacity(target.len());
        for k in 0..self.n {
            let src = self.cell_nodes(k);
            if src.len() == 1 {
                for _ in target.cell_nodes(k) {
                    out.push(vals[src.start]);
                }
                continue;
            }
            let mut s = src.start;
            for t in target.cell_nodes(k) {
                let m = target.mid(t);
                while s + 1 < src.end && m >= self.hi[s] {
                    s += 1;
                }
                out.push(vals[s]);
            }
        }
        out
    }

    /// Per-cell Haar-weighted mean of node values.
    pub fn cell_means(&self, vals: &[f64]) -> Vec<f64> {
        let h = self.cell_width();
        (0..self.n)
            .map(|k| {
                let r = self.cell_nodes(k);
                if r.len() == 1 {
                    return vals[r.start];
                }
                r.map(|i| vals[i] * (self.hi[i] - self.lo[i])).sum::<f64>() / h
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_weights_sum_to_one() {
        let m = Mesh::uniform(64).unwrap();
        let s: f64 = (0..m.len()).map(|i| m.weight(i)).sum();
        assert!((s - 1.0).abs() < 1e-14);
        assert!(m.is_uniform());
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(Mesh::uniform(100).is_err());
        assert!(Mesh::uniform(4).is_err());
    }

    #[test]
    fn cuts_split_cells_and_union_refines() {
        let a = Mesh::with_cuts(16, vec![0.05, 3.0]).unwrap();
        assert_eq!(a.len(), 18);
        let b = Mesh::with_cuts(16, vec![0.07]).unwrap();
        let u = a.union(&b).unwrap();
        assert_eq!(u.len(), 19);
        let s: f64 = (0..u.len()).map(|i| u.weight(i)).sum();
        assert!((s - 1.0).abs() < 1e-14);
        let vals: Vec<usize> = (0..a.len()).collect();
        let r = a.resample(&vals, &u);
        assert_eq!(r[0], 0);
        assert_eq!(r[1], 1);
        assert_eq!(r[2], 1);
        assert_eq!(u.locate(0.06), 1);
        assert_eq!(u.locate(TAU + 0.01), 0);
    }

    #[test]
    fn aligned_cuts_are_ignored() {
        let m = Mesh::with_cuts(16, vec![TAU / 16.0 * 3.0, std::f64::consts::PI]).unwrap();
        assert!(m.is_uniform());
    }
}
