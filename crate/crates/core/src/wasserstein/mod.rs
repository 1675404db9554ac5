//! Empirical Wasserstein distances between equal-size sample sets.
//!
//! Exact values come from the sorted coupling in one dimension and from a
//! dense assignment solver otherwise; an entropic (Sinkhorn) estimator covers
//! sizes beyond the exact solver's cap.

mod assignment;
mod sinkhorn;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mc::McRng;
use crate::ou::standard_normal_vec;

pub use assignment::{solve as solve_assignment, solve_sparse as solve_assignment_sparse};
pub use sinkhorn::{wp_sinkhorn, SinkhornResult};

/// Default size limit for [`wp_exact`].
pub const DEFAULT_EXACT_CAP: usize = 2000;

/// `n` points in `ℝ^d` with uniform weights, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    n: usize,
    dim: usize,
    data: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(n: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if n == 0 {
            return Err(invalid("empirical measure needs at least one sample"));
        }
        if data.len() != n * dim {
            return Err(Error::LengthMismatch { expected: n * dim, got: data.len() });
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("sample entry {bad}")));
        }
        Ok(EmpiricalMeasure { n, dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::LengthMismatch { expected: dim, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), dim, data)
    }

    /// One-dimensional measure from scalar samples.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::new(xs.len(), 1, xs.to_vec())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

fn check_pair(x: &EmpiricalMeasure, y: &EmpiricalMeasure, p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("Wasserstein order must be finite and >= 1, got {p}")));
    }
    if x.dim != y.dim {
        return Err(Error::LengthMismatch { expected: x.dim, got: y.dim });
    }
    if x.n != y.n {
        return Err(invalid(format!(
            "sample sets must have equal sizes, got {} and {}",
            x.n, y.n
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn ground_cost(a: &[f64], b: &[f64], p: f64) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
    if p == 2.0 {
        sq
    } else if p == 1.0 {
        sq.sqrt()
    } else {
        sq.powf(p / 2.0)
    }
}

/// `W_p` between two one-dimensional sample sets via the monotone coupling.
pub fn wp_1d(x: &EmpiricalMeasure, y: &EmpiricalMeasure, p: f64) -> Result<f64> {
    check_pair(x, y, p)?;
    if x.dim != 1 {
        return Err(invalid(format!("sorted coupling needs d = 1, got d = {}", x.dim)));
    }
    let mut a = x.data.clone();
    let mut b = y.data.clone();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let total: f64 = a.iter().zip(&b).map(|(u, v)| (u - v).abs().powf(p)).sum();
    Ok((total / x.n as f64).powf(1.0 / p))
}

/// Neighbour count per direction for the candidate graph of the exact solver.
const CANDIDATES: usize = 12;

/// Below this size the dense solver is used directly.
const DENSE_LIMIT: usize = 128;

/// For each `x_i`, its `k` nearest `y_j`, plus every `x_i` that is among the
/// `k` nearest rows of some `y_j`.
fn knn_candidates(x: &EmpiricalMeasure, y: &EmpiricalMeasure, k: usize) -> Vec<Vec<usize>> {
    let n = x.n;
    let k = k.min(n);
    let nearest = |a: &EmpiricalMeasure, b: &EmpiricalMeasure| -> Vec<Vec<usize>> {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut d: Vec<(f64, usize)> =
                    (0..n).map(|j| (ground_cost(a.row(i), b.row(j), 2.0), j)).collect();
                if k < n {
                    d.select_nth_unstable_by(k - 1, |p, q| p.0.total_cmp(&q.0));
                }
                d[..k].iter().map(|e| e.1).collect()
            })
            .collect()
    };
    let mut cand = nearest(x, y);
    for (j, rows) in nearest(y, x).into_iter().enumerate() {
        for i in rows {
            cand[i].push(j);
        }
    }
    cand
}

/// Exact `W_p` via optimal assignment, limited to [`DEFAULT_EXACT_CAP`] points.
pub fn wp_exact(x: &EmpiricalMeasure, y: &EmpiricalMeasure, p: f64) -> Result<f64> {
    wp_exact_with_cap(x, y, p, DEFAULT_EXACT_CAP)
}

pub fn wp_exact_with_cap(
    x: &EmpiricalMeasure,
    y: &EmpiricalMeasure,
    p: f64,
    cap: usize,
) -> Result<f64> {
    check_pair(x, y, p)?;
    if x.n > cap {
        return Err(Error::CapExceeded { n: x.n, cap });
    }
    let cost = |i: usize, j: usize| ground_cost(x.row(i), y.row(j), p);
    let sigma = if x.n <= DENSE_LIMIT {
        assignment::solve(x.n, cost)
    } else {
        assignment::solve_sparse(x.n, cost, &knn_candidates(x, y, CANDIDATES))
    };
    let total: f64 = sigma.iter().enumerate().map(|(i, &j)| ground_cost(x.row(i), y.row(j), p)).sum();
    Ok((total / x.n as f64).powf(1.0 / p))
}

/// Exact `W_p` by the cheapest applicable exact method: the sorted coupling
/// for `d = 1`, assignment with the given cap otherwise.
pub fn wp_empirical(
    x: &EmpiricalMeasure,
    y: &EmpiricalMeasure,
    p: f64,
    cap: usize,
) -> Result<f64> {
    if x.dim == 1 && y.dim == 1 {
        wp_1d(x, y, p)
    } else {
        wp_exact_with_cap(x, y, p, cap)
    }
}

/// `n` i.i.d. standard normal vectors in `ℝ^d`.
pub fn gaussian_sample(d: usize, n: usize, rng: &mut McRng) -> Result<EmpiricalMeasure> {
    let mut data = vec![0.0; n * d];
    standard_normal_vec(rng, &mut data);
    EmpiricalMeasure::new(n, d, data)
}

/// Writes samples as CSV with header `x1,...,xd`.
pub fn write_csv(measure: &EmpiricalMeasure, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record((1..=measure.dim).map(|j| format!("x{j}")))?;
    for row in measure.rows() {
        w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<EmpiricalMeasure> {
    let mut r = csv::Reader::from_path(path)?;
    let dim = r.headers()?.len();
    let mut data = Vec::new();
    let mut n = 0;
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != dim {
            return Err(Error::LengthMismatch { expected: dim, got: rec.len() });
        }
        for field in rec.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| invalid(format!("cannot parse `{field}` as a number")))?;
            data.push(v);
        }
        n += 1;
    }
    EmpiricalMeasure::new(n, dim, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::substream;

    fn m1(xs: &[f64]) -> EmpiricalMeasure {
        EmpiricalMeasure::from_scalars(xs).unwrap()
    }

    #[test]
    fn sorted_coupling_examples() {
        let x = m1(&[0.3, -1.0, 2.0]);
        assert_eq!(wp_1d(&x, &x, 2.0).unwrap(), 0.0);
        assert!((wp_1d(&m1(&[0.0]), &m1(&[3.0]), 2.0).unwrap() - 3.0).abs() < 1e-15);
        let v = wp_1d(&m1(&[0.0, 1.0]), &m1(&[0.0, 2.0]), 2.0).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(wp_1d(&m1(&[0.0]), &m1(&[0.0, 1.0]), 2.0).is_err());
    }

    #[test]
    fn exact_matches_sorted_in_one_dimension() {
        let mut rng = substream(3, 0);
        let x = gaussian_sample(1, 200, &mut rng).unwrap();
        let y = gaussian_sample(1, 200, &mut rng).unwrap();
        for p in [1.0, 2.0, 3.5] {
            let a = wp_exact(&x, &y, p).unwrap();
            let b = wp_1d(&x, &y, p).unwrap();
            assert!((a - b).abs() < 1e-10, "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn cap_is_enforced() {
        let mut rng = substream(1, 0);
        let x = gaussian_sample(2, 10, &mut rng).unwrap();
        assert!(matches!(wp_exact_with_cap(&x, &x, 2.0, 5), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let mut rng = substream(9, 0);
        let x = gaussian_sample(3, 17, &mut rng).unwrap();
        write_csv(&x, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x1,x2,x3\n"));
        assert_eq!(read_csv(&path).unwrap(), x);
    }

    #[test]
    fn gaussian_sample_is_reproducible() {
        let a = gaussian_sample(2, 50, &mut substream(4, 1)).unwrap();
        let b = gaussian_sample(2, 50, &mut substream(4, 1)).unwrap();
        assert_eq!(a, b);
    }
}
