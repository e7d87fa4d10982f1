//! Thick-restart Lanczos with full reorthogonalization.
//!
//! Finds the lowest eigenpair of a real symmetric operator given only its
//! action `v ↦ H·v`. Every new Krylov vector is orthogonalized twice against
//! the whole basis (and against any locked vectors), so the projected matrix
//! is kept as a small dense symmetric matrix instead of a tridiagonal one.
//! When the basis is full the lowest `keep` Ritz vectors plus the current
//! residual direction become the new basis.
//!
//! Locked vectors deflate the operator: the search runs in their orthogonal
//! complement, which is how excited states are obtained one at a time.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LanczosOptions {
    /// Convergence threshold on `‖H·x - θ·x‖₂`.
    pub tolerance: f64,
    /// Hard cap on operator applications.
    pub max_applications: usize,
    /// Krylov basis size before a restart.
    pub basis_size: usize,
    /// Ritz vectors carried over a restart.
    pub keep: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tolerance: 1e-10,
            max_applications: 5000,
            basis_size: 48,
            keep: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    /// Unit-norm eigenvector.
    pub vector: Vec<f64>,
    /// Final residual norm, measured with an explicit application.
    pub residual: f64,
    pub applications: usize,
}

const CHECK_EVERY: usize = 5;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn scale(v: &mut [f64], s: f64) {
    for x in v.iter_mut() {
        *x *= s;
    }
}

/// Two passes of classical Gram-Schmidt; returns the accumulated coefficients.
fn orthogonalize(w: &mut [f64], against: &[Vec<f64>]) -> Vec<f64> {
    let mut coef = vec![0.0; against.len()];
    for _ in 0..2 {
        for (c, q) in coef.iter_mut().zip(against) {
            let d = dot(q, w);
            axpy(-d, q, w);
            *c += d;
        }
    }
    coef
}

/// Deterministic pseudo-random vector in `[-0.5, 0.5)^n` (splitmix64 stream).
pub fn scrambled_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed ^ 0x9E37_79B9_7F4A_7C15;
    (0..n)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

/// Ascending eigenvalues and matching eigenvectors (as columns) of the
/// leading `size × size` block of `t`.
fn ritz(t: &[f64], stride: usize, size: usize) -> (Vec<f64>, DMatrix<f64>) {
    let m = DMatrix::from_fn(size, size, |i, j| t[i * stride + j]);
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(size, size, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Lowest eigenpair of `apply` restricted to the complement of `locked`.
///
/// `locked` must be orthonormal. The start vector is projected onto the
/// complement; it must keep a nonzero component there.
pub fn lowest_eigenpair<F>(
    mut apply: F,
    start: &[f64],
    locked: &[Vec<f64>],
    options: &LanczosOptions,
) -> Result<Eigenpair>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = start.len();
    if n == 0 || locked.len() >= n {
        return Err(Error::invalid("no room left for another eigenvector"));
    }
    if locked.iter().any(|q| q.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: locked.iter().map(Vec::len).find(|&l| l != n).unwrap_or(n),
        });
    }
    let m = options.basis_size.max(2).min(n - locked.len());
    let keep = options.keep.max(1).min(m.saturating_sub(1)).max(1);

    let mut v0 = start.to_vec();
    orthogonalize(&mut v0, locked);
    let start_norm = norm(&v0);
    if !(start_norm > 1e-12 * norm(start).max(f64::MIN_POSITIVE)) {
        return Err(Error::invalid(
            "start vector has no component outside the locked subspace",
        ));
    }
    scale(&mut v0, 1.0 / start_norm);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    basis.push(v0);
    let mut t = vec![0.0; m * m];
    let mut w = vec![0.0; n];
    let mut applications = 0usize;

    loop {
        let j = basis.len() - 1;
        apply(&basis[j], &mut w);
        applications += 1;
        orthogonalize(&mut w, locked);
        let coef = orthogonalize(&mut w, &basis);
        for (i, &c) in coef.iter().enumerate() {
            t[i * m + j] = c;
            t[j * m + i] = c;
        }
        let beta = norm(&w);
        let size = j + 1;
        let magnitude = coef.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
        let breakdown = beta <= 1e-12 * magnitude;
        let full = size == m;
        let exhausted = applications >= options.max_applications;

        if size % CHECK_EVERY == 0 || full || breakdown || exhausted {
            let (values, vectors) = ritz(&t, m, size);
            let estimate = if breakdown {
                0.0
            } else {
                beta * vectors[(size - 1, 0)].abs()
            };

            if estimate <= 0.5 * options.tolerance || breakdown || exhausted {
                let mut x = vec![0.0; n];
                for (i, q) in basis.iter().enumerate() {
                    axpy(vectors[(i, 0)], q, &mut x);
                }
                orthogonalize(&mut x, locked);
                let x_norm = norm(&x);
                scale(&mut x, 1.0 / x_norm);
                let mut hx = vec![0.0; n];
                apply(&x, &mut hx);
                applications += 1;
                orthogonalize(&mut hx, locked);
                let value = dot(&x, &hx);
                axpy(-value, &x, &mut hx);
                let last_residual = norm(&hx);
                if last_residual < options.tolerance {
                    return Ok(Eigenpair {
                        value,
                        vector: x,
                        residual: last_residual,
                        applications,
                    });
                }
                if applications >= options.max_applications {
                    return Err(Error::NotConverged {
                        applications,
                        residual: last_residual,
                    });
                }
                if breakdown {
                    // Invariant subspace found but roundoff left a residual:
                    // start over from the current Ritz vector.
                    basis.clear();
                    basis.push(x);
                    t.iter_mut().for_each(|e| *e = 0.0);
                    continue;
                }
            }

            if full {
                let p = keep.min(size - 1);
                let mut next: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
                for c in 0..p {
                    let mut y = vec![0.0; n];
                    for (i, q) in basis.iter().enumerate() {
                        axpy(vectors[(i, c)], q, &mut y);
                    }
                    next.push(y);
                }
                t.iter_mut().for_each(|e| *e = 0.0);
                for c in 0..p {
                    t[c * m + c] = values[c];
                    let s = beta * vectors[(size - 1, c)];
                    t[c * m + p] = s;
                    t[p * m + c] = s;
                }
                scale(&mut w, 1.0 / beta);
                next.push(w.clone());
                basis = next;
                continue;
            }
        }

        scale(&mut w, 1.0 / beta);
        basis.push(w.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_operator(diag: &[f64]) -> impl FnMut(&[f64], &mut [f64]) + '_ {
        move |v, out| {
            for ((o, x), d) in out.iter_mut().zip(v).zip(diag) {
                *o = d * x;
            }
        }
    }

    /// 1D Laplacian-like tridiagonal matrix with known spectrum.
    fn path_operator(n: usize) -> impl FnMut(&[f64], &mut [f64]) {
        move |v, out| {
            for i in 0..n {
                let mut acc = 2.0 * v[i];
                if i > 0 {
                    acc -= v[i - 1];
                }
                if i + 1 < n {
                    acc -= v[i + 1];
                }
                out[i] = acc;
            }
        }
    }

    #[test]
    fn finds_lowest_of_path_graph() {
        let n = 300;
        let exact = 2.0 - 2.0 * libm::cos(core::f64::consts::PI / (n as f64 + 1.0));
        let pair = lowest_eigenpair(
            path_operator(n),
            &vec![1.0; n],
            &[],
            &LanczosOptions {
                max_applications: 20000,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            (pair.value - exact).abs() < 1e-12,
            "{} vs {exact}",
            pair.value
        );
        assert!(pair.residual < 1e-10);
        assert!((norm(&pair.vector) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deflation_walks_up_the_spectrum() {
        let diag: Vec<f64> = (0..40).map(|i| (i as f64) * 0.5 - 3.0).collect();
        let opts = LanczosOptions::default();
        let mut locked: Vec<Vec<f64>> = Vec::new();
        for expected in [-3.0, -2.5, -2.0] {
            let start = scrambled_vector(40, 7);
            let pair = lowest_eigenpair(diag_operator(&diag), &start, &locked, &opts).unwrap();
            assert!((pair.value - expected).abs() < 1e-12);
            locked.push(pair.vector);
        }
    }

    #[test]
    fn small_dimension_breaks_down_cleanly() {
        let diag = [3.0, -1.0];
        let pair =
            lowest_eigenpair(diag_operator(&diag), &[1.0, 1.0], &[], &Default::default()).unwrap();
        assert!((pair.value + 1.0).abs() < 1e-14);
    }

    #[test]
    fn exhausted_budget_reports_residual() {
        let n = 2000;
        let err = lowest_eigenpair(
            path_operator(n),
            &vec![1.0; n],
            &[],
            &LanczosOptions {
                max_applications: 30,
                ..Default::default()
            },
        )
        .unwrap_err();
        match err {
            Error::NotConverged {
                applications,
                residual,
            } => {
                assert!(applications >= 30);
                assert!(residual.is_finite() && residual > 1e-10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn start_inside_locked_space_is_rejected() {
        let diag = [1.0, 2.0, 3.0];
        let locked = vec![vec![1.0, 0.0, 0.0]];
        assert!(lowest_eigenpair(
            diag_operator(&diag),
            &[1.0, 0.0, 0.0],
            &locked,
            &Default::default()
        )
        .is_err());
    }

    #[test]
    fn scrambled_vector_is_deterministic() {
        assert_eq!(scrambled_vector(16, 3), scrambled_vector(16, 3));
        assert_ne!(scrambled_vector(16, 3), scrambled_vector(16, 4));
        assert!(scrambled_vector(1000, 1)
            .iter()
            .all(|x| (-0.5..0.5).contains(x)));
    }
}
