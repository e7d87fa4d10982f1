//! Finite-size extrapolation `h_c(L) = h_∞ + a·exp(-b·L)`.
//!
//! Levenberg–Marquardt over `(h_∞, a, ln b)`, restarted from a fixed grid of
//! 20 `(a, b)` pairs; the lowest final cost wins.

use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

const START_AMPLITUDES: [f64; 4] = [-0.5, -0.1, 0.1, 0.5];
const START_RATES: [f64; 5] = [0.05, 0.1, 0.2, 0.5, 1.0];
const MAX_ITERATIONS: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingResult {
    /// `(L, h_c(L))` as fitted, sorted by `L`.
    pub samples: Vec<(usize, f64)>,
    pub h_infinity: f64,
    pub amplitude: f64,
    /// Always positive.
    pub rate: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// Starts that reached a stationary point.
    pub converged_starts: usize,
}

fn model(p: &Vector3<f64>, l: f64) -> (f64, Vector3<f64>) {
    let b = libm::exp(p[2]);
    let e = libm::exp(-b * l);
    let value = p[0] + p[1] * e;
    (value, Vector3::new(1.0, e, -p[1] * l * b * e))
}

fn cost(p: &Vector3<f64>, data: &[(f64, f64)]) -> f64 {
    data.iter()
        .map(|&(l, y)| {
            let r = model(p, l).0 - y;
            r * r
        })
        .sum()
}

/// One damped Gauss–Newton descent; `None` if it fails to settle.
fn levenberg_marquardt(start: Vector3<f64>, data: &[(f64, f64)]) -> Option<(Vector3<f64>, f64)> {
    let scale: f64 = data
        .iter()
        .map(|d| d.1 * d.1)
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    let mut p = start;
    let mut c = cost(&p, data);
    let mut mu = 1e-3;
    for _ in 0..MAX_ITERATIONS {
        if !c.is_finite() {
            return None;
        }
        if c <= 1e-30 * scale {
            return Some((p, c));
        }
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for &(l, y) in data {
            let (v, g) = model(&p, l);
            jtj += g * g.transpose();
            jtr += g * (v - y);
        }
        if jtr.amax() <= 1e-15 * libm::sqrt(c * scale) {
            return Some((p, c));
        }
        loop {
            let mut damped = jtj;
            for i in 0..3 {
                damped[(i, i)] += mu * jtj[(i, i)].max(1e-12);
            }
            let step = damped.cholesky().map(|ch| ch.solve(&(-jtr)));
            if let Some(step) = step {
                let trial = p + step;
                let tc = cost(&trial, data);
                if tc.is_finite() && tc < c {
                    let settled = c - tc <= 1e-15 * c || step.amax() <= 1e-14 * (p.amax() + 1e-14);
                    p = trial;
                    c = tc;
                    mu = (mu / 3.0).max(1e-15);
                    if settled {
                        return Some((p, c));
                    }
                    break;
                }
            }
            mu *= 4.0;
            if mu > 1e16 {
                // No descent direction left: a stationary point at working precision.
                return Some((p, c));
            }
        }
    }
    None
}

/// Fit `h_c(L) = h_∞ + a·exp(-b·L)` with `b > 0`.
///
/// Needs at least four samples with distinct `L`.
pub fn scaling_fit(samples: &[(usize, f64)]) -> Result<ScalingResult> {
    if samples.len() < 4 {
        return Err(Error::invalid(alloc::format!(
            "scaling fit needs at least 4 samples (got {})",
            samples.len()
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by_key(|s| s.0);
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::invalid("scaling fit needs distinct chain lengths"));
    }
    if sorted.iter().any(|s| !s.1.is_finite()) {
        return Err(Error::invalid("scaling samples must be finite"));
    }
    let data: Vec<(f64, f64)> = sorted.iter().map(|&(l, h)| (l as f64, h)).collect();
    let anchor = data[data.len() - 1].1;

    let mut best: Option<(Vector3<f64>, f64)> = None;
    let mut converged = 0;
    for &a in &START_AMPLITUDES {
        for &b in &START_RATES {
            let start = Vector3::new(anchor, a, libm::log(b));
            if let Some((p, c)) = levenberg_marquardt(start, &data) {
                converged += 1;
                if best.as_ref().map_or(true, |(_, bc)| c < *bc) {
                    best = Some((p, c));
                }
            }
        }
    }
    let (p, c) = best.ok_or_else(|| {
        Error::FitFailed(alloc::format!(
            "none of the {} starts converged within {MAX_ITERATIONS} iterations",
            START_AMPLITUDES.len() * START_RATES.len()
        ))
    })?;
    Ok(ScalingResult {
        samples: sorted,
        h_infinity: p[0],
        amplitude: p[1],
        rate: libm::exp(p[2]),
        residual: libm::sqrt(c / data.len() as f64),
        converged_starts: converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(h: f64, a: f64, b: f64) -> Vec<(usize, f64)> {
        (8..=16)
            .map(|l| (l, h + a * libm::exp(-b * l as f64)))
            .collect()
    }

    #[test]
    fn recovers_exact_model() {
        let fit = scaling_fit(&synthetic(1.0273, 0.3, 0.4)).unwrap();
        assert!((fit.h_infinity - 1.0273).abs() < 1e-6, "{fit:?}");
        assert!((fit.amplitude - 0.3).abs() < 1e-6, "{fit:?}");
        assert!((fit.rate - 0.4).abs() < 1e-6, "{fit:?}");
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn recovers_decreasing_approach() {
        let fit = scaling_fit(&synthetic(0.75, -0.2, 0.15)).unwrap();
        assert!((fit.h_infinity - 0.75).abs() < 1e-6, "{fit:?}");
        assert!(fit.rate > 0.0);
    }

    #[test]
    fn constant_samples_give_constant_limit() {
        let samples: Vec<(usize, f64)> = [8, 10, 12, 14].iter().map(|&l| (l, 0.4975)).collect();
        let fit = scaling_fit(&samples).unwrap();
        assert!((fit.h_infinity - 0.4975).abs() < 1e-9, "{fit:?}");
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(scaling_fit(&[(8, 1.0), (9, 1.0), (10, 1.0)]).is_err());
        assert!(scaling_fit(&[(8, 1.0), (8, 1.0), (10, 1.0), (11, 1.0)]).is_err());
        assert!(scaling_fit(&[(8, f64::NAN), (9, 1.0), (10, 1.0), (11, 1.0)]).is_err());
    }
}
