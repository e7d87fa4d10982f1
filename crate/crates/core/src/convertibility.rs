//! LOCC (majorization) and ELOCC (Rényi dominance) comparisons between the
//! ground states at `h` and `h + Δ`, and the sign of `∂S_α/∂h`.
//!
//! Direction labels follow the field axis: [`Convertibility::Down`] means
//! entanglement does not grow from `h` to `h + Δ`, i.e. the spectrum at `h+Δ`
//! majorizes the one at `h` (LOCC) or `S_α(h) ≥ S_α(h+Δ)` for every order
//! (ELOCC). Majorization implies Rényi dominance, so a `Down` LOCC verdict
//! always comes with a `Down` (or `Equal`) ELOCC verdict.

use alloc::vec::Vec;

use crate::entanglement::{renyi_entropy, AlphaGrid, Order, RenyiCurve, SchmidtSpectrum};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::probe::{Probe, ProbeResult};

/// Absolute tolerance when comparing two entropies.
pub const ENTROPY_TOLERANCE: f64 = 1e-10;

/// Relative tolerance on the tail masses `1 - f_l` when testing majorization.
pub const TAIL_RELATIVE_TOLERANCE: f64 = 1e-12;

/// `|∂S/∂h|` below this counts as zero.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Majorization {
    AMajorizesB,
    BMajorizesA,
    Incomparable,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dominance {
    ADominatesB,
    BDominatesA,
    Incomparable,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Convertibility {
    /// `|G(h+Δ)⟩` is the less entangled state (`λ(h+Δ) ≻ λ(h)` or
    /// `S_α(h) ≥ S_α(h+Δ)` for all α).
    Down,
    /// The reverse direction.
    Up,
    Incomparable,
    Equal,
}

impl Convertibility {
    /// CSV code: `down`, `up`, `incomp` or `equal`.
    pub fn code(&self) -> &'static str {
        match self {
            Convertibility::Down => "down",
            Convertibility::Up => "up",
            Convertibility::Incomparable => "incomp",
            Convertibility::Equal => "equal",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Some(match code {
            "down" => Convertibility::Down,
            "up" => Convertibility::Up,
            "incomp" => Convertibility::Incomparable,
            "equal" => Convertibility::Equal,
            _ => return None,
        })
    }

    /// Convertible in some direction (or trivially, when equal).
    pub fn is_convertible(&self) -> bool {
        !matches!(self, Convertibility::Incomparable)
    }
}

impl From<Majorization> for Convertibility {
    /// With `a` the spectrum at `h + Δ` and `b` the one at `h`.
    fn from(m: Majorization) -> Self {
        match m {
            Majorization::AMajorizesB => Convertibility::Down,
            Majorization::BMajorizesA => Convertibility::Up,
            Majorization::Incomparable => Convertibility::Incomparable,
            Majorization::Equal => Convertibility::Equal,
        }
    }
}

impl From<Dominance> for Convertibility {
    /// With `a` the curve at `h` and `b` the one at `h + Δ`.
    fn from(d: Dominance) -> Self {
        match d {
            Dominance::ADominatesB => Convertibility::Down,
            Dominance::BDominatesA => Convertibility::Up,
            Dominance::Incomparable => Convertibility::Incomparable,
            Dominance::Equal => Convertibility::Equal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvertibilityVerdict {
    pub locc: Convertibility,
    pub elocc: Convertibility,
    /// Either endpoint of the pair had a degenerate ground level.
    pub degenerate: bool,
}

impl ConvertibilityVerdict {
    /// LOCC convertibility in a direction implies ELOCC convertibility in it.
    pub fn is_consistent(&self) -> bool {
        use Convertibility::*;
        match self.locc {
            Down => matches!(self.elocc, Down | Equal),
            Up => matches!(self.elocc, Up | Equal),
            Equal => self.elocc == Equal,
            Incomparable => true,
        }
    }
}

/// Descending partial sums `f_l = Σ_{k≤l} λ_k` and the matching tail masses.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorizationProfile {
    pub partial_sums: Vec<f64>,
    /// `Σ_{k>l} λ_k`, summed from the small end so tiny tails keep their digits.
    pub tails: Vec<f64>,
}

impl MajorizationProfile {
    pub fn of(spectrum: &SchmidtSpectrum) -> Self {
        let values = spectrum.values();
        let mut acc = 0.0;
        let partial_sums = values
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        let mut tails = alloc::vec![0.0; values.len()];
        let mut tail = 0.0;
        for l in (0..values.len()).rev() {
            tails[l] = tail;
            tail += values[l];
        }
        MajorizationProfile {
            partial_sums,
            tails,
        }
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            actual: b,
        });
    }
    Ok(())
}

/// `x ≻ y`: every tail mass of `x` is at most the corresponding tail of `y`.
fn majorizes(x: &MajorizationProfile, y: &MajorizationProfile) -> bool {
    x.tails
        .iter()
        .zip(&y.tails)
        .all(|(tx, ty)| *tx <= ty * (1.0 + TAIL_RELATIVE_TOLERANCE))
}

/// Majorization order of two spectra of equal dimension.
///
/// `a ≻ b` iff `f_l(a) ≥ f_l(b)` for every `l`. The test runs on tail masses
/// with a relative slack, so a spectrum whose tail is nonzero never majorizes
/// one whose tail vanishes.
pub fn majorization_compare(a: &SchmidtSpectrum, b: &SchmidtSpectrum) -> Result<Majorization> {
    check_dims(a.dim(), b.dim())?;
    let (pa, pb) = (MajorizationProfile::of(a), MajorizationProfile::of(b));
    Ok(match (majorizes(&pa, &pb), majorizes(&pb, &pa)) {
        (true, true) => Majorization::Equal,
        (true, false) => Majorization::AMajorizesB,
        (false, true) => Majorization::BMajorizesA,
        (false, false) => Majorization::Incomparable,
    })
}

/// Rényi dominance of two sampled curves taken on the same orders.
pub fn dominance_of_curves(a: &RenyiCurve, b: &RenyiCurve) -> Result<Dominance> {
    check_dims(a.entropies.len(), b.entropies.len())?;
    if a.orders != b.orders {
        return Err(Error::invalid(
            "Rényi curves were sampled on different orders",
        ));
    }
    let a_ge = a
        .entropies
        .iter()
        .zip(&b.entropies)
        .all(|(x, y)| *x >= y - ENTROPY_TOLERANCE);
    let b_ge = a
        .entropies
        .iter()
        .zip(&b.entropies)
        .all(|(x, y)| *y >= x - ENTROPY_TOLERANCE);
    Ok(match (a_ge, b_ge) {
        (true, true) => Dominance::Equal,
        (true, false) => Dominance::ADominatesB,
        (false, true) => Dominance::BDominatesA,
        (false, false) => Dominance::Incomparable,
    })
}

/// `ADominatesB` iff `S_α(a) ≥ S_α(b)` at every grid order and limit, in
/// which case the `a` state converts into the `b` state under ELOCC.
pub fn elocc_compare(
    a: &SchmidtSpectrum,
    b: &SchmidtSpectrum,
    grid: &AlphaGrid,
) -> Result<Dominance> {
    check_dims(a.dim(), b.dim())?;
    let orders = grid.orders();
    let curve = |s: &SchmidtSpectrum| RenyiCurve {
        entropies: orders.iter().map(|&o| renyi_entropy(s, o)).collect(),
        orders: orders.clone(),
    };
    dominance_of_curves(&curve(a), &curve(b))
}

/// Both verdicts for the spectra at `h` and `h + Δ`.
pub fn classify_spectra(
    at_h: &SchmidtSpectrum,
    at_h_delta: &SchmidtSpectrum,
    grid: &AlphaGrid,
) -> Result<ConvertibilityVerdict> {
    Ok(ConvertibilityVerdict {
        locc: majorization_compare(at_h_delta, at_h)?.into(),
        elocc: elocc_compare(at_h, at_h_delta, grid)?.into(),
        degenerate: false,
    })
}

/// Both verdicts from two already measured points.
pub fn classify_measurements(
    at_h: &ProbeResult,
    at_h_delta: &ProbeResult,
) -> Result<ConvertibilityVerdict> {
    Ok(ConvertibilityVerdict {
        locc: majorization_compare(&at_h_delta.spectrum, &at_h.spectrum)?.into(),
        elocc: dominance_of_curves(&at_h.curve, &at_h_delta.curve)?.into(),
        degenerate: at_h.degenerate || at_h_delta.degenerate,
    })
}

/// Solve both ground states and classify the pair `(h, h + Δ)`.
pub fn classify_pair(
    probe: &Probe,
    at_h: &ModelParams,
    at_h_delta: &ModelParams,
) -> Result<ConvertibilityVerdict> {
    if at_h.chain_len != at_h_delta.chain_len || at_h.gamma != at_h_delta.gamma {
        return Err(Error::invalid("a pair must share L and gamma"));
    }
    if !(at_h_delta.field > at_h.field) {
        return Err(Error::invalid(alloc::format!(
            "pair spacing must be positive (h = {}, h + delta = {})",
            at_h.field,
            at_h_delta.field
        )));
    }
    classify_measurements(&probe.measure(at_h)?, &probe.measure(at_h_delta)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sign {
    Negative,
    Positive,
    Zero,
}

impl Sign {
    pub fn of_derivative(d: f64) -> Sign {
        if d.abs() < DERIVATIVE_TOLERANCE {
            Sign::Zero
        } else if d < 0.0 {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Sign::Negative => "neg",
            Sign::Positive => "pos",
            Sign::Zero => "zero",
        }
    }
}

/// Finite-difference `∂S_α/∂h` from entropies at the two stencil points.
///
/// `backward` is `None` for a forward difference.
pub fn finite_difference(backward: Option<f64>, center: f64, forward: f64, delta: f64) -> f64 {
    match backward {
        Some(b) => (forward - b) / (2.0 * delta),
        None => (forward - center) / delta,
    }
}

/// Sign of `∂S_α/∂h` at `params`, with the derivative itself.
///
/// Central difference `[S(h+δ) - S(h-δ)] / 2δ`; a forward difference when
/// `h < δ`, since the field may not go negative.
pub fn sign_of_ds(
    probe: &Probe,
    params: &ModelParams,
    order: Order,
    delta: f64,
) -> Result<(Sign, f64)> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(alloc::format!(
            "delta must be positive (got {delta})"
        )));
    }
    let entropy = |h: f64| -> Result<f64> {
        let r = probe.measure(&params.with_field(h))?;
        Ok(renyi_entropy(&r.spectrum, order))
    };
    let h = params.field;
    let forward = entropy(h + delta)?;
    let derivative = if h >= delta {
        finite_difference(Some(entropy(h - delta)?), f64::NAN, forward, delta)
    } else {
        finite_difference(None, entropy(h)?, forward, delta)
    };
    Ok((Sign::of_derivative(derivative), derivative))
}
