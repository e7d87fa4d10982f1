//! Ground-state local convertibility of the periodic spin-1/2 XY chain.
//!
//! The crate builds the XY Hamiltonian in the σᶻ product basis, finds ground
//! states (dense or matrix-free Lanczos), reduces them onto a contiguous block
//! of spins and decides whether neighbouring ground states along the field
//! axis are convertible into each other by LOCC (majorization of the Schmidt
//! spectra) or by entanglement-assisted LOCC (dominance of every Rényi
//! entropy). Sweeps over the `(γ, h)` plane turn those verdicts into phase
//! diagrams, and the detected boundaries are extrapolated to infinite size.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! file system, threads or the command line lives in the companion CLI crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod convertibility;
pub mod eigensolver;
pub mod entanglement;
mod error;
pub mod lanczos;
pub mod model;
pub mod probe;
pub mod scaling;
pub mod sweep;

pub use crate::convertibility::{
    classify_pair, classify_spectra, elocc_compare, majorization_compare, sign_of_ds,
    Convertibility, ConvertibilityVerdict, Dominance, Majorization, MajorizationProfile, Sign,
};
pub use crate::eigensolver::{
    ground_state, ground_state_with, low_spectrum, low_spectrum_with,
    select_in_degenerate_subspace, DegeneracyPolicy, GroundStateResult, LowSpectrum, Method,
};
pub use crate::entanglement::{
    reduced_density_matrix, renyi_curve, renyi_entropy, AlphaGrid, BlockSpec, Order, RenyiCurve,
    SchmidtSpectrum,
};
pub use crate::error::{Error, Result};
pub use crate::lanczos::LanczosOptions;
pub use crate::model::{apply_hamiltonian, build_dense_hamiltonian, ModelParams, Parity};
pub use crate::probe::{Probe, ProbeResult};
pub use crate::scaling::{scaling_fit, ScalingResult};
pub use crate::sweep::{
    detect_boundaries, locate_transition, run_phase_diagram, run_phase_diagram_with,
    run_sign_sweep, run_sign_sweep_with, transition_by_length, Boundary, Cell, CellData, Criterion,
    Executor, HGrid, PhaseDiagramGrid, Sequential, SignMap, SweepConfig, TransitionKind,
};
