//! Ground state → block spectrum → Rényi curve, for one parameter point.

use crate::eigensolver::{
    ground_state_with, low_spectrum_with, select_in_degenerate_subspace, DegeneracyPolicy,
    GroundStateResult, Method,
};
use crate::entanglement::{
    reduced_density_matrix, renyi_curve, AlphaGrid, BlockSpec, RenyiCurve, SchmidtSpectrum,
};
use crate::error::{Error, Result};
use crate::lanczos::LanczosOptions;
use crate::model::ModelParams;

/// Everything needed to turn a parameter point into entanglement data.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub block: BlockSpec,
    pub alphas: AlphaGrid,
    pub method: Method,
    pub policy: DegeneracyPolicy,
    pub solver: LanczosOptions,
}

/// Entanglement data of one ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub params: ModelParams,
    pub energy: f64,
    pub gap: f64,
    pub degenerate: bool,
    pub spectrum: SchmidtSpectrum,
    pub curve: RenyiCurve,
}

impl Probe {
    /// Default grid, solver and policy for `block`.
    pub fn new(block: BlockSpec) -> Self {
        Probe {
            block,
            alphas: AlphaGrid::default(),
            method: Method::Auto,
            policy: DegeneracyPolicy::Lowest,
            solver: LanczosOptions::default(),
        }
    }

    pub fn with_policy(mut self, policy: DegeneracyPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_alphas(mut self, alphas: AlphaGrid) -> Self {
        self.alphas = alphas;
        self
    }

    /// Ground state at `params` after applying the degeneracy policy.
    pub fn ground(&self, params: &ModelParams) -> Result<GroundStateResult> {
        if params.chain_len != self.block.chain_len() {
            return Err(Error::invalid(alloc::format!(
                "block is defined for L = {} but the model has L = {}",
                self.block.chain_len(),
                params.chain_len
            )));
        }
        match self.policy {
            DegeneracyPolicy::Lowest => ground_state_with(params, self.method, &self.solver),
            DegeneracyPolicy::MinEntanglement => {
                let levels = low_spectrum_with(params, 2, self.method, &self.solver)?;
                select_in_degenerate_subspace(&levels, &self.block, self.policy)
            }
        }
    }

    pub fn measure(&self, params: &ModelParams) -> Result<ProbeResult> {
        let ground = self.ground(params)?;
        let rho = reduced_density_matrix(&ground.state, &self.block)?;
        let spectrum = SchmidtSpectrum::from_density_matrix(&rho)?;
        let curve = renyi_curve(&spectrum, &self.alphas);
        Ok(ProbeResult {
            params: *params,
            energy: ground.energy,
            gap: ground.gap,
            degenerate: ground.degenerate,
            spectrum,
            curve,
        })
    }
}
