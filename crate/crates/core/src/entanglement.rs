//! Block reduced density matrices, Schmidt spectra and Rényi entropies.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::MAX_CHAIN_LEN;

/// Eigenvalues at or below this value are treated as exact zeros.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Eigenvalues below this value make a density matrix invalid.
pub const NEGATIVE_EIGENVALUE_FLOOR: f64 = -1e-8;

/// A contiguous block of sites (Alice's share of the chain).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockSpec {
    sites: Vec<usize>,
    chain_len: usize,
}

impl BlockSpec {
    /// `sites` must be contiguous modulo `chain_len` and hold between one and
    /// `chain_len / 2` sites.
    pub fn new(sites: Vec<usize>, chain_len: usize) -> Result<Self> {
        if !(2..=MAX_CHAIN_LEN).contains(&chain_len) {
            return Err(Error::invalid(alloc::format!(
                "chain length L must satisfy 2 <= L <= {MAX_CHAIN_LEN} (got {chain_len})"
            )));
        }
        if sites.is_empty() || sites.len() > chain_len / 2 {
            return Err(Error::invalid(alloc::format!(
                "block size must satisfy 1 <= |sites| <= L/2 = {} (got {})",
                chain_len / 2,
                sites.len()
            )));
        }
        if let Some(&bad) = sites.iter().find(|&&s| s >= chain_len) {
            return Err(Error::invalid(alloc::format!(
                "block site {bad} is outside a chain of length {chain_len}"
            )));
        }
        if sites.windows(2).any(|w| w[1] != (w[0] + 1) % chain_len) {
            return Err(Error::invalid(alloc::format!(
                "block sites {sites:?} are not contiguous modulo {chain_len}"
            )));
        }
        Ok(BlockSpec { sites, chain_len })
    }

    /// `len` consecutive sites starting at `start`, wrapping around the ring.
    pub fn contiguous(start: usize, len: usize, chain_len: usize) -> Result<Self> {
        let sites = (0..len).map(|k| (start + k) % chain_len.max(1)).collect();
        BlockSpec::new(sites, chain_len)
    }

    /// Sites `{0, 1}`.
    pub fn pair(chain_len: usize) -> Result<Self> {
        BlockSpec::new(alloc::vec![0, 1], chain_len)
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn chain_len(&self) -> usize {
        self.chain_len
    }

    /// Dimension `d = 2^|sites|` of the block Hilbert space.
    pub fn dim(&self) -> usize {
        1usize << self.sites.len()
    }
}

/// The state reshaped into a `d × 2^(L-|sites|)` matrix.
///
/// Row index: bit `k` is the spin on `sites[k]`. Column index: the remaining
/// sites in ascending order, packed into consecutive bits.
pub fn block_matrix(state: &[f64], block: &BlockSpec) -> Result<DMatrix<f64>> {
    let len = block.chain_len;
    let dim = 1usize << len;
    if state.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: state.len(),
        });
    }
    let rest: Vec<usize> = (0..len).filter(|s| !block.sites.contains(s)).collect();
    let mut m = DMatrix::<f64>::zeros(block.dim(), 1usize << rest.len());
    for (x, &amp) in state.iter().enumerate() {
        let row = block
            .sites
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &s)| acc | (((x >> s) & 1) << k));
        let col = rest
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &s)| acc | (((x >> s) & 1) << k));
        m[(row, col)] = amp;
    }
    Ok(m)
}

/// `ρ_A = Tr_B |ψ⟩⟨ψ|` for a real unit vector `ψ`.
pub fn reduced_density_matrix(state: &[f64], block: &BlockSpec) -> Result<DMatrix<f64>> {
    let norm_sq: f64 = state.iter().map(|x| x * x).sum();
    if (norm_sq - 1.0).abs() > 1e-8 {
        return Err(Error::invalid(alloc::format!(
            "state must have unit norm (got squared norm {norm_sq})"
        )));
    }
    let m = block_matrix(state, block)?;
    let rho = &m * m.transpose();
    Ok((&rho + rho.transpose()) * 0.5)
}

/// Descending eigenvalues `λ₁ ≥ … ≥ λ_d ≥ 0` of a block density matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SchmidtSpectrum {
    values: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Build from raw weights that should already sum to one.
    ///
    /// Sorted into descending order; values in `[-1e-8, 1e-12]` are set to
    /// zero and the rest renormalized to sum to exactly one.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("a spectrum needs at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("spectrum values must be finite"));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::invalid(alloc::format!(
                "spectrum must sum to 1 (got {total})"
            )));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let smallest = values[values.len() - 1];
        if smallest < NEGATIVE_EIGENVALUE_FLOOR {
            return Err(Error::NegativeEigenvalue(smallest));
        }
        for v in values.iter_mut() {
            if *v <= RANK_CUTOFF {
                *v = 0.0;
            }
        }
        let kept: f64 = values.iter().sum();
        values.iter_mut().for_each(|v| *v /= kept);
        Ok(SchmidtSpectrum { values })
    }

    /// Eigenvalues of a symmetric, unit-trace density matrix.
    pub fn from_density_matrix(rho: &DMatrix<f64>) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::DimensionMismatch {
                expected: rho.nrows(),
                actual: rho.ncols(),
            });
        }
        let values: Vec<f64> = rho
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        SchmidtSpectrum::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Number of nonzero eigenvalues.
    pub fn rank(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    /// `Σ λ_k²`.
    pub fn purity(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// A Rényi order, including the three limits.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Order {
    /// `α → 0⁺`: log of the rank.
    ZeroLimit,
    Finite(f64),
    /// `α = 1`: von Neumann entropy.
    One,
    /// `α → ∞`: min-entropy.
    Infinity,
}

impl Order {
    /// Position on the α axis, used for ordering.
    pub fn alpha(&self) -> f64 {
        match *self {
            Order::ZeroLimit => 0.0,
            Order::Finite(a) => a,
            Order::One => 1.0,
            Order::Infinity => f64::INFINITY,
        }
    }

    /// Finite orders within `1e-9` of one become [`Order::One`].
    pub fn normalized(self) -> Order {
        match self {
            Order::Finite(a) if (a - 1.0).abs() <= 1e-9 => Order::One,
            other => other,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::ZeroLimit => f.write_str("0+"),
            Order::One => f.write_str("1"),
            Order::Infinity => f.write_str("inf"),
            Order::Finite(a) => write!(f, "{:.16e}", a),
        }
    }
}

/// Finite Rényi orders; the limits `0⁺`, `1` and `∞` are always implied.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlphaGrid {
    finite: Vec<f64>,
}

impl Default for AlphaGrid {
    /// 60 log-spaced orders in `[1e-2, 1e2]`.
    fn default() -> Self {
        AlphaGrid::log_spaced(1e-2, 1e2, 60).expect("valid default grid")
    }
}

impl AlphaGrid {
    pub fn new(mut finite: Vec<f64>) -> Result<Self> {
        if finite.is_empty() {
            return Err(Error::invalid("alpha grid must not be empty"));
        }
        if finite.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::invalid(
                "alpha grid values must be positive and finite",
            ));
        }
        finite.sort_by(f64::total_cmp);
        finite.dedup();
        Ok(AlphaGrid { finite })
    }

    /// `count` points spaced evenly in `log10 α` from `min` to `max`.
    pub fn log_spaced(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min > 0.0 && max >= min && min.is_finite() && max.is_finite()) || count == 0 {
            return Err(Error::invalid(alloc::format!(
                "alpha range must satisfy 0 < alpha_min <= alpha_max with at least one point (got [{min}, {max}] x {count})"
            )));
        }
        let (lo, hi) = (libm::log10(min), libm::log10(max));
        let values = (0..count)
            .map(|k| {
                if count == 1 {
                    min
                } else {
                    libm::pow(10.0, lo + (hi - lo) * k as f64 / (count - 1) as f64)
                }
            })
            .collect();
        AlphaGrid::new(values)
    }

    pub fn finite(&self) -> &[f64] {
        &self.finite
    }

    /// Every order in ascending α: `0⁺`, the finite values with `1` slotted
    /// into place, then `∞`.
    pub fn orders(&self) -> Vec<Order> {
        let mut orders = Vec::with_capacity(self.finite.len() + 3);
        orders.push(Order::ZeroLimit);
        let mut one_placed = false;
        for &a in &self.finite {
            if !one_placed && a > 1.0 {
                orders.push(Order::One);
                one_placed = true;
            }
            orders.push(Order::Finite(a));
        }
        if !one_placed {
            orders.push(Order::One);
        }
        orders.push(Order::Infinity);
        orders
    }
}

/// Rényi entropy in bits, `S_α = log₂(Σ λ_k^α) / (1 - α)`.
///
/// Zero eigenvalues are skipped. Returns NaN for a finite order that is not
/// positive.
pub fn renyi_entropy(spectrum: &SchmidtSpectrum, order: Order) -> f64 {
    let nonzero = spectrum.values.iter().copied().filter(|&v| v > 0.0);
    let largest = spectrum.values[0];
    // `+ 0.0` maps the -0 of a pure state to +0.
    0.0 + match order.normalized() {
        Order::ZeroLimit => libm::log2(spectrum.rank() as f64),
        Order::One => -nonzero.map(|v| v * libm::log2(v)).sum::<f64>(),
        Order::Infinity => -libm::log2(largest),
        Order::Finite(a) if !(a > 0.0 && a.is_finite()) => f64::NAN,
        Order::Finite(a) => {
            // Factor out λ₁^α so large orders neither underflow nor lose digits.
            let scaled: f64 = nonzero.map(|v| libm::pow(v / largest, a)).sum();
            (a * libm::log2(largest) + libm::log2(scaled)) / (1.0 - a)
        }
    }
}

/// Sampled `S_α` curve.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RenyiCurve {
    pub orders: Vec<Order>,
    pub entropies: Vec<f64>,
}

pub fn renyi_curve(spectrum: &SchmidtSpectrum, grid: &AlphaGrid) -> RenyiCurve {
    let orders = grid.orders();
    let entropies = orders.iter().map(|&o| renyi_entropy(spectrum, o)).collect();
    RenyiCurve { orders, entropies }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn spectrum(v: &[f64]) -> SchmidtSpectrum {
        SchmidtSpectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn product_state_reduces_to_projector() {
        let mut psi = vec![0.0; 16];
        psi[0] = 1.0;
        let rho = reduced_density_matrix(&psi, &BlockSpec::pair(4).unwrap()).unwrap();
        let expected =
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]));
        assert_eq!(rho, expected);
    }

    #[test]
    fn bell_pair_is_maximally_mixed() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let psi = [s, 0.0, 0.0, s];
        let block = BlockSpec::new(vec![0], 2).unwrap();
        let rho = reduced_density_matrix(&psi, &block).unwrap();
        for (i, j, v) in [(0, 0, 0.5), (1, 1, 0.5), (0, 1, 0.0), (1, 0, 0.0)] {
            assert!((rho[(i, j)] - v).abs() < 1e-15);
        }
    }

    #[test]
    fn block_validation() {
        assert!(BlockSpec::new(vec![0, 2], 8).is_err());
        assert!(BlockSpec::new(vec![], 8).is_err());
        assert!(BlockSpec::new(vec![0, 1, 2], 4).is_err());
        assert!(BlockSpec::new(vec![9], 8).is_err());
        assert!(BlockSpec::new(vec![7, 0], 8).is_ok());
        assert_eq!(BlockSpec::contiguous(7, 2, 8).unwrap().sites(), &[7, 0]);
    }

    #[test]
    fn wrong_length_or_norm_rejected() {
        let block = BlockSpec::pair(4).unwrap();
        assert!(reduced_density_matrix(&[1.0; 8], &block).is_err());
        assert!(reduced_density_matrix(&[1.0; 16], &block).is_err());
    }

    #[test]
    fn schmidt_of_diagonal_matrices() {
        let uniform = DMatrix::<f64>::identity(4, 4) * 0.25;
        assert_eq!(
            SchmidtSpectrum::from_density_matrix(&uniform)
                .unwrap()
                .values(),
            &[0.25; 4]
        );
        let pure = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]));
        assert_eq!(
            SchmidtSpectrum::from_density_matrix(&pure)
                .unwrap()
                .values(),
            &[1.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn clamps_roundoff_and_rejects_real_negatives() {
        let s = spectrum(&[0.5, 0.5 + 1e-13, -1e-13]);
        assert_eq!(s.values()[2], 0.0);
        assert!((s.values().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(matches!(
            SchmidtSpectrum::new(vec![0.6, 0.4 + 1e-7, -1e-7]),
            Err(Error::NegativeEigenvalue(_))
        ));
    }

    #[test]
    fn pure_and_uniform_entropies() {
        let orders = [
            Order::ZeroLimit,
            Order::Finite(0.3),
            Order::One,
            Order::Finite(2.0),
            Order::Finite(50.0),
            Order::Infinity,
        ];
        for o in orders {
            assert_eq!(renyi_entropy(&spectrum(&[1.0, 0.0, 0.0, 0.0]), o), 0.0);
            assert!((renyi_entropy(&spectrum(&[0.25; 4]), o) - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn two_level_collision_entropy() {
        // Direct evaluation: -log2(0.81 + 0.01).
        let s2 = renyi_entropy(&spectrum(&[0.9, 0.1]), Order::Finite(2.0));
        assert!((s2 - 0.286_304_185_156_641_1).abs() < 1e-12, "{s2}");
    }

    #[test]
    fn near_one_routes_to_von_neumann() {
        let s = spectrum(&[0.7, 0.2, 0.1]);
        assert_eq!(
            renyi_entropy(&s, Order::Finite(1.0 + 5e-10)),
            renyi_entropy(&s, Order::One)
        );
    }

    #[test]
    fn curve_endpoints_for_two_levels() {
        let c = renyi_curve(&spectrum(&[0.9, 0.1]), &AlphaGrid::default());
        assert_eq!(c.orders[0], Order::ZeroLimit);
        assert_eq!(*c.orders.last().unwrap(), Order::Infinity);
        assert_eq!(c.entropies[0], 1.0);
        assert!((c.entropies.last().unwrap() - 0.152_003_093_445_049_95).abs() < 1e-12);
        assert!(c.entropies.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn uniform_curve_is_flat() {
        let c = renyi_curve(&spectrum(&[0.25; 4]), &AlphaGrid::default());
        assert!(c.entropies.iter().all(|s| (s - 2.0).abs() < 1e-14));
    }

    #[test]
    fn default_grid_layout() {
        let grid = AlphaGrid::default();
        assert_eq!(grid.finite().len(), 60);
        assert!((grid.finite()[0] - 1e-2).abs() < 1e-15);
        assert!((grid.finite()[59] - 1e2).abs() < 1e-12);
        let orders = grid.orders();
        assert_eq!(orders.len(), 63);
        assert!(orders.windows(2).all(|w| w[0].alpha() < w[1].alpha()));
    }

    fn random_spectrum(dim: usize) -> impl Strategy<Value = SchmidtSpectrum> {
        proptest::collection::vec(0.0f64..1.0, dim).prop_filter_map("zero weight", |w| {
            let total: f64 = w.iter().sum();
            (total > 1e-3)
                .then(|| SchmidtSpectrum::new(w.iter().map(|x| x / total).collect()).unwrap())
        })
    }

    proptest! {
        #[test]
        fn entropies_are_monotone_and_bounded(s in random_spectrum(4)) {
            let c = renyi_curve(&s, &AlphaGrid::default());
            for w in c.entropies.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", c.entropies);
            }
            let (s0, sinf) = (c.entropies[0], *c.entropies.last().unwrap());
            prop_assert!(s0 <= 2.0 + 1e-12);
            prop_assert!(c.entropies.iter().all(|&e| e >= sinf - 1e-12 && e <= s0 + 1e-12));
        }

        #[test]
        fn purity_matches_density_matrix(v in proptest::collection::vec(-1.0f64..1.0, 64)) {
            let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assume!(n > 1e-3);
            let psi: Vec<f64> = v.iter().map(|x| x / n).collect();
            let rho = reduced_density_matrix(&psi, &BlockSpec::contiguous(5, 2, 6).unwrap()).unwrap();
            let s = SchmidtSpectrum::from_density_matrix(&rho).unwrap();
            let trace_sq: f64 = (&rho * &rho).trace();
            prop_assert!((s.purity() - trace_sq).abs() < 1e-10);
        }
    }
}
