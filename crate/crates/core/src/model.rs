//! The periodic XY chain
//!
//! ```text
//! H = -Σ_{i=0}^{L-1} [ ½(1+γ) σˣᵢσˣᵢ₊₁ + ½(1-γ) σʸᵢσʸᵢ₊₁ + h σᶻᵢ ],   site L ≡ site 0
//! ```
//!
//! in the σᶻ product basis. Site `i` is bit `i` of the basis index and a set
//! bit is spin up (σᶻ = +1). In this basis every matrix element is real:
//!
//! * the field term is diagonal, `-h (2·popcount - L)`;
//! * `σˣσˣ` and `σʸσʸ` flip the two bits of a bond. Flipping an aligned pair
//!   (`↑↑ ↔ ↓↓`) costs `-γ`, flipping an anti-aligned pair (`↑↓ ↔ ↓↑`) costs `-1`.
//!
//! For `L = 2` the two bond terms `i = 0` and `i = 1` act on the same pair of
//! spins; both are kept, so the coupling of that pair is doubled.
//!
//! The total parity `Π σᶻᵢ` commutes with `H`, which splits the Hilbert space
//! into two halves of dimension `2^(L-1)`. [`ParityBlock`] is the restriction
//! of `H` to one of them and is what the eigensolvers work with.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest chain length accepted anywhere.
pub const MAX_CHAIN_LEN: usize = 24;

/// Largest chain length for which dense matrices are built.
pub const DENSE_MAX_CHAIN_LEN: usize = 14;

/// A point in the XY parameter space.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    /// Number of spins `L`.
    pub chain_len: usize,
    /// Anisotropy `γ ∈ [0, 1]`.
    pub gamma: f64,
    /// Transverse field `h ≥ 0`, in units of the exchange coupling.
    pub field: f64,
}

impl ModelParams {
    /// Validated constructor.
    pub fn new(chain_len: usize, gamma: f64, field: f64) -> Result<Self> {
        let params = ModelParams {
            chain_len,
            gamma,
            field,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_CHAIN_LEN).contains(&self.chain_len) {
            return Err(Error::invalid(alloc::format!(
                "chain length L must satisfy 2 <= L <= {MAX_CHAIN_LEN} (got {})",
                self.chain_len
            )));
        }
        if !(self.gamma.is_finite() && (0.0..=1.0).contains(&self.gamma)) {
            return Err(Error::invalid(alloc::format!(
                "anisotropy gamma must satisfy 0 <= gamma <= 1 (got {})",
                self.gamma
            )));
        }
        if !(self.field.is_finite() && self.field >= 0.0) {
            return Err(Error::invalid(alloc::format!(
                "field h must satisfy h >= 0 (got {})",
                self.field
            )));
        }
        Ok(())
    }

    /// Same chain and anisotropy at another field value.
    pub fn with_field(&self, field: f64) -> Self {
        ModelParams { field, ..*self }
    }

    /// Hilbert space dimension `2^L`.
    pub fn dim(&self) -> usize {
        1usize << self.chain_len
    }

    /// Coefficients `(½(1+γ), ½(1-γ))` of the `σˣσˣ` and `σʸσʸ` bond terms.
    pub fn bond_coefficients(&self) -> (f64, f64) {
        (0.5 * (1.0 + self.gamma), 0.5 * (1.0 - self.gamma))
    }

    /// Matrix element for flipping an aligned pair of spins.
    fn pair_flip(&self) -> f64 {
        let (xx, yy) = self.bond_coefficients();
        -(xx - yy)
    }

    /// Matrix element for exchanging an anti-aligned pair of spins.
    fn exchange(&self) -> f64 {
        let (xx, yy) = self.bond_coefficients();
        -(xx + yy)
    }

    /// Diagonal element of basis state `index`.
    pub fn diagonal(&self, index: usize) -> f64 {
        let up = index.count_ones() as f64;
        -self.field * (2.0 * up - self.chain_len as f64)
    }

    /// Bond masks `(1 << i) | (1 << i+1 mod L)`, one per bond, in site order.
    fn bonds(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let len = self.chain_len;
        (0..len).map(move |i| {
            let j = (i + 1) % len;
            (i, j, (1usize << i) | (1usize << j))
        })
    }

    /// Off-diagonal element connecting `index` to `index ^ mask` for bond `(i, j)`.
    #[inline]
    fn bond_element(&self, index: usize, i: usize, j: usize) -> f64 {
        if (index >> i) & 1 == (index >> j) & 1 {
            self.pair_flip()
        } else {
            self.exchange()
        }
    }

    fn check_dense(&self) -> Result<()> {
        self.validate()?;
        if self.chain_len > DENSE_MAX_CHAIN_LEN {
            return Err(Error::DenseTooLarge {
                chain_len: self.chain_len,
                max: DENSE_MAX_CHAIN_LEN,
            });
        }
        Ok(())
    }
}

/// Explicit matrix or matrix-free kernel for the same Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianOperator {
    Dense {
        params: ModelParams,
        matrix: DMatrix<f64>,
    },
    MatrixFree {
        params: ModelParams,
    },
}

impl HamiltonianOperator {
    pub fn matrix_free(params: ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(HamiltonianOperator::MatrixFree { params })
    }

    pub fn params(&self) -> &ModelParams {
        match self {
            HamiltonianOperator::Dense { params, .. }
            | HamiltonianOperator::MatrixFree { params } => params,
        }
    }

    pub fn matrix(&self) -> Option<&DMatrix<f64>> {
        match self {
            HamiltonianOperator::Dense { matrix, .. } => Some(matrix),
            HamiltonianOperator::MatrixFree { .. } => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.params().dim()
    }

    /// `H·v` with whichever representation this operator carries.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        match self {
            HamiltonianOperator::Dense { matrix, .. } => {
                if v.len() != matrix.ncols() {
                    return Err(Error::DimensionMismatch {
                        expected: matrix.ncols(),
                        actual: v.len(),
                    });
                }
                let out = matrix * nalgebra::DVector::from_column_slice(v);
                Ok(out.as_slice().to_vec())
            }
            HamiltonianOperator::MatrixFree { params } => apply_hamiltonian(params, v),
        }
    }
}

/// Dense `2^L × 2^L` matrix of the Hamiltonian. Limited to `L ≤ 14`.
pub fn build_dense_hamiltonian(params: &ModelParams) -> Result<HamiltonianOperator> {
    params.check_dense()?;
    let dim = params.dim();
    let mut matrix = DMatrix::<f64>::zeros(dim, dim);
    for x in 0..dim {
        matrix[(x, x)] = params.diagonal(x);
        for (i, j, mask) in params.bonds() {
            matrix[(x ^ mask, x)] += params.bond_element(x, i, j);
        }
    }
    Ok(HamiltonianOperator::Dense {
        params: *params,
        matrix,
    })
}

/// Matrix-free `H·v` over the full `2^L` basis.
pub fn apply_hamiltonian(params: &ModelParams, v: &[f64]) -> Result<Vec<f64>> {
    params.validate()?;
    let mut out = vec![0.0; params.dim()];
    apply_hamiltonian_into(params, v, &mut out)?;
    Ok(out)
}

/// Matrix-free `H·v` written into `out`.
///
/// Each output element is accumulated in a fixed order (diagonal, then
/// bonds `0..L`), so the result does not depend on how the work is split.
pub fn apply_hamiltonian_into(params: &ModelParams, v: &[f64], out: &mut [f64]) -> Result<()> {
    let dim = params.dim();
    for len in [v.len(), out.len()] {
        if len != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: len,
            });
        }
    }
    for (x, slot) in out.iter_mut().enumerate() {
        let mut acc = params.diagonal(x) * v[x];
        for (i, j, mask) in params.bonds() {
            acc += params.bond_element(x, i, j) * v[x ^ mask];
        }
        *slot = acc;
    }
    Ok(())
}

/// Eigenvalue of the spin-flip parity `Π σᶻᵢ`, expressed through the number
/// of up spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Parity {
    /// Even number of up spins.
    Even,
    /// Odd number of up spins.
    Odd,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Even, Parity::Odd];

    pub fn of(index: usize) -> Parity {
        if index.count_ones() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn bit(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// The Hamiltonian restricted to one parity sector.
///
/// Sector states are labelled by the upper `L-1` bits of the full index; bit
/// 0 is fixed by the parity. The map is `full = (s << 1) | (popcount(s) ⊕ p)`
/// and its inverse is `s = full >> 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityBlock {
    params: ModelParams,
    parity: Parity,
}

impl ParityBlock {
    pub fn new(params: ModelParams, parity: Parity) -> Result<Self> {
        params.validate()?;
        Ok(ParityBlock { params, parity })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn dim(&self) -> usize {
        1usize << (self.params.chain_len - 1)
    }

    #[inline]
    pub fn full_index(&self, sector_index: usize) -> usize {
        let low = (sector_index.count_ones() as usize & 1) ^ self.parity.bit();
        (sector_index << 1) | low
    }

    /// `H·v` inside the sector. Same fixed accumulation order as the full kernel.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        let params = &self.params;
        let pair = params.pair_flip();
        let exchange = params.exchange();
        let len = params.chain_len;
        for (s, slot) in out.iter_mut().enumerate() {
            let x = self.full_index(s);
            let mut acc = params.diagonal(x) * v[s];
            for i in 0..len {
                let j = if i + 1 == len { 0 } else { i + 1 };
                let mask = (1usize << i) | (1usize << j);
                let coeff = if (x >> i) & 1 == (x >> j) & 1 {
                    pair
                } else {
                    exchange
                };
                acc += coeff * v[(x ^ mask) >> 1];
            }
            *slot = acc;
        }
    }

    /// Dense matrix of the sector block.
    pub fn dense_matrix(&self) -> Result<DMatrix<f64>> {
        self.params.check_dense()?;
        let dim = self.dim();
        let mut matrix = DMatrix::<f64>::zeros(dim, dim);
        for s in 0..dim {
            let x = self.full_index(s);
            matrix[(s, s)] = self.params.diagonal(x);
            for (i, j, mask) in self.params.bonds() {
                matrix[((x ^ mask) >> 1, s)] += self.params.bond_element(x, i, j);
            }
        }
        Ok(matrix)
    }

    /// Scatter a sector vector into the full `2^L` basis.
    pub fn embed(&self, sector_vector: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.params.dim()];
        for (s, &value) in sector_vector.iter().enumerate() {
            full[self.full_index(s)] = value;
        }
        full
    }
}
