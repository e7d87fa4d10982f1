//! Ground states and low-lying spectra.
//!
//! Both routes work sector by sector in the spin-flip parity: the dense route
//! diagonalizes each `2^(L-1)` block completely, the iterative route runs the
//! matrix-free Lanczos solver inside each block. Resolving the parity matters
//! in the ferromagnetic region, where the two sector ground states are split
//! by gaps that shrink exponentially with `L`; without it any mixture of the
//! two would be an equally valid "ground state".
//!
//! Inside a block the off-diagonal elements are all `≤ 0` and, for `γ > 0`,
//! connect every pair of states, so the block ground state is unique and has
//! strictly positive amplitudes. The normalized all-ones start vector therefore
//! always overlaps it.

use alloc::vec;
use alloc::vec::Vec;

use crate::entanglement::{block_matrix, BlockSpec};
use crate::error::{Error, Result};
use crate::lanczos::{self, LanczosOptions};
use crate::model::{apply_hamiltonian, ModelParams, Parity, ParityBlock};

/// Largest chain length that [`Method::Auto`] solves densely.
pub const AUTO_DENSE_MAX_CHAIN_LEN: usize = 10;

/// Relative gap below which two levels count as degenerate.
pub const DEGENERACY_RELATIVE_GAP: f64 = 1e-8;

/// Angle samples used by [`DegeneracyPolicy::MinEntanglement`].
pub const MIN_ENTANGLEMENT_GRID: usize = 720;

/// `1e-8 · max(1, |E₀|)`.
pub fn degeneracy_threshold(ground_energy: f64) -> f64 {
    DEGENERACY_RELATIVE_GAP * ground_energy.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Method {
    Dense,
    Iterative,
    #[default]
    Auto,
}

impl Method {
    /// Concrete method for a given chain length.
    pub fn resolve(self, chain_len: usize) -> Method {
        match self {
            Method::Auto if chain_len <= AUTO_DENSE_MAX_CHAIN_LEN => Method::Dense,
            Method::Auto => Method::Iterative,
            other => other,
        }
    }
}

/// How to pick a state when the two lowest levels are degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DegeneracyPolicy {
    /// Keep the lowest eigenvector as returned by the solver.
    #[default]
    Lowest,
    /// Rotate inside the degenerate doublet to minimize the block `S₂`.
    MinEntanglement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateResult {
    pub params: ModelParams,
    pub energy: f64,
    /// Unit vector over the `2^L` basis; its largest-magnitude entry is positive.
    pub state: Vec<f64>,
    /// `E₁ - E₀`.
    pub gap: f64,
    pub degenerate: bool,
    /// Parity sector of the state, `None` for a mixture of both sectors.
    pub parity: Option<Parity>,
    /// `‖H·state - energy·state‖₂`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowSpectrum {
    pub params: ModelParams,
    /// Ascending.
    pub energies: Vec<f64>,
    /// Orthonormal eigenvectors over the full basis.
    pub states: Vec<Vec<f64>>,
    pub parities: Vec<Parity>,
}

impl LowSpectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

/// One eigenpair inside a parity sector.
struct SectorLevel {
    energy: f64,
    parity: Parity,
    vector: Vec<f64>,
    residual: f64,
}

fn fix_phase(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn sector_residual(block: &ParityBlock, energy: f64, v: &[f64]) -> f64 {
    let mut hv = vec![0.0; v.len()];
    block.apply(v, &mut hv);
    let r: f64 = hv
        .iter()
        .zip(v)
        .map(|(a, b)| (a - energy * b) * (a - energy * b))
        .sum();
    libm::sqrt(r)
}

/// Lowest `count` levels of one sector from a full dense diagonalization.
fn dense_sector(block: &ParityBlock, count: usize) -> Result<Vec<SectorLevel>> {
    let eig = block.dense_matrix()?.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Ok(order
        .into_iter()
        .take(count)
        .map(|c| {
            let vector = eig
                .eigenvectors
                .column(c)
                .iter()
                .copied()
                .collect::<Vec<_>>();
            let energy = eig.eigenvalues[c];
            SectorLevel {
                residual: sector_residual(block, energy, &vector),
                energy,
                parity: block.parity(),
                vector,
            }
        })
        .collect())
}

fn sector_seed(block: &ParityBlock, level: usize) -> u64 {
    let parity = match block.parity() {
        Parity::Even => 0u64,
        Parity::Odd => 1u64,
    };
    (block.params().chain_len as u64) << 16 | parity << 8 | level as u64
}

/// Lowest `count` levels of one sector by sequential Lanczos deflation.
///
/// The first level starts from the all-ones vector. Later levels start from
/// a fixed pseudo-random vector, because the all-ones vector only reaches the
/// translation- and reflection-symmetric part of the sector.
fn iterative_sector(
    block: &ParityBlock,
    count: usize,
    options: &LanczosOptions,
) -> Result<Vec<SectorLevel>> {
    let dim = block.dim();
    let mut levels: Vec<SectorLevel> = Vec::with_capacity(count);
    let mut locked: Vec<Vec<f64>> = Vec::with_capacity(count);
    for level in 0..count.min(dim) {
        let start = if level == 0 {
            vec![1.0; dim]
        } else {
            lanczos::scrambled_vector(dim, sector_seed(block, level))
        };
        let pair =
            lanczos::lowest_eigenpair(|v, out| block.apply(v, out), &start, &locked, options)?;
        locked.push(pair.vector.clone());
        levels.push(SectorLevel {
            energy: pair.value,
            parity: block.parity(),
            vector: pair.vector,
            residual: pair.residual,
        });
    }
    Ok(levels)
}

fn sector_levels(
    block: &ParityBlock,
    count: usize,
    method: Method,
    options: &LanczosOptions,
) -> Result<Vec<SectorLevel>> {
    match method.resolve(block.params().chain_len) {
        Method::Dense => dense_sector(block, count),
        _ => iterative_sector(block, count, options),
    }
}

/// Ground state with the default solver options.
pub fn ground_state(params: &ModelParams, method: Method) -> Result<GroundStateResult> {
    ground_state_with(params, method, &LanczosOptions::default())
}

/// Lowest eigenpair, its gap to the next level and the degeneracy flag.
///
/// The ground state is the lower of the two sector ground states (even sector
/// on an exact tie). The next level is the lower of the other sector's ground
/// state and the second level of the ground sector.
pub fn ground_state_with(
    params: &ModelParams,
    method: Method,
    options: &LanczosOptions,
) -> Result<GroundStateResult> {
    params.validate()?;
    let method = method.resolve(params.chain_len);
    let blocks = [
        ParityBlock::new(*params, Parity::Even)?,
        ParityBlock::new(*params, Parity::Odd)?,
    ];

    let (ground, gap) = match method {
        Method::Dense => {
            let mut even = dense_sector(&blocks[0], 2)?;
            let mut odd = dense_sector(&blocks[1], 2)?;
            let (mut own, other) = if odd[0].energy < even[0].energy {
                (core::mem::take(&mut odd), even.swap_remove(0))
            } else {
                (core::mem::take(&mut even), odd.swap_remove(0))
            };
            let next = own
                .get(1)
                .map_or(other.energy, |l| l.energy.min(other.energy));
            let ground = own.swap_remove(0);
            let gap = next - ground.energy;
            (ground, gap)
        }
        _ => {
            let even = iterative_sector(&blocks[0], 1, options)?.pop();
            let odd = iterative_sector(&blocks[1], 1, options)?.pop();
            let (even, odd) = even
                .zip(odd)
                .ok_or_else(|| Error::invalid("empty sector"))?;
            let (ground, other, own_block) = if odd.energy < even.energy {
                (odd, even, &blocks[1])
            } else {
                (even, odd, &blocks[0])
            };
            let mut next = other.energy;
            if own_block.dim() > 1 {
                let start = lanczos::scrambled_vector(own_block.dim(), sector_seed(own_block, 1));
                let second = lanczos::lowest_eigenpair(
                    |v, out| own_block.apply(v, out),
                    &start,
                    core::slice::from_ref(&ground.vector),
                    options,
                )?;
                next = next.min(second.value);
            }
            let gap = next - ground.energy;
            (ground, gap)
        }
    };

    let block = &blocks[match ground.parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    }];
    let mut state = block.embed(&ground.vector);
    fix_phase(&mut state);
    let gap = gap.max(0.0);
    Ok(GroundStateResult {
        params: *params,
        energy: ground.energy,
        state,
        gap,
        degenerate: gap < degeneracy_threshold(ground.energy),
        parity: Some(ground.parity),
        residual: ground.residual,
    })
}

/// The `k` lowest levels (`1 ≤ k ≤ 8`) with [`Method::Auto`].
pub fn low_spectrum(params: &ModelParams, k: usize) -> Result<LowSpectrum> {
    low_spectrum_with(params, k, Method::Auto, &LanczosOptions::default())
}

pub fn low_spectrum_with(
    params: &ModelParams,
    k: usize,
    method: Method,
    options: &LanczosOptions,
) -> Result<LowSpectrum> {
    params.validate()?;
    if !(1..=8).contains(&k) {
        return Err(Error::invalid(alloc::format!(
            "level count k must satisfy 1 <= k <= 8 (got {k})"
        )));
    }
    let mut levels: Vec<(SectorLevel, ParityBlock)> = Vec::with_capacity(2 * k);
    for parity in Parity::BOTH {
        let block = ParityBlock::new(*params, parity)?;
        for level in sector_levels(&block, k, method, options)? {
            levels.push((level, block));
        }
    }
    // Stable: equal energies keep the even sector first.
    levels.sort_by(|a, b| a.0.energy.total_cmp(&b.0.energy));
    levels.truncate(k);

    let mut spectrum = LowSpectrum {
        params: *params,
        energies: Vec::with_capacity(k),
        states: Vec::with_capacity(k),
        parities: Vec::with_capacity(k),
    };
    for (level, block) in levels {
        let mut state = block.embed(&level.vector);
        fix_phase(&mut state);
        spectrum.energies.push(level.energy);
        spectrum.states.push(state);
        spectrum.parities.push(level.parity);
    }
    Ok(spectrum)
}

/// Pick a ground state out of the lowest two levels of `spectrum`.
///
/// Falls back to the lowest eigenvector whenever the doublet is not
/// degenerate or the policy is [`DegeneracyPolicy::Lowest`]. Otherwise the
/// real rotation `cos θ·v₀ + sin θ·v₁` minimizing the `S₂` entropy of `block`
/// is returned: `θ` is scanned on a 720-point grid over `[0, π)` and the best
/// sample is refined by golden-section search.
pub fn select_in_degenerate_subspace(
    spectrum: &LowSpectrum,
    block: &BlockSpec,
    policy: DegeneracyPolicy,
) -> Result<GroundStateResult> {
    if spectrum.len() < 2 {
        return Err(Error::invalid(
            "degenerate-subspace selection needs at least two levels",
        ));
    }
    let params = spectrum.params;
    let (e0, e1) = (spectrum.energies[0], spectrum.energies[1]);
    let gap = (e1 - e0).max(0.0);
    let degenerate = gap < degeneracy_threshold(e0);

    if policy == DegeneracyPolicy::Lowest || !degenerate {
        let state = spectrum.states[0].clone();
        let hv = apply_hamiltonian(&params, &state)?;
        return Ok(GroundStateResult {
            params,
            energy: e0,
            residual: residual(&hv, &state, e0),
            state,
            gap,
            degenerate,
            parity: Some(spectrum.parities[0]),
        });
    }

    let m0 = block_matrix(&spectrum.states[0], block)?;
    let m1 = block_matrix(&spectrum.states[1], block)?;
    let r00 = &m0 * m0.transpose();
    let r11 = &m1 * m1.transpose();
    let r01 = &m0 * m1.transpose();
    let cross = &r01 + r01.transpose();
    let purity = |theta: f64| {
        let (s, c) = (libm::sin(theta), libm::cos(theta));
        let rho = &r00 * (c * c) + &r11 * (s * s) + &cross * (c * s);
        rho.iter().map(|x| x * x).sum::<f64>()
    };

    let step = core::f64::consts::PI / MIN_ENTANGLEMENT_GRID as f64;
    let mut best = (0.0f64, f64::NEG_INFINITY);
    for k in 0..MIN_ENTANGLEMENT_GRID {
        let theta = k as f64 * step;
        let p = purity(theta);
        if p > best.1 {
            best = (theta, p);
        }
    }
    let theta = golden_section_max(purity, best.0 - step, best.0 + step, 1e-13);

    let (s, c) = (libm::sin(theta), libm::cos(theta));
    let mut state: Vec<f64> = spectrum.states[0]
        .iter()
        .zip(&spectrum.states[1])
        .map(|(a, b)| c * a + s * b)
        .collect();
    let n = lanczos::norm(&state);
    state.iter_mut().for_each(|x| *x /= n);
    fix_phase(&mut state);
    let energy = c * c * e0 + s * s * e1;
    let hv = apply_hamiltonian(&params, &state)?;
    Ok(GroundStateResult {
        params,
        energy,
        residual: residual(&hv, &state, energy),
        state,
        gap,
        degenerate,
        parity: None,
    })
}

fn residual(hv: &[f64], v: &[f64], energy: f64) -> f64 {
    libm::sqrt(
        hv.iter()
            .zip(v)
            .map(|(a, b)| (a - energy * b) * (a - energy * b))
            .sum(),
    )
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let ratio = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}
