//! Grid sweeps over `(γ, h)`, boundary detection along a γ row.
//!
//! Every distinct field value of a row is solved once; cells then read their
//! endpoints by exact bit pattern. Work items go through an [`Executor`], and
//! results always come back in input order, so output is independent of how
//! the work was scheduled.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::convertibility::{
    classify_measurements, finite_difference, Convertibility, ConvertibilityVerdict, Sign,
};
use crate::eigensolver::{DegeneracyPolicy, Method};
use crate::entanglement::{renyi_entropy, AlphaGrid, BlockSpec, Order};
use crate::error::{Error, Result};
use crate::lanczos::LanczosOptions;
use crate::model::ModelParams;
use crate::probe::{Probe, ProbeResult};

/// Uniform field grid `h_i = min + i·step`, `i = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl HGrid {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        let grid = HGrid { min, max, step };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.min >= 0.0) {
            return Err(Error::invalid(alloc::format!(
                "h_min must satisfy h_min >= 0 (got {})",
                self.min
            )));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::invalid(alloc::format!(
                "h_step must satisfy h_step > 0 (got {})",
                self.step
            )));
        }
        if !(self.max.is_finite() && self.max >= self.min) {
            return Err(Error::invalid(alloc::format!(
                "h_max must satisfy h_max >= h_min (got h_min = {}, h_max = {})",
                self.min,
                self.max
            )));
        }
        if (self.max - self.min) / self.step > 1e7 {
            return Err(Error::invalid("h grid has more than 1e7 points"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        libm::round((self.max - self.min) / self.step) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }
}

/// Uniform grid `min, min+step, …` up to `max` (same rounding rule as [`HGrid`]).
pub fn uniform_values(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    Ok(HGrid::new(min, max, step)?.values())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub chain_len: usize,
    pub gammas: Vec<f64>,
    pub h: HGrid,
    /// Pair spacing Δ for convertibility, and the finite-difference step for sign maps.
    pub delta: f64,
    pub block: BlockSpec,
    pub alphas: AlphaGrid,
    pub policy: DegeneracyPolicy,
    pub method: Method,
    pub solver: LanczosOptions,
}

impl SweepConfig {
    /// Default grids: `h ∈ [0, 1.5]` step 0.005, Δ = step, block `{0, 1}`.
    pub fn new(chain_len: usize, gammas: Vec<f64>) -> Result<Self> {
        let h = HGrid::new(0.0, 1.5, 0.005)?;
        let config = SweepConfig {
            chain_len,
            gammas,
            h,
            delta: h.step,
            block: BlockSpec::pair(chain_len)?,
            alphas: AlphaGrid::default(),
            policy: DegeneracyPolicy::Lowest,
            method: Method::Auto,
            solver: LanczosOptions::default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.h.validate()?;
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::invalid(alloc::format!(
                "delta must satisfy delta > 0 (got {})",
                self.delta
            )));
        }
        if self.gammas.is_empty() {
            return Err(Error::invalid("gamma grid is empty"));
        }
        if self.block.chain_len() != self.chain_len {
            return Err(Error::invalid(alloc::format!(
                "block is defined for L = {} but the sweep has L = {}",
                self.block.chain_len(),
                self.chain_len
            )));
        }
        for &g in &self.gammas {
            ModelParams::new(self.chain_len, g, self.h.min)?;
        }
        if self.solver.tolerance.partial_cmp(&0.0) != Some(core::cmp::Ordering::Greater) {
            return Err(Error::invalid("solver tolerance must be positive"));
        }
        Ok(())
    }

    pub fn probe(&self) -> Probe {
        Probe {
            block: self.block.clone(),
            alphas: self.alphas.clone(),
            method: self.method,
            policy: self.policy,
            solver: self.solver,
        }
    }

    fn shares_grid(&self) -> bool {
        self.delta.to_bits() == self.h.step.to_bits()
    }

    /// Field of the upper pair partner of cell `i`.
    pub fn partner(&self, i: usize) -> f64 {
        if self.shares_grid() {
            self.h.value(i + 1)
        } else {
            self.h.value(i) + self.delta
        }
    }

    /// Field of the lower stencil point of cell `i`, or `None` below `δ`.
    fn lower(&self, i: usize) -> Option<f64> {
        let h = self.h.value(i);
        if h < self.delta {
            None
        } else if self.shares_grid() && i > 0 {
            Some(self.h.value(i - 1))
        } else {
            Some(h - self.delta)
        }
    }
}

/// Runs independent work items; results come back in input order.
pub trait Executor {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync;
}

/// Runs every item on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync,
    {
        items.iter().map(f).collect()
    }
}

/// Measurements of one γ row, keyed by the bit pattern of `h`.
struct RowMeasurements(BTreeMap<u64, Result<ProbeResult>>);

impl RowMeasurements {
    fn get(&self, h: f64) -> Result<&ProbeResult> {
        match self.0.get(&h.to_bits()) {
            Some(Ok(r)) => Ok(r),
            Some(Err(e)) => Err(e.clone()),
            None => Err(Error::invalid("field point was not scheduled")),
        }
    }
}

/// Solve every requested `(γ, h)` point once.
fn measure_points<E: Executor>(
    config: &SweepConfig,
    rows: &[(f64, Vec<f64>)],
    executor: &E,
) -> Vec<RowMeasurements> {
    let mut items: Vec<(usize, f64)> = Vec::new();
    for (row, (_, fields)) in rows.iter().enumerate() {
        let mut bits: Vec<u64> = fields.iter().map(|h| h.to_bits()).collect();
        bits.sort_unstable();
        bits.dedup();
        items.extend(bits.into_iter().map(|b| (row, f64::from_bits(b))));
    }
    let probe = config.probe();
    let results = executor.map(&items, |&(row, h)| {
        ModelParams::new(config.chain_len, rows[row].0, h).and_then(|p| probe.measure(&p))
    });
    let mut out: Vec<RowMeasurements> = rows
        .iter()
        .map(|_| RowMeasurements(BTreeMap::new()))
        .collect();
    for ((row, h), r) in items.into_iter().zip(results) {
        out[row].0.insert(h.to_bits(), r);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellData {
    pub verdict: ConvertibilityVerdict,
    /// Gap above the ground level at `h`.
    pub gap: f64,
    /// Von Neumann block entropy at `h`, in bits.
    pub s1: f64,
    /// Schmidt spectrum at `h`, descending.
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub gamma: f64,
    pub h: f64,
    pub outcome: core::result::Result<CellData, Error>,
}

impl Cell {
    pub fn verdict(&self, criterion: Criterion) -> Option<Convertibility> {
        self.outcome
            .as_ref()
            .ok()
            .map(|d| criterion.pick(&d.verdict))
    }

    pub fn degenerate(&self) -> bool {
        self.outcome
            .as_ref()
            .map(|d| d.verdict.degenerate)
            .unwrap_or(false)
    }
}

/// Cells in γ-major, then ascending-h order.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagramGrid {
    pub gammas: Vec<f64>,
    pub fields: Vec<f64>,
    pub cells: Vec<Cell>,
}

impl PhaseDiagramGrid {
    pub fn row(&self, gamma_index: usize) -> &[Cell] {
        let n = self.fields.len();
        &self.cells[gamma_index * n..(gamma_index + 1) * n]
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }

    /// Stack grids computed for disjoint γ lists over the same field grid.
    pub fn concat(parts: Vec<PhaseDiagramGrid>) -> Result<Self> {
        let mut iter = parts.into_iter();
        let mut out = iter
            .next()
            .ok_or_else(|| Error::invalid("nothing to merge"))?;
        for part in iter {
            if part.fields != out.fields {
                return Err(Error::invalid("grids to merge have different field grids"));
            }
            out.gammas.extend(part.gammas);
            out.cells.extend(part.cells);
        }
        Ok(out)
    }
}

pub fn run_phase_diagram(config: &SweepConfig) -> Result<PhaseDiagramGrid> {
    run_phase_diagram_with(config, &Sequential)
}

pub fn run_phase_diagram_with<E: Executor>(
    config: &SweepConfig,
    executor: &E,
) -> Result<PhaseDiagramGrid> {
    config.validate()?;
    let n = config.h.len();
    let fields = config.h.values();
    let rows: Vec<(f64, Vec<f64>)> = config
        .gammas
        .iter()
        .map(|&g| {
            let mut pts = fields.clone();
            pts.extend((0..n).map(|i| config.partner(i)));
            (g, pts)
        })
        .collect();
    let measured = measure_points(config, &rows, executor);
    let mut cells = Vec::with_capacity(n * rows.len());
    for ((gamma, _), m) in rows.iter().zip(&measured) {
        for (i, &h) in fields.iter().enumerate() {
            let outcome = m.get(h).and_then(|at_h| {
                let at_hd = m.get(config.partner(i))?;
                let verdict = classify_measurements(at_h, at_hd)?;
                Ok(CellData {
                    verdict,
                    gap: at_h.gap,
                    s1: renyi_entropy(&at_h.spectrum, Order::One),
                    lambdas: at_h.spectrum.values().to_vec(),
                })
            });
            cells.push(Cell {
                gamma: *gamma,
                h,
                outcome,
            });
        }
    }
    Ok(PhaseDiagramGrid {
        gammas: config.gammas.clone(),
        fields,
        cells,
    })
}

/// Finite-difference `∂S_α/∂h` for one γ over the `(h, α)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SignMap {
    pub gamma: f64,
    pub fields: Vec<f64>,
    pub orders: Vec<Order>,
    /// One entry per field; derivatives follow `orders`.
    pub derivatives: Vec<core::result::Result<Vec<f64>, Error>>,
}

impl SignMap {
    pub fn sign(&self, field_index: usize, order_index: usize) -> Option<Sign> {
        self.derivatives[field_index]
            .as_ref()
            .ok()
            .map(|d| Sign::of_derivative(d[order_index]))
    }

    pub fn failures(&self) -> usize {
        self.derivatives.iter().filter(|d| d.is_err()).count()
    }
}

pub fn run_sign_sweep(config: &SweepConfig, gamma: f64) -> Result<SignMap> {
    run_sign_sweep_with(config, gamma, &Sequential)
}

pub fn run_sign_sweep_with<E: Executor>(
    config: &SweepConfig,
    gamma: f64,
    executor: &E,
) -> Result<SignMap> {
    config.validate()?;
    if !config.gammas.iter().any(|g| g.to_bits() == gamma.to_bits()) {
        return Err(Error::invalid(alloc::format!(
            "gamma = {gamma} is not on the sweep's gamma grid"
        )));
    }
    let n = config.h.len();
    let fields = config.h.values();
    let mut pts = fields.clone();
    pts.extend((0..n).map(|i| config.partner(i)));
    pts.extend((0..n).filter_map(|i| config.lower(i)));
    let measured = measure_points(config, &[(gamma, pts)], executor);
    let m = &measured[0];
    let orders = config.alphas.orders();
    let entropies = |h: f64| -> Result<Vec<f64>> { Ok(m.get(h)?.curve.entropies.clone()) };
    let derivatives = (0..n)
        .map(|i| {
            let forward = entropies(config.partner(i))?;
            let (backward, center) = match config.lower(i) {
                Some(h) => (Some(entropies(h)?), None),
                None => (None, Some(entropies(fields[i])?)),
            };
            Ok((0..orders.len())
                .map(|k| {
                    finite_difference(
                        backward.as_ref().map(|b| b[k]),
                        center.as_ref().map_or(f64::NAN, |c| c[k]),
                        forward[k],
                        config.delta,
                    )
                })
                .collect())
        })
        .collect();
    Ok(SignMap {
        gamma,
        fields,
        orders,
        derivatives,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    Elocc,
    Locc,
}

impl Criterion {
    pub fn pick(&self, verdict: &ConvertibilityVerdict) -> Convertibility {
        match self {
            Criterion::Elocc => verdict.elocc,
            Criterion::Locc => verdict.locc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionKind {
    /// Convertible → non-convertible edge below the non-convertible window.
    FirstOrder,
    /// Lower edge of the convertible run that reaches the top of the field window.
    SecondOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    /// Midpoint between the two adjacent cells.
    pub h: f64,
    pub below: Convertibility,
    pub above: Convertibility,
    /// Both adjacent cells sit on a (near-)degenerate ground level.
    pub artifact: bool,
    /// Index of the upper adjacent cell in the row.
    pub upper_index: usize,
}

/// Verdict changes between consecutive successful cells of one row, low to high h.
pub fn detect_boundaries(row: &[Cell], criterion: Criterion) -> Vec<Boundary> {
    let ok: Vec<(usize, Convertibility)> = row
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.verdict(criterion).map(|v| (i, v)))
        .collect();
    ok.windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| {
            let (lo, hi) = (&row[w[0].0], &row[w[1].0]);
            Boundary {
                h: 0.5 * (lo.h + hi.h),
                below: w[0].1,
                above: w[1].1,
                artifact: lo.degenerate() && hi.degenerate(),
                upper_index: w[1].0,
            }
        })
        .collect()
}

/// The boundary of the given kind, if the row has one.
///
/// Convertible means any verdict but `Incomparable`. The first-order edge is
/// searched below the second-order one, or from the top of the window when
/// the top cell is non-convertible.
pub fn locate_transition(
    row: &[Cell],
    criterion: Criterion,
    kind: TransitionKind,
) -> Option<Boundary> {
    let class: Vec<(usize, bool)> = row
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.verdict(criterion).map(|v| (i, v.is_convertible())))
        .collect();
    let boundary_at = |k: usize| {
        let (lo, hi) = (class[k - 1].0, class[k].0);
        let (a, b) = (&row[lo], &row[hi]);
        Boundary {
            h: 0.5 * (a.h + b.h),
            below: a.verdict(criterion).unwrap_or(Convertibility::Incomparable),
            above: b.verdict(criterion).unwrap_or(Convertibility::Incomparable),
            artifact: a.degenerate() && b.degenerate(),
            upper_index: hi,
        }
    };
    let mut k = class.len().checked_sub(1)?;
    // Top of the convertible run, if the window ends inside one.
    if class[k].1 {
        while k > 0 && class[k - 1].1 {
            k -= 1;
        }
        if k == 0 {
            return None;
        }
        if kind == TransitionKind::SecondOrder {
            return Some(boundary_at(k));
        }
        k -= 1;
    } else if kind == TransitionKind::SecondOrder {
        return None;
    }
    while k > 0 && !class[k - 1].1 {
        k -= 1;
    }
    (k > 0).then(|| boundary_at(k))
}

/// Boundary of one kind for each chain length, with a per-length sweep of a
/// single γ row. Lengths without that boundary yield `Ok(None)`.
pub fn transition_by_length<E: Executor>(
    template: &SweepConfig,
    gamma: f64,
    lengths: &[usize],
    criterion: Criterion,
    kind: TransitionKind,
    executor: &E,
) -> Vec<core::result::Result<Option<Boundary>, Error>> {
    lengths
        .iter()
        .map(|&l| {
            let mut config = template.clone();
            config.chain_len = l;
            config.gammas = alloc::vec![gamma];
            config.block = BlockSpec::new(template.block.sites().to_vec(), l)?;
            let grid = run_phase_diagram_with(&config, executor)?;
            if let Some(err) = grid.cells.iter().find_map(|c| c.outcome.as_ref().err()) {
                return Err(err.clone());
            }
            Ok(locate_transition(grid.row(0), criterion, kind))
        })
        .collect()
}

/// Failure message for a cell, for diagnostics.
pub fn describe_failure(cell: &Cell) -> Option<String> {
    cell.outcome
        .as_ref()
        .err()
        .map(|e| alloc::format!("gamma = {}, h = {}: {e}", cell.gamma, cell.h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cell(h: f64, elocc: Convertibility, degenerate: bool) -> Cell {
        Cell {
            gamma: 1.0,
            h,
            outcome: Ok(CellData {
                verdict: ConvertibilityVerdict {
                    locc: Convertibility::Incomparable,
                    elocc,
                    degenerate,
                },
                gap: 1.0,
                s1: 0.0,
                lambdas: vec![1.0, 0.0, 0.0, 0.0],
            }),
        }
    }

    fn row(codes: &[(&str, bool)]) -> Vec<Cell> {
        codes
            .iter()
            .enumerate()
            .map(|(i, (c, d))| cell(i as f64 * 0.1, Convertibility::from_code(c).unwrap(), *d))
            .collect()
    }

    #[test]
    fn grid_arithmetic() {
        let g = HGrid::new(0.0, 1.5, 0.01).unwrap();
        assert_eq!(g.len(), 151);
        assert_eq!(HGrid::new(0.0, 1.5, 0.005).unwrap().len(), 301);
        assert_eq!(HGrid::new(0.3, 0.3, 0.1).unwrap().len(), 1);
        assert!(HGrid::new(-0.1, 1.0, 0.1).is_err());
        assert!(HGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(HGrid::new(1.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn constant_row_has_no_boundaries() {
        let r = row(&[("down", false); 6]);
        assert!(detect_boundaries(&r, Criterion::Elocc).is_empty());
        assert!(locate_transition(&r, Criterion::Elocc, TransitionKind::SecondOrder).is_none());
        assert!(locate_transition(&r, Criterion::Elocc, TransitionKind::FirstOrder).is_none());
    }

    #[test]
    fn boundaries_at_midpoints() {
        let r = row(&[
            ("down", true),
            ("down", true),
            ("incomp", true),
            ("incomp", false),
            ("down", false),
            ("down", false),
        ]);
        let b = detect_boundaries(&r, Criterion::Elocc);
        assert_eq!(b.len(), 2);
        assert!((b[0].h - 0.15).abs() < 1e-12 && b[0].artifact);
        assert!((b[1].h - 0.35).abs() < 1e-12 && !b[1].artifact);
        let second = locate_transition(&r, Criterion::Elocc, TransitionKind::SecondOrder).unwrap();
        assert!((second.h - 0.35).abs() < 1e-12);
        let first = locate_transition(&r, Criterion::Elocc, TransitionKind::FirstOrder).unwrap();
        assert!((first.h - 0.15).abs() < 1e-12);
    }

    #[test]
    fn first_order_without_second_order() {
        let r = row(&[
            ("down", false),
            ("up", false),
            ("incomp", false),
            ("incomp", false),
        ]);
        assert!(locate_transition(&r, Criterion::Elocc, TransitionKind::SecondOrder).is_none());
        let first = locate_transition(&r, Criterion::Elocc, TransitionKind::FirstOrder).unwrap();
        assert!((first.h - 0.15).abs() < 1e-12);
        // down → up is a boundary of its own.
        assert_eq!(detect_boundaries(&r, Criterion::Elocc).len(), 2);
    }

    #[test]
    fn failed_cells_are_skipped() {
        let mut r = row(&[
            ("incomp", false),
            ("incomp", false),
            ("down", false),
            ("down", false),
        ]);
        r[1].outcome = Err(Error::invalid("boom"));
        let b = detect_boundaries(&r, Criterion::Elocc);
        assert_eq!(b.len(), 1);
        assert!((b[0].h - 0.1).abs() < 1e-12);
    }

    #[test]
    fn config_validation_names_invariant() {
        let mut c = SweepConfig::new(6, vec![1.0]).unwrap();
        c.delta = 0.0;
        let msg = alloc::format!("{}", c.validate().unwrap_err());
        assert!(msg.contains("delta > 0"), "{msg}");
        assert!(SweepConfig::new(1, vec![1.0]).is_err());
        let mut c = SweepConfig::new(6, vec![1.0]).unwrap();
        c.block = BlockSpec::pair(8).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn small_diagram_is_consistent_and_ordered() {
        let mut c = SweepConfig::new(6, vec![0.5, 1.0]).unwrap();
        c.h = HGrid::new(0.0, 1.5, 0.1).unwrap();
        c.delta = c.h.step;
        let grid = run_phase_diagram(&c).unwrap();
        assert_eq!(grid.cells.len(), 2 * 16);
        assert_eq!(grid.failures(), 0);
        for (k, cell) in grid.cells.iter().enumerate() {
            assert_eq!(cell.gamma.to_bits(), c.gammas[k / 16].to_bits());
            assert_eq!(cell.h.to_bits(), c.h.value(k % 16).to_bits());
            assert!(cell.outcome.as_ref().unwrap().verdict.is_consistent());
        }
    }

    #[test]
    fn separate_partners_match_shared_partners() {
        let mut c = SweepConfig::new(6, vec![0.8]).unwrap();
        c.h = HGrid::new(0.0, 1.0, 0.25).unwrap();
        c.delta = c.h.step;
        let shared = run_phase_diagram(&c).unwrap();
        let mut grid = c.clone();
        grid.h = HGrid::new(0.0, 1.0, 0.125).unwrap();
        grid.delta = 0.25;
        let separate = run_phase_diagram(&grid).unwrap();
        for (i, cell) in shared.cells.iter().enumerate() {
            assert_eq!(cell.outcome, separate.cells[2 * i].outcome);
        }
    }

    #[test]
    fn sign_sweep_deep_paramagnet_is_negative() {
        let mut c = SweepConfig::new(6, vec![1.0]).unwrap();
        c.h = HGrid::new(1.6, 2.0, 0.2).unwrap();
        c.delta = 1e-3;
        let map = run_sign_sweep(&c, 1.0).unwrap();
        for i in 0..map.fields.len() {
            for k in 1..map.orders.len() {
                assert_eq!(
                    map.sign(i, k),
                    Some(Sign::Negative),
                    "h = {}, {}",
                    map.fields[i],
                    map.orders[k]
                );
            }
        }
        assert!(run_sign_sweep(&c, 0.5).is_err());
    }

    #[test]
    fn sign_sweep_uses_forward_difference_at_zero() {
        let mut c = SweepConfig::new(6, vec![1.0]).unwrap();
        c.h = HGrid::new(0.0, 0.02, 0.01).unwrap();
        c.delta = c.h.step;
        let map = run_sign_sweep(&c, 1.0).unwrap();
        assert_eq!(map.failures(), 0);
        assert!(map
            .derivatives
            .iter()
            .all(|d| d.as_ref().unwrap().iter().all(|x| x.is_finite())));
    }
}
