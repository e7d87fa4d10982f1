use xyconv_core::sweep::{locate_transition, PhaseDiagramGrid};
use xyconv_core::{
    detect_boundaries, renyi_entropy, run_phase_diagram, Criterion, DegeneracyPolicy, HGrid, Order,
    SchmidtSpectrum, SweepConfig, TransitionKind,
};

fn config(chain_len: usize, gammas: Vec<f64>, step: f64) -> SweepConfig {
    let mut c = SweepConfig::new(chain_len, gammas).unwrap();
    c.h = HGrid::new(0.0, 1.5, step).unwrap();
    c.delta = step;
    c
}

#[test]
fn repeated_sweeps_are_identical() {
    let c = config(6, vec![0.4, 1.0], 0.05);
    assert_eq!(
        run_phase_diagram(&c).unwrap(),
        run_phase_diagram(&c).unwrap()
    );
}

#[test]
fn chunked_sweep_matches_single_run() {
    let whole = run_phase_diagram(&config(6, vec![0.3, 0.6, 0.9], 0.05)).unwrap();
    let parts: Vec<PhaseDiagramGrid> = [vec![0.3], vec![0.6, 0.9]]
        .into_iter()
        .map(|g| run_phase_diagram(&config(6, g, 0.05)).unwrap())
        .collect();
    assert_eq!(PhaseDiagramGrid::concat(parts).unwrap(), whole);
}

#[test]
fn halving_the_step_keeps_boundaries() {
    let gamma = 3f64.sqrt() / 2.0;
    let coarse = run_phase_diagram(&config(8, vec![gamma], 0.01)).unwrap();
    let fine = run_phase_diagram(&config(8, vec![gamma], 0.005)).unwrap();
    let fine_b = detect_boundaries(fine.row(0), Criterion::Elocc);
    for b in detect_boundaries(coarse.row(0), Criterion::Elocc)
        .iter()
        .filter(|b| !b.artifact)
    {
        let nearest = fine_b
            .iter()
            .map(|f| (f.h - b.h).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(
            nearest <= 0.01 + 1e-12,
            "boundary at {} moved by {nearest}",
            b.h
        );
    }
    for kind in [TransitionKind::FirstOrder, TransitionKind::SecondOrder] {
        let a = locate_transition(coarse.row(0), Criterion::Elocc, kind)
            .unwrap()
            .h;
        let b = locate_transition(fine.row(0), Criterion::Elocc, kind)
            .unwrap()
            .h;
        assert!((a - b).abs() <= 0.01 + 1e-12, "{kind:?}: {a} vs {b}");
    }
}

#[test]
fn product_state_cells_on_the_factorization_circle() {
    let gammas = vec![0.6, 0.8, 3f64.sqrt() / 2.0, 15f64.sqrt() / 4.0];
    let mut c = config(8, gammas.clone(), 0.05);
    c.policy = DegeneracyPolicy::MinEntanglement;
    let grid = run_phase_diagram(&c).unwrap();
    for (k, gamma) in gammas.iter().enumerate() {
        let target = (1.0 - gamma * gamma).sqrt();
        let cell = grid
            .row(k)
            .iter()
            .min_by(|a, b| (a.h - target).abs().total_cmp(&(b.h - target).abs()))
            .unwrap();
        let lambdas = cell.outcome.as_ref().unwrap().lambdas.clone();
        let s2 = renyi_entropy(&SchmidtSpectrum::new(lambdas).unwrap(), Order::Finite(2.0));
        assert!(s2 < 1e-6, "gamma = {gamma}, h = {}: S2 = {s2}", cell.h);
    }
}

#[test]
fn every_cell_respects_locc_implies_elocc() {
    let grid = run_phase_diagram(&config(6, vec![0.0, 0.25, 0.5, 0.75, 1.0], 0.01)).unwrap();
    assert_eq!(grid.failures(), 0);
    for cell in &grid.cells {
        let v = cell.outcome.as_ref().unwrap().verdict;
        assert!(
            v.is_consistent(),
            "gamma = {}, h = {}: {v:?}",
            cell.gamma,
            cell.h
        );
    }
}
