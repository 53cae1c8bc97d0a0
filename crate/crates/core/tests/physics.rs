//! Whole-model checks that cut across modules.

use magchain::dynamics::{first_peak, run_transfer, uniform_grid, Model, TransferOptions};
use magchain::hamiltonian::{build_total_hamiltonian, effective_couplings, ChainSpec, SubspaceCode, SubspaceKind};
use magchain::linalg::BlockEigensystem;
use magchain::pulses::{analytic_transition, measure_transition};
use magchain::hilbert::SpinQuantum;

#[test]
fn five_site_band_structure() {
    let spec = ChainSpec::reference(5);
    let h = build_total_hamiltonian(&spec).unwrap();
    assert!(h.is_hermitian_within(1e-12));
    let eig = BlockEigensystem::of(&h, 4096).unwrap();
    let mut levels: Vec<_> = eig.indices().map(|i| (eig.value(i), i)).collect();
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    let e: Vec<f64> = levels.iter().map(|l| l.0).collect();
    let width = e[31] - e[0];
    let edge_gap = e[32] - e[31];
    assert!(width < 60.0, "band width {width}");
    assert!(edge_gap > 20.0, "edge gap {edge_gap}");
    // next band: one site lifted to |+-1/2>, 160 levels; centers sit 2|D| apart
    let lower = e[..32].iter().sum::<f64>() / 32.0;
    let next = e[32..192].iter().sum::<f64>() / 160.0;
    let sep = next - lower;
    assert!((sep / (2.0 * spec.zfs_d.abs()) - 1.0).abs() < 0.2, "band separation {sep}");

    // per-state weights inside degenerate levels depend on the eigenbasis;
    // the band average (trace of the projector) does not
    let bus = SubspaceCode::for_spec(SubspaceKind::Bus, &spec).unwrap();
    let weights: Vec<f64> = levels[levels.len() - 32..]
        .iter()
        .map(|&(_, idx)| bus.embedding().iter().map(|&k| eig.component(idx, k).norm_sqr()).sum())
        .collect();
    let mean = weights.iter().sum::<f64>() / 32.0;
    assert!(mean > 0.99, "mean bus weight {mean}");
    assert!(weights.iter().all(|&w| w > 0.98), "{weights:?}");
}

#[test]
fn bus_is_much_faster_than_memory() {
    let spec = ChainSpec::reference(2);
    let opts = TransferOptions {
        stop_after_peak: Some(Default::default()),
        ..TransferOptions::default()
    };
    let bus = run_transfer(&spec, SubspaceKind::Bus, Model::Full, &uniform_grid(4.0, 0.01).unwrap(), &opts).unwrap();
    let t_bus = first_peak(&bus.curve).unwrap().t_star;
    let c = effective_couplings(&spec).unwrap();
    let t_mem_estimate = std::f64::consts::PI / (4.0 * c.j_mem);
    let grid = uniform_grid(2.0 * t_mem_estimate, 0.5).unwrap();
    let mem = run_transfer(&spec, SubspaceKind::Memory, Model::Full, &grid, &opts).unwrap();
    let p = first_peak(&mem.curve).unwrap();
    assert!(p.f_max > 0.99, "{p:?}");
    let ratio = p.t_star / t_bus;
    // t_mem / t_bus = J_bus / J_mem = 64 D^2 / (9 J^2) at E = 0
    let expect = 64.0 * spec.zfs_d * spec.zfs_d / 9.0;
    assert!(ratio > 100.0, "ratio {ratio}");
    assert!((ratio / expect - 1.0).abs() < 0.1, "ratio {ratio} vs {expect}");
}

#[test]
fn pulse_timing_tracks_rotating_frame_estimate() {
    for ratio in [0.1, 0.05, 0.025] {
        let d: f64 = -20.0;
        let b = ratio * d.abs();
        let m = measure_transition(SpinQuantum::THREE_HALVES, d, b, None).unwrap();
        let a = analytic_transition(b, d).unwrap();
        let rel = (m.t_peak / a.delta_t - 1.0).abs();
        assert!(rel < 0.01, "B/|D| = {ratio}: relative timing error {rel}");
        assert!(m.peak_population >= a.fidelity - 1e-6, "B/|D| = {ratio}: {}", m.peak_population);
    }
}
