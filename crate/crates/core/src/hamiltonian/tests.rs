use nalgebra::DMatrix;

use super::*;
use crate::hilbert::{embed, spin_operators, BasisLabel, SparseOperator, SpinQuantum};
use crate::linalg::{eigh, BlockEigensystem};
use crate::{Error, C64};

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Kronecker-product construction of the chain Hamiltonian, independent of
/// the column generator in `ChainHamiltonian`.
fn kron_hamiltonian(spec: &ChainSpec) -> SparseOperator {
    let n = spec.n_sites;
    let spin = spec.spin;
    let o = spin_operators(spin);
    let dim = spin.chain_dim(n).unwrap();
    let mut h = SparseOperator::zeros(dim);
    for i in 0..n {
        let hs = build_site_hamiltonian(spec, i).unwrap();
        h = h.add(&embed(&hs, i, n, spin).unwrap());
    }
    for (i, j, jij) in spec.bonds() {
        for op in [&o.sx, &o.sy, &o.sz] {
            let term = embed(op, i, n, spin).unwrap().matmul(&embed(op, j, n, spin).unwrap());
            h = h.add(&term.scale(re(jij)));
        }
    }
    h
}

fn total_sz(spec: &ChainSpec) -> SparseOperator {
    let o = spin_operators(spec.spin);
    let dim = spec.spin.chain_dim(spec.n_sites).unwrap();
    (0..spec.n_sites).fold(SparseOperator::zeros(dim), |acc, i| {
        acc.add(&embed(&o.sz, i, spec.n_sites, spec.spin).unwrap())
    })
}

fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn sorted_eigs(h: &SparseOperator) -> Vec<f64> {
    BlockEigensystem::of(h, 4096).unwrap().sorted_values()
}

#[test]
fn site_hamiltonian_zfs_levels() {
    let spec = ChainSpec::reference(1);
    let h = build_site_hamiltonian(&spec, 0).unwrap();
    let e = eigh(&h).values;
    let expect = [-45.0, -45.0, -5.0, -5.0];
    for (a, b) in e.iter().zip(expect) {
        assert!((a - b).abs() < 1e-12);
    }
    // memory and bus doublets are 2|D| apart
    assert!(((e[2] - e[0]) - 2.0 * 20.0_f64).abs() < 1e-12);
}

#[test]
fn site_hamiltonian_is_hermitian_with_field_and_e() {
    let spec = ChainSpec::reference(2).with_anisotropy(1.3).with_field([0.2, -0.4, 0.7]);
    for site in 0..2 {
        let h = build_site_hamiltonian(&spec, site).unwrap();
        assert!(max_diff(&h, &h.adjoint()) < 1e-14);
    }
    assert!(matches!(build_site_hamiltonian(&spec, 2), Err(Error::SiteOutOfRange { .. })));
}

#[test]
fn site_kramers_doublets_at_zero_field() {
    for twice in [3, 5, 7] {
        for e in [0.0, 0.7, 2.5] {
            let spec = ChainSpec::reference(1)
                .with_spin(SpinQuantum::new(twice).unwrap())
                .with_anisotropy(e);
            let ev = eigh(&build_site_hamiltonian(&spec, 0).unwrap()).values;
            for pair in ev.chunks(2) {
                assert!((pair[0] - pair[1]).abs() < 1e-10, "S={} E={e}: {ev:?}", twice as f64 / 2.0);
            }
        }
    }
}

#[test]
fn chain_kramers_for_odd_site_count() {
    let spec = ChainSpec::reference(3).with_anisotropy(0.8);
    let ev = sorted_eigs(&build_total_hamiltonian(&spec).unwrap());
    for pair in ev.chunks(2) {
        assert!((pair[0] - pair[1]).abs() < 1e-9);
    }
}

#[test]
fn generator_matches_kronecker_construction() {
    let specs = [
        ChainSpec::reference(3).with_anisotropy(0.9).with_field([0.1, 0.3, -0.2]),
        ChainSpec::reference(4).with_range(CouplingRange::DIPOLAR).with_anisotropy(-0.5),
        ChainSpec::reference(2).with_spin(SpinQuantum::new(5).unwrap()).with_exchange(-1.0),
    ];
    for spec in specs {
        let fast = build_chain_hamiltonian(&spec, 1 << 20).unwrap();
        let slow = kron_hamiltonian(&spec);
        assert!(max_diff(&fast.to_dense(), &slow.to_dense()) < 1e-12);
        assert!(fast.is_hermitian_within(1e-12));
    }
}

#[test]
fn single_site_chain_is_site_hamiltonian() {
    let spec = ChainSpec::reference(1).with_anisotropy(0.5);
    let h = build_total_hamiltonian(&spec).unwrap().to_dense();
    assert!(max_diff(&h, &build_site_hamiltonian(&spec, 0).unwrap()) < 1e-15);
}

#[test]
fn heisenberg_dimer_spectrum() {
    let spec = ChainSpec::reference(2).with_spin(SpinQuantum::ONE_HALF).with_zfs(0.0);
    let ev = sorted_eigs(&build_total_hamiltonian(&spec).unwrap());
    let expect = [-0.75, 0.25, 0.25, 0.25];
    for (a, b) in ev.iter().zip(expect) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn total_sz_conserved_without_rhombic_term() {
    let spec = ChainSpec::reference(3);
    let h = build_total_hamiltonian(&spec).unwrap();
    assert!(h.commutator(&total_sz(&spec)).max_abs() < 1e-12);
    let lr = ChainSpec::reference(3).with_range(CouplingRange::DIPOLAR);
    let hl = build_long_range_hamiltonian(&lr).unwrap();
    assert!(hl.commutator(&total_sz(&lr)).max_abs() < 1e-12);
}

#[test]
fn magnetization_parity_conserved_with_rhombic_term() {
    let spec = ChainSpec::reference(3).with_anisotropy(1.0);
    let h = build_total_hamiltonian(&spec).unwrap();
    assert!(h.commutator(&total_sz(&spec)).max_abs() > 1e-3);
    // exp(i pi sum Sz) is diagonal with entries exp(i pi M)
    let dim = h.dim();
    let mut parity = crate::hilbert::SparseBuilder::new(dim);
    for i in 0..dim {
        let label = BasisLabel::from_index(i, 3, spec.spin);
        let twice_m: i32 = label.twice_m().iter().sum();
        parity.push(i, i, C64::from_polar(1.0, std::f64::consts::FRAC_PI_2 * twice_m as f64));
    }
    assert!(h.commutator(&parity.build()).max_abs() < 1e-12);
}

#[test]
fn decoupled_spectrum_is_sum_of_zfs_levels() {
    for n in 1..=3 {
        let spec = ChainSpec::reference(n).with_exchange(0.0).with_zfs(-7.0);
        let ev = sorted_eigs(&build_total_hamiltonian(&spec).unwrap());
        let dim = spec.spin.chain_dim(n).unwrap();
        let mut brute: Vec<f64> = (0..dim)
            .map(|i| {
                let l = BasisLabel::from_index(i, n, spec.spin);
                (0..n).map(|s| -7.0 * l.m(s) * l.m(s)).sum()
            })
            .collect();
        brute.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&brute) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn long_range_two_sites_equals_nearest_neighbour() {
    let sr = build_total_hamiltonian(&ChainSpec::reference(2)).unwrap();
    let lr = build_long_range_hamiltonian(&ChainSpec::reference(2).with_range(CouplingRange::DIPOLAR)).unwrap();
    assert_eq!(sr, lr);
}

#[test]
fn long_range_extra_bonds() {
    for (n, i, j, strength) in [(3, 0, 2, 1.0 / 8.0), (4, 0, 3, 1.0 / 27.0)] {
        let sr_spec = ChainSpec::reference(n);
        let lr_spec = sr_spec.clone().with_range(CouplingRange::DIPOLAR);
        let diff = build_long_range_hamiltonian(&lr_spec)
            .unwrap()
            .sub(&build_total_hamiltonian(&sr_spec).unwrap());
        let o = spin_operators(sr_spec.spin);
        let mut heis = SparseOperator::zeros(diff.dim());
        for op in [&o.sx, &o.sy, &o.sz] {
            heis = heis.add(&embed(op, i, n, sr_spec.spin).unwrap().matmul(&embed(op, j, n, sr_spec.spin).unwrap()));
        }
        // project the difference onto the (i, j) Heisenberg term
        let num: C64 = diff.to_dense().component_mul(&heis.to_dense().map(|z| z.conj())).sum();
        let den: C64 = heis.to_dense().map(|z| z.norm_sqr().into()).sum();
        assert!(((num / den).re - strength).abs() < 1e-14, "n={n}");
    }
}

#[test]
fn builders_reject_wrong_range() {
    let lr = ChainSpec::reference(3).with_range(CouplingRange::DIPOLAR);
    assert!(build_total_hamiltonian(&lr).is_err());
    assert!(build_long_range_hamiltonian(&ChainSpec::reference(3)).is_err());
}

#[test]
fn capacity_error_is_explicit() {
    let spec = ChainSpec::reference(6);
    match build_total_hamiltonian_capped(&spec, 1000) {
        Err(Error::Capacity { required, max }) => {
            assert_eq!(required, 4096);
            assert_eq!(max, 1000);
        }
        other => panic!("expected capacity error, got {other:?}"),
    }
}

#[test]
fn couplings_at_reference_point() {
    let c = effective_couplings(&ChainSpec::reference(2)).unwrap();
    assert!((c.j_mem - 9.0 / 25600.0).abs() < 1e-18);
    assert!((c.eta_mem - 27.0 / 51200.0).abs() < 1e-18);
    assert!((c.delta_bus - 0.3109375).abs() < 1e-15);
    assert!((c.eta_bus - 0.0375).abs() < 1e-15);
    assert!((c.delta_mem_bulk - 2.26318).abs() < 5e-6);
    assert!((c.delta_mem_boundary - 2.26345).abs() < 5e-6);
    assert_eq!(c.j_bus_x, c.j_bus_y);

    let ce = effective_couplings(&ChainSpec::reference(2).with_anisotropy(1.0)).unwrap();
    assert!((ce.j_bus_x - 1.15).abs() < 1e-14);
    assert!((ce.j_bus_y - 0.85).abs() < 1e-14);
}

#[test]
fn couplings_reject_zero_zfs() {
    let spec = ChainSpec::reference(2).with_zfs(0.0);
    assert!(matches!(effective_couplings(&spec), Err(Error::SingularParameter(_))));
    assert!(build_mem_effective(&spec).is_err());
    assert!(build_bus_effective(&spec).is_err());
}

#[test]
fn couplings_split_into_stated_powers_of_j() {
    let spec = ChainSpec::reference(2).with_anisotropy(0.7).with_exchange(1.3);
    let plus = effective_couplings(&spec).unwrap();
    let minus = effective_couplings(&spec.clone().with_exchange(-1.3)).unwrap();
    let (j, d, e) = (1.3, -20.0, 0.7);
    let odd = |a: f64, b: f64| (a - b) / 2.0;
    let even = |a: f64, b: f64| (a + b) / 2.0;
    // purely odd in J
    assert!((plus.j_mem + minus.j_mem).abs() < 1e-15);
    assert!((plus.eta_mem + minus.eta_mem).abs() < 1e-15);
    assert!((plus.j_bus_x + minus.j_bus_x).abs() < 1e-15);
    assert!((plus.j_bus_y + minus.j_bus_y).abs() < 1e-15);
    // purely even
    assert!((plus.eta_bus - minus.eta_bus).abs() < 1e-15);
    // mixed
    assert!((odd(plus.delta_bus, minus.delta_bus) - j / 4.0).abs() < 1e-14);
    assert!((even(plus.delta_bus, minus.delta_bus) + 39.0 * j * j / (32.0 * d)).abs() < 1e-14);
    let odd_mem = 2.25 * j - 9.0 * j * e * e / (2.0 * d * d) - 90.0 * j.powi(3) / (256.0 * d * d);
    assert!((odd(plus.delta_mem_bulk, minus.delta_mem_bulk) - odd_mem).abs() < 1e-14);
    assert!((even(plus.delta_mem_bulk, minus.delta_mem_bulk) + 2.25 * j * j / (8.0 * d)).abs() < 1e-14);
}

/// Pauli-string coefficient `tr(P H) / 2^N`.
fn pauli_coefficient(h: &SparseOperator, ops: &[(usize, char)]) -> f64 {
    let n = h.dim().trailing_zeros() as usize;
    let o = spin_operators(SpinQuantum::ONE_HALF);
    let mut p = SparseOperator::identity(h.dim());
    for &(site, axis) in ops {
        let m = match axis {
            'x' => &o.sx,
            'y' => &o.sy,
            _ => &o.sz,
        } * re(2.0);
        p = p.matmul(&embed(&m, site, n, SpinQuantum::ONE_HALF).unwrap());
    }
    let tr: C64 = p.matmul(h).entries().filter(|(r, c, _)| r == c).map(|(_, _, v)| v).sum();
    tr.re / h.dim() as f64
}

#[test]
fn memory_effective_structure() {
    let spec = ChainSpec::reference(2);
    let c = effective_couplings(&spec).unwrap();
    let h2 = build_mem_effective(&spec).unwrap();
    let code = SubspaceCode::for_spec(SubspaceKind::Memory, &spec).unwrap();
    let a = code.effective_index(&[0, 1]).unwrap();
    let b = code.effective_index(&[1, 0]).unwrap();
    assert!((h2.get(a, b).re - 7.03125e-4).abs() < 1e-15);
    assert!((h2.get(a, b).re - 2.0 * c.j_mem).abs() < 1e-18);
    assert!((pauli_coefficient(&h2, &[(0, 'z'), (1, 'z')]) - c.delta_mem_boundary).abs() < 1e-14);

    let h3 = build_mem_effective(&ChainSpec::reference(3)).unwrap();
    assert!((pauli_coefficient(&h3, &[(0, 'z'), (2, 'z')]) - c.eta_mem).abs() < 1e-15);
    assert!((pauli_coefficient(&h3, &[(0, 'z'), (1, 'z')]) - c.delta_mem_boundary).abs() < 1e-14);

    let h4 = build_mem_effective(&ChainSpec::reference(4)).unwrap();
    assert!((pauli_coefficient(&h4, &[(1, 'z'), (2, 'z')]) - c.delta_mem_bulk).abs() < 1e-14);
    assert!((pauli_coefficient(&h4, &[(2, 'z'), (3, 'z')]) - c.delta_mem_boundary).abs() < 1e-14);
    assert!((pauli_coefficient(&h4, &[(1, 'z'), (3, 'z')]) - c.eta_mem).abs() < 1e-15);
    assert!(pauli_coefficient(&h4, &[(0, 'z'), (3, 'z')]).abs() < 1e-15);
    assert!(h4.is_hermitian_within(1e-15));
}

#[test]
fn bus_effective_symmetries() {
    let n = 4;
    let mut sz_tot = SparseOperator::zeros(1 << n);
    let o = spin_operators(SpinQuantum::ONE_HALF);
    for i in 0..n {
        sz_tot = sz_tot.add(&embed(&o.sz, i, n, SpinQuantum::ONE_HALF).unwrap());
    }
    let h0 = build_bus_effective(&ChainSpec::reference(n)).unwrap();
    assert!(h0.is_hermitian_within(1e-15));
    assert!(h0.commutator(&sz_tot).max_abs() < 1e-12);
    let h1 = build_bus_effective(&ChainSpec::reference(n).with_anisotropy(1.0)).unwrap();
    assert!(h1.commutator(&sz_tot).max_abs() > 0.1);
    let c = effective_couplings(&ChainSpec::reference(n).with_anisotropy(1.0)).unwrap();
    assert!((pauli_coefficient(&h1, &[(1, 'x'), (2, 'x')]) - c.j_bus_x).abs() < 1e-14);
    assert!((pauli_coefficient(&h1, &[(1, 'y'), (2, 'y')]) - c.j_bus_y).abs() < 1e-14);
    assert!((pauli_coefficient(&h1, &[(0, 'x'), (2, 'x')]) - c.eta_bus).abs() < 1e-14);
    assert!((pauli_coefficient(&h1, &[(1, 'z'), (2, 'z')]) - c.delta_bus).abs() < 1e-14);
}

#[test]
fn subspace_projector_properties() {
    for kind in [SubspaceKind::Memory, SubspaceKind::Bus] {
        let code = SubspaceCode::new(kind, SpinQuantum::THREE_HALVES, 3).unwrap();
        assert_eq!(code.bit_map()[1].1, if kind == SubspaceKind::Memory { 3 } else { 1 });
        for e in 0..8 {
            let mut v = vec![C64::new(0.0, 0.0); 8];
            v[e] = C64::new(0.3, -0.2);
            assert_eq!(code.project(&code.embed(&v).unwrap()).unwrap(), v);
        }
        // embed . project is the diagonal projector onto the embedding
        let full = code.full_dim();
        let x: Vec<C64> = (0..full).map(|i| C64::new(i as f64, 1.0)).collect();
        let px = code.embed(&code.project(&x).unwrap()).unwrap();
        let ppx = code.embed(&code.project(&px).unwrap()).unwrap();
        assert_eq!(px, ppx);
        for i in 0..full {
            let inside = code.embedding().contains(&i);
            assert_eq!(px[i], if inside { x[i] } else { C64::new(0.0, 0.0) });
        }
    }
    let mem = SubspaceCode::new(SubspaceKind::Memory, SpinQuantum::THREE_HALVES, 2).unwrap();
    let idx = mem.full_index(&[0, 1]).unwrap();
    assert_eq!(BasisLabel::from_index(idx, 2, SpinQuantum::THREE_HALVES).twice_m(), &[-3, 3]);
}

#[test]
fn oracle_decoupled_sites_give_single_site_energies() {
    let spec = ChainSpec::reference(2).with_exchange(0.0).with_anisotropy(0.0);
    let h = build_total_hamiltonian(&spec).unwrap();
    for kind in [SubspaceKind::Memory, SubspaceKind::Bus] {
        let code = SubspaceCode::for_spec(kind, &spec).unwrap();
        let block = numerical_effective_block(&h, &code).unwrap();
        let level = if kind == SubspaceKind::Memory { -45.0 } else { -5.0 };
        for r in 0..4 {
            for c in 0..4 {
                let expect = if r == c { 2.0 * level } else { 0.0 };
                assert!((block[(r, c)] - re(expect)).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn oracle_memory_hopping_matches_closed_form() {
    let spec = ChainSpec::reference(2);
    let code = SubspaceCode::for_spec(SubspaceKind::Memory, &spec).unwrap();
    let block = numerical_effective_block(&build_total_hamiltonian(&spec).unwrap(), &code).unwrap();
    let a = code.effective_index(&[0, 1]).unwrap();
    let b = code.effective_index(&[1, 0]).unwrap();
    let analytic = 2.0 * effective_couplings(&spec).unwrap().j_mem;
    let rel = (block[(a, b)].norm() - analytic).abs() / analytic;
    assert!(rel < 0.05, "relative deviation {rel}");
}

#[test]
fn oracle_memory_hopping_converges_linearly() {
    let mut devs = Vec::new();
    for d in [-10.0, -20.0, -40.0, -80.0] {
        let spec = ChainSpec::reference(2).with_zfs(d);
        let code = SubspaceCode::for_spec(SubspaceKind::Memory, &spec).unwrap();
        let block = numerical_effective_block(&build_total_hamiltonian(&spec).unwrap(), &code).unwrap();
        let a = code.effective_index(&[0, 1]).unwrap();
        let b = code.effective_index(&[1, 0]).unwrap();
        let analytic = 2.0 * effective_couplings(&spec).unwrap().j_mem;
        devs.push((block[(a, b)].norm() - analytic).abs() / analytic);
    }
    for w in devs.windows(2) {
        // halving J/|D| must at least halve the deviation (10% slack)
        assert!(w[1] <= 0.55 * w[0], "{devs:?}");
    }
}

#[test]
fn oracle_bus_exchange_close_to_j() {
    let spec = ChainSpec::reference(2);
    let code = SubspaceCode::for_spec(SubspaceKind::Bus, &spec).unwrap();
    let block = numerical_effective_block(&build_total_hamiltonian(&spec).unwrap(), &code).unwrap();
    let a = code.effective_index(&[0, 1]).unwrap();
    let b = code.effective_index(&[1, 0]).unwrap();
    let j_bus = block[(a, b)].norm() / 2.0;
    // first-order corrections are O(J^2/|D|)
    assert!((j_bus - 1.0).abs() < 2.0 / 20.0, "J_bus = {j_bus}");
    // Ising part: (E_parallel - E_antiparallel)/2 = 2 Delta_bus
    let c = effective_couplings(&spec).unwrap();
    let par = code.effective_index(&[1, 1]).unwrap();
    let delta = (block[(par, par)].re - block[(a, a)].re) / 2.0;
    assert!((delta - c.delta_bus).abs() < 0.02, "delta = {delta}, closed form {}", c.delta_bus);
}

#[test]
fn oracle_rejects_dimension_mismatch() {
    let code = SubspaceCode::new(SubspaceKind::Bus, SpinQuantum::THREE_HALVES, 3).unwrap();
    let h = build_total_hamiltonian(&ChainSpec::reference(2)).unwrap();
    assert!(matches!(numerical_effective_block(&h, &code), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn oracle_reports_band_ambiguity() {
    // With D = 0 the two bands are fully mixed.
    let spec = ChainSpec::reference(2).with_zfs(0.0).with_anisotropy(0.0);
    let code = SubspaceCode::for_spec(SubspaceKind::Bus, &spec).unwrap();
    let h = build_total_hamiltonian(&spec).unwrap();
    assert!(matches!(numerical_effective_block(&h, &code), Err(Error::BandAmbiguity { .. })));
}

#[test]
fn sector_restriction_is_exact() {
    let spec = ChainSpec::reference(3).with_anisotropy(0.6);
    let ch = ChainHamiltonian::new(&spec, 1 << 20).unwrap();
    let full = ch.to_sparse();
    let seed = BasisLabel::from_m(&[0.5, -0.5, -0.5]).unwrap().index(spec.spin).unwrap();
    let sector = ch.sector(&[seed]);
    assert_eq!(sector.basis, full.invariant_closure(&[seed]));
    // parity sector: half of the space
    assert_eq!(sector.basis.len(), 32);
    assert_eq!(sector.operator, full.restrict(&sector.basis));
}
