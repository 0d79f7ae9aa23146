//! Randomized structural properties across the state, channel, tripartite,
//! GHZ and experiment layers.

use entinv::channel::{apply_damping, evolved_reduced, excitations, DampingParameter, QubitDensity};
use entinv::experiment::{evolved_source, exact_estimate, SourceModel};
use entinv::ghz::{evolve_and_check, evolve_ghz, evolve_ghz_in_order, reservoir_label, system_label, GhzConfig};
use entinv::invariants::{lambda_of, purity_from_excitation};
use entinv::qstate::{
    density_from_pure, partial_trace, purity_and_schmidt, tensor_product, DensityMatrix, PureState, SubsystemLabel, C64,
};
use entinv::tripartite::{
    build_initial, evolve_tripartite, reduced_parties, run_sweep, PurificationAmplitudes, PURIFIER, RESERVOIR, SYSTEM,
};
use proptest::prelude::*;

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
        .prop_filter("nonzero norm", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let norm = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            v.into_iter().map(|(a, b)| C64::new(a / norm, b / norm)).collect()
        })
}

fn pure_state(names: &'static [(&'static str, usize)]) -> impl Strategy<Value = PureState> {
    let labels: Vec<SubsystemLabel> = names.iter().map(|&(n, d)| SubsystemLabel::new(n, d).unwrap()).collect();
    let dim = names.iter().map(|&(_, d)| d).product();
    complex_vec(dim).prop_map(move |amps| PureState::new(labels.clone(), amps).unwrap())
}

fn amplitudes() -> impl Strategy<Value = PurificationAmplitudes> {
    complex_vec(4).prop_map(|v| PurificationAmplitudes::new(v[0], v[1], v[2], v[3]).unwrap())
}

fn assert_physical(rho: &DensityMatrix) {
    assert!(rho.hermiticity_error() < 1e-12, "hermiticity {}", rho.hermiticity_error());
    assert!((rho.trace().re - 1.0).abs() < 1e-12 && rho.trace().im.abs() < 1e-12);
    assert!(rho.min_eigenvalue() >= -1e-9, "min eigenvalue {}", rho.min_eigenvalue());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_of_product_recovers_factor(
        a in pure_state(&[("A", 2), ("B", 3)]),
        b in pure_state(&[("C", 2), ("D", 2)]),
    ) {
        let joint = density_from_pure(&tensor_product(&a, &b).unwrap());
        let back = partial_trace(&joint, &["A", "B"]).unwrap();
        prop_assert!(back.max_abs_diff(&density_from_pure(&a)) < 1e-12);
        let other = partial_trace(&joint, &["C", "D"]).unwrap();
        prop_assert!(other.max_abs_diff(&density_from_pure(&b)) < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace_of_mixed_states(psi in pure_state(&[("A", 2), ("B", 3), ("E", 3)])) {
        let mixed = partial_trace(&density_from_pure(&psi), &["A", "B"]).unwrap();
        assert_physical(&mixed);
        for keep in [&["A"][..], &["B"][..]] {
            let reduced = partial_trace(&mixed, keep).unwrap();
            assert_physical(&reduced);
            let (purity, k) = purity_and_schmidt(&reduced).unwrap();
            prop_assert!((purity * k - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reduced_purity_of_pure_composite_is_bounded(psi in pure_state(&[("A", 2), ("B", 2), ("C", 3)])) {
        for keep in [&["A"][..], &["C"][..], &["A", "B"][..], &["A", "B", "C"][..]] {
            let direct = psi.reduced_density(keep).unwrap();
            let via_full = partial_trace(&density_from_pure(&psi), keep).unwrap();
            prop_assert!(direct.max_abs_diff(&via_full) < 1e-12);
            let d = direct.dim() as f64;
            let (purity, _) = purity_and_schmidt(&direct).unwrap();
            prop_assert!(purity <= 1.0 + 1e-12 && purity >= 1.0 / d - 1e-12);
        }
    }

    #[test]
    fn damping_is_norm_preserving_and_fixes_ground_amplitudes(amp in amplitudes(), p in 0.0f64..=1.0) {
        let initial = build_initial(&amp).unwrap();
        let out = apply_damping(&initial, SYSTEM, RESERVOIR, DampingParameter::new(p).unwrap()).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        for m in 0..2 {
            let before = initial.amplitude(&[m, 0, 0]).unwrap();
            let after = out.amplitude(&[m, 0, 0]).unwrap();
            prop_assert!((before - after).norm() == 0.0);
        }
        assert_physical(&out.reduced_density(&[SYSTEM, RESERVOIR]).unwrap());
    }

    #[test]
    fn closed_form_reductions_match_traces(amp in amplitudes(), p in 0.0f64..=1.0) {
        let rho0 = amp.system_density();
        let state = evolve_tripartite(&build_initial(&amp).unwrap(), p).unwrap();
        let (s, r) = evolved_reduced(&rho0, DampingParameter::new(p).unwrap());
        let traced_s = QubitDensity::from_density(&state.reduced_density(&[SYSTEM]).unwrap()).unwrap();
        let traced_r = QubitDensity::from_density(&state.reduced_density(&[RESERVOIR]).unwrap()).unwrap();
        prop_assert!(s.max_abs_diff(&traced_s) < 1e-12);
        prop_assert!(r.max_abs_diff(&traced_r) < 1e-12);
    }

    #[test]
    fn total_excitation_is_constant(amp in amplitudes(), ps in prop::collection::vec(0.0f64..=1.0, 1..12)) {
        let rho0 = amp.system_density();
        for p in ps {
            let e = excitations(&rho0, DampingParameter::new(p).unwrap());
            prop_assert!((e.total - rho0.rho_ee()).abs() < 1e-12);
            prop_assert!((e.system + e.reservoir - e.total).abs() < 1e-12);
        }
    }

    #[test]
    fn damping_composes_through_fresh_reservoir(amp in amplitudes(), p1 in 0.0f64..=1.0, p2 in 0.0f64..=1.0) {
        let first = evolve_tripartite(&build_initial(&amp).unwrap(), p1).unwrap();
        let fresh = PureState::basis(vec![SubsystemLabel::qubit("R2")], &[0]).unwrap();
        let twice = apply_damping(
            &tensor_product(&first, &fresh).unwrap(),
            SYSTEM,
            "R2",
            DampingParameter::new(p2).unwrap(),
        )
        .unwrap();
        let once = evolve_tripartite(&build_initial(&amp).unwrap(), 1.0 - (1.0 - p1) * (1.0 - p2)).unwrap();
        let a = twice.reduced_density(&[SYSTEM]).unwrap();
        let b = once.reduced_density(&[SYSTEM]).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn purifier_is_untouched_and_global_state_stays_pure(amp in amplitudes(), p in 0.0f64..=1.0) {
        let initial = build_initial(&amp).unwrap();
        let state = evolve_tripartite(&initial, p).unwrap();
        let before = initial.reduced_density(&[PURIFIER]).unwrap();
        let after = state.reduced_density(&[PURIFIER]).unwrap();
        prop_assert!(before.max_abs_diff(&after) < 1e-12);
        let (global, _) = purity_and_schmidt(&density_from_pure(&state)).unwrap();
        prop_assert!((global - 1.0).abs() < 1e-12);

        let rho0 = amp.system_density();
        let lambda = lambda_of(&rho0);
        let e = excitations(&rho0, DampingParameter::new(p).unwrap());
        let (_, purities) = reduced_parties(&state).unwrap();
        prop_assert!((purities.s - purity_from_excitation(e.system, lambda)).abs() < 1e-12);
        prop_assert!((purities.r - purity_from_excitation(e.reservoir, lambda)).abs() < 1e-12);
    }

    #[test]
    fn ghz_single_party_forms_and_symmetry(
        alpha2 in 0.0f64..=1.0,
        ps in prop::collection::vec(0.0f64..=1.0, 1..=4),
    ) {
        let cfg = GhzConfig::with_population(alpha2, ps.clone()).unwrap();
        let state = evolve_ghz(&cfg).unwrap();
        let rep = evolve_and_check(&cfg).unwrap();
        for (j, &p) in ps.iter().enumerate() {
            let s = QubitDensity::from_density(&state.reduced_density(&[&system_label(j)]).unwrap()).unwrap();
            let r = QubitDensity::from_density(&state.reduced_density(&[&reservoir_label(j)]).unwrap()).unwrap();
            prop_assert!(s.rho_ge().norm() < 1e-12 && r.rho_ge().norm() < 1e-12);
            prop_assert!((rep.pairs[j].0 - (alpha2 * (1.0 - p) - 0.5).abs()).abs() < 1e-12);
            prop_assert!((rep.pairs[j].1 - (alpha2 * p - 0.5).abs()).abs() < 1e-12);
        }

        let mut reversed = ps.clone();
        reversed.reverse();
        let flipped = evolve_and_check(&GhzConfig::with_population(alpha2, reversed).unwrap()).unwrap();
        prop_assert!((flipped.lhs - rep.lhs).abs() < 1e-12 && (flipped.rhs - rep.rhs).abs() < 1e-12);

        let order: Vec<usize> = (0..ps.len()).rev().collect();
        let other = evolve_ghz_in_order(&cfg, &order).unwrap();
        prop_assert!(state.max_abs_diff(&other).unwrap() < 1e-12);
    }

    #[test]
    fn exact_experiment_path_reproduces_sweep(rho_ee in 0.0f64..=1.0, theta in 0.0f64..=std::f64::consts::FRAC_PI_2) {
        let source = SourceModel::pure(rho_ee).unwrap();
        let est = exact_estimate(&evolved_source(&source, theta).unwrap(), theta).unwrap();
        let p = theta.sin().powi(2);
        let sweep = run_sweep(&PurificationAmplitudes::diagonal(rho_ee).unwrap(), &[p]).unwrap();
        let r = &sweep.reports[0];
        prop_assert!((est.report.w_s - r.w_s).abs() < 1e-12);
        prop_assert!((est.report.w_r - r.w_r).abs() < 1e-12);
        prop_assert!((est.report.w_m - r.w_m).abs() < 1e-12);
        prop_assert!((est.report.lhs - r.lhs).abs() < 1e-12);
        prop_assert!((est.report.rhs - r.rhs).abs() < 1e-12);
    }
}
