//! Property-based tests: pulse-program DSL round trips and simulation
//! invariants on randomized inputs.

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use spinsim::algebra::{hermiticity_defect, max_norm, CMat, DensityMatrix};
use spinsim::{compile, evolve, liquid_hamiltonian, parse, SpinSystem};

fn arb_event() -> impl Strategy<Value = String> {
    let target = prop_oneof![
        Just("a".to_string()),
        Just("b".to_string()),
        Just("c".to_string()),
        Just("all".to_string()),
        Just("a,c".to_string()),
    ];
    prop_oneof![
        (target.clone(), -360.0..360.0f64, prop_oneof![Just("x"), Just("y"), Just("-x"), Just("-y")])
            .prop_map(|(t, a, ax)| format!("pulse {t} {a} {ax}")),
        (1e-5..5e-3f64).prop_map(|d| format!("delay {d}")),
        (prop_oneof![Just("a"), Just("b"), Just("c")], -180.0..180.0f64)
            .prop_map(|(t, a)| format!("zrot {t} {a}")),
        Just("crush".to_string()),
        (1u32..4u32).prop_map(|a| format!("grad {a} 0.0005")),
    ]
}

fn arb_program() -> impl Strategy<Value = String> {
    prop::collection::vec(arb_event(), 1..8).prop_map(|lines| lines.join("\n") + "\n")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// parse → render → parse is a fixed point of the DSL.
    #[test]
    fn dsl_round_trip(text in arb_program()) {
        let p1 = parse(&text).unwrap();
        let rendered = p1.render();
        let p2 = parse(&rendered).unwrap();
        prop_assert_eq!(rendered, p2.render());
    }

    /// Evolving any valid state through any program preserves trace and
    /// Hermiticity and never increases purity.
    #[test]
    fn evolution_invariants(text in arb_program(), seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let sys = SpinSystem::alanine();
        let h = liquid_hamiltonian(&sys).unwrap();
        let segs = compile(&parse(&text).unwrap(), &sys, &h).unwrap();

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut g = CMat::zeros(8, 8);
        for r in 0..8 {
            for c in 0..8 {
                g[(r, c)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let p = &g * g.adjoint();
        let tr = p.trace().re;
        let rho0 = DensityMatrix::new(p / C64::new(tr, 0.0)).unwrap();

        let rho = evolve(&rho0, &segs, None).unwrap();
        prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-10);
        prop_assert!(hermiticity_defect(rho.matrix()) < 1e-10);
        prop_assert!(rho.purity() <= rho0.purity() + 1e-9);
    }

    /// Compiled propagators of crusher-free, gradient-free programs compose:
    /// compile(p1 + p2) equals compile(p2's net) * compile(p1's net).
    #[test]
    fn compilation_homomorphism(
        a in prop::collection::vec(
            prop_oneof![
                ("a|b|c|all", -360.0..360.0f64).prop_map(|(t, ang)| format!("pulse {t} {ang} x")),
                (1e-5..2e-3f64).prop_map(|d| format!("delay {d}")),
            ],
            1..5,
        ),
        b in prop::collection::vec((1e-5..2e-3f64).prop_map(|d| format!("delay {d}")), 1..4),
    ) {
        let sys = SpinSystem::alanine();
        let h = liquid_hamiltonian(&sys).unwrap();
        let ta = a.join("\n") + "\n";
        let tb = b.join("\n") + "\n";
        let ua = compile(&parse(&ta).unwrap(), &sys, &h).unwrap().net_propagator();
        let ub = compile(&parse(&tb).unwrap(), &sys, &h).unwrap().net_propagator();
        let uab = compile(&parse(&format!("{ta}{tb}")).unwrap(), &sys, &h)
            .unwrap()
            .net_propagator();
        prop_assert!(max_norm(&(ub * ua - uab)) < 1e-10);
    }
}
