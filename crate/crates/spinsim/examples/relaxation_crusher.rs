//! Phenomenological relaxation and coherence selection: evolve a transverse
//! state under a uniform kite-model decay rate and watch the signal decay as
//! exp(-t/T2); then apply an ideal crusher and see every off-diagonal
//! (coherent) element vanish while populations survive.

use num_complex::Complex64 as C64;
use spinsim::algebra::{coefficient_of, expand_product_basis, identity, DensityMatrix, Factor, PauliString};
use spinsim::kite::group_multiplicities;
use spinsim::{
    apply_crusher, compile, evolve, kite_mask, liquid_hamiltonian, parse, CrusherMode, KiteModel,
    SpinSystem,
};

fn main() {
    let sys = SpinSystem::alanine();
    let h = liquid_hamiltonian(&sys).unwrap();

    println!("relaxation mask at n = 3: {} allowed positions", kite_mask(3).len());
    println!("symmetry classes: {:?}\n", group_multiplicities(3));

    // uniform decay rate 1/T2 on every non-identity operator
    let t2 = 0.020;
    let kite = KiteModel::uniform(1.0 / t2);
    let rho0 = DensityMatrix::new(
        identity(3) / C64::new(8.0, 0.0)
            + PauliString::single(3, 0, Factor::X).matrix(3).unwrap() * C64::new(1e-3, 0.0),
    )
    .unwrap();

    // J evolution shuffles amplitude between in-phase and antiphase terms,
    // but a uniform rate damps the whole traceless part by exp(-t/T2)
    let norm0 = rho0.traceless().norm();
    println!("{:>10}  {:>14}  {:>12}", "t (ms)", "traceless norm", "exp(-t/T2)");
    for k in 0..5 {
        let t = k as f64 * 0.010;
        let prog = parse(&format!("delay {}\n", t.max(1e-9))).unwrap();
        let segs = compile(&prog, &sys, &h).unwrap();
        let rho = evolve(&rho0, &segs, Some(&kite)).unwrap();
        let ratio = rho.traceless().norm() / norm0;
        println!("{:>10.1}  {ratio:>14.6}  {:>12.6}", t * 1e3, (-t / t2).exp());
    }

    let crushed = apply_crusher(&rho0, CrusherMode::Ideal).unwrap();
    let terms = expand_product_basis(crushed.matrix()).unwrap();
    let cx = coefficient_of(&terms, &[Factor::X, Factor::I, Factor::I]).norm();
    let pop = coefficient_of(&terms, &[Factor::I, Factor::I, Factor::I]).re;
    println!("\nafter ideal crusher: x coefficient {cx:.1e}, identity coefficient {pop:.4}");
}
