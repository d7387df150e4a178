//! WAHUHA-4 line narrowing: over one cycle the homonuclear dipolar coupling
//! averages to zero while chemical shifts survive, scaled by 1/3 along each
//! axis (1/√3 along the (1,1,1) diagonal).

use std::f64::consts::PI;

use spinsim::aht::{wahuha_check, wahuha_program};
use spinsim::algebra::{coefficient_of, Factor};
use spinsim::system::DipolarCoupling;
use spinsim::SpinSystem;

fn main() {
    let mut sys = SpinSystem::new();
    sys.add_spin("a", "1H", 700.0).unwrap();
    sys.add_spin("b", "1H", 700.0).unwrap();
    sys.set_dipolar("a", "b", DipolarCoupling { b_rad_per_s: 4000.0, theta_rad: 0.0 })
        .unwrap();

    println!("program:\n{}", wahuha_program(1e-5).render());

    let report = wahuha_check(&sys, 1e-5).unwrap();
    let bare = PI * 700.0; // the untouched shift coefficient, ω/2

    use Factor::{I, X, Y, Z};
    for (name, pat) in [("x1", [X, I]), ("y1", [Y, I]), ("z1", [Z, I])] {
        let c = coefficient_of(&report.h0_terms, &pat).re;
        println!("shift term {name}: {c:.6e}  (bare/3 = {:.6e})", bare / 3.0);
    }
    for (name, pat) in [("zz", [Z, Z]), ("xx", [X, X]), ("yy", [Y, Y])] {
        let c = coefficient_of(&report.h0_terms, &pat).norm();
        println!("dipolar term {name}: {c:.3e}");
    }
    println!("effective field direction: (1,1,1)/√3, magnitude scaled by 1/√3");
}
