//! Selective decoupling of spin c: compare the b multiplet with and without
//! the decoupling cycle. With c decoupled the 1.2 Hz b–c splitting vanishes
//! and the b multiplet collapses to a pure 53 Hz doublet.

use num_complex::Complex64 as C64;
use spinsim::algebra::{identity, DensityMatrix, Factor, PauliString};
use spinsim::measure::{acquire, peak_pick, spectrum};
use spinsim::{liquid_hamiltonian, SpinSystem};

fn main() {
    let sys = SpinSystem::alanine();
    let h = liquid_hamiltonian(&sys).unwrap();
    let rho = DensityMatrix::new(
        identity(3) / C64::new(8.0, 0.0)
            + PauliString::single(3, 1, Factor::X).matrix(3).unwrap() * C64::new(1e-5, 0.0),
    )
    .unwrap();

    for (label, dec) in [("coupled", vec![]), ("c decoupled", vec![2usize])] {
        let fid = acquire(&rho, &sys, &h, 160_000, 2.5e-5, None, &dec).unwrap();
        let spec = spectrum(&fid, 1 << 18, 0.3);
        let peaks: Vec<(f64, f64)> = peak_pick(&spec, 0.1)
            .into_iter()
            .filter(|(f, _)| (f + 12580.0).abs() < 100.0)
            .collect();
        println!("{label}: {} lines near -12580 Hz", peaks.len());
        for (f, amp) in peaks {
            println!("  {f:>12.2} Hz   {amp:.3e}");
        }
    }
}
