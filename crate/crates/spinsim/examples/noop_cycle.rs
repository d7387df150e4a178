//! The "scheme 1" no-op cycle: four equal delays with 180° pulses arranged so
//! every internal term averages to zero. Shows the sign pattern of the
//! toggled Hamiltonian, the vanishing zeroth-order average, and the
//! compiled propagator's fidelity to the identity.

use spinsim::aht::{magnus, toggling_frames};
use spinsim::algebra::{gate_fidelity, identity, max_norm};
use spinsim::seqlib::noop_sequence;
use spinsim::{compile, liquid_hamiltonian, SpinSystem};

fn main() {
    let sys = SpinSystem::alanine();
    let h = liquid_hamiltonian(&sys).unwrap();
    let prog = noop_sequence(1e-3);
    println!("program:\n{}", prog.render());

    let frames = toggling_frames(&prog, &sys, &h).unwrap();
    let report = magnus(&frames, 1).unwrap();
    println!("interval  toggled terms");
    for (i, (_, terms)) in report.intervals.iter().enumerate() {
        let line: Vec<String> = terms
            .iter()
            .map(|(ps, c)| format!("{:+.3e}·{}", c.re, ps.render()))
            .collect();
        println!("  {i}:  {}", line.join("  "));
    }
    println!("cyclic: {}", report.cyclic);
    println!(
        "zeroth-order average max-norm: {:.3e} (vs internal {:.3e})",
        max_norm(&report.h0),
        max_norm(&h)
    );

    let segs = compile(&prog, &sys, &h).unwrap();
    let f = gate_fidelity(&segs.net_propagator(), &identity(3)).unwrap();
    println!("net propagator fidelity to identity: 1 - {:.2e}", 1.0 - f);
}
