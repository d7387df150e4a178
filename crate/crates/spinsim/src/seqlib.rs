//! Constructors for the named pulse sequences, emitted as [`PulseProgram`]
//! values: the 4-pulse no-op cycle, spin decoupling, a refocused
//! controlled-NOT, gradient pseudo-pure state preparation, and the
//! solid-state line-narrowing cycle.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::algebra::{identity, CMat, DensityMatrix, Factor, PauliString};
use crate::program::{parse, PulseProgram};
use crate::system::SpinSystem;

#[derive(Debug, Error)]
pub enum SeqError {
    #[error("sequence supports exactly 3 spins, got {0}")]
    SpinCount(usize),
    #[error("J coupling between {0} and {1} is zero; the coupling delay is infinite")]
    ZeroJ(String, String),
    #[error("label '{0}' not in system")]
    UnknownLabel(String),
    #[error(transparent)]
    Program(#[from] crate::program::ProgramError),
    #[error(transparent)]
    System(#[from] crate::system::SystemError),
}

/// Four equally spaced parallel 180°-y rotations on the subsets {b,c} and
/// {a,b}; every shift and coupling term averages to zero, so the cycle is
/// an identity gate for arbitrary offsets and J.
pub fn noop_sequence(tau_s: f64) -> PulseProgram {
    parse(&format!(
        "delay {tau_s}\npulse b,c 180 y\ndelay {tau_s}\npulse a,b 180 y\n\
         delay {tau_s}\npulse b,c 180 y\ndelay {tau_s}\npulse a,b 180 y\n"
    ))
    .expect("static program text")
}

/// Two-interval cycle that refocuses every term involving the target spin:
/// the rest of the system evolves as if that spin were absent.
pub fn decouple_sequence(target: &str, tau_s: f64) -> PulseProgram {
    parse(&format!(
        "delay {tau_s}\npulse {target} 180 y\ndelay {tau_s}\npulse {target} 180 y\n"
    ))
    .expect("static program text")
}

/// ZZ evolution through angle sign·π/4 between `a` and `b`, refocused so
/// that all other shifts and couplings of a 3-spin system cancel: the
/// coupling delay 1/(2J) is split in four, with 180s on the spectator at
/// the odd quarters and on all spins at the even quarters.
fn refocused_zz(a: &str, b: &str, spectator: &str, j_hz: f64) -> String {
    let tau = 1.0 / (8.0 * j_hz.abs());
    let _ = (a, b);
    format!(
        "delay {tau}\npulse {spectator} 180 y\ndelay {tau}\npulse all 180 y\n\
         delay {tau}\npulse {spectator} 180 y\ndelay {tau}\npulse all 180 y\n"
    )
}

fn third_label(sys: &SpinSystem, a: &str, b: &str) -> Result<String, SeqError> {
    if sys.len() != 3 {
        return Err(SeqError::SpinCount(sys.len()));
    }
    sys.index_of(a).map_err(|_| SeqError::UnknownLabel(a.to_string()))?;
    sys.index_of(b).map_err(|_| SeqError::UnknownLabel(b.to_string()))?;
    sys.spins()
        .iter()
        .map(|s| s.label.clone())
        .find(|l| l != a && l != b)
        .ok_or_else(|| SeqError::UnknownLabel(format!("{a}/{b}")))
}

/// Controlled-NOT with control `a` and target `b`, as the product of
/// commuting factors e^{iσx^bπ/4}·e^{iσz^aπ/4}·e^{−iσz^aσx^bπ/4} (up to
/// global phase). The ZX factor is a y-sandwiched refocused ZZ evolution.
pub fn cnot_sequence(a: &str, b: &str, sys: &SpinSystem) -> Result<PulseProgram, SeqError> {
    let spectator = third_label(sys, a, b)?;
    let ia = sys.index_of(a)?;
    let ib = sys.index_of(b)?;
    let j = sys.j_hz(ia, ib);
    if j == 0.0 {
        return Err(SeqError::ZeroJ(a.to_string(), b.to_string()));
    }
    // for J > 0 the refocused block accumulates e^{−iπ/4 ZZ}; a negative J
    // flips the sandwich sense instead
    let (pre, post) = if j > 0.0 { ("-90", "90") } else { ("90", "-90") };
    let text = format!(
        "pulse {b} {pre} y\n{}pulse {b} {post} y\npulse {b} -90 x\nzrot {a} -90\n",
        refocused_zz(a, b, &spectator, j)
    );
    Ok(parse(&text)?)
}

/// Gradient pseudo-pure preparation on a 3-spin system (labels in system
/// order a, b, c): a 90°-y pulse on a followed by two zero-controlled-NOT
/// blocks interleaved with gradients of relative area 1 : 2 : 1. The
/// spatial average keeps only the pathway whose windings cancel, leaving
/// the traceless part proportional to σx^a·E₊^b·E₊^c.
pub fn pseudo_pure_sequence(sys: &SpinSystem) -> Result<PulseProgram, SeqError> {
    if sys.len() != 3 {
        return Err(SeqError::SpinCount(sys.len()));
    }
    let labels: Vec<String> = sys.spins().iter().map(|s| s.label.clone()).collect();
    let (a, b, c) = (&labels[0], &labels[1], &labels[2]);
    let grad_dur = 1e-3;
    let mut text = String::new();
    text.push_str(&format!("pulse {a} 90 y\n"));
    text.push_str(&format!("grad 1 {grad_dur}\n"));
    text.push_str(&zero_controlled_not(sys, a, b, c)?);
    text.push_str(&format!("grad 2 {grad_dur}\n"));
    text.push_str(&zero_controlled_not(sys, a, c, b)?);
    text.push_str(&format!("grad 1 {grad_dur}\n"));
    Ok(parse(&text)?)
}

/// X on `target` conditioned on `control` being |0⟩, decomposed into the
/// commuting factors e^{+iπ/4 X_t}, e^{−iπ/4 Z_c}, e^{+iπ/4 X_tZ_c} (up to
/// global phase). `spectator` is the third spin, refocused away.
fn zero_controlled_not(
    sys: &SpinSystem,
    target: &str,
    control: &str,
    spectator: &str,
) -> Result<String, SeqError> {
    let it = sys.index_of(target)?;
    let ic = sys.index_of(control)?;
    let j = sys.j_hz(it, ic);
    if j == 0.0 {
        return Err(SeqError::ZeroJ(target.to_string(), control.to_string()));
    }
    // sandwich turning e^{−iπ/4 Z_tZ_c} (J > 0) into e^{+iπ/4 X_tZ_c}
    let (pre, post) = if j > 0.0 { ("90", "-90") } else { ("-90", "90") };
    Ok(format!(
        "pulse {target} {pre} y\n{}pulse {target} {post} y\n\
         pulse {target} -90 x\nzrot {control} 90\n",
        refocused_zz(target, control, spectator, j)
    ))
}

/// The 5-interval solid-state line-narrowing cycle (see
/// [`crate::aht::wahuha_program`]).
pub fn wahuha_sequence(tau_s: f64) -> PulseProgram {
    crate::aht::wahuha_program(tau_s)
}

/// E₊/E₋ diagonal matrix for one spin embedded in an n-spin register.
fn e_projector(n: usize, spin: usize, plus: bool) -> CMat {
    let z = PauliString::single(n, spin, Factor::Z).matrix(n).unwrap();
    let sign = if plus { 1.0 } else { -1.0 };
    (identity(n) + z * C64::new(sign, 0.0)) * C64::new(0.5, 0.0)
}

/// The state the pseudo-pure sequence prepares, as a traceless operator:
/// σx on the first spin times the |0⟩ projectors of the other two.
pub fn pseudo_pure_target(n: usize) -> CMat {
    assert!(n >= 1);
    let mut m = PauliString::single(n, 0, Factor::X).matrix(n).unwrap();
    for spin in 1..n {
        m = m * e_projector(n, spin, true);
    }
    m
}

/// Average gradient phase per E±E±E± subspace over the three gradient
/// intervals, for total single-interval area θ (areas θ/2, θ, θ/2). Rows
/// are labelled by the z signs of spins a, b, c; the phase follows the σz^a
/// coefficient toggled through the zero-controlled-NOT blocks:
/// σz^a → −σz^aσz^b → +σz^aσz^bσz^c.
pub fn pseudo_pure_phase_table(theta: f64) -> Vec<(String, f64)> {
    let mut rows = Vec::new();
    for bits in 0..8usize {
        let s = |k: usize| if bits >> (2 - k) & 1 == 0 { 1.0 } else { -1.0 };
        let (sa, sb, sc) = (s(0), s(1), s(2));
        let label = format!(
            "E{}aE{}bE{}c",
            if sa > 0.0 { "+" } else { "-" },
            if sb > 0.0 { "+" } else { "-" },
            if sc > 0.0 { "+" } else { "-" }
        );
        // interval weights on σz^a: +1, −s_b, +s_b·s_c
        let phase = theta / 2.0 - sb * theta + sb * sc * theta / 2.0;
        rows.push((label, phase));
    }
    rows
}

/// ρ = 1/2ⁿ·I + ε·σz on the first spin: the stated input of the
/// pseudo-pure sequence.
pub fn single_spin_thermal(n: usize, eps: f64) -> DensityMatrix {
    let z = PauliString::single(n, 0, Factor::Z).matrix(n).unwrap();
    let dim = 1usize << n;
    DensityMatrix::from_raw(identity(n) / C64::new(dim as f64, 0.0) + z * C64::new(eps, 0.0), n)
}
