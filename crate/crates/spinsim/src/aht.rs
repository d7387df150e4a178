//! Average-Hamiltonian analysis of pulse cycles: toggling-frame
//! transformation and the Magnus expansion through first order.
//!
//! For a cycle of ideal (delta) pulses separated by free-evolution
//! intervals, the internal Hamiltonian in the frame of the accumulated
//! pulse propagator P_k is H̃_k = P_k† H P_k. The zeroth- and first-order
//! average Hamiltonians over cycle time T are
//!
//! ```text
//! H̄⁽⁰⁾ = (1/T) Σ_k t_k H̃_k
//! H̄⁽¹⁾ = (−i/2T) Σ_{j<k} t_j t_k [H̃_k, H̃_j]
//! ```
//!
//! (within-interval commutators vanish for piecewise-constant pieces).
//! Second order is out of scope; the report's residual norm quantifies
//! what the truncation leaves behind.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::algebra::{expand_product_basis, max_norm, CMat, PauliString};
use crate::engine::propagator;
use crate::hamiltonian::{rf_rotation, solid_hamiltonian};
use crate::program::{DelaySpec, Event, PulseProgram, Targets};
use crate::system::SpinSystem;

#[derive(Debug, Error)]
pub enum AhtError {
    #[error("toggling-frame analysis assumes delta pulses; found width {0} s")]
    FiniteWidthPulse(f64),
    #[error("event not supported in toggling-frame analysis: {0}")]
    UnsupportedEvent(&'static str),
    #[error("cycle has zero total duration")]
    ZeroDuration,
    #[error("no frames to average")]
    NoFrames,
    #[error("WAHUHA analysis requires a like-spin pair, got channels {0} and {1}")]
    Heteronuclear(String, String),
    #[error(transparent)]
    Program(#[from] crate::program::ProgramError),
    #[error(transparent)]
    Hamiltonian(#[from] crate::hamiltonian::HamiltonianError),
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
    #[error(transparent)]
    System(#[from] crate::system::SystemError),
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
}

/// One free-evolution interval seen in the frame of the pulses so far.
#[derive(Debug, Clone)]
pub struct TogglingFrame {
    pub duration_s: f64,
    pub h: CMat,
}

#[derive(Debug, Clone)]
pub struct TogglingFrames {
    pub frames: Vec<TogglingFrame>,
    /// True when the net pulse propagator over the cycle is the identity up
    /// to a global phase.
    pub cyclic: bool,
}

/// Magnus report for a cycle.
#[derive(Debug, Clone)]
pub struct AhtReport {
    /// (duration, product-basis expansion of H̃_k), one per interval.
    pub intervals: Vec<(f64, Vec<(PauliString, C64)>)>,
    pub h0: CMat,
    pub h1: CMat,
    pub h0_terms: Vec<(PauliString, C64)>,
    pub h1_terms: Vec<(PauliString, C64)>,
    pub cyclic: bool,
    pub cycle_s: f64,
    /// ‖U_exact − exp(−i(H̄⁽⁰⁾ [+H̄⁽¹⁾])T)‖_max against the exact product
    /// of interval propagators.
    pub residual_norm: f64,
}

/// Walk a program of ideal pulses and delays, producing the toggling-frame
/// Hamiltonian of each free-evolution interval.
pub fn toggling_frames(
    prog: &PulseProgram,
    sys: &SpinSystem,
    h_int: &CMat,
) -> Result<TogglingFrames, AhtError> {
    let n = sys.len();
    let dim = 1usize << n;
    let mut p = CMat::identity(dim, dim);
    let mut frames = Vec::new();
    for ev in &prog.events {
        match ev {
            Event::Pulse { targets, angle_rad, axis, width_s } => {
                if *width_s != 0.0 {
                    return Err(AhtError::FiniteWidthPulse(*width_s));
                }
                let idx: Vec<usize> = match targets {
                    Targets::All => (0..n).collect(),
                    Targets::Labels(ls) => ls
                        .iter()
                        .map(|l| sys.index_of(l))
                        .collect::<Result<_, _>>()?,
                };
                let mut u = CMat::identity(dim, dim);
                for &t in &idx {
                    u = rf_rotation(n, &[t], *axis, *angle_rad)? * u;
                }
                p = u * p;
            }
            Event::Delay { spec } => {
                let t = match spec {
                    DelaySpec::Seconds(s) => *s,
                    DelaySpec::HalfInverseJ(a, b) => {
                        let i = sys.index_of(a)?;
                        let j = sys.index_of(b)?;
                        1.0 / (2.0 * sys.j_hz(i, j).abs())
                    }
                };
                frames.push(TogglingFrame { duration_s: t, h: p.adjoint() * h_int * &p });
            }
            Event::FrameShift { target, phase_rad } => {
                let t = sys.index_of(target)?;
                p = rf_rotation(n, &[t], [0.0, 0.0, 1.0], *phase_rad)? * p;
            }
            Event::Grad { .. } => return Err(AhtError::UnsupportedEvent("grad")),
            Event::Crush => return Err(AhtError::UnsupportedEvent("crush")),
            Event::Acquire { .. } => return Err(AhtError::UnsupportedEvent("acquire")),
        }
    }
    if frames.is_empty() {
        frames.push(TogglingFrame { duration_s: 0.0, h: h_int.clone() });
    }
    // cyclic iff net pulse propagator is a global phase
    let cyclic = (p.trace().norm() - dim as f64).abs() < 1e-9;
    Ok(TogglingFrames { frames, cyclic })
}

/// Magnus expansion of a frame sequence through the requested order (0 or
/// 1).
pub fn magnus(frames: &TogglingFrames, order: usize) -> Result<AhtReport, AhtError> {
    if frames.frames.is_empty() {
        return Err(AhtError::NoFrames);
    }
    let total: f64 = frames.frames.iter().map(|f| f.duration_s).sum();
    if total <= 0.0 {
        return Err(AhtError::ZeroDuration);
    }
    let dim = frames.frames[0].h.nrows();
    let inv_t = C64::new(1.0 / total, 0.0);

    let mut h0 = CMat::zeros(dim, dim);
    for f in &frames.frames {
        h0 += &f.h * C64::new(f.duration_s, 0.0);
    }
    h0 *= inv_t;

    let mut h1 = CMat::zeros(dim, dim);
    if order >= 1 {
        for (k, fk) in frames.frames.iter().enumerate() {
            for fj in &frames.frames[..k] {
                let comm = &fk.h * &fj.h - &fj.h * &fk.h;
                h1 += comm * C64::new(fj.duration_s * fk.duration_s, 0.0);
            }
        }
        h1 *= C64::new(0.0, -0.5) * inv_t;
    }

    // exact propagator of the piecewise-constant sequence
    let mut u_exact = CMat::identity(dim, dim);
    for f in &frames.frames {
        u_exact = propagator(&f.h, f.duration_s)? * u_exact;
    }
    let h_avg = &h0 + &h1;
    let u_avg = propagator(&h_avg, total)?;
    let residual_norm = max_norm(&(&u_exact - u_avg));

    let filter = |terms: Vec<(PauliString, C64)>| -> Vec<(PauliString, C64)> {
        let scale = terms.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max).max(1.0);
        terms.into_iter().filter(|(_, c)| c.norm() > 1e-12 * scale).collect()
    };

    let intervals = frames
        .frames
        .iter()
        .map(|f| Ok((f.duration_s, filter(expand_product_basis(&f.h)?))))
        .collect::<Result<Vec<_>, AhtError>>()?;
    Ok(AhtReport {
        intervals,
        h0_terms: filter(expand_product_basis(&h0)?),
        h1_terms: filter(expand_product_basis(&h1)?),
        h0,
        h1,
        cyclic: frames.cyclic,
        cycle_s: total,
        residual_norm,
    })
}

/// The 5-interval homonuclear line-narrowing cycle: τ, 90x, τ, 90−y, 2τ,
/// 90y, τ, 90−x, τ. Toggling frames visit z, y, x, y, z, so the shift is
/// scaled to (1/3)(σx+σy+σz) per spin and the secular dipolar coupling
/// averages to zero.
pub fn wahuha_program(tau_s: f64) -> PulseProgram {
    crate::program::parse(&format!(
        "delay {tau_s}\n\
         pulse all 90 x\n\
         delay {tau_s}\n\
         pulse all 90 -y\n\
         delay {}\n\
         pulse all 90 y\n\
         delay {tau_s}\n\
         pulse all 90 -x\n\
         delay {tau_s}\n",
        2.0 * tau_s
    ))
    .expect("static program text")
}

/// Run the line-narrowing cycle on a like-spin dipolar pair and report the
/// zeroth/first-order average Hamiltonian.
pub fn wahuha_check(sys: &SpinSystem, tau_s: f64) -> Result<AhtReport, AhtError> {
    if sys.len() != 2 {
        return Err(AhtError::UnsupportedEvent("WAHUHA analysis needs exactly 2 spins"));
    }
    if !sys.same_channel(0, 1) {
        return Err(AhtError::Heteronuclear(
            sys.spins()[0].channel.clone(),
            sys.spins()[1].channel.clone(),
        ));
    }
    let h = solid_hamiltonian(sys, false)?;
    let frames = toggling_frames(&wahuha_program(tau_s), sys, &h)?;
    magnus(&frames, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{coefficient_of, Factor};
    use crate::hamiltonian::liquid_hamiltonian;
    use crate::system::DipolarCoupling;
    use crate::program::parse;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn noop_program(tau: f64) -> PulseProgram {
        parse(&format!(
            "delay {tau}\npulse b,c 180 y\ndelay {tau}\npulse a,b 180 y\n\
             delay {tau}\npulse b,c 180 y\ndelay {tau}\npulse a,b 180 y\n"
        ))
        .unwrap()
    }

    fn decouple_program(tau: f64) -> PulseProgram {
        parse(&format!("delay {tau}\npulse c 180 y\ndelay {tau}\npulse c 180 y\n")).unwrap()
    }

    fn coeff(terms: &[(PauliString, C64)], pattern: &[Factor]) -> C64 {
        terms
            .iter()
            .find(|(p, _)| p.factors == pattern)
            .map(|(_, c)| *c)
            .unwrap_or(C64::new(0.0, 0.0))
    }

    #[test]
    fn no_pulses_single_frame() {
        let sys = SpinSystem::alanine();
        let h = liquid_hamiltonian(&sys).unwrap();
        let f = toggling_frames(&parse("delay 0.004\n").unwrap(), &sys, &h).unwrap();
        assert_eq!(f.frames.len(), 1);
        assert!(max_norm(&(&f.frames[0].h - &h)) < 1e-12);
        assert!(f.cyclic);
    }

    #[test]
    fn noop_cycle_sign_table_and_zero_average() {
        let sys = SpinSystem::alanine();
        let h = liquid_hamiltonian(&sys).unwrap();
        let frames = toggling_frames(&noop_program(1e-3), &sys, &h).unwrap();
        assert_eq!(frames.frames.len(), 4);
        assert!(frames.cyclic);
        let report = magnus(&frames, 1).unwrap();

        // σz^a sign pattern +,+,−,− across the four intervals
        // spin a sits on resonance, so read the pattern off spin b;
        // the Z coefficient is ω_b/2 = π·offset_b
        let wb = PI * -12580.0;
        let pat_zb = [Factor::I, Factor::Z, Factor::I];
        let signs: Vec<f64> = report
            .intervals
            .iter()
            .map(|(_, terms)| coeff(terms, &pat_zb).re / wb)
            .collect();
        // b is flipped by every one of the four pulses
        let expect = [1.0, -1.0, 1.0, -1.0];
        for (s, e) in signs.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(*s, *e, epsilon = 1e-9);
        }

        // everything averages away and the cycle is a no-op
        assert!(max_norm(&report.h0) < 1e-8);
        assert!(max_norm(&report.h1) < 1e-8);
        assert!(report.residual_norm < 1e-8);
    }

    #[test]
    fn noop_sigma_za_signs() {
        // put spin a off resonance so its Z coefficient is visible
        let mut sys = SpinSystem::new();
        sys.add_spin("a", "13C", 100.0).unwrap();
        sys.add_spin("b", "13C", -12580.0).unwrap();
        sys.add_spin("c", "13C", 3440.0).unwrap();
        let h = liquid_hamiltonian(&sys).unwrap();
        let frames = toggling_frames(&noop_program(1e-3), &sys, &h).unwrap();
        let report = magnus(&frames, 0).unwrap();
        let wa = 2.0 * PI * 100.0 / 2.0;
        let pat = [Factor::Z, Factor::I, Factor::I];
        let signs: Vec<f64> = report
            .intervals
            .iter()
            .map(|(_, terms)| coeff(terms, &pat).re / wa)
            .collect();
        let expect = [1.0, 1.0, -1.0, -1.0];
        for (s, e) in signs.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(*s, *e, epsilon = 1e-9);
        }
    }

    #[test]
    fn decoupling_cycle_average() {
        let sys = SpinSystem::alanine();
        let h = liquid_hamiltonian(&sys).unwrap();
        let frames = toggling_frames(&decouple_program(2e-3), &sys, &h).unwrap();
        assert!(frames.cyclic);
        let report = magnus(&frames, 1).unwrap();

        // σz^c flips sign between the two intervals, as do ZZ couplings to c
        let pat_zc = [Factor::I, Factor::I, Factor::Z];
        let pat_zzac = [Factor::Z, Factor::I, Factor::Z];
        let s1 = coeff(&report.intervals[0].1, &pat_zc).re;
        let s2 = coeff(&report.intervals[1].1, &pat_zc).re;
        assert_abs_diff_eq!(s1, -s2, epsilon = 1e-9);
        let d1 = coeff(&report.intervals[0].1, &pat_zzac).re;
        let d2 = coeff(&report.intervals[1].1, &pat_zzac).re;
        assert_abs_diff_eq!(d1, -d2, epsilon = 1e-9);

        // spin c vanishes from the average; a and b keep shift + J
        let t = &report.h0_terms;
        assert_abs_diff_eq!(coeff(t, &pat_zc).re, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(
            coeff(t, &[Factor::I, Factor::Z, Factor::I]).re,
            2.0 * PI * -12580.0 / 2.0,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            coeff(t, &[Factor::Z, Factor::Z, Factor::I]).re,
            PI / 2.0 * 53.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(coeff(t, &pat_zzac).re, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn commuting_frames_have_zero_h1_and_exact_h0() {
        let sys = SpinSystem::alanine();
        let h = liquid_hamiltonian(&sys).unwrap();
        // diagonal toggling frames: all-π flips keep H diagonal
        let frames = toggling_frames(&noop_program(5e-4), &sys, &h).unwrap();
        let report = magnus(&frames, 1).unwrap();
        assert!(max_norm(&report.h1) < 1e-9);
        let mut u_exact = CMat::identity(8, 8);
        for f in &frames.frames {
            u_exact = propagator(&f.h, f.duration_s).unwrap() * u_exact;
        }
        let u_avg = propagator(&report.h0, report.cycle_s).unwrap();
        assert!(max_norm(&(u_exact - u_avg)) < 1e-11);
    }

    #[test]
    fn finite_width_pulse_rejected() {
        let sys = SpinSystem::alanine();
        let h = liquid_hamiltonian(&sys).unwrap();
        let prog = parse("pulse a 90 x 0.0001\ndelay 0.001\n").unwrap();
        assert!(matches!(
            toggling_frames(&prog, &sys, &h),
            Err(AhtError::FiniteWidthPulse(_))
        ));
    }

    #[test]
    fn magnus_error_scaling_orders() {
        // frame sequence with non-commuting pieces: 90-degree toggled
        // offsets against a J coupling
        let mut sys = SpinSystem::new();
        sys.add_spin("a", "13C", 900.0).unwrap();
        sys.add_spin("b", "13C", -400.0).unwrap();
        sys.set_j("a", "b", 50.0).unwrap();
        let h = liquid_hamiltonian(&sys).unwrap();
        let cycle = |tau: f64| {
            parse(&format!(
                "delay {tau}\npulse a 90 x\ndelay {tau}\npulse a -90 x\n\
                 pulse b 90 y\ndelay {tau}\npulse b -90 y\ndelay {tau}\n"
            ))
            .unwrap()
        };
        let mut r0 = Vec::new();
        let mut r1 = Vec::new();
        let mut ts = Vec::new();
        for k in 0..6 {
            let tau = 4e-6 * 10f64.powf(k as f64 / 5.0);
            let frames = toggling_frames(&cycle(tau), &sys, &h).unwrap();
            r0.push(magnus(&frames, 0).unwrap().residual_norm.ln());
            r1.push(magnus(&frames, 1).unwrap().residual_norm.ln());
            ts.push((4.0 * tau).ln());
        }
        let slope = |ys: &[f64]| {
            let n = ys.len() as f64;
            let mx = ts.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let num: f64 = ts.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let den: f64 = ts.iter().map(|x| (x - mx) * (x - mx)).sum();
            num / den
        };
        let s0 = slope(&r0);
        let s1 = slope(&r1);
        assert!((s0 - 2.0).abs() < 0.3, "order-0 slope {s0}");
        assert!((s1 - 3.0).abs() < 0.3, "order-1 slope {s1}");
    }

    #[test]
    fn wahuha_dipolar_removed_shift_scaled() {
        let mut sys = SpinSystem::new();
        sys.add_spin("a", "1H", 800.0).unwrap();
        sys.add_spin("b", "1H", 800.0).unwrap();
        sys.set_dipolar("a", "b", DipolarCoupling { b_rad_per_s: 5000.0, theta_rad: 0.0 }).unwrap();
        let report = wahuha_check(&sys, 1e-5).unwrap();
        assert!(report.cyclic);

        let w_half = 2.0 * PI * 800.0 / 2.0;
        for f in [Factor::X, Factor::Y, Factor::Z] {
            for spin in 0..2 {
                let mut pat = [Factor::I, Factor::I];
                pat[spin] = f;
                let c = coefficient_of(&report.h0_terms, &pat);
                assert_abs_diff_eq!(c.re, w_half / 3.0, epsilon = 1e-6);
                assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-9);
            }
        }
        // dipolar strings average to zero
        for pat in [
            [Factor::Z, Factor::Z],
            [Factor::X, Factor::X],
            [Factor::Y, Factor::Y],
            [Factor::Plus, Factor::Minus],
        ] {
            let c = coefficient_of(&report.h0_terms, &pat);
            assert!(c.norm() < 1e-10, "pattern {pat:?} -> {c}");
        }
    }

    #[test]
    fn wahuha_rejects_heteronuclear() {
        let mut sys = SpinSystem::new();
        sys.add_spin("a", "1H", 0.0).unwrap();
        sys.add_spin("b", "13C", 0.0).unwrap();
        sys.set_dipolar("a", "b", DipolarCoupling { b_rad_per_s: 5000.0, theta_rad: 0.0 }).unwrap();
        assert!(matches!(wahuha_check(&sys, 1e-5), Err(AhtError::Heteronuclear(_, _))));
    }

    #[test]
    fn trivial_system_zero_average() {
        let mut sys = SpinSystem::new();
        sys.add_spin("a", "1H", 0.0).unwrap();
        sys.add_spin("b", "1H", 0.0).unwrap();
        sys.set_dipolar("a", "b", DipolarCoupling { b_rad_per_s: 0.0, theta_rad: 0.0 }).unwrap();
        let report = wahuha_check(&sys, 1e-5).unwrap();
        assert!(max_norm(&report.h0) < 1e-12);
    }
}
