//! Pulse-program DSL: parsing, rendering, and compilation against a spin
//! system into an executable segment list.
//!
//! Grammar, one event per line (`#` starts a comment, keywords are
//! case-insensitive):
//!
//! ```text
//! pulse   <targets|all> <angle_deg> <axis: x|y|-x|-y|vx,vy,vz> [width_s]
//! delay   <seconds | 1/(2J:label,label)>
//! grad    <relative_area> <duration_s>
//! crush
//! zrot    <target> <angle_deg>
//! acquire <npoints> <dwell_s> [decouple:<labels>]
//! ```
//!
//! Compilation semantics: ideal pulses (width 0) are instantaneous
//! rotations; delays evolve under the internal Hamiltonian; finite-width
//! pulses evolve under internal + constant RF. `zrot` is transmitter-phase
//! bookkeeping: it folds into the axes of later pulses on the same spin and
//! any balance left at the end of the program (or before an acquisition) is
//! emitted as an explicit zero-duration z-rotation so the net propagator is
//! preserved.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::algebra::{identity, max_norm, unitarity_defect, CMat, Factor, PauliString};
use crate::engine::propagator;
use crate::hamiltonian::rf_rotation;
use crate::system::SpinSystem;

#[derive(Debug, Error)]
pub enum ProgramError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: unknown keyword '{word}'")]
    UnknownKeyword { line: usize, word: String },
    #[error("unresolved label '{0}'")]
    UnresolvedLabel(String),
    #[error("delay 1/(2J:{0},{1}) is undefined: J = 0")]
    ZeroJ(String, String),
    #[error("negative resolved delay ({0} s)")]
    NegativeDelay(f64),
    #[error("pulse axis must be a unit vector (|v| = {0})")]
    NonUnitAxis(f64),
    #[error("compiled segment is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error(transparent)]
    Hamiltonian(#[from] crate::hamiltonian::HamiltonianError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    All,
    Labels(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DelaySpec {
    Seconds(f64),
    /// `1/(2J:a,b)`, resolved against the bound system at compile time.
    HalfInverseJ(String, String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Pulse {
        targets: Targets,
        angle_rad: f64,
        axis: [f64; 3],
        /// 0 = ideal (instantaneous) pulse.
        width_s: f64,
    },
    Delay {
        spec: DelaySpec,
    },
    Grad {
        area: f64,
        duration_s: f64,
    },
    Crush,
    Acquire {
        npoints: usize,
        dwell_s: f64,
        decouple: Vec<String>,
    },
    FrameShift {
        target: String,
        phase_rad: f64,
    },
}

/// A parsed pulse program: an ordered event list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseProgram {
    pub events: Vec<Event>,
}

impl PulseProgram {
    pub fn new(events: Vec<Event>) -> Self {
        Self { events }
    }

    /// Concatenate two programs.
    pub fn concat(mut self, other: PulseProgram) -> Self {
        self.events.extend(other.events);
        self
    }

    /// Render back to DSL text. `parse(render(p))` reproduces the event list.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for ev in &self.events {
            match ev {
                Event::Pulse { targets, angle_rad, axis, width_s } => {
                    let t = match targets {
                        Targets::All => "all".to_string(),
                        Targets::Labels(ls) => ls.join(","),
                    };
                    let ax = render_axis(*axis);
                    if *width_s > 0.0 {
                        let _ = writeln!(out, "pulse {t} {} {ax} {width_s}", angle_rad.to_degrees());
                    } else {
                        let _ = writeln!(out, "pulse {t} {} {ax}", angle_rad.to_degrees());
                    }
                }
                Event::Delay { spec } => match spec {
                    DelaySpec::Seconds(s) => {
                        let _ = writeln!(out, "delay {s}");
                    }
                    DelaySpec::HalfInverseJ(a, b) => {
                        let _ = writeln!(out, "delay 1/(2J:{a},{b})");
                    }
                },
                Event::Grad { area, duration_s } => {
                    let _ = writeln!(out, "grad {area} {duration_s}");
                }
                Event::Crush => {
                    let _ = writeln!(out, "crush");
                }
                Event::Acquire { npoints, dwell_s, decouple } => {
                    if decouple.is_empty() {
                        let _ = writeln!(out, "acquire {npoints} {dwell_s}");
                    } else {
                        let _ = writeln!(out, "acquire {npoints} {dwell_s} decouple:{}", decouple.join(","));
                    }
                }
                Event::FrameShift { target, phase_rad } => {
                    let _ = writeln!(out, "zrot {target} {}", phase_rad.to_degrees());
                }
            }
        }
        out
    }
}

fn render_axis(v: [f64; 3]) -> String {
    match v {
        [1.0, 0.0, 0.0] => "x".into(),
        [-1.0, 0.0, 0.0] => "-x".into(),
        [0.0, 1.0, 0.0] => "y".into(),
        [0.0, -1.0, 0.0] => "-y".into(),
        [x, y, z] => format!("{x},{y},{z}"),
    }
}

/// Parse DSL text into a [`PulseProgram`].
pub fn parse(text: &str) -> Result<PulseProgram, ProgramError> {
    let mut events = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let stripped = raw.split('#').next().unwrap_or("");
        if stripped.trim().is_empty() {
            continue;
        }
        let tokens = tokenize(stripped);
        let syntax = |col: usize, msg: String| ProgramError::Syntax { line, col, msg };
        let keyword = tokens[0].1.to_ascii_lowercase();
        match keyword.as_str() {
            "pulse" => {
                if tokens.len() < 4 || tokens.len() > 5 {
                    return Err(syntax(
                        tokens[0].0,
                        "expected: pulse <targets|all> <angle_deg> <axis> [width_s]".into(),
                    ));
                }
                let targets = parse_targets(&tokens[1].1);
                let angle: f64 = parse_num(&tokens[2], line)?;
                let axis = parse_axis(&tokens[3], line)?;
                let width = if tokens.len() == 5 { parse_num(&tokens[4], line)? } else { 0.0 };
                if width < 0.0 {
                    return Err(syntax(tokens[4].0, "pulse width must be >= 0".into()));
                }
                events.push(Event::Pulse {
                    targets,
                    angle_rad: angle.to_radians(),
                    axis,
                    width_s: width,
                });
            }
            "delay" => {
                if tokens.len() != 2 {
                    return Err(syntax(tokens[0].0, "expected: delay <seconds|1/(2J:a,b)>".into()));
                }
                let spec = parse_delay_spec(&tokens[1], line)?;
                events.push(Event::Delay { spec });
            }
            "grad" => {
                if tokens.len() != 3 {
                    return Err(syntax(tokens[0].0, "expected: grad <relative_area> <duration_s>".into()));
                }
                let area: f64 = parse_num(&tokens[1], line)?;
                let dur: f64 = parse_num(&tokens[2], line)?;
                if dur < 0.0 {
                    return Err(syntax(tokens[2].0, "gradient duration must be >= 0".into()));
                }
                events.push(Event::Grad { area, duration_s: dur });
            }
            "crush" => {
                if tokens.len() != 1 {
                    return Err(syntax(tokens[1].0, "crush takes no arguments".into()));
                }
                events.push(Event::Crush);
            }
            "zrot" => {
                if tokens.len() != 3 {
                    return Err(syntax(tokens[0].0, "expected: zrot <target> <angle_deg>".into()));
                }
                let angle: f64 = parse_num(&tokens[2], line)?;
                events.push(Event::FrameShift {
                    target: tokens[1].1.clone(),
                    phase_rad: angle.to_radians(),
                });
            }
            "acquire" => {
                if tokens.len() < 3 || tokens.len() > 4 {
                    return Err(syntax(
                        tokens[0].0,
                        "expected: acquire <npoints> <dwell_s> [decouple:<labels>]".into(),
                    ));
                }
                let npoints: usize = tokens[1]
                    .1
                    .parse()
                    .map_err(|_| syntax(tokens[1].0, format!("malformed integer '{}'", tokens[1].1)))?;
                let dwell: f64 = parse_num(&tokens[2], line)?;
                if dwell <= 0.0 {
                    return Err(syntax(tokens[2].0, "dwell must be > 0".into()));
                }
                let mut decouple = Vec::new();
                if tokens.len() == 4 {
                    let t = &tokens[3].1;
                    let lower = t.to_ascii_lowercase();
                    let rest = lower
                        .strip_prefix("decouple:")
                        .ok_or_else(|| syntax(tokens[3].0, format!("expected decouple:<labels>, got '{t}'")))?;
                    let orig = &t[t.len() - rest.len()..];
                    decouple = orig.split(',').map(|s| s.to_string()).collect();
                }
                events.push(Event::Acquire { npoints, dwell_s: dwell, decouple });
            }
            _ => {
                return Err(ProgramError::UnknownKeyword { line, word: tokens[0].1.clone() });
            }
        }
    }
    Ok(PulseProgram::new(events))
}

/// Tokens with their 1-based column offsets.
fn tokenize(line: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut col = 0usize;
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, line[s..i].to_string()));
            }
        } else if start.is_none() {
            start = Some(i);
        }
        col = i;
    }
    if let Some(s) = start {
        out.push((s + 1, line[s..=col].to_string()));
    }
    out
}

fn parse_num(tok: &(usize, String), line: usize) -> Result<f64, ProgramError> {
    tok.1.parse().map_err(|_| ProgramError::Syntax {
        line,
        col: tok.0,
        msg: format!("malformed number '{}'", tok.1),
    })
}

fn parse_targets(tok: &str) -> Targets {
    if tok.eq_ignore_ascii_case("all") {
        Targets::All
    } else {
        Targets::Labels(tok.split(',').map(|s| s.to_string()).collect())
    }
}

fn parse_axis(tok: &(usize, String), line: usize) -> Result<[f64; 3], ProgramError> {
    match tok.1.to_ascii_lowercase().as_str() {
        "x" => return Ok([1.0, 0.0, 0.0]),
        "-x" => return Ok([-1.0, 0.0, 0.0]),
        "y" => return Ok([0.0, 1.0, 0.0]),
        "-y" => return Ok([0.0, -1.0, 0.0]),
        _ => {}
    }
    let parts: Vec<&str> = tok.1.split(',').collect();
    if parts.len() != 3 {
        return Err(ProgramError::Syntax {
            line,
            col: tok.0,
            msg: format!("axis must be x, y, -x, -y or vx,vy,vz; got '{}'", tok.1),
        });
    }
    let mut v = [0.0f64; 3];
    for (i, p) in parts.iter().enumerate() {
        v[i] = p.parse().map_err(|_| ProgramError::Syntax {
            line,
            col: tok.0,
            msg: format!("malformed axis component '{p}'"),
        })?;
    }
    Ok(v)
}

fn parse_delay_spec(tok: &(usize, String), line: usize) -> Result<DelaySpec, ProgramError> {
    let t = &tok.1;
    let lower = t.to_ascii_lowercase();
    if let Some(inner) = lower.strip_prefix("1/(2j:").and_then(|s| s.strip_suffix(')')) {
        // recover original-case labels from the same byte range
        let start = "1/(2j:".len();
        let orig = &t[start..start + inner.len()];
        let labels: Vec<&str> = orig.split(',').collect();
        if labels.len() != 2 {
            return Err(ProgramError::Syntax {
                line,
                col: tok.0,
                msg: format!("expected 1/(2J:a,b), got '{t}'"),
            });
        }
        return Ok(DelaySpec::HalfInverseJ(labels[0].to_string(), labels[1].to_string()));
    }
    let s: f64 = t.parse().map_err(|_| ProgramError::Syntax {
        line,
        col: tok.0,
        msg: format!("malformed delay '{t}'"),
    })?;
    if s < 0.0 {
        return Err(ProgramError::NegativeDelay(s));
    }
    Ok(DelaySpec::Seconds(s))
}

/// One executable step of a compiled program.
#[derive(Debug, Clone)]
pub enum Segment {
    /// Apply `u` (duration bookkeeping only; the evolution is already in `u`).
    Unitary { u: CMat, duration_s: f64 },
    /// Coherent gradient phase ramp, strong-gradient (instantaneous) limit:
    /// every spin acquires a z-phase proportional to `area` and a shared
    /// random spatial coordinate. Correlated across kicks in one program.
    GradientKick { area: f64, duration_s: f64 },
    /// Ideal crusher: complete diffusion, removes every nonzero coherence
    /// order.
    Crusher,
    /// Weak-measurement acquisition window.
    Acquisition { npoints: usize, dwell_s: f64, decouple: Vec<usize> },
}

/// A compiled program bound to a spin system.
#[derive(Debug, Clone)]
pub struct SegmentList {
    pub segments: Vec<Segment>,
    pub spins: usize,
    /// Per-spin gradient winding weights γ_j/γ_0; all 1 for a homonuclear
    /// system.
    pub gradient_weights: Vec<f64>,
}

impl SegmentList {
    /// Net propagator of the unitary content (gradient kicks at zero area,
    /// crushers and acquisitions are not unitary and are skipped).
    pub fn net_propagator(&self) -> CMat {
        let mut u = identity(self.spins);
        for seg in &self.segments {
            if let Segment::Unitary { u: step, .. } = seg {
                u = step * u;
            }
        }
        u
    }

    pub fn total_duration(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| match s {
                Segment::Unitary { duration_s, .. } => *duration_s,
                Segment::GradientKick { duration_s, .. } => *duration_s,
                Segment::Crusher => 0.0,
                Segment::Acquisition { npoints, dwell_s, .. } => *npoints as f64 * dwell_s,
            })
            .sum()
    }
}

/// Compile a parsed program against a spin system and internal Hamiltonian.
pub fn compile(
    prog: &PulseProgram,
    sys: &SpinSystem,
    h_int: &CMat,
) -> Result<SegmentList, ProgramError> {
    let n = sys.len();
    let mut segments = Vec::new();
    // transmitter-phase bookkeeping, one frame per spin
    let mut pending_phase = vec![0.0f64; n];
    let diagonal_h = is_diagonal(h_int);

    let resolve = |t: &Targets| -> Result<Vec<usize>, ProgramError> {
        match t {
            Targets::All => Ok((0..n).collect()),
            Targets::Labels(ls) => ls
                .iter()
                .map(|l| sys.index_of(l).map_err(|_| ProgramError::UnresolvedLabel(l.clone())))
                .collect(),
        }
    };

    for ev in &prog.events {
        match ev {
            Event::Pulse { targets, angle_rad, axis, width_s } => {
                let idx = resolve(targets)?;
                let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(ProgramError::NonUnitAxis(norm));
                }
                if *width_s == 0.0 {
                    // per-spin axes, each shifted by that spin's frame phase
                    let mut u = identity(n);
                    for &t in &idx {
                        let ax = shift_axis(*axis, pending_phase[t]);
                        u = rf_rotation(n, &[t], ax, *angle_rad)? * u;
                    }
                    push_unitary(&mut segments, u, 0.0)?;
                } else {
                    // constant RF of amplitude angle/width alongside the
                    // internal Hamiltonian
                    let omega1 = angle_rad / width_s;
                    let mut h = h_int.clone();
                    for &t in &idx {
                        let ax = shift_axis(*axis, pending_phase[t]);
                        let v = PauliString::single(n, t, Factor::X).matrix(n).unwrap()
                            * C64::new(ax[0], 0.0)
                            + PauliString::single(n, t, Factor::Y).matrix(n).unwrap()
                                * C64::new(ax[1], 0.0)
                            + PauliString::single(n, t, Factor::Z).matrix(n).unwrap()
                                * C64::new(ax[2], 0.0);
                        h += v * C64::new(omega1 / 2.0, 0.0);
                    }
                    let u = propagator(&h, *width_s).map_err(|e| ProgramError::NotUnitary(
                        match e {
                            crate::engine::EngineError::NotHermitian(d) => d,
                            _ => f64::NAN,
                        },
                    ))?;
                    push_unitary(&mut segments, u, *width_s)?;
                }
            }
            Event::Delay { spec } => {
                let t = match spec {
                    DelaySpec::Seconds(s) => *s,
                    DelaySpec::HalfInverseJ(a, b) => {
                        let i = sys.index_of(a).map_err(|_| ProgramError::UnresolvedLabel(a.clone()))?;
                        let j = sys.index_of(b).map_err(|_| ProgramError::UnresolvedLabel(b.clone()))?;
                        let jij = sys.j_hz(i, j);
                        if jij == 0.0 {
                            return Err(ProgramError::ZeroJ(a.clone(), b.clone()));
                        }
                        1.0 / (2.0 * jij.abs())
                    }
                };
                if t < 0.0 {
                    return Err(ProgramError::NegativeDelay(t));
                }
                let u = propagator(h_int, t).map_err(|_| ProgramError::NotUnitary(f64::NAN))?;
                push_unitary(&mut segments, u, t)?;
            }
            Event::Grad { area, duration_s } => {
                segments.push(Segment::GradientKick { area: *area, duration_s: *duration_s });
            }
            Event::Crush => segments.push(Segment::Crusher),
            Event::Acquire { npoints, dwell_s, decouple } => {
                flush_phases(&mut segments, &mut pending_phase, n)?;
                let idx = decouple
                    .iter()
                    .map(|l| sys.index_of(l).map_err(|_| ProgramError::UnresolvedLabel(l.clone())))
                    .collect::<Result<Vec<_>, _>>()?;
                segments.push(Segment::Acquisition {
                    npoints: *npoints,
                    dwell_s: *dwell_s,
                    decouple: idx,
                });
            }
            Event::FrameShift { target, phase_rad } => {
                let t = sys
                    .index_of(target)
                    .map_err(|_| ProgramError::UnresolvedLabel(target.clone()))?;
                if diagonal_h {
                    pending_phase[t] += phase_rad;
                } else {
                    // internal Hamiltonian does not commute with per-spin
                    // z-rotations; apply explicitly
                    let u = rf_rotation(n, &[t], [0.0, 0.0, 1.0], *phase_rad)?;
                    push_unitary(&mut segments, u, 0.0)?;
                }
            }
        }
    }
    flush_phases(&mut segments, &mut pending_phase, n)?;
    let gamma0 = if n > 0 { sys.gamma(0).unwrap_or(1.0) } else { 1.0 };
    let gradient_weights = (0..n)
        .map(|j| sys.gamma(j).map(|g| g / gamma0).unwrap_or(1.0))
        .collect();
    Ok(SegmentList { segments, spins: n, gradient_weights })
}

fn push_unitary(segments: &mut Vec<Segment>, u: CMat, duration_s: f64) -> Result<(), ProgramError> {
    let d = unitarity_defect(&u);
    if d > 1e-10 {
        return Err(ProgramError::NotUnitary(d));
    }
    segments.push(Segment::Unitary { u, duration_s });
    Ok(())
}

fn flush_phases(
    segments: &mut Vec<Segment>,
    pending: &mut [f64],
    n: usize,
) -> Result<(), ProgramError> {
    if pending.iter().all(|p| *p == 0.0) {
        return Ok(());
    }
    let mut u = identity(n);
    for (t, p) in pending.iter_mut().enumerate() {
        if *p != 0.0 {
            u = rf_rotation(n, &[t], [0.0, 0.0, 1.0], *p)? * u;
            *p = 0.0;
        }
    }
    push_unitary(segments, u, 0.0)
}

/// Rotate a pulse axis by `-phase` about z, folding a pending frame shift
/// into the pulse.
fn shift_axis(v: [f64; 3], phase: f64) -> [f64; 3] {
    let (s, c) = phase.sin_cos();
    [v[0] * c + v[1] * s, -v[0] * s + v[1] * c, v[2]]
}

fn is_diagonal(h: &CMat) -> bool {
    let diag = CMat::from_diagonal(&h.diagonal());
    max_norm(&(h - diag)) < 1e-14
}
