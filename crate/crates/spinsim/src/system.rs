//! Spin systems: labels, channels, offsets, couplings, and the line-oriented
//! config file format.
//!
//! Config grammar (one entry per line, `#` starts a comment):
//!
//! ```text
//! [spins]
//! <label> <channel> <offset_hz>
//! [j]
//! <label> <label> <j_hz>
//! [dipolar]
//! <label> <label> <b_rad_per_s> <theta_deg>
//! ```
//!
//! `b_rad_per_s` is the pre-combined dipolar strength γγ'/4r³.

use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("duplicate spin label '{0}'")]
    DuplicateLabel(String),
    #[error("unknown spin label '{0}'")]
    UnknownLabel(String),
    #[error("self-coupling on spin '{0}'")]
    SelfCoupling(String),
    #[error("non-finite parameter for spin '{0}'")]
    NonFinite(String),
    #[error("no gyromagnetic ratio known for channel '{0}'")]
    UnknownChannel(String),
    #[error("system must contain at least one spin")]
    Empty,
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
}

/// One nuclear spin: a label, a channel (nuclear species) and the Larmor
/// offset from that channel's transmitter, in Hz.
#[derive(Debug, Clone)]
pub struct Spin {
    pub label: String,
    pub channel: String,
    pub larmor_offset_hz: f64,
}

/// Dipolar coupling parameters for one spin pair. `b_rad_per_s` is the
/// combined strength γγ'/4r³.
#[derive(Debug, Clone, Copy)]
pub struct DipolarCoupling {
    pub b_rad_per_s: f64,
    pub theta_rad: f64,
}

impl DipolarCoupling {
    /// Build from geometry: internuclear distance, angle to the field and the
    /// two gyromagnetic ratios (rad s⁻¹ T⁻¹); ħ-scaled strengths should be
    /// folded into the γ's by the caller.
    pub fn from_geometry(r_m: f64, theta_rad: f64, gamma_i: f64, gamma_j: f64) -> Self {
        Self { b_rad_per_s: gamma_i * gamma_j / (4.0 * r_m.powi(3)), theta_rad }
    }
}

/// Gyromagnetic ratios in rad s⁻¹ T⁻¹ for common channels.
pub fn channel_gamma(channel: &str) -> Option<f64> {
    match channel {
        "1H" | "h" | "H" => Some(2.675_221_9e8),
        "13C" | "c" | "C" => Some(6.728_284e7),
        "15N" | "N" => Some(-2.712_618e7),
        "19F" | "F" => Some(2.518_148e8),
        "31P" | "P" => Some(1.083_940e8),
        _ => None,
    }
}

/// The molecule: spins plus J and dipolar coupling maps (symmetric, stored
/// with i < j).
#[derive(Debug, Clone, Default)]
pub struct SpinSystem {
    spins: Vec<Spin>,
    j_couplings: HashMap<(usize, usize), f64>,
    dipolar: HashMap<(usize, usize), DipolarCoupling>,
}

impl SpinSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_spin(&mut self, label: &str, channel: &str, offset_hz: f64) -> Result<usize, SystemError> {
        if self.spins.iter().any(|s| s.label == label) {
            return Err(SystemError::DuplicateLabel(label.to_string()));
        }
        if !offset_hz.is_finite() {
            return Err(SystemError::NonFinite(label.to_string()));
        }
        self.spins.push(Spin {
            label: label.to_string(),
            channel: channel.to_string(),
            larmor_offset_hz: offset_hz,
        });
        Ok(self.spins.len() - 1)
    }

    pub fn set_j(&mut self, a: &str, b: &str, j_hz: f64) -> Result<(), SystemError> {
        let key = self.pair_key(a, b)?;
        self.j_couplings.insert(key, j_hz);
        Ok(())
    }

    pub fn set_dipolar(&mut self, a: &str, b: &str, coupling: DipolarCoupling) -> Result<(), SystemError> {
        let key = self.pair_key(a, b)?;
        self.dipolar.insert(key, coupling);
        Ok(())
    }

    fn pair_key(&self, a: &str, b: &str) -> Result<(usize, usize), SystemError> {
        let i = self.index_of(a)?;
        let j = self.index_of(b)?;
        if i == j {
            return Err(SystemError::SelfCoupling(a.to_string()));
        }
        Ok((i.min(j), i.max(j)))
    }

    pub fn index_of(&self, label: &str) -> Result<usize, SystemError> {
        self.spins
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| SystemError::UnknownLabel(label.to_string()))
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn spin(&self, i: usize) -> &Spin {
        &self.spins[i]
    }

    pub fn j_hz(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        self.j_couplings.get(&key).copied().unwrap_or(0.0)
    }

    pub fn dipolar(&self, i: usize, j: usize) -> Option<DipolarCoupling> {
        let key = (i.min(j), i.max(j));
        self.dipolar.get(&key).copied()
    }

    pub fn dipolar_pairs(&self) -> impl Iterator<Item = ((usize, usize), DipolarCoupling)> + '_ {
        self.dipolar.iter().map(|(&k, &v)| (k, v))
    }

    pub fn gamma(&self, i: usize) -> Result<f64, SystemError> {
        let ch = &self.spins[i].channel;
        channel_gamma(ch).ok_or_else(|| SystemError::UnknownChannel(ch.clone()))
    }

    pub fn same_channel(&self, i: usize, j: usize) -> bool {
        self.spins[i].channel == self.spins[j].channel
    }

    /// The three-carbon alanine system used throughout the test suite:
    /// offsets {a: 0, b: -12580, c: +3440} Hz and
    /// J = {ab: 53, ac: 38, bc: 1.2} Hz.
    pub fn alanine() -> Self {
        let mut sys = Self::new();
        sys.add_spin("a", "13C", 0.0).unwrap();
        sys.add_spin("b", "13C", -12580.0).unwrap();
        sys.add_spin("c", "13C", 3440.0).unwrap();
        sys.set_j("a", "b", 53.0).unwrap();
        sys.set_j("a", "c", 38.0).unwrap();
        sys.set_j("b", "c", 1.2).unwrap();
        sys
    }

    /// Parse the line-oriented config format. `path` is used in diagnostics.
    pub fn parse(text: &str, path: &str) -> Result<Self, SystemError> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Spins,
            J,
            Dipolar,
        }
        let mut sys = SpinSystem::new();
        let mut section = Section::None;
        let mut saw_spins = false;
        let err = |line: usize, msg: String| SystemError::Parse {
            path: path.to_string(),
            line,
            msg,
        };
        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "[spins]" => {
                    section = Section::Spins;
                    saw_spins = true;
                    continue;
                }
                "[j]" => {
                    section = Section::J;
                    continue;
                }
                "[dipolar]" => {
                    section = Section::Dipolar;
                    continue;
                }
                _ if line.starts_with('[') => {
                    return Err(err(lineno, format!("unknown section {line}")));
                }
                _ => {}
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match section {
                Section::None => {
                    return Err(err(lineno, "entry before any section header".into()))
                }
                Section::Spins => {
                    if fields.len() != 3 {
                        return Err(err(lineno, "expected: label channel offset_hz".into()));
                    }
                    let offset: f64 = fields[2]
                        .parse()
                        .map_err(|_| err(lineno, format!("malformed number '{}'", fields[2])))?;
                    sys.add_spin(fields[0], fields[1], offset)
                        .map_err(|e| err(lineno, e.to_string()))?;
                }
                Section::J => {
                    if fields.len() != 3 {
                        return Err(err(lineno, "expected: label label j_hz".into()));
                    }
                    let j: f64 = fields[2]
                        .parse()
                        .map_err(|_| err(lineno, format!("malformed number '{}'", fields[2])))?;
                    sys.set_j(fields[0], fields[1], j)
                        .map_err(|e| err(lineno, e.to_string()))?;
                }
                Section::Dipolar => {
                    if fields.len() != 4 {
                        return Err(err(lineno, "expected: label label b_rad_per_s theta_deg".into()));
                    }
                    let b: f64 = fields[2]
                        .parse()
                        .map_err(|_| err(lineno, format!("malformed number '{}'", fields[2])))?;
                    let theta: f64 = fields[3]
                        .parse()
                        .map_err(|_| err(lineno, format!("malformed number '{}'", fields[3])))?;
                    sys.set_dipolar(
                        fields[0],
                        fields[1],
                        DipolarCoupling { b_rad_per_s: b, theta_rad: theta.to_radians() },
                    )
                    .map_err(|e| err(lineno, e.to_string()))?;
                }
            }
        }
        if !saw_spins {
            return Err(SystemError::Parse {
                path: path.to_string(),
                line: 0,
                msg: "missing [spins] section".into(),
            });
        }
        if sys.is_empty() {
            return Err(SystemError::Empty);
        }
        Ok(sys)
    }

    /// Render back into the config format.
    pub fn render(&self) -> String {
        let mut out = String::from("[spins]\n");
        for s in &self.spins {
            let _ = writeln!(out, "{} {} {}", s.label, s.channel, s.larmor_offset_hz);
        }
        if !self.j_couplings.is_empty() {
            out.push_str("[j]\n");
            let mut pairs: Vec<_> = self.j_couplings.iter().collect();
            pairs.sort_by_key(|(&k, _)| k);
            for (&(i, j), v) in pairs {
                let _ = writeln!(out, "{} {} {}", self.spins[i].label, self.spins[j].label, v);
            }
        }
        if !self.dipolar.is_empty() {
            out.push_str("[dipolar]\n");
            let mut pairs: Vec<_> = self.dipolar.iter().collect();
            pairs.sort_by_key(|(&k, _)| k);
            for (&(i, j), d) in pairs {
                let _ = writeln!(
                    out,
                    "{} {} {} {}",
                    self.spins[i].label,
                    self.spins[j].label,
                    d.b_rad_per_s,
                    d.theta_rad.to_degrees()
                );
            }
        }
        out
    }
}

/// Crusher-gradient parameters: gradient strength ∂Bz/∂z, pulse duration,
/// and the diffusion coefficient/delay that set the attenuation.
#[derive(Debug, Clone, Copy)]
pub struct GradientSpec {
    pub strength_t_per_m: f64,
    pub duration_s: f64,
    pub diffusion_coeff_m2_per_s: f64,
    pub diffusion_delay_s: f64,
}

impl GradientSpec {
    pub fn validate(&self) -> Result<(), SystemError> {
        if self.duration_s < 0.0 || self.diffusion_coeff_m2_per_s < 0.0 || self.diffusion_delay_s < 0.0
        {
            return Err(SystemError::NonFinite("gradient spec".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let text = "\
# alanine
[spins]
a 13C 0
b 13C -12580
c 13C 3440
[j]
a b 53
a c 38
b c 1.2
";
        let sys = SpinSystem::parse(text, "test.sys").unwrap();
        assert_eq!(sys.len(), 3);
        assert_eq!(sys.j_hz(0, 1), 53.0);
        assert_eq!(sys.j_hz(2, 1), 1.2);
        let again = SpinSystem::parse(&sys.render(), "round").unwrap();
        assert_eq!(again.len(), 3);
        assert_eq!(again.j_hz(0, 2), 38.0);
    }

    #[test]
    fn duplicate_label_rejected() {
        let text = "[spins]\na 13C 0\na 13C 5\n";
        let e = SpinSystem::parse(text, "dup.sys").unwrap_err();
        assert!(e.to_string().contains("dup.sys:3"));
    }

    #[test]
    fn missing_spins_section() {
        let e = SpinSystem::parse("[j]\n", "x.sys").unwrap_err();
        assert!(e.to_string().contains("[spins]"));
    }

    #[test]
    fn self_coupling_rejected() {
        let text = "[spins]\na 13C 0\n[j]\na a 5\n";
        assert!(SpinSystem::parse(text, "x.sys").is_err());
    }

    #[test]
    fn unknown_label_in_j() {
        let text = "[spins]\na 13C 0\n[j]\na q 5\n";
        let e = SpinSystem::parse(text, "x.sys").unwrap_err();
        assert!(e.to_string().contains("x.sys:4"));
    }

    #[test]
    fn dipolar_from_geometry() {
        let d = DipolarCoupling::from_geometry(2.0e-10, 0.0, 1.0e7, 1.0e7);
        assert!((d.b_rad_per_s - 1.0e14 / (4.0 * 8.0e-30)).abs() / d.b_rad_per_s < 1e-12);
    }
}
