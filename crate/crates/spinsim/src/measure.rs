//! Ensemble weak measurement: FID acquisition, Fourier spectra, peak
//! picking, and observable classification.
//!
//! The detected signal is obs(t) = Tr[Σ_j σ₊^j ρ(t)] summed over the spins
//! of the observed channel. Sign convention: a single spin with offset f
//! and transverse σx magnetization produces samples ∝ e^{+i2πft}, so
//! positive offsets appear at positive spectrum frequencies.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::algebra::{CMat, DensityMatrix, Factor, PauliString};
use crate::engine::{apply_kite, propagator};
use crate::hamiltonian::liquid_hamiltonian_decoupled;
use crate::kite::KiteModel;
use crate::system::SpinSystem;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("dwell time must be > 0, got {0}")]
    BadDwell(f64),
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("no spins on the observed channel '{0}'")]
    EmptyObservable(String),
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
    #[error(transparent)]
    Hamiltonian(#[from] crate::hamiltonian::HamiltonianError),
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
}

/// A free-induction decay: uniformly sampled complex signal.
#[derive(Debug, Clone)]
pub struct Fid {
    pub samples: Vec<C64>,
    pub dwell_s: f64,
    pub channel: String,
}

/// Frequency-domain signal, axis centered on the transmitter (0 Hz).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub freqs_hz: Vec<f64>,
    pub amplitudes: Vec<C64>,
}

/// Σ_j σ₊^j over the spins of `channel`.
pub fn channel_observable(sys: &SpinSystem, channel: &str) -> Result<CMat, MeasureError> {
    let n = sys.len();
    let dim = 1usize << n;
    let mut o = CMat::zeros(dim, dim);
    let mut any = false;
    for (j, spin) in sys.spins().iter().enumerate() {
        if spin.channel == channel {
            o += PauliString::single(n, j, Factor::Plus).matrix(n)?;
            any = true;
        }
    }
    if !any {
        return Err(MeasureError::EmptyObservable(channel.to_string()));
    }
    Ok(o)
}

/// Simulate an acquisition window: evolve under the internal Hamiltonian
/// (couplings and shift of decoupled spins zeroed) and sample
/// Tr[Σσ₊·ρ(k·dwell)]. The observed channel is that of the first spin.
pub fn acquire(
    rho0: &DensityMatrix,
    sys: &SpinSystem,
    h_int: &CMat,
    npoints: usize,
    dwell_s: f64,
    kite: Option<&KiteModel>,
    decouple: &[usize],
) -> Result<Fid, MeasureError> {
    if dwell_s <= 0.0 {
        return Err(MeasureError::BadDwell(dwell_s));
    }
    if npoints < 2 {
        return Err(MeasureError::TooFewPoints(npoints));
    }
    let channel = sys
        .spins()
        .first()
        .map(|s| s.channel.clone())
        .ok_or_else(|| MeasureError::EmptyObservable("(empty system)".into()))?;
    let h = if decouple.is_empty() {
        h_int.clone()
    } else {
        liquid_hamiltonian_decoupled(sys, decouple)?
    };
    let samples = acquire_matrix(rho0.matrix(), sys, &channel, &h, npoints, dwell_s, kite)?;
    Ok(Fid { samples, dwell_s, channel })
}

/// Linear core of [`acquire`], usable on any operator (not just valid
/// density matrices) — tomography inverts it on basis strings.
pub(crate) fn acquire_matrix(
    state0: &CMat,
    sys: &SpinSystem,
    channel: &str,
    h: &CMat,
    npoints: usize,
    dwell_s: f64,
    kite: Option<&KiteModel>,
) -> Result<Vec<C64>, MeasureError> {
    let obs = channel_observable(sys, channel)?;
    let diag = {
        let d = CMat::from_diagonal(&h.diagonal());
        crate::algebra::max_norm(&(h - d)) < 1e-14
    };
    if diag && kite.map_or(true, |k| k.is_trivial()) {
        // shift + ZZ Hamiltonians are diagonal: every contributing matrix
        // element just rotates at its own transition frequency
        let dim = h.nrows();
        let mut terms: Vec<(C64, C64)> = Vec::new(); // (value, per-dwell phase)
        for c in 0..dim {
            for r in 0..dim {
                let w = obs[(c, r)];
                if w.norm() > 0.0 {
                    let step = C64::from_polar(1.0, -(h[(r, r)].re - h[(c, c)].re) * dwell_s);
                    terms.push((w * state0[(r, c)], step));
                }
            }
        }
        let mut samples = Vec::with_capacity(npoints);
        for _ in 0..npoints {
            samples.push(terms.iter().map(|(v, _)| *v).sum());
            for (v, step) in terms.iter_mut() {
                *v *= *step;
            }
        }
        return Ok(samples);
    }
    let u = propagator(h, dwell_s)?;
    let ua = u.adjoint();
    let mut state = state0.clone();
    let mut samples = Vec::with_capacity(npoints);
    for k in 0..npoints {
        samples.push((&obs * &state).trace());
        if k + 1 < npoints {
            state = &u * state * &ua;
            apply_kite(&mut state, kite, dwell_s)?;
        }
    }
    Ok(samples)
}

/// Fourier-transform a FID: optional exponential apodization
/// (`line_broaden_hz` full width), zero-filling to `zerofill_to` points,
/// then a shifted forward DFT. freqs[j] = (j − N/2)/(N·dwell).
pub fn spectrum(fid: &Fid, zerofill_to: usize, line_broaden_hz: f64) -> Spectrum {
    let np = fid.samples.len();
    let n = zerofill_to.max(np);
    let mut buf: Vec<C64> = (0..n)
        .map(|k| {
            if k < np {
                let t = k as f64 * fid.dwell_s;
                fid.samples[k] * C64::new((-std::f64::consts::PI * line_broaden_hz * t).exp(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    // shift so the axis runs −Nyquist..+Nyquist with 0 in the middle
    let half = n / 2;
    let mut freqs = Vec::with_capacity(n);
    let mut amps = Vec::with_capacity(n);
    for j in 0..n {
        let k = (j + half) % n;
        freqs.push((j as f64 - half as f64) / (n as f64 * fid.dwell_s));
        amps.push(buf[k]);
    }
    Spectrum { freqs_hz: freqs, amplitudes: amps }
}

/// Local maxima of |amplitude| above `threshold_frac`·max, returned as
/// (frequency, magnitude).
pub fn peak_pick(spec: &Spectrum, threshold_frac: f64) -> Vec<(f64, f64)> {
    let mags: Vec<f64> = spec.amplitudes.iter().map(|a| a.norm()).collect();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Vec::new();
    }
    let thr = threshold_frac * max;
    let mut peaks = Vec::new();
    for j in 1..mags.len().saturating_sub(1) {
        if mags[j] >= thr && mags[j] > mags[j - 1] && mags[j] >= mags[j + 1] {
            peaks.push((spec.freqs_hz[j], mags[j]));
        }
    }
    peaks
}

/// How a product-operator term shows up in the detected signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservableClass {
    /// Single-spin transverse term: contributes to the FID directly.
    Direct,
    /// Single transverse factor dressed with σz factors: evolves into a
    /// direct term under the scalar coupling (antiphase lines).
    Indirect,
    /// Everything else: never reaches the detector under shift + ZZ
    /// evolution.
    Invisible,
}

pub fn observable_class(ps: &PauliString) -> ObservableClass {
    let transverse = ps
        .factors
        .iter()
        .filter(|f| matches!(f, Factor::X | Factor::Y | Factor::Plus | Factor::Minus))
        .count();
    let z = ps.factors.iter().filter(|f| matches!(f, Factor::Z)).count();
    match (transverse, z) {
        (1, 0) => ObservableClass::Direct,
        (1, _) => ObservableClass::Indirect,
        _ => ObservableClass::Invisible,
    }
}

/// CSV export: `# dwell_s=…` header, then one `re,im` row per sample.
pub fn fid_to_csv(fid: &Fid) -> String {
    let mut out = format!("# dwell_s={}\n# channel={}\n# re,im\n", fid.dwell_s, fid.channel);
    for s in &fid.samples {
        out.push_str(&format!("{},{}\n", s.re, s.im));
    }
    out
}

/// CSV export: `# freq_hz,re,im` header, one row per bin.
pub fn spectrum_to_csv(spec: &Spectrum) -> String {
    let mut out = String::from("# freq_hz,re,im\n");
    for (f, a) in spec.freqs_hz.iter().zip(&spec.amplitudes) {
        out.push_str(&format!("{},{},{}\n", f, a.re, a.im));
    }
    out
}
