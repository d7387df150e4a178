//! 3-qubit state tomography from simulated spectra.
//!
//! Seven experiments, each a fixed readout pulse (per-spin choice of
//! nothing, 90°x, or 90°y) followed by an acquisition, are enough to reach
//! all 63 traceless product-operator coefficients: the multiplet line
//! amplitudes of each experiment are linear in the input state, and the
//! stacked 7×12 complex amplitudes form a rank-63 real linear map that is
//! pseudo-inverted for reconstruction.
//!
//! The readout set is not dictated by physics alone — many sets work. Ours
//! ([`DEFAULT_READOUTS`]) was found by greedy search over per-spin
//! {1, 90x, 90y} products (adding whichever candidate grows the rank most,
//! until 63) and is frozen here; the rank property is re-checked in tests.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::algebra::{CMat, DensityMatrix, Factor, PauliString};
use crate::hamiltonian::{liquid_hamiltonian, rf_rotation};
use crate::measure::acquire_matrix;
use crate::system::SpinSystem;

#[derive(Debug, Error)]
pub enum TomoError {
    #[error("tomography needs exactly 3 spins, got {0}")]
    SpinCount(usize),
    #[error("all spins must share one channel for a single-receiver tomography")]
    MixedChannels,
    #[error(
        "multiplet lines too close to resolve: gap {gap_hz:.3} Hz needs at least {need_hz:.3} Hz \
         at this acquisition length"
    )]
    Unresolvable { gap_hz: f64, need_hz: f64 },
    #[error("readout set is rank {0}, needs 63")]
    RankDeficient(usize),
    #[error(transparent)]
    Hamiltonian(#[from] crate::hamiltonian::HamiltonianError),
    #[error(transparent)]
    Measure(#[from] crate::measure::MeasureError),
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
}

/// Per-spin readout pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutPulse {
    None,
    X90,
    Y90,
}

/// The frozen 7-experiment readout set (see module docs).
pub const DEFAULT_READOUTS: [[ReadoutPulse; 3]; 7] = {
    use ReadoutPulse::{None as N, X90 as X, Y90 as Y};
    [
        [N, N, N],
        [X, X, X],
        [N, N, Y],
        [X, Y, X],
        [Y, N, N],
        [X, X, Y],
        [N, Y, Y],
    ]
};

/// One detectable single-quantum line: matrix element (row, col) of the
/// post-readout state, oscillating at `freq_hz`.
#[derive(Debug, Clone, Copy)]
struct Line {
    row: usize,
    col: usize,
    freq_hz: f64,
}

/// A bound tomography protocol: system, acquisition parameters, readout
/// set, line table, and the pseudo-inverse of the forward map.
pub struct TomographyProtocol {
    sys: SpinSystem,
    h: CMat,
    npoints: usize,
    dwell_s: f64,
    readouts: Vec<[ReadoutPulse; 3]>,
    readout_us: Vec<CMat>,
    lines: Vec<Line>,
    basis: Vec<PauliString>,
    pinv: nalgebra::DMatrix<f64>,
}

fn readout_unitary(pulses: &[ReadoutPulse; 3]) -> Result<CMat, TomoError> {
    let mut u = crate::algebra::identity(3);
    for (spin, p) in pulses.iter().enumerate() {
        let axis = match p {
            ReadoutPulse::None => continue,
            ReadoutPulse::X90 => [1.0, 0.0, 0.0],
            ReadoutPulse::Y90 => [0.0, 1.0, 0.0],
        };
        u = rf_rotation(3, &[spin], axis, std::f64::consts::FRAC_PI_2)? * u;
    }
    Ok(u)
}

/// The 12 single-quantum lines of a 3-spin system with diagonal internal
/// Hamiltonian: for each spin j and spectator configuration, the element
/// ⟨r|ρ|c⟩ with bit j set in r and clear in c evolves at
/// (E_c − E_r)/2π.
fn line_table(h: &CMat) -> Vec<Line> {
    let mut lines = Vec::with_capacity(12);
    for j in 0..3usize {
        let bit = 1usize << (2 - j); // spin 0 is the most significant bit
        for rest in 0..8usize {
            if rest & bit != 0 {
                continue;
            }
            let col = rest;
            let row = rest | bit;
            let freq = (h[(col, col)].re - h[(row, row)].re) / (2.0 * std::f64::consts::PI);
            lines.push(Line { row, col, freq_hz: freq });
        }
    }
    lines
}

impl TomographyProtocol {
    /// Bind a protocol to a homonuclear 3-spin system with the default
    /// readout set. `npoints`·`dwell_s` must be long enough to resolve the
    /// closest pair of multiplet lines.
    pub fn new(sys: &SpinSystem, npoints: usize, dwell_s: f64) -> Result<Self, TomoError> {
        Self::with_readouts(sys, npoints, dwell_s, DEFAULT_READOUTS.to_vec())
    }

    pub fn with_readouts(
        sys: &SpinSystem,
        npoints: usize,
        dwell_s: f64,
        readouts: Vec<[ReadoutPulse; 3]>,
    ) -> Result<Self, TomoError> {
        if sys.len() != 3 {
            return Err(TomoError::SpinCount(sys.len()));
        }
        if !(sys.same_channel(0, 1) && sys.same_channel(0, 2)) {
            return Err(TomoError::MixedChannels);
        }
        let h = liquid_hamiltonian(sys)?;
        let lines = line_table(&h);

        // line resolvability at this acquisition length
        let need_hz = 1.0 / (npoints as f64 * dwell_s);
        let mut gap = f64::INFINITY;
        for (i, a) in lines.iter().enumerate() {
            for b in &lines[i + 1..] {
                gap = gap.min((a.freq_hz - b.freq_hz).abs());
            }
        }
        if gap < 2.0 * need_hz {
            return Err(TomoError::Unresolvable { gap_hz: gap, need_hz: 2.0 * need_hz });
        }
        let nyquist = 0.5 / dwell_s;
        if lines.iter().any(|l| l.freq_hz.abs() >= nyquist) {
            return Err(TomoError::Unresolvable { gap_hz: gap, need_hz: nyquist });
        }

        let readout_us = readouts
            .iter()
            .map(readout_unitary)
            .collect::<Result<Vec<_>, _>>()?;

        // traceless product basis
        let pauli = [Factor::I, Factor::X, Factor::Y, Factor::Z];
        let mut basis = Vec::with_capacity(63);
        for code in 1..64usize {
            let f: Vec<Factor> = (0..3).map(|k| pauli[(code >> (2 * k)) & 3]).collect();
            basis.push(PauliString::new(f, C64::new(1.0, 0.0)));
        }

        // forward map: coefficient of basis string -> stacked re/im of the
        // 7×12 line amplitudes (amplitude = 2·element of U ρ U†)
        let rows = readouts.len() * lines.len() * 2;
        let mut m = nalgebra::DMatrix::<f64>::zeros(rows, 63);
        for (bi, ps) in basis.iter().enumerate() {
            let op = ps.matrix(3)?;
            let mut r = 0usize;
            for u in &readout_us {
                let rotated = u * &op * u.adjoint();
                for line in &lines {
                    let a = rotated[(line.row, line.col)] * C64::new(2.0, 0.0);
                    m[(r, bi)] = a.re;
                    m[(r + 1, bi)] = a.im;
                    r += 2;
                }
            }
        }
        let svd = m.clone().svd(true, true);
        let tol = 1e-9 * svd.singular_values.max();
        let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
        if rank < 63 {
            return Err(TomoError::RankDeficient(rank));
        }
        let pinv = svd.pseudo_inverse(tol).expect("svd computed with u/v");

        Ok(Self {
            sys: sys.clone(),
            h,
            npoints,
            dwell_s,
            readouts,
            readout_us,
            lines,
            basis,
            pinv,
        })
    }

    pub fn readouts(&self) -> &[[ReadoutPulse; 3]] {
        &self.readouts
    }

    /// Run the 7 experiments on a state: simulate each post-readout FID
    /// and extract the 12 complex line amplitudes by least squares against
    /// the known frequencies. Returns the stacked re/im measurement
    /// vector.
    pub fn measure(&self, rho: &DensityMatrix) -> Result<Vec<f64>, TomoError> {
        let channel = self.sys.spins()[0].channel.clone();
        // design matrix shared by all experiments
        let np = self.npoints;
        let nl = self.lines.len();
        let mut a = nalgebra::DMatrix::<C64>::zeros(np, nl);
        for k in 0..np {
            let t = k as f64 * self.dwell_s;
            for (l, line) in self.lines.iter().enumerate() {
                a[(k, l)] = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * line.freq_hz * t);
            }
        }
        let ah = a.adjoint();
        let gram = &ah * &a;
        let lu = gram.lu();

        let mut out = Vec::with_capacity(self.readouts.len() * nl * 2);
        for u in &self.readout_us {
            let state = u * rho.matrix() * u.adjoint();
            let samples =
                acquire_matrix(&state, &self.sys, &channel, &self.h, np, self.dwell_s, None)?;
            let b = nalgebra::DVector::<C64>::from_vec(samples);
            let rhs = &ah * b;
            let amps = lu.solve(&rhs).expect("Gram matrix invertible for resolved lines");
            for l in 0..nl {
                out.push(amps[l].re);
                out.push(amps[l].im);
            }
        }
        Ok(out)
    }

    /// Invert a measurement vector back to a density matrix.
    pub fn reconstruct(&self, measurements: &[f64]) -> Result<DensityMatrix, TomoError> {
        let y = nalgebra::DVector::<f64>::from_row_slice(measurements);
        let c = &self.pinv * y;
        let mut rho = crate::algebra::identity(3) / C64::new(8.0, 0.0);
        for (bi, ps) in self.basis.iter().enumerate() {
            rho += ps.matrix(3)? * C64::new(c[bi], 0.0);
        }
        Ok(DensityMatrix::from_raw(rho, 3))
    }

    /// measure + reconstruct.
    pub fn run(&self, rho: &DensityMatrix) -> Result<DensityMatrix, TomoError> {
        let y = self.measure(rho)?;
        self.reconstruct(&y)
    }
}

/// Greedy readout-set construction over per-spin {1, 90x, 90y} products:
/// repeatedly add the candidate that increases the forward-map rank most.
/// Used once to produce [`DEFAULT_READOUTS`]; kept for reproducibility.
pub fn greedy_readout_search(sys: &SpinSystem) -> Result<Vec<[ReadoutPulse; 3]>, TomoError> {
    use ReadoutPulse::{None as N, X90 as X, Y90 as Y};
    let options = [N, X, Y];
    let mut candidates = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                candidates.push([options[i], options[j], options[k]]);
            }
        }
    }
    let h = liquid_hamiltonian(sys)?;
    let lines = line_table(&h);
    let pauli = [Factor::I, Factor::X, Factor::Y, Factor::Z];
    let basis: Vec<CMat> = (1..64usize)
        .map(|code| {
            let f: Vec<Factor> = (0..3).map(|k| pauli[(code >> (2 * k)) & 3]).collect();
            PauliString::new(f, C64::new(1.0, 0.0)).matrix(3).unwrap()
        })
        .collect();

    let block = |pulses: &[ReadoutPulse; 3]| -> Result<nalgebra::DMatrix<f64>, TomoError> {
        let u = readout_unitary(pulses)?;
        let mut m = nalgebra::DMatrix::<f64>::zeros(lines.len() * 2, 63);
        for (bi, op) in basis.iter().enumerate() {
            let rotated = &u * op * u.adjoint();
            for (li, line) in lines.iter().enumerate() {
                let a = rotated[(line.row, line.col)] * C64::new(2.0, 0.0);
                m[(2 * li, bi)] = a.re;
                m[(2 * li + 1, bi)] = a.im;
            }
        }
        Ok(m)
    };
    let rank_of = |m: &nalgebra::DMatrix<f64>| -> usize {
        let sv = m.clone().svd(false, false).singular_values;
        let tol = 1e-9 * sv.max();
        sv.iter().filter(|s| **s > tol).count()
    };

    let mut chosen: Vec<[ReadoutPulse; 3]> = Vec::new();
    let mut acc: Option<nalgebra::DMatrix<f64>> = None;
    let mut rank = 0usize;
    while rank < 63 {
        let mut best: Option<([ReadoutPulse; 3], nalgebra::DMatrix<f64>, usize)> = None;
        for cand in &candidates {
            if chosen.contains(cand) {
                continue;
            }
            let b = block(cand)?;
            let stacked = match &acc {
                None => b.clone(),
                Some(a) => {
                    let mut s = nalgebra::DMatrix::<f64>::zeros(a.nrows() + b.nrows(), 63);
                    s.view_mut((0, 0), (a.nrows(), 63)).copy_from(a);
                    s.view_mut((a.nrows(), 0), (b.nrows(), 63)).copy_from(&b);
                    s
                }
            };
            let r = rank_of(&stacked);
            if best.as_ref().map_or(true, |(_, _, br)| r > *br) {
                best = Some((*cand, stacked, r));
            }
        }
        let (cand, stacked, r) = best.expect("candidates remain");
        if r == rank {
            return Err(TomoError::RankDeficient(rank));
        }
        chosen.push(cand);
        acc = Some(stacked);
        rank = r;
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::max_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Well-separated homonuclear test system: every multiplet line at
    /// least 40 Hz from its neighbors.
    fn benign_system() -> SpinSystem {
        let mut sys = SpinSystem::new();
        sys.add_spin("a", "13C", 0.0).unwrap();
        sys.add_spin("b", "13C", -1500.0).unwrap();
        sys.add_spin("c", "13C", 2700.0).unwrap();
        sys.set_j("a", "b", 120.0).unwrap();
        sys.set_j("a", "c", 80.0).unwrap();
        sys.set_j("b", "c", 40.0).unwrap();
        sys
    }

    fn protocol() -> TomographyProtocol {
        TomographyProtocol::new(&benign_system(), 1024, 1e-4).unwrap()
    }

    fn random_density(rng: &mut ChaCha8Rng) -> DensityMatrix {
        let mut g = CMat::zeros(8, 8);
        for r in 0..8 {
            for c in 0..8 {
                g[(r, c)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let p = &g * g.adjoint();
        let tr = p.trace().re;
        DensityMatrix::from_raw(p / C64::new(tr, 0.0), 3)
    }

    #[test]
    fn default_readout_set_has_rank_63() {
        // constructing the protocol performs the rank check
        let _ = protocol();
    }

    #[test]
    fn greedy_search_reproduces_a_seven_element_set() {
        let set = greedy_readout_search(&benign_system()).unwrap();
        assert!(set.len() <= 7, "greedy found {} readouts", set.len());
        let p = TomographyProtocol::with_readouts(&benign_system(), 1024, 1e-4, set);
        assert!(p.is_ok());
    }

    #[test]
    fn mixed_state_reconstructs_to_zero_coefficients() {
        let p = protocol();
        let rec = p.run(&DensityMatrix::mixed(3)).unwrap();
        assert!(max_norm(&rec.traceless()) < 1e-10);
    }

    #[test]
    fn pseudo_pure_round_trip() {
        let p = protocol();
        let rho = DensityMatrix::basis_state(3, 0);
        let rec = p.run(&rho).unwrap();
        assert!(max_norm(&(rec.matrix() - rho.matrix())) < 1e-8);
    }

    #[test]
    fn random_state_round_trips() {
        let p = protocol();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..3 {
            let rho = random_density(&mut rng);
            let rec = p.run(&rho).unwrap();
            let err = max_norm(&(rec.matrix() - rho.matrix()));
            assert!(err < 1e-8, "round-trip error {err}");
        }
    }

    #[test]
    fn degenerate_couplings_rejected() {
        let mut sys = SpinSystem::new();
        sys.add_spin("a", "13C", 0.0).unwrap();
        sys.add_spin("b", "13C", -1500.0).unwrap();
        sys.add_spin("c", "13C", 2700.0).unwrap();
        // J_ab = J_ac makes spin-a lines coincide
        sys.set_j("a", "b", 80.0).unwrap();
        sys.set_j("a", "c", 80.0).unwrap();
        sys.set_j("b", "c", 40.0).unwrap();
        assert!(matches!(
            TomographyProtocol::new(&sys, 1024, 1e-4),
            Err(TomoError::Unresolvable { .. })
        ));
    }

    #[test]
    fn heteronuclear_rejected() {
        let mut sys = SpinSystem::new();
        sys.add_spin("a", "1H", 0.0).unwrap();
        sys.add_spin("b", "13C", -1500.0).unwrap();
        sys.add_spin("c", "13C", 2700.0).unwrap();
        assert!(matches!(TomographyProtocol::new(&sys, 1024, 1e-4), Err(TomoError::MixedChannels)));
    }
}
