//! Exact evolution of density matrices under compiled segment lists:
//! piecewise-constant propagators, crusher dephasing, gradient phase
//! ramps, and diagonal kite relaxation.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::algebra::{
    assemble, expand_ladder_basis, hermiticity_defect, max_norm, spin_count, CMat, DensityMatrix,
};
use crate::kite::KiteModel;
use crate::program::{Segment, SegmentList};
use crate::system::GradientSpec;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("Hamiltonian is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("dimension mismatch: state is {state}x{state}, segment is {segment}x{segment}")]
    DimensionMismatch { state: usize, segment: usize },
    #[error("trace drifted by {0:.3e} during evolution")]
    TraceDrift(f64),
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
    #[error("segment list contains a non-invertible segment (crusher)")]
    NotInvertible,
}

/// U = e^{−iHt} for Hermitian `h`, via eigendecomposition. Exact for a
/// constant segment — no product-formula error.
pub fn propagator(h: &CMat, t_s: f64) -> Result<CMat, EngineError> {
    let scale = max_norm(h).max(1.0);
    let defect = hermiticity_defect(h);
    if defect > 1e-12 * scale {
        return Err(EngineError::NotHermitian(defect));
    }
    let sym = h.clone().symmetric_eigen();
    let dim = h.nrows();
    let mut phases = CMat::zeros(dim, dim);
    for (i, lam) in sym.eigenvalues.iter().enumerate() {
        phases[(i, i)] = C64::from_polar(1.0, -lam * t_s);
    }
    Ok(&sym.eigenvectors * phases * sym.eigenvectors.adjoint())
}

/// How a crusher gradient acts on coherences.
#[derive(Debug, Clone, Copy)]
pub enum CrusherMode {
    /// Complete dephasing: every nonzero coherence order is removed.
    Ideal,
    /// Finite gradient: order-m coherences attenuate by
    /// exp(−m²γ²g²δ²·D·τ). `gamma_rad_per_s_t` is the gyromagnetic ratio
    /// the attenuation is referenced to.
    Attenuate { grad: GradientSpec, gamma_rad_per_s_t: f64 },
}

/// Apply a crusher channel: decompose in the {1, Z, +, −} product basis and
/// scale each term of coherence order m by a(m).
pub fn apply_crusher(rho: &DensityMatrix, mode: CrusherMode) -> Result<DensityMatrix, EngineError> {
    let n = rho.spins();
    let mut terms = expand_ladder_basis(rho.matrix())?;
    for (string, coeff) in terms.iter_mut() {
        let m = string.coherence_order().map_err(EngineError::Algebra)?;
        let a = match mode {
            CrusherMode::Ideal => {
                if m == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            CrusherMode::Attenuate { grad, gamma_rad_per_s_t } => {
                let q = m as f64 * gamma_rad_per_s_t * grad.strength_t_per_m * grad.duration_s;
                (-q * q * grad.diffusion_coeff_m2_per_s * grad.diffusion_delay_s).exp()
            }
        };
        *coeff *= C64::new(a, 0.0);
    }
    let out = assemble(&terms, n)?;
    Ok(DensityMatrix::from_raw(out, n))
}

/// Options for [`evolve_with`].
#[derive(Debug, Clone)]
pub struct EvolveOptions {
    /// Spatial-ensemble size for gradient phase ramps. The kick phase is
    /// sampled uniformly on [0, 2π); 64 samples average any winding below
    /// 64 turns exactly.
    pub gradient_phase_samples: usize,
    /// Record the state after every segment.
    pub trajectory: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { gradient_phase_samples: 64, trajectory: false }
    }
}

#[derive(Debug, Clone)]
pub struct EvolveOutcome {
    pub rho: DensityMatrix,
    /// One entry per segment when requested, averaged over the gradient
    /// ensemble.
    pub trajectory: Vec<DensityMatrix>,
}

/// Evolve a state through a segment list. Acquisition segments are
/// boundaries for the measurement layer and leave the state untouched
/// here.
pub fn evolve(
    rho: &DensityMatrix,
    segs: &SegmentList,
    kite: Option<&KiteModel>,
) -> Result<DensityMatrix, EngineError> {
    Ok(evolve_with(rho, segs, kite, &EvolveOptions::default())?.rho)
}

pub fn evolve_with(
    rho: &DensityMatrix,
    segs: &SegmentList,
    kite: Option<&KiteModel>,
    opts: &EvolveOptions,
) -> Result<EvolveOutcome, EngineError> {
    let n = rho.spins();
    if segs.spins != n {
        return Err(EngineError::DimensionMismatch {
            state: 1 << n,
            segment: 1 << segs.spins,
        });
    }
    let has_kick = segs
        .segments
        .iter()
        .any(|s| matches!(s, Segment::GradientKick { .. }));
    let samples = if has_kick { opts.gradient_phase_samples.max(1) } else { 1 };

    let dim = 1usize << n;
    let mut acc = CMat::zeros(dim, dim);
    let mut traj_acc: Vec<CMat> = if opts.trajectory {
        vec![CMat::zeros(dim, dim); segs.segments.len()]
    } else {
        Vec::new()
    };

    for k in 0..samples {
        // one spatial position: shared phase for all kicks in this pass
        let phi = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
        let mut state = rho.matrix().clone();
        for (si, seg) in segs.segments.iter().enumerate() {
            match seg {
                Segment::Unitary { u, duration_s } => {
                    if u.nrows() != dim {
                        return Err(EngineError::DimensionMismatch {
                            state: dim,
                            segment: u.nrows(),
                        });
                    }
                    state = u * state * u.adjoint();
                    if *duration_s > 0.0 {
                        apply_kite(&mut state, kite, *duration_s)?;
                    }
                }
                Segment::GradientKick { area, duration_s } => {
                    kick_phases(&mut state, &segs.gradient_weights, *area * phi);
                    if *duration_s > 0.0 {
                        apply_kite(&mut state, kite, *duration_s)?;
                    }
                }
                Segment::Crusher => crush_in_place(&mut state, n),
                Segment::Acquisition { .. } => {}
            }
            debug_assert!(hermiticity_defect(&state) < 1e-9, "state lost Hermiticity");
            if opts.trajectory {
                traj_acc[si] += &state;
            }
        }
        acc += state;
    }

    let w = C64::new(1.0 / samples as f64, 0.0);
    let avg = acc * w;
    let drift = (avg.trace().re - 1.0).abs();
    if drift > 1e-10 {
        return Err(EngineError::TraceDrift(drift));
    }
    let trajectory = traj_acc
        .into_iter()
        .map(|m| DensityMatrix::from_raw(m * w, n))
        .collect();
    Ok(EvolveOutcome { rho: DensityMatrix::from_raw(avg, n), trajectory })
}

/// Element-wise gradient phase: entry (r, c) picks up
/// exp(−i·phase·Σ_j w_j·(bit_j(c) − bit_j(r))). For equal weights the
/// exponent is the coherence order times the phase, matching the basis
/// picture exactly.
fn kick_phases(state: &mut CMat, weights: &[f64], phase: f64) {
    let n = weights.len();
    let dim = state.nrows();
    let winding = |idx: usize| -> f64 {
        (0..n)
            .map(|j| weights[j] * ((idx >> (n - 1 - j)) & 1) as f64)
            .sum()
    };
    let w: Vec<f64> = (0..dim).map(winding).collect();
    for r in 0..dim {
        for c in 0..dim {
            let m = w[c] - w[r];
            if m != 0.0 {
                state[(r, c)] *= C64::from_polar(1.0, -phase * m);
            }
        }
    }
}

/// Ideal crusher, element form: zero every entry whose row and column
/// differ in excitation number (nonzero coherence order).
fn crush_in_place(state: &mut CMat, n: usize) {
    let dim = 1usize << n;
    for r in 0..dim {
        for c in 0..dim {
            if (r as u32).count_ones() != (c as u32).count_ones() {
                state[(r, c)] = C64::new(0.0, 0.0);
            }
        }
    }
}

/// Diagonal kite decay for duration `t_s`: each ladder-basis coefficient
/// shrinks by e^{−rate·t}. First-order splitting with the preceding
/// unitary.
pub(crate) fn apply_kite(
    state: &mut CMat,
    kite: Option<&KiteModel>,
    t_s: f64,
) -> Result<(), EngineError> {
    let Some(model) = kite else { return Ok(()) };
    if model.is_trivial() {
        return Ok(());
    }
    let n = spin_count(state.nrows())?;
    let mut terms = expand_ladder_basis(state)?;
    for (string, coeff) in terms.iter_mut() {
        let r = model.rate(&string.factors);
        if r > 0.0 {
            *coeff *= C64::new((-r * t_s).exp(), 0.0);
        }
    }
    *state = assemble(&terms, n)?;
    Ok(())
}

impl SegmentList {
    /// Time-reversed segment list (U → U† in reverse order). Errors if a
    /// non-unitary segment is present.
    pub fn inverted(&self) -> Result<SegmentList, EngineError> {
        let mut segments = Vec::with_capacity(self.segments.len());
        for seg in self.segments.iter().rev() {
            match seg {
                Segment::Unitary { u, duration_s } => {
                    segments.push(Segment::Unitary { u: u.adjoint(), duration_s: *duration_s });
                }
                Segment::GradientKick { area, duration_s } => {
                    segments.push(Segment::GradientKick { area: -area, duration_s: *duration_s });
                }
                Segment::Crusher => return Err(EngineError::NotInvertible),
                Segment::Acquisition { .. } => {}
            }
        }
        Ok(SegmentList {
            segments,
            spins: self.spins,
            gradient_weights: self.gradient_weights.clone(),
        })
    }
}
