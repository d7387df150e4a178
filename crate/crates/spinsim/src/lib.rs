//! Desk-scale NMR spin-dynamics simulator and pulse-sequence compiler.
//!
//! The crate covers the machinery of small-molecule NMR quantum information
//! processing: internal/RF/gradient Hamiltonians, a pulse-program DSL with a
//! piecewise-constant-Hamiltonian compiler, exact density-matrix evolution
//! with crusher-gradient and relaxation channels, average-Hamiltonian
//! (toggling-frame / Magnus) analysis, a library of named gate sequences,
//! and ensemble weak-measurement readout (FID, spectrum, tomography).
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `spinsim` binary for the file-driven command line interface.

pub mod algebra;
pub mod system;
pub mod hamiltonian;
pub mod program;
pub mod engine;
pub mod kite;
pub mod aht;
pub mod seqlib;
pub mod measure;
pub mod tomo;
pub mod verify;

pub use algebra::{
    assemble, coefficient_of, expand_ladder_basis, expand_product_basis, gate_fidelity,
    identity, max_norm, normalized_overlap, state_fidelity, CMat, DensityMatrix, Factor,
    PauliString,
};

pub use hamiltonian::{gradient_phase, liquid_hamiltonian, rf_rotation, solid_hamiltonian};

pub use system::{GradientSpec, SpinSystem};

pub use engine::{apply_crusher, evolve, evolve_with, propagator, CrusherMode, EvolveOptions};

pub use kite::{kite_mask, KiteModel};

pub use program::{compile, parse, Event, PulseProgram, Segment, SegmentList};
