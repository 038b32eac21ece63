//! Numerical laboratory for the exact coherent states of N-body
//! inverse-square models with time-dependent harmonic confinement, and the
//! geometric phases of their quasi-periodic evolution.
//!
//! The crate is organized along the pipeline: classical envelope dynamics
//! ([`classical`]) feed wavefunction evaluators ([`wavefn`]), which the
//! sector-quadrature oracle layer ([`quad`]) and the phase engine
//! ([`phase`]) consume. [`scenario`] holds the strict JSON configuration
//! shared by the command-line front end.

pub mod classical;
pub mod error;
pub mod model;
pub mod phase;
pub mod poly;
pub mod quad;
pub mod scenario;
pub mod schedule;
pub mod specfun;
pub mod wavefn;

pub use classical::{
    displacement_solution, integrate_eom, monodromy, Frame, Monodromy, Trajectory, TrajectoryInit,
};
pub use error::{Error, Result};
pub use model::{coordinates, energy, potential, sector_contains, Label, ModelSpec, Variant};
pub use phase::{
    closed_form_chi, dynamical_phase, geometric_phase_closed, measure_global_phase,
    phase_pipeline, PhaseReport,
};
pub use poly::SymmetricPolynomial;
pub use quad::{inner_product, Integrator, Method, OverlapResult, QuadratureSpec};
pub use scenario::Scenario;
pub use schedule::Schedule;
pub use wavefn::{CoherentState, DressingNorm, EigenState};
