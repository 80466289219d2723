//! Time evolution under measurement-based flux feedback.
//!
//! Within each feedback window the flux is frozen and the Hamiltonian is
//! `H_s(Φx) + n_g(t)·H_d(Φx)`, with the gate charge following the drive
//! continuously. At each window start `⟨φ̂₁⟩` is measured (exact
//! expectation), the flux is updated and the coefficients are recompiled.

mod feedback;
mod hamiltonian;
mod integrator;
mod trajectory;

pub use feedback::{
    flux_update, run_feedback, run_feedback_with, CoeffsProvider, CompiledProvider, DriveSpec, FeedbackSpec,
    FluxUpdate, OperatingPoint, SimConfig, Simulation, DEFAULT_NORM_TOLERANCE,
};
pub use hamiltonian::{assemble_hamiltonian, OperatorBasis, Term};
pub use integrator::{Rk4, SplitHamiltonian};
pub use trajectory::{Trajectory, TrajectoryRow};
