//! Pseudo-spectral splitting semi-implicit Euler (SIE) solver for the stochastic
//! incompressible Euler equations on the unit torus, written in vorticity form.
//!
//! Scalar fields are mean-zero and stored as coefficients on the real orthonormal
//! Fourier basis `e_k` (`√2 cos(2πk·x)` for `k` in the upper half plane,
//! `√2 sin(2πk·x)` for the lower one), truncated to the box
//! `Λ_N = {k ≠ 0 : max(|k1|, |k2|) ≤ N}`. Nonlinear products are formed on a
//! padded grid so that their projections back onto `Λ_N` are exact.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration and
//! parallel path execution live in the `sie-harness` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod initial;
pub mod lab;
pub mod noise;
pub mod spectral;
pub mod stepper;

pub use error::{Error, Result};
pub use initial::InitialCondition;
pub use lab::{
    exceedance_table, fit_order, observable_errors, pathwise_error_study, probability_order_study,
    run_path, ErrorReport, ExceedanceTable, FitOutcome, OrderFit, PathErrors, StudyConfig,
};
pub use noise::{build_spectrum, sample_brownian_table, w_increment_velocity, wcurl_increment};
pub use noise::{BrownianTable, NoiseSpectrum};
pub use spectral::{
    biot_savart, evaluate_on_grid, field_from_modes, galerkin_project, grid_to_spectral,
    pressure_from_velocity, transport_term, GridBuffer, ModeIndex, SpectralField,
    TransportOperator, VelocityField,
};
pub use stepper::{
    implicit_transport_solve, recover_observables, sie_step, simulate_path, SolverKind,
    StepperConfig, Trajectory,
};
