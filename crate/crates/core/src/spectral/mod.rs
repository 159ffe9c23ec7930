//! Truncated Fourier representation of mean-zero periodic fields and the spatial
//! operators acting on them.

mod fft;
mod field;
mod grid;
mod mode;
mod pressure;
mod transport;
mod velocity;

pub use fft::Fft2;
pub use field::{field_from_modes, galerkin_project, SpectralField};
pub use grid::{dealias_grid_size, evaluate_on_grid, grid_to_spectral, GridBuffer};
pub use mode::{ModeIndex, Modes};
pub use pressure::pressure_from_velocity;
pub use transport::{transport_term, TransportOperator};
pub use velocity::{biot_savart, VelocityField};

/// `2π`, the wavenumber scale of the unit torus.
pub const TWO_PI: f64 = 2.0 * core::f64::consts::PI;
