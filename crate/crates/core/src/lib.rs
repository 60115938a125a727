//! One-way acoustic wave propagation in stratified media.
//!
//! The crate factorizes the 2D constant-density acoustic system into
//! down-going and up-going fields coupled by a reflection operator, and sums
//! the coupled system as a Bremmer series. The transmission operator can sit
//! either inside the propagator (`epsilon = 1`) or on the right-hand side
//! (`epsilon = 0`). A fourth-order finite-difference solver of the full wave
//! equation provides the reference amplitudes used by the Q(x) comparison.
//!
//! Module map:
//!
//! * [`model`]: velocity models, grids, shot geometry and run configuration.
//! * [`spectral`]: Ricker source, time/space Fourier transforms, frequency window.
//! * [`symbols`]: vertical slowness, `P0` decomposition, interface symbols, propagators.
//! * [`bremmer`]: Bremmer-series engines and assembly of the recorded field.
//! * [`fullwave`]: explicit finite-difference reference solver.
//! * [`analysis`]: seismograms, Q(x) metric and file formats.
//! * [`config`]: run configuration files.
//! * [`cli`]: command implementations behind the `onewave` binary.

pub mod analysis;
pub mod bremmer;
pub mod cli;
pub mod config;
pub mod fullwave;
pub mod model;
pub mod spectral;
pub mod symbols;

pub use analysis::{QCurve, Provenance, Seismogram};
pub use bremmer::{OneWayResult, OneWaySolver};
pub use fullwave::{FdParams, FdSolver};
pub use config::Config;
pub use model::{Epsilon, Grid, Layer, RunConfig, RunPlan, ShotGeometry, VelocityModel};
pub use symbols::{Region, SlownessSample};
