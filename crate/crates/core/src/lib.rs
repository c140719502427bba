//! Density-induced consensus (DI) and Cucker-Smale-type flocking models.
//!
//! * [`dynamics`] — state, neighbor rules, forces, diagnostics.
//! * [`graph`] — interaction digraph, clusters, packing and the flocking certificate.
//! * [`integrate`] — staged RK4 with a topology delay, periodic domains, trajectories.
//! * [`scenarios`] — reference initial conditions and the three-body regime classifier.
//! * [`analytic`] — exact solution of the reduced three-body system.
//! * [`config`], [`output`], [`sweep`], [`verify`] — what the command-line tool is built from.

pub mod analytic;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod integrate;
pub mod output;
pub mod scenarios;
pub mod seed;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
