//! Monte Carlo framework for an adversarial reconfigurable intelligent surface
//! (RIS) that inserts a reciprocal "deceiving" channel between two parties
//! running physical-layer secret key generation, and then reconstructs their
//! key from its own compressed-sensing channel probes.
//!
//! The crate is organised bottom-up:
//!
//! - [`config`], [`geometry`], [`channel`]: scenario description, planar-array
//!   steering vectors and channel sampling.
//! - [`ris`]: the RIS phase state, the deceiving channel and its analytic
//!   statistics, including a matrix-free form of the variance operator.
//! - [`skg`]: CSI-based and two-way cross-multiplication key generation,
//!   the two-threshold quantizer and key agreement metrics.
//! - [`sensing`]: beamspace dictionary, greedy sensor placement, OMP and the
//!   two attack reconstructions.
//! - [`phase_opt`]: projected-gradient maximisation of the deceiving-channel
//!   variance under per-element power constraints.
//! - [`theory`]: the closed-form key-match-rate integral and its properties.
//! - [`baseline`]: untrusted relay and pilot-spoofing attackers.
//! - [`harness`]: experiment presets, the Monte Carlo engine and CSV output.
//!
//! Runnable walkthroughs of each capability live under `examples/`.

pub mod baseline;
pub mod channel;
pub mod config;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod phase_opt;
pub mod ris;
pub mod rng;
pub mod sensing;
pub mod skg;
pub mod theory;

pub use num_complex::Complex64;

pub use config::ScenarioConfig;
pub use error::{Error, Result};
