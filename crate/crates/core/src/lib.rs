//! Exact simulation and analysis of controlled dense coding over small
//! entangled channels.
//!
//! The crate has four layers:
//!
//! - [`statevector`]: dense complex amplitudes over a few qubits, with
//!   unitary application, rotated-basis projective measurement, and Bell
//!   measurement. Qubit 1 is the most significant index bit.
//! - [`protocol`]: channel construction, the controllers' measurement
//!   rounds, entanglement concentration by local filtering, channel
//!   capacity, dense-coding encode/decode, and a seeded Monte-Carlo check.
//! - [`analysis`]: brute-force verification of structural claims: which
//!   sender/receiver pairs admit dense coding, branch-tree enumeration, and
//!   capacity sweeps over the measurement angles.
//! - [`cli`] and [`report`]: a command-line front end with deterministic
//!   JSON/CSV/pretty reports.

pub mod analysis;
pub mod cli;
pub mod protocol;
pub mod report;
pub mod statevector;

pub use num_complex::Complex64;

pub use protocol::{
    build_channel, capacity, concentrate, decode, encode, filter_params, filter_unitary,
    ghz_channel, monte_carlo, pair_coefficients, run_protocol, BranchPolicy, CapacityReport,
    Channel, ChannelSpec, ConcentrationResult, EmpiricalReport, FilterParams, GhzChannelSpec,
    MeasurementPlan, Message, ProtocolError, ProtocolReport, Support,
};
pub use statevector::{
    BellOutcome, OneQubitUnitary, Outcome, RotatedBasis, StateError, StateVector, TwoQubitUnitary,
};
