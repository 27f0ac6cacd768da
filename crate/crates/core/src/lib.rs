//! Numerically exact dynamics of a two-level system coupled to a
//! high-temperature Drude bath and an Ornstein–Uhlenbeck stochastic field.
//!
//! The crate builds the hierarchical equations of motion for up to five
//! environment channels, propagates them with fixed-step RK4, extracts steady
//! states and emission spectra, and ships two independent references: a
//! Markovian Lindblad baseline and a Monte Carlo average over sampled noise
//! trajectories.
//!
//! Units: ħ = 1, all frequencies and rates in units of ω0.

pub mod error;
pub mod heom;
pub mod lindblad;
pub mod model;
pub mod operators;
pub mod oracle;
pub mod presets;
pub mod propagator;
pub mod spectrum;

pub use error::{HeomError, Result};
pub use heom::{AdmStack, ChannelCoeffs, HeomGenerator};
pub use model::{BathParams, FieldParams, NoiseLabel, OuProcess, SimConfig};
pub use operators::{CouplingMode, SuperOperator, TlsOperator};
pub use lindblad::{markovian_evolve, markovian_steady_state, MarkovParams, Picture};
pub use oracle::{mc_evolve, McConfig, McTrajectory};
pub use propagator::{evolve, steady_state, SteadyMethod, SteadyState, Trajectory};
pub use spectrum::{emission_spectrum, two_time_correlation, Spectrum, SpectrumConfig};
