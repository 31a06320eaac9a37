//! Simulator for a dual knowledge architecture on spiking networks: a
//! reliable symbolic sequence machine, a stochastic intuitive concept
//! network, a lexicon bridging symbols to both, working-memory role binding,
//! and an incremental template parser, all running on one round-synchronous
//! engine.

pub mod error;
pub mod fixtures;
pub mod iks;
pub mod lexicon;
pub mod parser;
pub mod scalar;
pub mod seq;
pub mod snn;
pub mod specfile;
pub mod wm;

pub use error::{Error, Inequality, Result};
pub use scalar::{logistic, Scalar};

/// Default RNG seed used by the command-line tools when none is given.
pub const DEFAULT_SEED: u64 = 0x5eed_0001;

/// Concrete f64 aliases for the common case.
pub type Network = snn::Network<f64>;
pub type NeuronSpec = snn::NeuronSpec<f64>;
pub type Edge = snn::Edge<f64>;
pub type ExternalSignal = snn::ExternalSignal<f64>;
pub type ResidualConfig = snn::ResidualConfig<f64>;
pub type Simulation = snn::Simulation<f64>;
pub type ConceptGraph = iks::ConceptGraph<f64>;
pub type LearningConfig = iks::LearningConfig<f64>;
