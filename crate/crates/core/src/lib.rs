//! Physics-informed network training on benchmark PDEs with known solutions.
//!
//! Input derivatives come from truncated Taylor jets pushed through the
//! network; parameter gradients come from a reverse sweep over a tape whose
//! nodes hold whole jet arrays. Everything here is `no_std` + `alloc`.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_op_in_unsafe_fn)]

extern crate alloc;

pub mod activation;
pub mod error;
pub mod fd;
pub mod jet;
pub mod losses;
pub mod models;
pub mod network;
pub mod pde;
pub mod sampling;
pub mod scalar;
pub mod tape;
pub mod training;

pub use activation::Activation;
pub use error::{Error, Result};
pub use jet::{lift_constant, lift_seed, Jet, MAX_ORDER};
pub use losses::{RiskFamily, RiskSpec};
pub use models::{ModelKind, PredictorModel};
pub use network::{InitScheme, NetSpec, ParamVector};
pub use pde::{DerivativeBundle, PdeProblem, ProblemKind};
pub use sampling::{SampleRole, SampleSet};
pub use tape::{JetArray, NodeId, Tape};
pub use training::{AdamState, Experiment, RunRecord, TrainConfig};
