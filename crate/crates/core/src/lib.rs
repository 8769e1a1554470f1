//! Simulation and analysis of a three-step split-step photonic quantum walk
//! that realizes a qubit SIC-POVM on the polarization coin.
//!
//! - [`coin`], [`state`]: two-level primitives and sparse walker states.
//! - [`walk`], [`schedule_io`]: exact evolution under site-dependent coins.
//! - [`povm`]: Kraus operators and POVM elements induced by position readout.
//! - [`waveplate`]: HWP/QWP Jones matrices and angle solvers.
//! - [`experiment`]: visibility loss, plate jitter, shot noise, bootstrap.
//! - [`tomography`]: linear-inversion and maximum-likelihood reconstruction.
//! - [`verify`]: the reference checks against the embedded [`reference`] fixtures.

pub mod coin;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod povm;
pub mod random;
pub mod reference;
pub mod schedule_io;
pub mod state;
pub mod tomography;
pub mod verify;
pub mod walk;
pub mod waveplate;

pub use coin::{initial_state, inner, sic_vector, CoinOperator, CoinVector, C64};
pub use error::{Error, Result};
pub use exec::Execution;
pub use state::WalkerState;
pub use walk::{evolve, position_distribution, SubStep, WalkSchedule};
