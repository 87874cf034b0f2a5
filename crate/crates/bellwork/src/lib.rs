//! Simulator and certification toolkit for XOR-game battery transduction.
//!
//! A referee plays a finite two-player XOR game against a correlation
//! resource. Each round, the winning condition routes one fuel excitation
//! into an explicit two-level battery through an energy-preserving
//! controlled SWAP, so the mean battery charge equals the game's success
//! probability times the battery gap. Local, quantum, and nonsignalling
//! game values then become battery-charge ceilings, and finite run data
//! certifies nonlocality or post-quantumness of the effective behaviour.
//!
//! Modules:
//! - [`games`]: XOR games, the CHSH and chained families, game values.
//! - [`behaviors`]: conditional-probability tables, standard boxes,
//!   success probabilities and CHSH values.
//! - [`transducer`]: round simulation, register-level energy bookkeeping,
//!   work records, enumeration oracles.
//! - [`ledger`]: cyclic bookkeeping with fuel restoration and memory
//!   reset costs.
//! - [`certifier`]: confidence bounds on the success probability and
//!   certificate verdicts, with readout-error correction.
//! - [`analysis`]: content bounds, battery monogamy, parameter sweeps.
//! - [`cli`]: the command implementations behind the `bellwork` binary.

pub mod analysis;
pub mod behaviors;
pub mod certifier;
pub mod cli;
pub mod error;
pub mod games;
pub mod ledger;
pub mod rng;
pub mod transducer;

pub use error::{Error, Result};
