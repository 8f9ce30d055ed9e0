//! Synthesis of long-term, continuous hourly generation profiles.
//!
//! Historical hourly output is sliced into conditioned daily shapes
//! ([`data`]), a GAN is trained on them ([`gan`], built on the small dense
//! network engine in [`nn`]), and full 8760/8784-hour years are assembled by
//! chaining generated days and scaling them to a forecast energy
//! ([`synthesis`]). Random forced outages can be layered on top ([`outage`])
//! and results are scored against history and two traditional baselines
//! ([`metrics`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod gan;
pub mod metrics;
pub mod nn;
pub mod outage;
pub mod par;
pub mod rng;
pub mod store;
pub mod synthesis;
pub mod synthetic;

pub use error::{Error, Result};
