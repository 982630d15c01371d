//! Memristive crossbar MLP with spintronic interface modules.
//!
//! Signed weights sit on a dual-column memristor crossbar. Each neuron's
//! column pair feeds a domain-wall interface module that converts the current
//! difference into the input of a CMOS sigmoid. The crate carries the device
//! models, the crossbar mapping, full-network inference, the component-level
//! power model and the offline training and data tooling around them.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod crossbar;
pub mod data;
pub mod error;
pub mod interface;
pub mod memristor;
pub mod network;
pub mod power;
pub mod spintronic;

pub use error::{Error, ErrorClass, Result};
