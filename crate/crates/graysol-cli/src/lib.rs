//! Experiment driver for the gray-soliton packet simulations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod experiment;
pub mod pipeline;
pub mod record;
