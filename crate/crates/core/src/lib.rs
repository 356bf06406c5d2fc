//! Fuel-bounded workbench for Solovay reducibility and its monotone, total
//! and real-valued variants.
//!
//! Every partial search in this crate runs under an explicit [`kernel::Budget`]
//! and distinguishes "ran out of fuel" from "failed".

pub mod kernel;
pub mod type2;
pub mod witnesses;
pub mod constructions;
pub mod randomness;
pub mod pipeline;
pub mod scenario;
