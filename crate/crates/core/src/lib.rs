//! Local-global solubility over Q with exact arithmetic: Hilbert symbols,
//! conics, p-adic points, height search and Brauer-Manin certificates.

#![allow(clippy::int_plus_one)]

pub mod arith;
pub mod bm;
pub mod certificate;
pub mod conic;
pub mod error;
pub mod padic;
mod plan;
pub mod poly;
pub mod quaternion;
pub mod registry;
pub mod search;
pub mod symbols;
mod text;
