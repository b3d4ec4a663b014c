//! Constructions of frequency-hopping sequence (FHS) sets with optimal
//! periodic Hamming correlation, together with the exhaustive machinery that
//! certifies them.
//!
//! * [`algebra`]: factorization, CRT, multiplicative orders, `GF(p^m)` tables.
//! * [`correlation`]: sequences, sets and the Hamming correlation engine.
//! * [`bounds`]: Lempel-Greenberger and Peng-Fan bounds, optimality verdicts.
//! * [`designs`]: difference packings, difference matrices, and the
//!   FHS set ↔ partition-type packing correspondence.
//! * [`constructions`]: direct and recursive constructions.
//! * [`format`]: JSON design files, reports and CSV export.

pub mod algebra;
pub mod bounds;
pub mod constructions;
pub mod correlation;
pub mod designs;
mod error;
pub mod format;

pub use error::{Error, Result};
