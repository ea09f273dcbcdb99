//! Finitely supported operations on `ω×ω`, the clone generated by functions
//! whose images of width-1 sets stay small, and the constructions that
//! decompose and resynthesize operations relative to it.

pub mod algebra;
pub mod decompose;
pub mod ideal;
mod serde_util;
pub mod synth;
pub mod workbench;
