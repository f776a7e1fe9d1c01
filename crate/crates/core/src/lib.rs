//! Conformal curvature, tractor calculus and conformally-Einstein
//! obstructions for metrics given by coordinate expressions.
//!
//! Every derivative is propagated exactly through truncated Taylor jets, so
//! residuals that vanish mathematically come out at roundoff level.

pub mod chart;
pub mod curvature;
pub mod expr;
pub mod jet;
pub mod linalg;
pub mod obstruction;
pub mod scales;
pub mod tensor;
pub mod tractor;
