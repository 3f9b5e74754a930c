//! Numerical laboratory for the thin-film equation `∂_t u = −∇·(uⁿ∇Δu)`
//! on a periodic grid, with the local regularity diagnostics used to study
//! Hölder continuity of its solutions.

pub mod diagnostics;
pub mod grid;
pub mod io;
pub mod regularity;
pub mod solver;
pub mod validation;
