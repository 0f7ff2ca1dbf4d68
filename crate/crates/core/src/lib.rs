//! Geometry engine for Finsler-type gravity on tangent bundles.
//!
//! Modules build on each other: [`exprkit`] supplies expressions and jets,
//! [`finsler`] the metric and nonlinear-connection data, [`dconnection`] the
//! canonical connection and curvature, [`solver`] the shell equations and
//! their exact solutions, [`brane`] the trapping profiles, and [`hl`] the
//! Horava-Lifshitz ingredients.

pub mod exprkit;
pub mod finsler;
pub mod dconnection;
pub mod hl;
pub mod solver;
pub mod brane;
pub mod probes;
