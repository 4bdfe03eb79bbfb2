//! Simulation and numerical verification for the K_alpha family of symmetric
//! Levy processes, whose jump measure is
//! `nu(dx) = dx / ((1 + |x|) ln^(1+alpha)(1 + |x|))` with `0 < alpha < 2`.
//!
//! - [`numerics`]: signed log-domain values and adaptive quadrature.
//! - [`measure`]: closed forms and quadratures of the measure, envelopes and
//!   the support classification.
//! - [`paths`]: seeded simulation of the large- and small-jump components.
//! - [`diagnostics`]: envelope exceedances, growth, moment and Pruitt scans.
//! - [`spaces`]: test functions, their seminorms and the white-noise pairing.
//! - [`cli`]: the `kalpha` command-line tool.

// Negated comparisons are used on purpose so that NaN fails domain checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod json;
pub mod measure;
pub mod numerics;
pub mod paths;
pub mod spaces;
