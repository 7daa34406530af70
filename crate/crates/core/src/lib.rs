//! Certified two-sided brackets for matrix pressures of finitely supported
//! measures on square matrices, together with the p-radius, the affinity
//! dimension and the joint spectral radius derived from them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod affinity;
pub mod error;
pub mod jsr;
pub mod linalg;
pub mod logsum;
pub mod measure;
pub mod pressure;
pub mod rational;
pub mod svpressure;
pub mod words;

pub use affinity::{
    affinity_dimension, check_geq_d, solve_det_dimension, trisect_step, AffinityBranch, AffinityOptions,
    AffinityResult, StepOutcome,
};
pub use error::{BudgetLimit, Error, Result};
pub use jsr::{
    default_scan_grid, jsr_bracket, jsr_lower_bochi, jsr_upper, zero_temperature_scan, JsrBound, JsrBracket, MatrixSet,
    ScanRow, ZeroTemperatureScan,
};
pub use linalg::{
    binomial, exterior_power, kronecker, lift, operator_norm, phi, singular_values, spectral_radius, Matrix,
    SingularSpectrum,
};
pub use logsum::LogValue;
pub use measure::{hat_measure_2d, lifted_measure, restrict_invertible, scale_measure, Atom, FiniteMatrixMeasure};
pub use pressure::{
    detect_minus_infinity, estimate_m, lower_m, norm_constant, p_radius, upper_m, LowerBoundSource, PressureBracket,
    Status,
};
pub use rational::Rational;
pub use svpressure::{
    det_pressure, discontinuity_check_2d, estimate_p, estimate_p_rational, flight_params, k_tilde, lower_p_2d,
    lower_p_lift, upper_p, Continuity, ContinuityReport, LiftLimits, LiftSpec,
};
pub use words::{Engine, Kernel, LevelSums, WordBudget};
