//! Verification and discovery engine for infinite series whose summands carry
//! binomial-coefficient kernels.

pub mod catalog;
pub mod constants;
pub mod duality;
pub mod evaluator;
pub mod exactnum;
pub mod kernels;
pub mod precision;
pub mod relation;
pub mod seriesmodel;
pub mod syntax;
pub mod telescope;
