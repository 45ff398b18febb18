//! Exact-arithmetic construction of key polynomials and inductive valuation
//! chains for simple extensions of Q under p-adic valuations.
//!
//! The pipeline: a [`padic::BranchOracle`] fixes one p-adic branch of a monic
//! minimal polynomial and evaluates the induced valuation through resultants;
//! [`approx::analyze`] builds the chain of key polynomials level by level from
//! residual factorizations, classifies every key degree, and
//! [`approx::value_adaptive`] computes values of arbitrary polynomials with
//! the two-consecutive-agreements stopping rule at an immediate degree.
//! Everything is exact: rationals never degrade to floats.

pub mod approx;
pub mod exactnum;
pub mod keyval;
pub mod padic;
pub mod polyring;
pub mod residue;
pub mod selftest;

pub use approx::{analyze, value_adaptive, AnalysisReport, AnalyzeOptions, DegreeKind};
pub use exactnum::{ExtendedValue, Rational, ValueGroup};
pub use keyval::{ChainContext, ValuationChain};
pub use padic::{hensel_factor, hensel_root, vp, BranchOracle, PrecisionPolicy};
pub use polyring::{parse_poly, resultant, Poly};
pub use residue::{FFElem, FFPoly, FiniteField};
