//! Exact rearrangement-invariant computations on step functions, Calderón-type
//! operators, concrete operators on ℝⁿ, and numerical certificates for
//! endpoint lower-bound conditions.

pub mod calderon;
pub mod certify;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod exec;
pub mod measure;
pub mod norms;
pub mod operators;
pub mod quad;
pub mod report;

pub use calderon::{CalderonOp, SigmaTriple};
pub use certify::{BoundCertificate, CertifyConfig, ExtremalSequence, Verdict};
pub use error::{Error, Result};
pub use exec::Exec;
pub use measure::{DistributionFunction, LayerDecomposition, Piece, StepFunction};
pub use norms::{LorentzIndex, PhiFunction};
pub use operators::{IntervalUnion, OutputWindow, RadialFunction, RnOperator};
