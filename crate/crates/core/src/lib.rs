//! Exact toric engine for 3-fold divisorial contractions to terminal toric
//! singularities.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: big integers, rationals, lattice vectors, Smith normal form.
//! * [`fan`]: cones, fans, weighted blow-up rays, star subdivision, star surfaces.
//! * [`quotient`]: cyclic quotient types, normal forms, Reid–Tai classification.
//! * [`discrepancy`]: toric (log) discrepancies of monomial boundaries.
//! * [`surface`]: intersection theory on the exceptional surface.
//! * [`classifier`]: contraction types, condition checks and full reports.
//! * [`verify`]: the reproduction checklist used by the command-line tool.

pub mod arith;
pub mod classifier;
pub mod discrepancy;
pub mod fan;
pub mod quotient;
pub mod surface;
pub mod verify;

pub use arith::{Int, IntegerMatrix, LatticeVector, Rational, SmithForm};
pub use classifier::{ContractionReport, ContractionType, GermSpec};
pub use discrepancy::{MonomialBranch, MonomialDivisorSpec};
pub use fan::{Cone, Fan, StarSurface};
pub use quotient::{CyclicQuotientType, ReidTai};
pub use surface::{DivisorClass, SurfaceModel};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero vector has no primitive representative")]
    ZeroVector,
    #[error("degenerate cone")]
    DegenerateCone,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("inadmissible weights: {0}")]
    InadmissibleWeights(String),
    #[error("vector {0} lies outside the support of the fan")]
    OutsideSupport(String),
    #[error("{0} is not a ray of the fan")]
    NotARay(String),
    #[error("weights not of toric blow-up form: {0}")]
    NotToricBlowupForm(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("condition B fails: exponents are not quasihomogeneous ({0})")]
    NotQuasihomogeneous(String),
    #[error("lemma hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
