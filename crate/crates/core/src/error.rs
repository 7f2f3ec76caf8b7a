use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {0} does not lie in the Cantor set")]
    NotInCantorSet(String),

    #[error("invalid lambda rule: {0}")]
    InvalidLambda(String),

    #[error("atom at {atom} lies on the loop")]
    AtomOnBoundary { atom: String },

    #[error("evaluation point coincides with the atom at {0}")]
    Pole(String),

    #[error("path too short: {0}")]
    DegeneratePath(String),

    #[error("quadrature did not converge: estimate {estimate:e} after {intervals} intervals")]
    QuadratureDiverged { estimate: f64, intervals: usize },

    #[error("{x} is not a certified good point: {reason}")]
    NotGood { x: String, reason: String },

    #[error("crossing at {x} meets the real axis at {angle_deg:.2} degrees (minimum {min_deg})")]
    NotTransversal { x: String, angle_deg: f64, min_deg: f64 },

    #[error("path touches the Cantor set away from its declared crossings near {0}")]
    UndeclaredCrossing(String),

    #[error("fiber points lie over different bases {0} and {1}")]
    BaseMismatch(String, String),

    #[error("Borel extension did not settle: last difference {last_diff:e} at depth {depth}")]
    NotCauchy { last_diff: f64, depth: usize },

    #[error("repeated pole at {0}")]
    RepeatedPole(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("image encoding failed: {0}")]
    Image(String),
}

impl Error {
    pub(crate) fn not_good(x: &Rational, reason: impl Into<String>) -> Self {
        Error::NotGood {
            x: crate::rational::fmt_ratio(x),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
