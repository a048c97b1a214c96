//! Certified decision procedures: exact univariate sign decisions and
//! interval branch-and-prune over boxes, both with replayable certificates.

pub mod expr;
pub mod poly;
pub mod search;
pub mod univariate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use expr::{EvalOptions, ExprBuilder, ExprDag, E};
pub use poly::{Poly, RatFunc};
pub use search::{
    exclude_common_zero, prove_on_box, replay_certificate, replay_exclusion, BoxCertificate,
    BoxVerdict, BoxWitness, CertStep, ExclusionCertificate, ExclusionVerdict, Relation,
    SearchConfig, SearchStats, ZeroWitness,
};
pub use univariate::{
    prove_univariate, replay_univariate, Strictness, UniCertificate, UniMethod, UniRange,
    UniVerdict, UniWitness,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolverError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Uninhabited: marks verdicts that cannot be `Unknown`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Never {}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "snake_case")]
pub enum Verdict<C, W, S> {
    Holds(C),
    Fails(W),
    Unknown(S),
}

impl<C, W, S> Verdict<C, W, S> {
    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds(_))
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds(_) => "holds",
            Verdict::Fails(_) => "fails",
            Verdict::Unknown(_) => "unknown",
        }
    }

    pub fn certificate(&self) -> Option<&C> {
        match self {
            Verdict::Holds(c) => Some(c),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Fails(w) => Some(w),
            _ => None,
        }
    }

    pub fn stats(&self) -> Option<&S> {
        match self {
            Verdict::Unknown(s) => Some(s),
            _ => None,
        }
    }
}
