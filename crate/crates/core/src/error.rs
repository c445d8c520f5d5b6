use thiserror::Error;

/// A single violated parameter invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub key: &'static str,
    pub value: f64,
    pub rule: &'static str,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} = {} violates {}", self.key, self.value, self.rule)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {what} = {value} ({rule})")]
    Domain {
        what: &'static str,
        value: f64,
        rule: &'static str,
    },

    #[error("invalid parameters: {}", join(.0))]
    InvalidParams(Vec<Violation>),

    #[error("objective for {which} is not unimodal: {sign_changes} derivative sign changes on the scan grid")]
    NonUnimodal {
        which: &'static str,
        sign_changes: usize,
    },

    #[error("{which} did not converge after {iterations} iterations (last iterate {last}, residual {residual})")]
    NotConverged {
        which: &'static str,
        iterations: usize,
        last: f64,
        residual: f64,
    },

    #[error("solver failed at k = {k}: {source}")]
    AtRatio {
        k: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<S: crate::Scalar>(what: &'static str, value: S, rule: &'static str) -> Error {
    Error::Domain {
        what,
        value: value.as_f64(),
        rule,
    }
}
