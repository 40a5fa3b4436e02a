use std::fmt;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// Requested pairwise or chain expectations admit no joint distribution.
    #[error("infeasible{}: {reason}", OptIndex(*.index))]
    Infeasible {
        index: Option<usize>,
        reason: String,
    },

    /// The system breaks range or pair bounds in one or more bunches.
    #[error("invalid system: {}", ViolationList(.0))]
    InvalidSystem(Vec<Violation>),

    #[error("malformed coupling: {0}")]
    MalformedCoupling(String),

    /// Structural problem in an input document.
    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    /// The exact oracle refuses systems larger than its configured limit.
    #[error("n = {n} exceeds the oracle limit of {limit}")]
    Resource { n: usize, limit: usize },

    /// The simplex solver reached a state that valid input cannot produce.
    #[error("internal solver error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            location: location.into(),
            message: message.into(),
        }
    }
}

struct OptIndex(Option<usize>);

impl fmt::Display for OptIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(i) => write!(f, " at index {i}"),
            None => Ok(()),
        }
    }
}

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
