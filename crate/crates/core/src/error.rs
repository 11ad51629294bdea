use thiserror::Error;

/// Failure modes shared by every verification routine.
///
/// A mathematical mismatch is *not* an error: verifiers report it through a
/// failing [`Certificate`](crate::report::Certificate). Errors are reserved for
/// inputs outside an operation's domain, exhausted budgets and internal
/// inconsistencies that indicate a bug in a counting routine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("pole: {0}")]
    Pole(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// A budget ran out while collecting Frobenius orbits; `partial` holds
    /// what was found, with `complete == false`.
    #[error("resource limit: {reason}")]
    IncompleteOrbits { reason: String, partial: Box<crate::elliptic::TorsionOrbitSet> },
}

impl Error {
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::Resource(_) | Error::IncompleteOrbits { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn resource(msg: impl Into<String>) -> Error {
    Error::Resource(msg.into())
}

pub(crate) fn inconsistency(msg: impl Into<String>) -> Error {
    Error::Inconsistency(msg.into())
}
