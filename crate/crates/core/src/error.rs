use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::sweep::LensMode;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented invariant.
    Invalid { field: String, reason: String },
    /// A function was evaluated outside its mathematical domain.
    Domain(&'static str),
    /// More users than access points: zero forcing has no solution.
    Infeasible { users: usize, aps: usize },
    /// The channel matrix is numerically rank deficient. `partner` is the user
    /// whose channel row is most nearly parallel, absent for an all-zero row.
    SingularChannel { user: usize, partner: Option<usize> },
    /// A failure inside a sweep, tagged with the point that triggered it.
    SweepPoint {
        waist: f64,
        lens: LensMode,
        seed: u64,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// The innermost error, with sweep coordinates stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::SweepPoint { source, .. } => source.root(),
            other => other,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid { field, reason } => write!(f, "invalid `{field}`: {reason}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Infeasible { users, aps } => write!(
                f,
                "zero forcing infeasible: {users} users but only {aps} access points"
            ),
            Error::SingularChannel {
                user,
                partner: Some(p),
            } => write!(
                f,
                "singular channel: rows of users {user} and {p} are linearly dependent"
            ),
            Error::SingularChannel {
                user,
                partner: None,
            } => write!(
                f,
                "singular channel: user {user} has an all-zero channel row"
            ),
            Error::SweepPoint {
                waist,
                lens,
                seed,
                source,
            } => write!(
                f,
                "at waist {waist:e} m, lens {lens}, seed {seed}: {source}"
            ),
        }
    }
}

impl core::error::Error for Error {}
