// SPDX-License-Identifier: Apache-2.0

use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("space mismatch: {0}")]
    SpaceMismatch(&'static str),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("adjacency relation is empty")]
    EmptyRelation,
    #[error("utility has zero sensitivity but epsilon > 0")]
    DegenerateUtility,
    #[error("input {0} has an empty output ball")]
    EmptyBall(usize),
    #[error("instance too large for exact enumeration: {tuples} tuples (limit {limit})")]
    InstanceTooLarge { tuples: u128, limit: u128 },
    #[error("too few samples: {given} (need at least {min})")]
    TooFewSamples { given: usize, min: usize },
    #[error("incompatible privacy reports: {0}")]
    IncompatibleReports(&'static str),
    #[error("cannot compose an unbounded privacy report")]
    UnboundedComposition,
    #[error("distribution pair is not in the lifted relation")]
    NotInLiftedRelation,
    #[error("no event R satisfies the mass condition for this delta")]
    NoAdmissibleEvent,
    #[error("no records with attribute `{attribute}` = {value}")]
    EmptyAttributeSide { attribute: String, value: bool },
    #[error("invalid region geometry: {0}")]
    InvalidGeometry(String),
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
