use thiserror::Error;

use crate::geom::{KeyOrder, ObjectId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("key ({}, {}) is already stored", .0.coord, .0.tiebreak)]
    DuplicateKey(KeyOrder),
    #[error("key ({}, {}) is not stored", .0.coord, .0.tiebreak)]
    KeyNotFound(KeyOrder),
    #[error("object {0} is already present")]
    DuplicateId(ObjectId),
    #[error("object {0} is not present")]
    UnknownId(ObjectId),
    #[error("rectangle {0} is not anchored at the origin")]
    NotAnchored(ObjectId),
    #[error("rectangle {0} does not contain the common point")]
    PinNotContained(ObjectId),
    #[error("rectangle {id} has sides {width} x {height}, outside [1, {c}]")]
    SizeOutOfRange {
        id: ObjectId,
        width: f64,
        height: f64,
        c: f64,
    },
    #[error("rectangle {id} has a coordinate outside the integer universe 0..{universe}")]
    CoordinateOutOfUniverse { id: ObjectId, universe: u64 },
    #[error("point {0} is not present")]
    UnknownPoint(ObjectId),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
