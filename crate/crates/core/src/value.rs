//! Report values that are either finite numbers or one of a few explicit flags.

use serde::{Serialize, Serializer};

/// A reported quantity: a finite number, or a flag when no finite value applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    /// A finite real number.
    Finite(f64),
    /// Positive infinity.
    Infinity,
    /// Not determined by the theory implemented here.
    Unknown,
    /// Not defined for this input.
    Undefined,
}

impl Value {
    /// Wraps a number, mapping non-finite inputs to flags.
    pub fn from_f64(x: f64) -> Value {
        if x.is_finite() {
            Value::Finite(x)
        } else if x == f64::INFINITY {
            Value::Infinity
        } else {
            Value::Undefined
        }
    }

    /// The number, if finite.
    pub fn finite(self) -> Option<f64> {
        match self {
            Value::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// The string used for a flag, or `None` for finite numbers.
    pub fn flag(self) -> Option<&'static str> {
        match self {
            Value::Finite(_) => None,
            Value::Infinity => Some("infinity"),
            Value::Unknown => Some("unknown"),
            Value::Undefined => Some("undefined"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Finite(x) => s.serialize_f64(*x),
            other => s.serialize_str(other.flag().expect("flag variant")),
        }
    }
}
