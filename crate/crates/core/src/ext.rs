//! Extended nonnegative reals.
//!
//! Divergences are infinite exactly when a support condition fails. That is a
//! semantic outcome, so it gets its own variant instead of a large float.

use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExtReal {
    Finite(f64),
    #[serde(with = "infinity_tag")]
    Infinite,
}

mod infinity_tag {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("+inf")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "+inf" {
            Ok(())
        } else {
            Err(serde::de::Error::custom("expected \"+inf\""))
        }
    }
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        !self.is_finite()
    }

    /// The value as an `f64`, mapping the sentinel to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    pub fn scale(self, factor: f64) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v * factor),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a.max(b)),
            _ => ExtReal::Infinite,
        }
    }

    /// Builds from an `f64`, mapping `+inf` to the sentinel.
    pub fn from_f64(v: f64) -> ExtReal {
        if v == f64::INFINITY {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(v)
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinite,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinite => f.write_str("+inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_absorbs_infinity() {
        assert_eq!(ExtReal::Finite(1.0) + ExtReal::Finite(2.0), ExtReal::Finite(3.0));
        assert_eq!(ExtReal::Finite(1.0) + ExtReal::Infinite, ExtReal::Infinite);
        assert!(ExtReal::Infinite > ExtReal::Finite(1e300));
        assert_eq!(ExtReal::Infinite.scale(0.5), ExtReal::Infinite);
    }

    #[test]
    fn serde_roundtrip() {
        let s = serde_json::to_string(&ExtReal::Infinite).unwrap();
        assert_eq!(s, "\"+inf\"");
        let back: ExtReal = serde_json::from_str(&s).unwrap();
        assert_eq!(back, ExtReal::Infinite);
        let back: ExtReal = serde_json::from_str("0.25").unwrap();
        assert_eq!(back, ExtReal::Finite(0.25));
    }
}
