//! Extended real numbers for interval endpoints and sup/inf conventions.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A value in `[-inf, +inf]`.
///
/// Infinite endpoints are tagged variants; a `Finite` value is never
/// infinite or NaN.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    /// Wraps a float, mapping `±f64::INFINITY` to the tagged variants.
    ///
    /// Returns `None` for NaN.
    pub fn from_f64(x: f64) -> Option<Self> {
        if x.is_nan() {
            None
        } else if x == f64::INFINITY {
            Some(ExtReal::PosInf)
        } else if x == f64::NEG_INFINITY {
            Some(ExtReal::NegInf)
        } else {
            Some(ExtReal::Finite(x))
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Lossy conversion used only for arithmetic on already-checked values.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// `1/x` with `1/0 = +inf` and `1/(+inf) = 0`; only meaningful on `[0, +inf]`.
    pub fn recip_nonneg(self) -> Option<Self> {
        match self {
            ExtReal::PosInf => Some(ExtReal::Finite(0.0)),
            ExtReal::Finite(0.0) => Some(ExtReal::PosInf),
            ExtReal::Finite(x) if x > 0.0 => Some(ExtReal::Finite(1.0 / x)),
            _ => None,
        }
    }

    /// `true` when `lo < x < hi` holds in the extended order.
    pub fn open_contains(lo: Self, hi: Self, x: f64) -> bool {
        let x = ExtReal::Finite(x);
        lo < x && x < hi
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x).expect("NaN is not an extended real")
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtReal::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Some(Ordering::Equal),
            (NegInf, _) | (_, PosInf) => Some(Ordering::Less),
            (_, NegInf) | (PosInf, _) => Some(Ordering::Greater),
            (Finite(a), Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::PosInf => f.write_str("+inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
        }
    }
}

// JSON form: a number, or one of the strings "-inf" / "+inf" / "inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::NegInf => s.serialize_str("-inf"),
            ExtReal::PosInf => s.serialize_str("+inf"),
            ExtReal::Finite(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ExtVisitor;

        impl Visitor<'_> for ExtVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"-inf\", \"+inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                ExtReal::from_f64(v).ok_or_else(|| E::custom("NaN is not an extended real"))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
                match v.trim() {
                    "-inf" | "-infinity" => Ok(ExtReal::NegInf),
                    "+inf" | "inf" | "+infinity" | "infinity" => Ok(ExtReal::PosInf),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        d.deserialize_any(ExtVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_infinities_at_the_ends() {
        assert!(ExtReal::NegInf < ExtReal::Finite(-1e300));
        assert!(ExtReal::Finite(1e300) < ExtReal::PosInf);
        assert!(ExtReal::Finite(1.0) < ExtReal::Finite(2.0));
        assert_eq!(ExtReal::NegInf.max(ExtReal::Finite(0.0)), ExtReal::Finite(0.0));
        assert_eq!(ExtReal::PosInf.min(ExtReal::Finite(3.0)), ExtReal::Finite(3.0));
    }

    #[test]
    fn reciprocal_maps_interval_ends() {
        assert_eq!(ExtReal::PosInf.recip_nonneg(), Some(ExtReal::Finite(0.0)));
        assert_eq!(ExtReal::Finite(0.0).recip_nonneg(), Some(ExtReal::PosInf));
        assert_eq!(ExtReal::Finite(4.0).recip_nonneg(), Some(ExtReal::Finite(0.25)));
        assert_eq!(ExtReal::Finite(-1.0).recip_nonneg(), None);
    }

    #[test]
    fn json_round_trip() {
        let xs = vec![ExtReal::NegInf, ExtReal::Finite(1.5), ExtReal::PosInf];
        let s = serde_json::to_string(&xs).unwrap();
        assert_eq!(s, r#"["-inf",1.5,"+inf"]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, xs);
        let a: ExtReal = serde_json::from_str("0").unwrap();
        assert_eq!(a, ExtReal::Finite(0.0));
    }
}
