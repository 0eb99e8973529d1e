//! Verdict-carrying numbers: exact rationals or float64, tagged with the
//! backend that produced them.

use std::cmp::Ordering;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

/// Numeric backend for walk and verification computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    /// Default choice: exact rationals while the per-step state is small,
    /// float64 with a 1e-10 guard band beyond.
    pub fn auto(n: usize) -> Backend {
        if n <= 64 {
            Backend::Exact
        } else {
            Backend::Float
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Exact => write!(f, "exact"),
            Backend::Float => write!(f, "float"),
        }
    }
}

/// A number produced by a verification step. Exact values serialize as
/// numerator/denominator strings so every verdict can be recomputed from the
/// report.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

impl Scalar {
    pub fn zero(backend: Backend) -> Scalar {
        match backend {
            Backend::Exact => Scalar::Exact(BigRational::zero()),
            Backend::Float => Scalar::Float(0.0),
        }
    }

    pub fn one() -> Scalar {
        Scalar::Exact(BigRational::one())
    }

    pub fn from_usize(v: usize) -> Scalar {
        Scalar::Exact(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Scalar {
        Scalar::Exact(BigRational::new(num.into(), den.into()))
    }

    /// Lift a finite f64 to the exact rational it represents.
    pub fn exact_from_f64(x: f64) -> Scalar {
        Scalar::Exact(rational_from_f64(x))
    }

    pub fn backend(&self) -> Backend {
        match self {
            Scalar::Exact(_) => Backend::Exact,
            Scalar::Float(_) => Backend::Float,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(x) => *x == 0.0,
        }
    }

    /// Total comparison, lifting floats to the rationals they represent so
    /// mixed comparisons stay exact. NaN compares as incomparable.
    pub fn cmp_value(&self, other: &Scalar) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Some(a.cmp(b)),
            (Scalar::Float(a), Scalar::Float(b)) => a.partial_cmp(b),
            (Scalar::Exact(a), Scalar::Float(b)) => {
                if b.is_nan() {
                    None
                } else {
                    Some(a.cmp(&rational_from_f64(*b)))
                }
            }
            (Scalar::Float(a), Scalar::Exact(b)) => {
                if a.is_nan() {
                    None
                } else {
                    Some(rational_from_f64(*a).cmp(b))
                }
            }
        }
    }

    pub fn lt(&self, other: &Scalar) -> bool {
        self.cmp_value(other) == Some(Ordering::Less)
    }

    pub fn le(&self, other: &Scalar) -> bool {
        matches!(
            self.cmp_value(other),
            Some(Ordering::Less) | Some(Ordering::Equal)
        )
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(x) => Scalar::Float(x.abs()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Scalar::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(r) => {
                let mut s = serializer.serialize_struct("Scalar", 3)?;
                s.serialize_field("num", &r.numer().to_string())?;
                s.serialize_field("den", &r.denom().to_string())?;
                s.serialize_field("approx", &r.to_f64().unwrap_or(f64::NAN))?;
                s.end()
            }
            Scalar::Float(x) => serializer.serialize_f64(*x),
        }
    }
}

/// Exact rational value of a finite f64.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite float required for exact comparison")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_comparison_is_exact() {
        // 0.25 is exactly representable; 1/4 as a rational must compare equal.
        let quarter = Scalar::from_ratio(1, 4);
        let f = Scalar::Float(0.25);
        assert_eq!(quarter.cmp_value(&f), Some(Ordering::Equal));
        assert!(!quarter.lt(&f));
        assert!(quarter.le(&f));
    }

    #[test]
    fn exact_strictness_at_ties() {
        // TV = 1/4 is NOT strictly below threshold 1/4.
        let tv = Scalar::from_ratio(1, 4);
        assert!(!tv.lt(&Scalar::Float(0.25)));
        assert!(Scalar::from_ratio(1, 5).lt(&Scalar::Float(0.25)));
    }

    #[test]
    fn serializes_num_den() {
        let s = serde_json::to_value(Scalar::from_ratio(2, 9)).unwrap();
        assert_eq!(s["num"], "2");
        assert_eq!(s["den"], "9");
    }
}
