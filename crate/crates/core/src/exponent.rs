//! Exponents in `[1, ∞]` used for L^p norms and ℓ^r distances.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exponent `p ∈ [1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);
    pub const TWO: Exponent = Exponent::Finite(2.0);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Exponent::Infinite)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidParameter(format!("exponent must lie in [1, inf], got {p}")))
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// `p` as a float, with `f64::INFINITY` for `∞`.
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// `n^{-1/p}`, with `n^{-1/∞} = 1`.
    pub fn inv_root(self, n: usize) -> f64 {
        match self {
            Exponent::Finite(p) => (n as f64).powf(-1.0 / p),
            Exponent::Infinite => 1.0,
        }
    }

    /// Weighted L^p norm of `values` against `weights`.
    ///
    /// For `p = ∞` the maximum is taken over entries with strictly positive weight.
    pub fn weighted_norm<I>(self, pairs: I) -> f64
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        match self {
            Exponent::Finite(p) => {
                let s: f64 = pairs.into_iter().map(|(w, v)| w * v.powf(p)).sum();
                s.max(0.0).powf(1.0 / p)
            }
            Exponent::Infinite => pairs
                .into_iter()
                .filter(|&(w, _)| w > 0.0)
                .fold(0.0, |acc, (_, v)| acc.max(v)),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent '{s}'")))?;
                Exponent::new(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ExpVisitor;

        impl Visitor<'_> for ExpVisitor {
            type Value = Exponent;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number >= 1 or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exponent, E> {
                Exponent::new(v).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exponent, E> {
                v.parse().map_err(E::custom)
            }
        }

        d.deserialize_any(ExpVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinite);
        assert_eq!("2".parse::<Exponent>().unwrap(), Exponent::TWO);
        assert!("0.5".parse::<Exponent>().is_err());
        assert!(Exponent::new(f64::NAN).is_err());
    }

    #[test]
    fn weighted_norm_inf_ignores_zero_weight() {
        let v = Exponent::Infinite.weighted_norm([(0.0, 10.0), (0.5, 1.0), (0.5, 2.0)]);
        assert_eq!(v, 2.0);
        let v = Exponent::ONE.weighted_norm([(0.25, 2.0), (0.75, 0.0)]);
        assert_eq!(v, 0.5);
    }

    #[test]
    fn json_round_trip() {
        let s = serde_json::to_string(&Exponent::Infinite).unwrap();
        assert_eq!(s, "\"inf\"");
        let e: Exponent = serde_json::from_str("3").unwrap();
        assert_eq!(e, Exponent::Finite(3.0));
    }
}
