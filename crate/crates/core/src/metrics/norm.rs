use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Schatten exponent p in [1, inf].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct NormSpec {
    p: f64,
}

impl NormSpec {
    pub const TRACE: NormSpec = NormSpec { p: 1.0 };
    pub const FROBENIUS: NormSpec = NormSpec { p: 2.0 };
    pub const OPERATOR: NormSpec = NormSpec { p: f64::INFINITY };

    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 {
            Ok(NormSpec { p })
        } else {
            Err(Error::param(format!("Schatten exponent must be >= 1, got {p}")))
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_operator(&self) -> bool {
        self.p.is_infinite()
    }

    /// l_p norm of the absolute values, scaled by the largest entry to avoid
    /// overflow for large p.
    pub fn lp(&self, values: impl Iterator<Item = f64>) -> f64 {
        let v: Vec<f64> = values.map(f64::abs).collect();
        let max = v.iter().cloned().fold(0.0, f64::max);
        if self.p.is_infinite() || max == 0.0 {
            return max;
        }
        if self.p == 1.0 {
            return v.iter().sum();
        }
        let s: f64 = v.iter().map(|x| (x / max).powf(self.p)).sum();
        max * s.powf(1.0 / self.p)
    }

    /// `n^(1/p)`, the norm of an n by n unitary.
    pub fn identity_norm(&self, n: usize) -> f64 {
        if self.p.is_infinite() {
            1.0
        } else {
            (n as f64).powf(1.0 / self.p)
        }
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.p)
        }
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "op" | "operator" => Ok(NormSpec::OPERATOR),
            "trace" => Ok(NormSpec::TRACE),
            "fro" | "frobenius" => Ok(NormSpec::FROBENIUS),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::param(format!("cannot parse norm exponent '{s}'")))
                .and_then(NormSpec::new),
        }
    }
}

impl Serialize for NormSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.p)
        }
    }
}

impl<'de> Deserialize<'de> for NormSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => NormSpec::new(p),
            Raw::Text(t) => t.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Extrinsic,
    Intrinsic,
}
