//! Derivative orders extended with a bottom element.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An integer order or `-inf`.
///
/// `NegInf` compares below every finite value and absorbs addition, so it
/// never leaks into arithmetic the way a sentinel integer would.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    NegInf,
    Finite(i64),
}

impl Order {
    pub const ZERO: Order = Order::Finite(0);

    pub fn is_finite(self) -> bool {
        matches!(self, Order::Finite(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Order::Finite(k) => Some(k),
            Order::NegInf => None,
        }
    }

    /// Shift by an integer; `-inf` stays `-inf`.
    pub fn shift(self, by: i64) -> Order {
        match self {
            Order::Finite(k) => Order::Finite(k + by),
            Order::NegInf => Order::NegInf,
        }
    }

    /// Sum of two orders, `-inf` absorbing.
    pub fn plus(self, other: Order) -> Order {
        match (self, other) {
            (Order::Finite(a), Order::Finite(b)) => Order::Finite(a + b),
            _ => Order::NegInf,
        }
    }
}

impl PartialOrd for Order {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Order {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Order::NegInf, Order::NegInf) => Ordering::Equal,
            (Order::NegInf, _) => Ordering::Less,
            (_, Order::NegInf) => Ordering::Greater,
            (Order::Finite(a), Order::Finite(b)) => a.cmp(b),
        }
    }
}

impl From<i64> for Order {
    fn from(k: i64) -> Self {
        Order::Finite(k)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::NegInf => f.pad("-inf"),
            Order::Finite(k) => f.pad(&k.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid order literal `{0}` (expected an integer or `-inf`)")]
pub struct ParseOrderError(pub String);

impl FromStr for Order {
    type Err = ParseOrderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "-inf" {
            return Ok(Order::NegInf);
        }
        s.parse::<i64>()
            .map(Order::Finite)
            .map_err(|_| ParseOrderError(s.to_string()))
    }
}

// Finite orders are JSON numbers, the bottom element is the string "-inf".
impl Serialize for Order {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Order::Finite(k) => serializer.serialize_i64(*k),
            Order::NegInf => serializer.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(k) => Ok(Order::Finite(k)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
