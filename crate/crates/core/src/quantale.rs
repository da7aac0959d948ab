//! Integral quantales with exact rational payloads.
//!
//! Four instances are supported. Boolean and Gödel use the numeric order on
//! their payload; Lawvere and ultrametric use the reversed numeric order, so
//! `0` is the top element and `inf` the bottom.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuantaleError {
    #[error("mixed quantale instances: {0} and {1}")]
    Mixed(QuantaleKind, QuantaleKind),
    #[error("cannot parse `{text}` as a {kind} value")]
    Parse { kind: QuantaleKind, text: String },
    #[error("value {value} out of range for {kind}")]
    Range { kind: QuantaleKind, value: String },
    #[error("approximants need n >= 1")]
    ZeroApproximants,
}

pub type Result<T> = std::result::Result<T, QuantaleError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantaleKind {
    Boolean,
    Lawvere,
    Ultrametric,
    Goedel,
}

impl QuantaleKind {
    pub const ALL: [QuantaleKind; 4] = [
        QuantaleKind::Boolean,
        QuantaleKind::Lawvere,
        QuantaleKind::Ultrametric,
        QuantaleKind::Goedel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QuantaleKind::Boolean => "boolean",
            QuantaleKind::Lawvere => "lawvere",
            QuantaleKind::Ultrametric => "ultrametric",
            QuantaleKind::Goedel => "goedel",
        }
    }

    fn reversed(self) -> bool {
        matches!(self, QuantaleKind::Lawvere | QuantaleKind::Ultrametric)
    }

    pub fn top(self) -> QValue {
        let v = if self.reversed() { Ext::zero() } else { Ext::one() };
        QValue { kind: self, v }
    }

    /// Unit of the tensor. Every instance is integral, so this is `top`.
    pub fn unit(self) -> QValue {
        self.top()
    }

    pub fn bottom(self) -> QValue {
        let v = if self.reversed() { Ext::Inf } else { Ext::zero() };
        QValue { kind: self, v }
    }

    fn check(self, a: &QValue) -> Result<()> {
        if a.kind == self {
            Ok(())
        } else {
            Err(QuantaleError::Mixed(self, a.kind))
        }
    }

    /// Least upper bound; the empty join is bottom.
    pub fn join<'a, I>(self, values: I) -> Result<QValue>
    where
        I: IntoIterator<Item = &'a QValue>,
    {
        let mut acc = self.bottom();
        for v in values {
            self.check(v)?;
            if acc.leq(v)? {
                acc = v.clone();
            }
        }
        Ok(acc)
    }

    /// Greatest lower bound; the empty meet is top.
    pub fn meet<'a, I>(self, values: I) -> Result<QValue>
    where
        I: IntoIterator<Item = &'a QValue>,
    {
        let mut acc = self.top();
        for v in values {
            self.check(v)?;
            if v.leq(&acc)? {
                acc = v.clone();
            }
        }
        Ok(acc)
    }

    pub fn tensor_all<'a, I>(self, values: I) -> Result<QValue>
    where
        I: IntoIterator<Item = &'a QValue>,
    {
        let mut acc = self.unit();
        for v in values {
            acc = acc.tensor(v)?;
        }
        Ok(acc)
    }

    /// Parses `true`/`false`, integers, decimals, fractions and `inf`.
    pub fn parse_value(self, text: &str) -> Result<QValue> {
        let t = text.trim();
        let err = || QuantaleError::Parse { kind: self, text: t.to_string() };
        let v = match t {
            "inf" | "∞" => Ext::Inf,
            "true" | "⊤" if self == QuantaleKind::Boolean => Ext::one(),
            "false" | "⊥" if self == QuantaleKind::Boolean => Ext::zero(),
            _ => Ext::Fin(parse_rational(t).ok_or_else(err)?),
        };
        QValue::new(self, v)
    }

    /// Samples `n` values way-below `q` that climb towards it.
    pub fn approximants(self, q: &QValue, n: usize) -> Result<Vec<QValue>> {
        self.check(q)?;
        if n == 0 {
            return Err(QuantaleError::ZeroApproximants);
        }
        let out = (1..=n)
            .map(|k| {
                let k = BigRational::from_integer(BigInt::from(k));
                let v = match (self, &q.v) {
                    (QuantaleKind::Boolean, _) | (_, Ext::Inf) => q.v.clone(),
                    (QuantaleKind::Lawvere | QuantaleKind::Ultrametric, Ext::Fin(x)) => {
                        Ext::Fin(x + k.recip())
                    }
                    (QuantaleKind::Goedel, Ext::Fin(x)) => {
                        // x * k/(k+1), strictly below x unless x = 0
                        let kk = &k / (&k + BigRational::one());
                        Ext::Fin(x * kk)
                    }
                };
                QValue { kind: self, v }
            })
            .collect();
        Ok(out)
    }
}

impl fmt::Display for QuantaleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuantaleKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "boolean" | "bool" => Ok(QuantaleKind::Boolean),
            "lawvere" | "metric" => Ok(QuantaleKind::Lawvere),
            "ultrametric" | "ultra" => Ok(QuantaleKind::Ultrametric),
            "goedel" | "godel" | "gödel" => Ok(QuantaleKind::Goedel),
            other => Err(format!("unknown quantale `{other}`")),
        }
    }
}

/// Integers, decimals and fractions, possibly negative.
pub fn parse_rational(t: &str) -> Option<BigRational> {
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let scale = num::pow(BigInt::from(10), frac.len());
        let frac_part: BigInt = frac.parse().ok()?;
        let mut num = int_part.abs() * &scale + frac_part;
        if neg {
            num = -num;
        }
        return Some(BigRational::new(num, scale));
    }
    let n: BigInt = t.parse().ok()?;
    Some(BigRational::from_integer(n))
}

/// A rational extended with a distinguished infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ext {
    Fin(BigRational),
    Inf,
}

impl Ext {
    pub fn zero() -> Ext {
        Ext::Fin(BigRational::zero())
    }
    pub fn one() -> Ext {
        Ext::Fin(BigRational::one())
    }
    pub fn int(n: i64) -> Ext {
        Ext::Fin(BigRational::from_integer(n.into()))
    }
    pub fn to_f64(&self) -> f64 {
        match self {
            Ext::Inf => f64::INFINITY,
            Ext::Fin(r) => rat_to_f64(r),
        }
    }
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ext {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Ext::Inf, Ext::Inf) => Ordering::Equal,
            (Ext::Inf, _) => Ordering::Greater,
            (_, Ext::Inf) => Ordering::Less,
            (Ext::Fin(a), Ext::Fin(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Inf => f.write_str("inf"),
            Ext::Fin(r) => write!(f, "{r}"),
        }
    }
}

/// An element of one of the quantale instances.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QValue {
    kind: QuantaleKind,
    v: Ext,
}

impl QValue {
    pub fn new(kind: QuantaleKind, v: Ext) -> Result<QValue> {
        let ok = match (&kind, &v) {
            (QuantaleKind::Boolean, Ext::Fin(r)) => r.is_zero() || r.is_one(),
            (QuantaleKind::Goedel, Ext::Fin(r)) => !r.is_negative() && *r <= BigRational::one(),
            (QuantaleKind::Lawvere | QuantaleKind::Ultrametric, Ext::Fin(r)) => !r.is_negative(),
            (QuantaleKind::Lawvere | QuantaleKind::Ultrametric, Ext::Inf) => true,
            _ => false,
        };
        if ok {
            Ok(QValue { kind, v })
        } else {
            Err(QuantaleError::Range { kind, value: v.to_string() })
        }
    }

    pub fn boolean(b: bool) -> QValue {
        QValue { kind: QuantaleKind::Boolean, v: if b { Ext::one() } else { Ext::zero() } }
    }

    pub fn lawvere(r: BigRational) -> Result<QValue> {
        QValue::new(QuantaleKind::Lawvere, Ext::Fin(r))
    }

    /// Lawvere value `n / d`. Panics on a negative or malformed fraction.
    pub fn lawvere_ratio(n: i64, d: i64) -> QValue {
        QValue::lawvere(BigRational::new(n.into(), d.into())).expect("nonnegative distance")
    }

    pub fn kind(&self) -> QuantaleKind {
        self.kind
    }

    pub fn payload(&self) -> &Ext {
        &self.v
    }

    pub fn is_top(&self) -> bool {
        *self == self.kind.top()
    }

    pub fn is_bottom(&self) -> bool {
        *self == self.kind.bottom()
    }

    pub fn to_f64(&self) -> f64 {
        self.v.to_f64()
    }

    fn same(&self, other: &QValue) -> Result<()> {
        if self.kind == other.kind {
            Ok(())
        } else {
            Err(QuantaleError::Mixed(self.kind, other.kind))
        }
    }

    pub fn tensor(&self, other: &QValue) -> Result<QValue> {
        self.same(other)?;
        let v = match self.kind {
            QuantaleKind::Boolean | QuantaleKind::Goedel => (&self.v).min(&other.v).clone(),
            QuantaleKind::Ultrametric => (&self.v).max(&other.v).clone(),
            QuantaleKind::Lawvere => match (&self.v, &other.v) {
                (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a + b),
                _ => Ext::Inf,
            },
        };
        Ok(QValue { kind: self.kind, v })
    }

    /// Quantale order: `self <= other`.
    pub fn leq(&self, other: &QValue) -> Result<bool> {
        self.same(other)?;
        Ok(if self.kind.reversed() { self.v >= other.v } else { self.v <= other.v })
    }

    pub fn way_below(&self, other: &QValue) -> Result<bool> {
        self.same(other)?;
        Ok(match self.kind {
            // finite lattice: every element is compact
            QuantaleKind::Boolean => self.v <= other.v,
            QuantaleKind::Lawvere | QuantaleKind::Ultrametric => {
                self.v > other.v || (self.v == Ext::Inf && other.v == Ext::Inf)
            }
            QuantaleKind::Goedel => {
                self.v < other.v || (self.v == Ext::zero() && other.v == Ext::zero())
            }
        })
    }
}

impl fmt::Display for QValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            QuantaleKind::Boolean => f.write_str(if self.v == Ext::one() { "true" } else { "false" }),
            _ => write!(f, "{}", self.v),
        }
    }
}
