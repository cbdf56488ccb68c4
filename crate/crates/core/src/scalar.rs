//! Arithmetic backends.
//!
//! Every numerically sensitive routine is written against [`Scalar`] and
//! instantiated either with machine `f64` or with [`Ext`], a multiprecision
//! float whose working precision is set process-wide (192 bits, about 57
//! significant decimal digits, unless changed with
//! [`set_extended_precision_bits`]).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

static EXT_BITS: AtomicU32 = AtomicU32::new(192);

/// Working precision, in bits, used by [`Ext`] values created from now on.
pub fn extended_precision_bits() -> u32 {
    EXT_BITS.load(AtomicOrdering::Relaxed)
}

/// Changes the extended working precision. Values below 64 bits are clamped.
pub fn set_extended_precision_bits(bits: u32) {
    EXT_BITS.store(bits.max(64), AtomicOrdering::Relaxed);
}

/// Arithmetic mode requested by a caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// IEEE double precision.
    Standard,
    /// Multiprecision floats at [`extended_precision_bits`].
    Extended,
    /// Pick per computation with a [`PrecisionPolicy`].
    #[default]
    Auto,
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "standard" | "double" => Ok(Precision::Standard),
            "extended" => Ok(Precision::Extended),
            "auto" => Ok(Precision::Auto),
            other => Err(format!("unsupported precision mode `{other}`")),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::Standard => "standard",
            Precision::Extended => "extended",
            Precision::Auto => "auto",
        })
    }
}

/// Thresholds that switch `Precision::Auto` to extended arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    /// Divided differences of at least this order go extended.
    pub order_threshold: usize,
    /// Node sets whose closest pair is nearer than this go extended.
    pub separation_threshold: f64,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self {
            order_threshold: 6,
            separation_threshold: 1e-3,
        }
    }
}

impl PrecisionPolicy {
    /// Resolves `requested` for a divided difference of `order` whose closest
    /// pair of distinct nodes is `min_separation` apart.
    pub fn resolve(&self, requested: Precision, order: usize, min_separation: f64) -> Precision {
        match requested {
            Precision::Auto => {
                if order >= self.order_threshold || min_separation < self.separation_threshold {
                    Precision::Extended
                } else {
                    Precision::Standard
                }
            }
            p => p,
        }
    }
}

pub trait Scalar:
    Clone
    + Send
    + Sync
    + fmt::Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powi(&self, k: i32) -> Self;
    fn abs(&self) -> Self;
    fn is_finite(&self) -> bool;
    /// Unit roundoff of the backend.
    fn epsilon() -> f64;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn from_usize(k: usize) -> Self {
        Self::from_f64(k as f64)
    }

    /// Real power for a positive base.
    fn powf(&self, p: f64) -> Self {
        (self.ln() * Self::from_f64(p)).exp()
    }

    fn is_zero(&self) -> bool {
        self.to_f64() == 0.0
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn epsilon() -> f64 {
        f64::EPSILON
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powi(&self, k: i32) -> Self {
        f64::powi(*self, k)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

/// Multiprecision real backed by MPFR.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Ext(pub Float);

impl Ext {
    pub fn new(x: f64) -> Self {
        Ext(Float::with_val(extended_precision_bits(), x))
    }
}

impl fmt::Debug for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ext({})", self.0.to_string_radix(10, Some(24)))
    }
}

impl Add for Ext {
    type Output = Ext;
    fn add(self, rhs: Ext) -> Ext {
        Ext(self.0 + rhs.0)
    }
}

impl Sub for Ext {
    type Output = Ext;
    fn sub(self, rhs: Ext) -> Ext {
        Ext(self.0 - rhs.0)
    }
}

impl Mul for Ext {
    type Output = Ext;
    fn mul(self, rhs: Ext) -> Ext {
        Ext(self.0 * rhs.0)
    }
}

impl Div for Ext {
    type Output = Ext;
    fn div(self, rhs: Ext) -> Ext {
        Ext(self.0 / rhs.0)
    }
}

impl Neg for Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        Ext(-self.0)
    }
}

impl Scalar for Ext {
    fn from_f64(x: f64) -> Self {
        Ext::new(x)
    }
    fn epsilon() -> f64 {
        2f64.powi(1 - extended_precision_bits() as i32)
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn exp(&self) -> Self {
        Ext(self.0.clone().exp())
    }
    fn ln(&self) -> Self {
        Ext(self.0.clone().ln())
    }
    fn sqrt(&self) -> Self {
        Ext(self.0.clone().sqrt())
    }
    fn powi(&self, k: i32) -> Self {
        Ext(self.0.clone().pow(k))
    }
    fn powf(&self, p: f64) -> Self {
        let p = Float::with_val(self.0.prec(), p);
        Ext(self.0.clone().pow(p))
    }
    fn abs(&self) -> Self {
        Ext(self.0.clone().abs())
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

/// Total order on finite scalars; NaN compares equal so sorting never panics.
pub fn cmp_scalar<S: Scalar>(a: &S, b: &S) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}
