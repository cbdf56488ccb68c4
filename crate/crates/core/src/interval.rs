use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(invalid(format!("empty interval ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn positive() -> Self {
        Self {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// A bounded window inside the interval used when sampling from
    /// unbounded domains.
    pub fn finite_window(&self) -> Interval {
        const REACH: f64 = 10.0;
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => *self,
            (true, false) => Interval {
                lo: self.lo,
                hi: self.lo + REACH,
            },
            (false, true) => Interval {
                lo: self.hi - REACH,
                hi: self.hi,
            },
            (false, false) => Interval {
                lo: -REACH,
                hi: REACH,
            },
        }
    }

    /// Shrinks by `frac` of the length at each end.
    pub fn shrink(&self, frac: f64) -> Interval {
        let pad = frac * self.length();
        Interval {
            lo: self.lo + pad,
            hi: self.hi - pad,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

impl FromStr for Interval {
    type Err = Error;

    /// Parses `lo,hi`; `inf`/`-inf` are accepted.
    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(',')
            .ok_or_else(|| invalid(format!("expected `lo,hi`, got `{s}`")))?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("malformed interval endpoint `{}`", t.trim())))
        };
        Interval::new(num(lo)?, num(hi)?)
    }
}
