use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error};

/// Which matrix property is being certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Monotone,
    Convex,
}

impl Mode {
    /// Number of nodes in the defining divided difference at order `n`.
    pub fn arity(self, n: usize) -> usize {
        match self {
            Mode::Monotone => 2 * n,
            Mode::Convex => 2 * n + 1,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Monotone => "monotone",
            Mode::Convex => "convex",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "monotone" => Ok(Mode::Monotone),
            "convex" => Ok(Mode::Convex),
            _ => Err(invalid(format!("unknown mode `{s}` (expected monotone or convex)"))),
        }
    }
}
