//! Runtime contract checking.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// How much runtime verification to perform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AssertLevel {
    Off,
    /// Aggregate checks that cost at most a pass over the touched sets.
    #[default]
    Cheap,
    /// Everything, including exact set identities and pairwise checks.
    Full,
}

impl AssertLevel {
    pub fn cheap(self) -> bool {
        self >= AssertLevel::Cheap
    }

    pub fn full(self) -> bool {
        self >= AssertLevel::Full
    }
}

impl FromStr for AssertLevel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(AssertLevel::Off),
            "cheap" => Ok(AssertLevel::Cheap),
            "full" => Ok(AssertLevel::Full),
            other => Err(Error::Parameter(format!("unknown assertion level '{other}'"))),
        }
    }
}

impl fmt::Display for AssertLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AssertLevel::Off => "off",
            AssertLevel::Cheap => "cheap",
            AssertLevel::Full => "full",
        };
        f.write_str(s)
    }
}

/// Absolute slack applied to float comparisons against proven bounds.
pub const FLOAT_SLACK: f64 = 1e-9;

/// Relative-plus-absolute slack for a bound whose terms have magnitude `scale`.
pub fn slack_for(scale: f64) -> f64 {
    FLOAT_SLACK + 1e-12 * scale.abs()
}

/// Fails with a contract violation unless `lhs <= rhs` up to float slack.
pub fn ensure_le(check: &'static str, lhs: f64, rhs: f64, ctx: impl FnOnce() -> String) -> Result<()> {
    if lhs <= rhs + slack_for(lhs.abs().max(rhs.abs())) {
        Ok(())
    } else {
        Err(Error::ContractViolation { check, witness: format!("{lhs} > {rhs}; {}", ctx()) })
    }
}

pub fn ensure(check: &'static str, cond: bool, ctx: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::ContractViolation { check, witness: ctx() })
    }
}
