use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Acoustic condition of a trial or a rendered cue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Anechoic,
    Reverberant,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::Anechoic, Condition::Reverberant];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Anechoic => "anechoic",
            Condition::Reverberant => "reverberant",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "anechoic" => Ok(Condition::Anechoic),
            "reverberant" => Ok(Condition::Reverberant),
            other => Err(Error::invalid(format!(
                "unknown condition label {other:?} (allowed: \"anechoic\", \"reverberant\")"
            ))),
        }
    }
}
