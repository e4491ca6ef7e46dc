use std::fmt;
use std::str::FromStr;

use cheesemap::{Flavor, GridMode};

use crate::error::CliError;

/// A benchmarked index: a cheesemap flavor in 2D or 3D, optionally
/// reordered, or one of the baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    Cheesemap {
        flavor: Flavor,
        mode: GridMode,
        reordered: bool,
    },
    KdTree,
    Brute,
}

impl Structure {
    pub const DEFAULTS: &'static str = "dense2,dense3,sparse2,sparse3,mixed2,mixed3,kdtree,brute";

    pub fn with_reorder(self) -> Self {
        match self {
            Structure::Cheesemap { flavor, mode, .. } => Structure::Cheesemap {
                flavor,
                mode,
                reordered: true,
            },
            other => other,
        }
    }

    pub fn flavor(&self) -> Option<Flavor> {
        match self {
            Structure::Cheesemap { flavor, .. } => Some(*flavor),
            _ => None,
        }
    }

    pub fn dims(&self) -> Option<u8> {
        match self {
            Structure::Cheesemap { mode: GridMode::TwoD, .. } => Some(2),
            Structure::Cheesemap { mode: GridMode::ThreeD, .. } => Some(3),
            _ => None,
        }
    }

    pub fn reordered(&self) -> bool {
        matches!(self, Structure::Cheesemap { reordered: true, .. })
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::Cheesemap {
                flavor,
                mode,
                reordered,
            } => {
                let d = if *mode == GridMode::TwoD { 2 } else { 3 };
                write!(f, "{flavor}{d}")?;
                if *reordered {
                    f.write_str("-reordered")?;
                }
                Ok(())
            }
            Structure::KdTree => f.write_str("kdtree"),
            Structure::Brute => f.write_str("brute"),
        }
    }
}

impl FromStr for Structure {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        match s {
            "kdtree" => return Ok(Structure::KdTree),
            "brute" => return Ok(Structure::Brute),
            _ => {}
        }
        let (base, reordered) = match s.strip_suffix("-reordered") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let bad = || CliError::Usage(format!("unknown structure '{s}'"));
        let (name, d) = base.split_at(base.len().checked_sub(1).ok_or_else(bad)?);
        let mode = match d {
            "2" => GridMode::TwoD,
            "3" => GridMode::ThreeD,
            _ => return Err(bad()),
        };
        let flavor = name.parse::<Flavor>().map_err(|_| bad())?;
        Ok(Structure::Cheesemap {
            flavor,
            mode,
            reordered,
        })
    }
}

pub fn parse_structures(list: &str) -> Result<Vec<Structure>, CliError> {
    let v: Vec<Structure> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err(CliError::Usage("no structures given".into()));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in Structure::DEFAULTS.split(',').chain(["mixed3-reordered", "dense2-reordered"]) {
            assert_eq!(id.parse::<Structure>().unwrap().to_string(), id);
        }
        for bad in ["dense4", "kd", "", "3", "sparse3-sorted"] {
            assert!(bad.parse::<Structure>().is_err(), "{bad}");
        }
    }
}
