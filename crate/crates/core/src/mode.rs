//! Macroscopic loading modes of a plate cell.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Symmetric in-plane index pair `αβ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pair {
    P11,
    P22,
    P12,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::P11, Pair::P22, Pair::P12];

    /// Zero-based tensor indices `(α, β)`.
    pub fn indices(self) -> (usize, usize) {
        match self {
            Pair::P11 => (0, 0),
            Pair::P22 => (1, 1),
            Pair::P12 => (0, 1),
        }
    }

    /// Position in [`Pair::ALL`].
    pub fn index(self) -> usize {
        match self {
            Pair::P11 => 0,
            Pair::P22 => 1,
            Pair::P12 => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Pair::P11 => "11",
            Pair::P22 => "22",
            Pair::P12 => "12",
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Pair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "11" => Ok(Pair::P11),
            "22" => Ok(Pair::P22),
            "12" | "21" => Ok(Pair::P12),
            "23" | "13" | "33" => Err(Error::Config(format!(
                "index pair `{s}` is not an in-plane pair; use 11, 22 or 12"
            ))),
            _ => Err(Error::Config(format!("unknown index pair `{s}`"))),
        }
    }
}

/// Power of `y₃` carried by the mode: membrane (ν = 0) or bending (ν = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Order {
    Membrane,
    Bending,
}

impl Order {
    pub const ALL: [Order; 2] = [Order::Membrane, Order::Bending];

    pub fn index(self) -> usize {
        match self {
            Order::Membrane => 0,
            Order::Bending => 1,
        }
    }

    pub fn from_index(nu: usize) -> Option<Self> {
        match nu {
            0 => Some(Order::Membrane),
            1 => Some(Order::Bending),
            _ => None,
        }
    }
}

/// A unit macroscopic strain (`ν = 0`) or curvature (`ν = 1`) scaled by `magnitude`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroMode {
    pub pair: Pair,
    pub order: Order,
    pub magnitude: f64,
}

impl MacroMode {
    pub fn new(pair: Pair, order: Order) -> Self {
        Self {
            pair,
            order,
            magnitude: 1.0,
        }
    }

    pub fn with_magnitude(self, magnitude: f64) -> Self {
        Self { magnitude, ..self }
    }

    /// The six unit modes in canonical order (membrane first).
    pub fn all_unit() -> Vec<MacroMode> {
        Order::ALL
            .iter()
            .flat_map(|&o| Pair::ALL.iter().map(move |&p| MacroMode::new(p, o)))
            .collect()
    }

    /// Identifies the mode up to magnitude.
    pub fn key(&self) -> ModeKey {
        ModeKey {
            pair: self.pair,
            order: self.order,
        }
    }
}

impl fmt::Display for MacroMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

/// Mode identity without magnitude; e.g. `11:1` for bending about y₂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeKey {
    pub pair: Pair,
    pub order: Order,
}

impl ModeKey {
    pub fn unit(self) -> MacroMode {
        MacroMode::new(self.pair, self.order)
    }
}

impl fmt::Display for ModeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.pair, self.order.index())
    }
}

impl FromStr for ModeKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (ab, nu) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("mode `{s}` must look like AB:NU")))?;
        let pair = ab.parse()?;
        let order = nu
            .trim()
            .parse::<usize>()
            .ok()
            .and_then(Order::from_index)
            .ok_or_else(|| Error::Config(format!("mode `{s}`: NU must be 0 or 1")))?;
        Ok(ModeKey { pair, order })
    }
}

impl Serialize for ModeKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ModeKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let k: ModeKey = "12:1".parse().unwrap();
        assert_eq!(k.pair, Pair::P12);
        assert_eq!(k.order, Order::Bending);
        assert_eq!(k.to_string(), "12:1");
        assert!("23:0".parse::<ModeKey>().is_err());
        assert!("11:2".parse::<ModeKey>().is_err());
        assert!("11".parse::<ModeKey>().is_err());
    }

    #[test]
    fn six_unit_modes() {
        let all = MacroMode::all_unit();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0].to_string(), "11:0");
        assert_eq!(all[5].to_string(), "12:1");
    }
}
