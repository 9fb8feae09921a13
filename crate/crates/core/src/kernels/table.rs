use serde::{Deserialize, Serialize};

use super::ScenarioTag;
use crate::error::{Error, Result};

/// One exponent of the per-law table. Some entries are only fixed up to an
/// arbitrarily small perturbation, which is kept symbolic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum TableEntry {
    Exact(f64),
    Infinite,
    /// Any finite value.
    AnyFinite,
    /// `value + epsilon` for arbitrarily small `epsilon > 0`.
    JustAbove(f64),
    /// `value - epsilon` for arbitrarily small `epsilon > 0`.
    JustBelow(f64),
}

impl TableEntry {
    /// Exact numeric value when the entry has one.
    pub fn exact(&self) -> Option<f64> {
        match self {
            TableEntry::Exact(v) => Some(*v),
            _ => None,
        }
    }

    /// The limit the entry is attached to (`+inf` for the infinite entries).
    pub fn nominal(&self) -> f64 {
        match self {
            TableEntry::Exact(v) | TableEntry::JustAbove(v) | TableEntry::JustBelow(v) => *v,
            TableEntry::Infinite | TableEntry::AnyFinite => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for TableEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TableEntry::Exact(v) => write!(f, "{v}"),
            TableEntry::Infinite => write!(f, "inf"),
            TableEntry::AnyFinite => write!(f, "<inf"),
            TableEntry::JustAbove(v) => write!(f, "{v}+"),
            TableEntry::JustBelow(v) => write!(f, "{v}-"),
        }
    }
}

/// Orders and integrability exponents for one flux law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub alpha1: TableEntry,
    pub alpha2: TableEntry,
    pub p: TableEntry,
    pub p_prime: TableEntry,
    pub q: TableEntry,
    pub q_tilde: TableEntry,
    pub s: TableEntry,
    pub r: TableEntry,
    pub sigma: TableEntry,
    pub rho: TableEntry,
}

/// Exponent table of the three named fractional laws.
pub struct ScenarioTable;

impl ScenarioTable {
    pub fn row(tag: ScenarioTag, alpha: f64) -> Result<TableRow> {
        use TableEntry::*;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::DomainError(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let row = match tag {
            ScenarioTag::GfeI => TableRow {
                alpha1: Exact(1.0 - alpha),
                alpha2: Exact(alpha),
                p: AnyFinite,
                p_prime: JustAbove(1.0),
                q: JustBelow(1.0 / alpha),
                q_tilde: Exact(1.0),
                s: Exact(1.5),
                r: Exact(2.0),
                sigma: Exact((3.0 + alpha) / 2.0),
                rho: Exact(2.0),
            },
            ScenarioTag::GfeIii => TableRow {
                alpha1: Exact(0.0),
                alpha2: Exact(alpha),
                p: Infinite,
                p_prime: Exact(1.0),
                q: Exact(1.0),
                q_tilde: Exact(1.0),
                s: Exact(2.0 - alpha / 2.0),
                r: Exact(2.0),
                sigma: Exact(2.0),
                rho: Exact(2.0),
            },
            ScenarioTag::Gfe => TableRow {
                alpha1: Exact(1.0 - alpha),
                alpha2: Exact(1.0),
                p: Exact(2.0 / (1.0 - alpha)),
                p_prime: Exact(2.0 / (1.0 + alpha)),
                q: JustBelow(1.0 / alpha),
                q_tilde: Exact(1.0),
                s: Exact(1.0 + alpha / 2.0),
                r: Exact(2.0),
                sigma: Exact((3.0 + alpha) / 2.0),
                rho: Exact(2.0),
            },
            other => {
                return Err(Error::UnsupportedScenario(format!(
                    "no exponent table for scenario {}",
                    other.name()
                )))
            }
        };
        Ok(row)
    }
}
