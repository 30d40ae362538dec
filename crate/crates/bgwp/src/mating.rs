//! Mating rules and grid certification of their structural properties.
//!
//! Every rule used by the envelope and chain machinery must be superadditive
//! and female-dominated (`zeta(x, y) <= x`). The built-in rules satisfy both
//! analytically; [`check_superadditive_fn`] and [`check_female_dominated_fn`]
//! verify arbitrary kernels exhaustively on a finite grid.

use serde::Serialize;

use crate::{Error, Result};

/// Default grid cap for exhaustive property checks.
pub const DEFAULT_GRID_CAP: u64 = 50;

/// Mating function `zeta(females, males) -> units`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MatingRule {
    /// Every female mates provided at least one male exists:
    /// `zeta(x, y) = x * min(1, y)`.
    Promiscuous,
    /// Each male mates with up to `k` females: `zeta(x, y) = min(x, k y)`.
    Polygamous { k: u64 },
    /// Females reproduce regardless of males: `zeta(x, y) = x`. Reduces the
    /// two-sex process to its female line.
    Identity,
}

impl MatingRule {
    /// Polygamous rule with `k >= 1` females per male.
    pub fn polygamous(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter(
                "polygamous mating needs k >= 1 females per male".into(),
            ));
        }
        Ok(MatingRule::Polygamous { k })
    }

    /// Number of mating units formed from `females` and `males`.
    pub fn eval(&self, females: u64, males: u64) -> u64 {
        match *self {
            MatingRule::Promiscuous => {
                if males >= 1 {
                    females
                } else {
                    0
                }
            }
            MatingRule::Polygamous { k } => females.min(k.saturating_mul(males)),
            MatingRule::Identity => females,
        }
    }

    /// Exhaustive superadditivity check on `0..=cap` per argument; the
    /// built-ins also hold analytically, which the report records.
    pub fn check_superadditive(&self, cap: u64) -> PropertyReport {
        let mut report = check_superadditive_fn(|x, y| self.eval(x, y), cap);
        report.analytic = true;
        report
    }

    /// Exhaustive female-domination check (`zeta(x, y) <= x`) on the grid.
    pub fn check_female_dominated(&self, cap: u64) -> PropertyReport {
        let mut report = check_female_dominated_fn(|x, y| self.eval(x, y), cap);
        report.analytic = true;
        report
    }
}

/// Which structural property a report certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Superadditive,
    FemaleDominated,
}

/// First grid point at which a property fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Counterexample {
    /// `zeta(a + b) < zeta(a) + zeta(b)` for the two argument pairs.
    Split { a: (u64, u64), b: (u64, u64), merged: u64, parts: u64 },
    /// `zeta(x, y) > x`.
    Point { x: u64, y: u64, value: u64 },
}

/// Outcome of a grid property check.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub property: Property,
    pub holds: bool,
    /// Per-argument grid bound that was checked exhaustively.
    pub cap: u64,
    pub counterexample: Option<Counterexample>,
    /// True when the property is also known in closed form for the rule.
    pub analytic: bool,
}

/// Check `zeta(x1+x2, y1+y2) >= zeta(x1,y1) + zeta(x2,y2)` for all argument
/// pairs on `0..=cap`. Quartic in `cap`; the default cap stays cheap.
pub fn check_superadditive_fn(zeta: impl Fn(u64, u64) -> u64, cap: u64) -> PropertyReport {
    for x1 in 0..=cap {
        for y1 in 0..=cap {
            let z1 = zeta(x1, y1);
            for x2 in 0..=cap {
                for y2 in 0..=cap {
                    let merged = zeta(x1 + x2, y1 + y2);
                    let parts = z1 + zeta(x2, y2);
                    if merged < parts {
                        return PropertyReport {
                            property: Property::Superadditive,
                            holds: false,
                            cap,
                            counterexample: Some(Counterexample::Split {
                                a: (x1, y1),
                                b: (x2, y2),
                                merged,
                                parts,
                            }),
                            analytic: false,
                        };
                    }
                }
            }
        }
    }
    PropertyReport {
        property: Property::Superadditive,
        holds: true,
        cap,
        counterexample: None,
        analytic: false,
    }
}

/// Check `zeta(x, y) <= x` for all grid points on `0..=cap`.
pub fn check_female_dominated_fn(zeta: impl Fn(u64, u64) -> u64, cap: u64) -> PropertyReport {
    for x in 0..=cap {
        for y in 0..=cap {
            let value = zeta(x, y);
            if value > x {
                return PropertyReport {
                    property: Property::FemaleDominated,
                    holds: false,
                    cap,
                    counterexample: Some(Counterexample::Point { x, y, value }),
                    analytic: false,
                };
            }
        }
    }
    PropertyReport {
        property: Property::FemaleDominated,
        holds: true,
        cap,
        counterexample: None,
        analytic: false,
    }
}
