//! Finite lottery grids and the round-down maps onto them.
//!
//! * additive: every coordinate a multiple of `ε/m`;
//! * multiplicative: every coordinate in `R = {0} ∪ {(1−ε)^t ≥ ε/(Hm)}`;
//! * monotone tail: every tail probability in `Q = {0} ∪ {(1−ε)^t ≥ ε/H}`.
//!
//! Powers are identified by their integer exponent and materialized as
//! `(1−ε)^t` rounded down to a multiple of `2^-48`. Sums and differences of
//! such values in `[0, 1]` are exact in `f64`, so a grid value rounds to itself
//! bit for bit and tail vectors survive the trip through a lottery unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::binomial;
use crate::model::{check_dim, Lottery, TailForm, ValueClass, LOTTERY_TOL};

/// Resolution of geometric grid values.
const DYADIC: f64 = (1u64 << 48) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverKind {
    Additive,
    Multiplicative,
    MonotoneTail,
}

impl std::str::FromStr for CoverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(CoverKind::Additive),
            "multiplicative" => Ok(CoverKind::Multiplicative),
            "monotone_tail" | "monotone-tail" => Ok(CoverKind::MonotoneTail),
            other => Err(Error::param("kind", format!("unknown cover kind `{other}`"))),
        }
    }
}

/// `{"kind": ..., "epsilon": ..., "m": ..., "H": ...}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct CoverSpec {
    pub kind: CoverKind,
    pub epsilon: f64,
    pub m: usize,
    #[serde(rename = "H")]
    pub h: f64,
}

#[derive(Deserialize)]
struct RawSpec {
    kind: CoverKind,
    epsilon: f64,
    m: usize,
    #[serde(rename = "H", default = "one")]
    h: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawSpec> for CoverSpec {
    type Error = Error;

    fn try_from(r: RawSpec) -> Result<Self> {
        CoverSpec::new(r.kind, r.epsilon, r.m, r.h)
    }
}

impl CoverSpec {
    pub fn new(kind: CoverKind, epsilon: f64, m: usize, h: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param("epsilon", format!("{epsilon} not in (0, 1)")));
        }
        if m == 0 {
            return Err(Error::param("m", "need at least one item"));
        }
        if !(h >= 1.0 && h.is_finite()) {
            return Err(Error::param("H", format!("{h} < 1")));
        }
        Ok(CoverSpec { kind, epsilon, m, h })
    }

    pub fn additive(epsilon: f64, m: usize) -> Result<Self> {
        CoverSpec::new(CoverKind::Additive, epsilon, m, 1.0)
    }

    pub fn multiplicative(epsilon: f64, m: usize, h: f64) -> Result<Self> {
        CoverSpec::new(CoverKind::Multiplicative, epsilon, m, h)
    }

    pub fn monotone_tail(epsilon: f64, m: usize, h: f64) -> Result<Self> {
        CoverSpec::new(CoverKind::MonotoneTail, epsilon, m, h)
    }

    /// Additive grid step `ε/m`.
    pub fn step(&self) -> f64 {
        self.epsilon / self.m as f64
    }

    /// Smallest nonzero grid value allowed: `ε/(Hm)` or `ε/H`; the additive step otherwise.
    pub fn floor(&self) -> f64 {
        match self.kind {
            CoverKind::Additive => self.step(),
            CoverKind::Multiplicative => self.epsilon / (self.h * self.m as f64),
            CoverKind::MonotoneTail => self.epsilon / self.h,
        }
    }

    fn ln_ratio(&self) -> f64 {
        (1.0 - self.epsilon).ln()
    }

    /// `(1−ε)^t` (to `2^-48` resolution) for the geometric kinds; `t·ε/m` for the additive kind.
    pub fn grid_value(&self, t: u64) -> f64 {
        match self.kind {
            CoverKind::Additive => t as f64 * self.step(),
            _ => ((t as f64 * self.ln_ratio()).exp() * DYADIC).floor() / DYADIC,
        }
    }

    /// Largest exponent with a grid value in range: `t·ε/m ≤ 1` or `(1−ε)^t ≥ floor`.
    pub fn max_exponent(&self) -> u64 {
        match self.kind {
            CoverKind::Additive => {
                let mut k = (1.0 / self.step()).floor() as u64;
                while self.grid_value(k + 1) <= 1.0 {
                    k += 1;
                }
                while k > 0 && self.grid_value(k) > 1.0 {
                    k -= 1;
                }
                k
            }
            _ => {
                let floor = self.floor();
                let mut t = (floor.ln() / self.ln_ratio()).floor().max(0.0) as u64;
                while self.grid_value(t + 1) >= floor {
                    t += 1;
                }
                while t > 0 && self.grid_value(t) < floor {
                    t -= 1;
                }
                t
            }
        }
    }

    /// Rounds one coordinate (or tail) down onto the grid; values off the
    /// bottom of a geometric grid become 0.
    pub fn round_value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.kind {
            CoverKind::Additive => {
                let step = self.step();
                let mut k = (x / step).floor() as u64;
                while self.grid_value(k + 1) <= x {
                    k += 1;
                }
                while k > 0 && self.grid_value(k) > x {
                    k -= 1;
                }
                self.grid_value(k)
            }
            _ => {
                let t_max = self.max_exponent();
                if x < self.grid_value(t_max) {
                    return 0.0;
                }
                // smallest t with (1−ε)^t ≤ x
                let mut t = ((x.ln() / self.ln_ratio()).ceil().max(0.0) as u64).min(t_max);
                while t < t_max && self.grid_value(t) > x {
                    t += 1;
                }
                while t > 0 && self.grid_value(t - 1) <= x {
                    t -= 1;
                }
                self.grid_value(t)
            }
        }
    }

    /// The rounding map ξ of this cover.
    pub fn round(&self, x: &Lottery) -> Result<Lottery> {
        check_dim(self.m, x.m())?;
        match self.kind {
            CoverKind::Additive | CoverKind::Multiplicative => {
                Lottery::new(x.probs().iter().map(|&p| self.round_value(p)).collect())
            }
            CoverKind::MonotoneTail => {
                let tails: Vec<f64> = x.to_tail_form().tails().iter().map(|&t| self.round_value(t)).collect();
                Ok(TailForm::new(tails)?.to_lottery())
            }
        }
    }

    /// Whether `x` is a fixed point of the rounding map.
    pub fn contains(&self, x: &Lottery) -> bool {
        self.round(x).map(|y| &y == x).unwrap_or(false)
    }

    /// Errors unless this cover's guarantee is certified for valuations of `class`
    /// (and, for the tail kind, monotone ones).
    pub fn check_compatible(&self, class: ValueClass, monotone: bool) -> Result<()> {
        let ok = match (self.kind, class) {
            (CoverKind::Additive, ValueClass::UnitInterval) => true,
            (CoverKind::Additive, _) => false,
            (_, ValueClass::Bounded { h }) => h <= self.h && (self.kind != CoverKind::MonotoneTail || monotone),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleCover(format!(
                "{:?} cover (H={}) is not certified for {:?}{} valuations",
                self.kind,
                self.h,
                class,
                if monotone { " monotone" } else { "" }
            )))
        }
    }

    /// Distinct per-coordinate (or per-tail) grid values, ascending.
    pub fn grid_values(&self) -> Vec<f64> {
        let t_max = self.max_exponent();
        let mut vals: Vec<f64> = match self.kind {
            CoverKind::Additive => (0..=t_max).map(|k| self.grid_value(k)).collect(),
            _ => std::iter::once(0.0)
                .chain((0..=t_max).rev().map(|t| self.grid_value(t)))
                .collect(),
        };
        vals.dedup();
        vals
    }

    /// Number of lotteries in the cover; exact for the additive and tail
    /// kinds, and `|R|^m` (an upper bound) for the multiplicative kind.
    pub fn count(&self) -> CoverCount {
        let m = self.m as u128;
        match self.kind {
            CoverKind::Additive => {
                // vectors of nonnegative integers with Σ k ≤ K
                let k = self.additive_mass_limit() as u128;
                CoverCount {
                    count: binomial(k + m, m),
                    exact: true,
                }
            }
            CoverKind::Multiplicative => {
                let r = self.grid_values().len() as u128;
                CoverCount {
                    count: (0..self.m).fold(1u128, |acc, _| acc.saturating_mul(r)),
                    exact: self.m == 1,
                }
            }
            CoverKind::MonotoneTail => {
                // nonincreasing length-m sequences over |Q| values
                let q = self.grid_values().len() as u128;
                CoverCount {
                    count: binomial(q + m - 1, m),
                    exact: true,
                }
            }
        }
    }

    /// Largest `K` with `K·(ε/m) ≤ 1` within the lottery tolerance.
    fn additive_mass_limit(&self) -> u64 {
        let mut k = self.max_exponent();
        while self.grid_value(k + 1) <= 1.0 + LOTTERY_TOL {
            k += 1;
        }
        k
    }

    /// Size envelope with every logarithm replaced by `⌈log₂⌉` and constant 1:
    /// `((⌈log₂m⌉ + ⌈log₂H⌉ + ⌈log₂ε⁻¹⌉ + 2)/ε)^m` for the multiplicative
    /// kind and `max(2, m)^((⌈log₂H⌉ + ⌈log₂ε⁻¹⌉ + 2)/ε)` for the tail kind.
    /// The `+2` accounts for the grid points 0 and 1, which the asymptotic
    /// expressions do not see.
    pub fn size_envelope(&self) -> f64 {
        let lg = |x: f64| x.log2().ceil().max(0.0);
        let (m, e) = (self.m as f64, self.epsilon);
        match self.kind {
            CoverKind::Additive => ((m / e).floor() + 1.0).powf(m),
            CoverKind::Multiplicative => ((lg(m) + lg(self.h) + lg(1.0 / e) + 2.0) / e).powf(m),
            CoverKind::MonotoneTail => m.max(2.0).powf((lg(self.h) + lg(1.0 / e) + 2.0) / e),
        }
    }
}

/// Cover size, possibly only an upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverCount {
    pub count: u128,
    pub exact: bool,
}

/// Either the listed cover or, past the budget, its size.
#[derive(Debug, Clone, PartialEq)]
pub enum CoverEnumeration {
    Lotteries(Vec<Lottery>),
    CountOnly(CoverCount),
}

/// Lists every lottery in the cover when its predicted size fits in `budget`.
pub fn enumerate_cover(spec: &CoverSpec, budget: u128) -> CoverEnumeration {
    let predicted = spec.count();
    if predicted.count > budget {
        return CoverEnumeration::CountOnly(predicted);
    }
    let vals = spec.grid_values();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(spec.m);
    match spec.kind {
        CoverKind::Additive | CoverKind::Multiplicative => {
            let limit = if spec.kind == CoverKind::Additive {
                spec.grid_value(spec.additive_mass_limit())
            } else {
                1.0
            };
            vectors(&vals, spec.m, limit, &mut cur, 0.0, &mut out);
        }
        CoverKind::MonotoneTail => tails(&vals, spec.m, vals.len() - 1, &mut cur, &mut out),
    }
    CoverEnumeration::Lotteries(out)
}

fn vectors(vals: &[f64], m: usize, limit: f64, cur: &mut Vec<f64>, mass: f64, out: &mut Vec<Lottery>) {
    if cur.len() == m {
        if let Ok(l) = Lottery::new(cur.clone()) {
            out.push(l);
        }
        return;
    }
    for &v in vals {
        if mass + v > limit + LOTTERY_TOL {
            break;
        }
        cur.push(v);
        vectors(vals, m, limit, cur, mass + v, out);
        cur.pop();
    }
}

fn tails(vals: &[f64], m: usize, top: usize, cur: &mut Vec<f64>, out: &mut Vec<Lottery>) {
    if cur.len() == m {
        let t = TailForm::new(cur.clone()).expect("grid tails are valid");
        out.push(t.to_lottery());
        return;
    }
    for k in 0..=top {
        cur.push(vals[k]);
        tails(vals, m, k, cur, out);
        cur.pop();
    }
}
