//! Small-menu revenue maximization on two-level valuations.
//!
//! Every valuation takes a high value on a set `S_i` of items and a low value
//! elsewhere: `H` and 1, or 1 and 0. Selling the items of `T` at the high
//! value earns it from exactly the buyers whose set meets `T`, so choosing
//! the best `k` items is max coverage. This module holds the reduction from a
//! hitting-set family, the greedy cover, an exhaustive oracle, and the
//! rounding of a lottery menu to an item set by conditional expectations.

use serde::{Deserialize, Serialize};

use crate::distribution::{ExplicitDistribution, HittingSetInstance, TwoLevel};
use crate::error::{Error, Result};
use crate::lp::binomial;
use crate::model::{Lottery, Menu, MenuEntry};

/// Default cap on the number of item sets the oracle may enumerate.
pub const BRUTE_FORCE_BUDGET: u128 = 1_000_000;

/// A menu-size budget `k` over an explicit two-level distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct KMenuProblem {
    distribution: ExplicitDistribution,
    k: usize,
    h: f64,
    convention: TwoLevel,
    /// High-value items per support point.
    sets: Vec<Vec<usize>>,
}

impl KMenuProblem {
    /// Checks that every value is one of the two levels of `convention`
    /// (`H` is ignored for [`TwoLevel::ZeroOne`]).
    pub fn new(distribution: ExplicitDistribution, k: usize, h: f64, convention: TwoLevel) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k", "menu budget must be at least 1"));
        }
        let h = match convention {
            TwoLevel::OneH if !(h > 1.0 && h.is_finite()) => {
                return Err(Error::param("H", format!("{h} must exceed 1")));
            }
            TwoLevel::OneH => h,
            TwoLevel::ZeroOne => 1.0,
        };
        let (high, low) = levels(convention, h);
        let mut sets = Vec::with_capacity(distribution.len());
        for (i, v) in distribution.support().iter().enumerate() {
            if let Some(&x) = v.values().iter().find(|&&x| x != high && x != low) {
                return Err(Error::InvalidValuation(format!(
                    "point {i} has value {x}, expected {low} or {high}"
                )));
            }
            sets.push((0..v.m()).filter(|&j| v.values()[j] == high).collect());
        }
        Ok(KMenuProblem {
            distribution,
            k,
            h,
            convention,
            sets,
        })
    }

    pub fn distribution(&self) -> &ExplicitDistribution {
        &self.distribution
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn convention(&self) -> TwoLevel {
        self.convention
    }

    pub fn m(&self) -> usize {
        self.distribution.m()
    }

    /// High-value item set of each support point.
    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// The price items are sold at, `H` or 1.
    pub fn high(&self) -> f64 {
        levels(self.convention, self.h).0
    }

    pub fn low(&self) -> f64 {
        levels(self.convention, self.h).1
    }

    /// Probability mass of the points whose set meets `items`.
    pub fn hit_weight(&self, items: &[usize]) -> f64 {
        let mut chosen = vec![false; self.m()];
        for &j in items {
            chosen[j] = true;
        }
        self.sets
            .iter()
            .zip(self.distribution.weights())
            .filter(|(s, _)| s.iter().any(|&j| chosen[j]))
            .map(|(_, w)| w)
            .sum()
    }

    /// Revenue of selling `items` at the high value, by closed form.
    pub fn item_revenue(&self, items: &[usize]) -> f64 {
        self.high() * self.hit_weight(items)
    }

    /// The menu offering each of `items` alone at the high value.
    pub fn item_menu(&self, items: &[usize]) -> Result<Menu> {
        let m = self.m();
        let mut menu = Menu::empty(m);
        for &j in items {
            if j >= m {
                return Err(Error::param("items", format!("item {j} out of range 0..{m}")));
            }
            menu.push(MenuEntry::new(Lottery::point(m, j), self.high())?)?;
        }
        Ok(menu)
    }
}

fn levels(convention: TwoLevel, h: f64) -> (f64, f64) {
    match convention {
        TwoLevel::OneH => (h, 1.0),
        TwoLevel::ZeroOne => (1.0, 0.0),
    }
}

/// The `{1, H}` distribution of `inst` with menu budget `k`.
pub fn reduce_hitting_set(inst: &HittingSetInstance, k: usize) -> Result<KMenuProblem> {
    KMenuProblem::new(inst.valuations(TwoLevel::OneH)?, k, inst.h, TwoLevel::OneH)
}

/// Greedy max coverage: up to `k` times, adds the item hitting the most
/// not-yet-hit mass (lowest index on ties), stopping early once nothing is
/// left to gain. Returns the item menu and its evaluated revenue.
pub fn greedy_k_item_menu(p: &KMenuProblem) -> Result<(Menu, f64)> {
    let items = greedy_items(p);
    let menu = p.item_menu(&items)?;
    let revenue = menu.expected_revenue(p.distribution())?;
    Ok((menu, revenue))
}

/// Items chosen by [`greedy_k_item_menu`], in pick order.
pub fn greedy_items(p: &KMenuProblem) -> Vec<usize> {
    let m = p.m();
    let weights = p.distribution().weights();
    let mut hit = vec![false; p.sets().len()];
    let mut items = Vec::new();
    for _ in 0..p.k().min(m) {
        let mut gain = vec![0.0; m];
        for (i, s) in p.sets().iter().enumerate() {
            if !hit[i] {
                for &j in s {
                    gain[j] += weights[i];
                }
            }
        }
        let mut best: Option<usize> = None;
        for j in 0..m {
            if gain[j] > 0.0 && best.is_none_or(|b| gain[j] > gain[b]) {
                best = Some(j);
            }
        }
        let Some(j) = best else { break };
        items.push(j);
        for (i, s) in p.sets().iter().enumerate() {
            if s.contains(&j) {
                hit[i] = true;
            }
        }
    }
    items
}

/// Exhaustive search over all `min(k, m)`-item sets; the lexicographically
/// first best set wins. Fails if there are more than `budget` sets.
pub fn brute_force_k_menu(p: &KMenuProblem, budget: u128) -> Result<(Vec<usize>, f64)> {
    let m = p.m();
    let size = p.k().min(m);
    let required = binomial(m as u128, size as u128);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let mut best: (f64, Vec<usize>) = (-1.0, Vec::new());
    let mut cur: Vec<usize> = (0..size).collect();
    loop {
        let w = p.hit_weight(&cur);
        if w > best.0 {
            best = (w, cur.clone());
        }
        // next combination in lexicographic order
        let Some(pos) = (0..size).rev().find(|&t| cur[t] < m - size + t) else { break };
        cur[pos] += 1;
        for t in pos + 1..size {
            cur[t] = cur[t - 1] + 1;
        }
    }
    let revenue = p.item_revenue(&best.1);
    Ok((best.1, revenue))
}

/// Outcome of rounding a lottery menu to items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derandomized {
    /// Distinct items drawn, sorted.
    pub items: Vec<usize>,
    /// Fixed outcome per lottery; `None` is the empty draw.
    pub draws: Vec<Option<usize>>,
    /// Expected hit mass after fixing the first `t` lotteries, `t = 0..=k`.
    pub expectations: Vec<f64>,
}

/// Expected hit mass when the lotteries in `rest` are drawn independently
/// and the items marked in `fixed` are already in the set.
pub fn expected_hit_weight(p: &KMenuProblem, fixed: &[bool], rest: &[&Lottery]) -> f64 {
    p.sets()
        .iter()
        .zip(p.distribution().weights())
        .map(|(s, w)| {
            if s.iter().any(|&j| fixed[j]) {
                return *w;
            }
            let miss: f64 = rest.iter().map(|x| 1.0 - set_mass(x, s)).product();
            w * (1.0 - miss)
        })
        .sum()
}

fn set_mass(x: &Lottery, s: &[usize]) -> f64 {
    s.iter().map(|&j| x.probs()[j]).sum()
}

/// Draws one outcome from each lottery of `menu` in turn, each time taking
/// the outcome in the lottery's support that maximizes the conditional
/// expected hit mass (lowest item on ties; the empty draw only when the
/// lottery has no items). The final hit mass is at least the expectation
/// under independent draws.
pub fn derandomize_lotteries(menu: &Menu, p: &KMenuProblem) -> Result<Derandomized> {
    crate::model::check_dim(p.m(), menu.m())?;
    let lotteries: Vec<&Lottery> = menu.entries().iter().map(MenuEntry::lottery).collect();
    let mut fixed = vec![false; p.m()];
    let mut draws = Vec::with_capacity(lotteries.len());
    let mut expectations = vec![expected_hit_weight(p, &fixed, &lotteries)];
    for t in 0..lotteries.len() {
        let rest = &lotteries[t + 1..];
        let mut best: Option<(usize, f64)> = None;
        for (j, &q) in lotteries[t].probs().iter().enumerate() {
            if q <= 0.0 {
                continue;
            }
            let was = fixed[j];
            fixed[j] = true;
            let e = expected_hit_weight(p, &fixed, rest);
            fixed[j] = was;
            if best.is_none_or(|(_, b)| e > b) {
                best = Some((j, e));
            }
        }
        match best {
            Some((j, e)) => {
                fixed[j] = true;
                draws.push(Some(j));
                expectations.push(e);
            }
            None => {
                draws.push(None);
                expectations.push(expected_hit_weight(p, &fixed, rest));
            }
        }
    }
    let items = (0..p.m()).filter(|&j| fixed[j]).collect();
    Ok(Derandomized {
        items,
        draws,
        expectations,
    })
}

/// `low + (high − low)·Σ_i w_i max_t x_t(S_i)`, with the max over an empty
/// menu taken as 0. Individual rationality caps each buyer's payment by the
/// best value she can get, which this bounds.
pub fn revenue_upper_bound(menu: &Menu, p: &KMenuProblem) -> Result<f64> {
    crate::model::check_dim(p.m(), menu.m())?;
    let avg: f64 = p
        .sets()
        .iter()
        .zip(p.distribution().weights())
        .map(|(s, w)| {
            let best = menu
                .entries()
                .iter()
                .map(|e| set_mass(e.lottery(), s))
                .fold(0.0, f64::max);
            w * best
        })
        .sum();
    Ok(p.low() + (p.high() - p.low()) * avg)
}
