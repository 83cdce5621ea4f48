//! Valuations, lotteries, menus and the buyer's choice rule.
//!
//! A menu is a list of (lottery, price) pairs. The buyer picks the pair that
//! maximizes `v·x − p`; the empty pair `(0, 0)` is always available and is
//! never stored. Near-ties (within [`TIE_TOL`]) go to the higher price, then
//! to the lower list index.

use serde::{Deserialize, Serialize};

use crate::distribution::{ExplicitDistribution, Sampler};
use crate::error::{Error, Result};

/// Utility comparisons closer than this are ties.
pub const TIE_TOL: f64 = 1e-9;

/// Slack on `Σ x_j ≤ 1` for lotteries.
pub const LOTTERY_TOL: f64 = 1e-9;

/// The range a valuation is assumed to live in.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueClass {
    /// `[0, 1]^m`
    UnitInterval,
    /// `[1, h]^m`
    Bounded { h: f64 },
    /// `[0, ∞)^m`
    #[default]
    Nonneg,
}

impl ValueClass {
    pub fn contains(&self, value: f64) -> bool {
        match *self {
            ValueClass::UnitInterval => (0.0..=1.0).contains(&value),
            ValueClass::Bounded { h } => (1.0..=h).contains(&value),
            ValueClass::Nonneg => value >= 0.0 && value.is_finite(),
        }
    }
}

/// A buyer type: one value per item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Valuation {
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "is_nonneg")]
    class: ValueClass,
}

fn is_nonneg(c: &ValueClass) -> bool {
    *c == ValueClass::Nonneg
}

impl Valuation {
    /// Untagged valuation. No range check is performed.
    pub fn new(values: Vec<f64>) -> Self {
        Valuation {
            values,
            class: ValueClass::Nonneg,
        }
    }

    /// Builds a valuation and checks every entry against `class`.
    pub fn checked(values: Vec<f64>, class: ValueClass) -> Result<Self> {
        let v = Valuation { values, class };
        v.validate()?;
        Ok(v)
    }

    /// Tags without checking; for generators that produce in-range values by construction.
    pub(crate) fn tagged(values: Vec<f64>, class: ValueClass) -> Self {
        Valuation { values, class }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidValuation("no items".into()));
        }
        for (i, &x) in self.values.iter().enumerate() {
            if !self.class.contains(x) {
                return Err(Error::InvalidValuation(format!(
                    "value {x} at item {i} outside {:?}",
                    self.class
                )));
            }
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn class(&self) -> ValueClass {
        self.class
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `v_i ≤ v_{i+1}` for all i.
    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn value_of(&self, lottery: &Lottery) -> Result<f64> {
        check_dim(self.m(), lottery.m())?;
        Ok(dot(&self.values, lottery.probs()))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// A partial lottery over items: nonnegative, total mass at most one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Lottery {
    probs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Lottery {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Lottery::new(probs)
    }
}

impl From<Lottery> for Vec<f64> {
    fn from(l: Lottery) -> Self {
        l.probs
    }
}

impl Lottery {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidLottery("no items".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidLottery(format!("entry {p} is not a probability")));
        }
        let mass: f64 = probs.iter().sum();
        if mass > 1.0 + LOTTERY_TOL {
            return Err(Error::InvalidLottery(format!("total mass {mass} exceeds 1")));
        }
        Ok(Lottery { probs })
    }

    pub fn zero(m: usize) -> Self {
        Lottery { probs: vec![0.0; m] }
    }

    /// Item `i` with certainty.
    pub fn point(m: usize, i: usize) -> Self {
        let mut probs = vec![0.0; m];
        probs[i] = 1.0;
        Lottery { probs }
    }

    /// Uniform over the (nonempty) item set.
    pub fn uniform_on(m: usize, items: &[usize]) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidLottery("uniform lottery over empty set".into()));
        }
        let mut probs = vec![0.0; m];
        let w = 1.0 / items.len() as f64;
        for &i in items {
            if i >= m {
                return Err(Error::InvalidLottery(format!("item {i} out of range")));
            }
            probs[i] = w;
        }
        Ok(Lottery { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn m(&self) -> usize {
        self.probs.len()
    }

    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.probs.iter().all(|&p| p == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Lottery {
        debug_assert!((0.0..=1.0).contains(&factor));
        Lottery {
            probs: self.probs.iter().map(|p| p * factor).collect(),
        }
    }

    /// Tail-probability form: `tails_i = Σ_{j ≥ i} probs_j`, accumulated from the last item.
    pub fn to_tail_form(&self) -> TailForm {
        let mut tails = vec![0.0; self.m()];
        let mut acc = 0.0;
        for i in (0..self.m()).rev() {
            acc += self.probs[i];
            tails[i] = acc;
        }
        TailForm { tails }
    }
}

/// Tail probabilities of a lottery; nonincreasing, first entry at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct TailForm {
    tails: Vec<f64>,
}

impl TailForm {
    pub fn new(tails: Vec<f64>) -> Result<Self> {
        if tails.is_empty() {
            return Err(Error::InvalidTailForm("no items".into()));
        }
        if tails.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidTailForm("negative or non-finite tail".into()));
        }
        if tails[0] > 1.0 + LOTTERY_TOL {
            return Err(Error::InvalidTailForm(format!("first tail {} exceeds 1", tails[0])));
        }
        if let Some(i) = tails.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::InvalidTailForm(format!("tails increase at position {i}")));
        }
        Ok(TailForm { tails })
    }

    pub fn tails(&self) -> &[f64] {
        &self.tails
    }

    /// Inverse of [`Lottery::to_tail_form`].
    ///
    /// Each difference `tails_i − tails_{i+1}` is nudged by whole ulps until
    /// adding it back onto `tails_{i+1}` reproduces `tails_i` bit for bit.
    /// When no such difference exists the trip back is off by an ulp; tails
    /// on a common dyadic grid (as cover grids are) always come back exactly.
    pub fn to_lottery(&self) -> Lottery {
        let m = self.tails.len();
        let mut probs = vec![0.0; m];
        for i in 0..m {
            let next = if i + 1 < m { self.tails[i + 1] } else { 0.0 };
            probs[i] = exact_difference(self.tails[i], next);
        }
        Lottery { probs }
    }
}

/// Smallest-error `d ≥ 0` with `fl(d + b) == a`, for `a ≥ b ≥ 0`.
fn exact_difference(a: f64, b: f64) -> f64 {
    let mut d = a - b;
    if d <= 0.0 {
        return 0.0;
    }
    for _ in 0..8 {
        let s = d + b;
        if s == a {
            break;
        }
        d = if s < a { d.next_up() } else { d.next_down() };
        if d <= 0.0 {
            return 0.0;
        }
    }
    d
}

/// One (lottery, price) pair of a menu.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEntry")]
pub struct MenuEntry {
    lottery: Lottery,
    price: f64,
}

#[derive(Deserialize)]
struct RawEntry {
    lottery: Lottery,
    price: f64,
}

impl TryFrom<RawEntry> for MenuEntry {
    type Error = Error;

    fn try_from(raw: RawEntry) -> Result<Self> {
        MenuEntry::new(raw.lottery, raw.price)
    }
}

impl MenuEntry {
    pub fn new(lottery: Lottery, price: f64) -> Result<Self> {
        if !(price.is_finite() && price >= 0.0) {
            return Err(Error::InvalidEntry(format!("price {price} is not a nonnegative real")));
        }
        if price == 0.0 && !lottery.is_zero() {
            return Err(Error::InvalidEntry("zero price on a nonzero lottery".into()));
        }
        Ok(MenuEntry { lottery, price })
    }

    pub fn lottery(&self) -> &Lottery {
        &self.lottery
    }

    pub fn price(&self) -> f64 {
        self.price
    }
}

/// `v·x − p`.
pub fn utility(v: &Valuation, e: &MenuEntry) -> Result<f64> {
    Ok(v.value_of(&e.lottery)? - e.price)
}

/// What the buyer takes from a menu.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    /// The implicit `(0, 0)` entry.
    Abstain,
    Entry(usize),
}

/// A menu over `m` items. The `(0, 0)` entry is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMenu")]
pub struct Menu {
    m: usize,
    entries: Vec<MenuEntry>,
}

#[derive(Deserialize)]
struct RawMenu {
    m: usize,
    entries: Vec<MenuEntry>,
}

impl TryFrom<RawMenu> for Menu {
    type Error = Error;

    fn try_from(raw: RawMenu) -> Result<Self> {
        Menu::new(raw.m, raw.entries)
    }
}

impl Menu {
    pub fn new(m: usize, entries: Vec<MenuEntry>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidEntry("menu over zero items".into()));
        }
        for e in &entries {
            check_dim(m, e.lottery.m())?;
        }
        Ok(Menu { m, entries })
    }

    pub fn empty(m: usize) -> Self {
        Menu {
            m,
            entries: Vec::new(),
        }
    }

    /// Item pricing: every item offered deterministically at `price`.
    pub fn item_pricing(m: usize, price: f64) -> Result<Self> {
        let entries = (0..m)
            .map(|i| MenuEntry::new(Lottery::point(m, i), price))
            .collect::<Result<Vec<_>>>()?;
        Menu::new(m, entries)
    }

    pub fn push(&mut self, entry: MenuEntry) -> Result<()> {
        check_dim(self.m, entry.lottery.m())?;
        self.entries.push(entry);
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[MenuEntry] {
        &self.entries
    }

    /// Menu complexity: number of explicit entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn price_of(&self, choice: Choice) -> f64 {
        match choice {
            Choice::Abstain => 0.0,
            Choice::Entry(i) => self.entries[i].price,
        }
    }

    /// Utility-maximizing entry; near-ties go to the higher price, then the lower index.
    pub fn choose(&self, v: &Valuation) -> Result<Choice> {
        check_dim(self.m, v.m())?;
        let utils: Vec<f64> = self
            .entries
            .iter()
            .map(|e| dot(v.values(), e.lottery.probs()) - e.price)
            .collect();
        Ok(pick(&utils, |i| self.entries[i].price))
    }

    /// Payment of `v`; zero when the buyer abstains.
    pub fn revenue(&self, v: &Valuation) -> Result<f64> {
        Ok(self.price_of(self.choose(v)?))
    }

    /// Exact `Σ w_i · revenue(v_i)`.
    pub fn expected_revenue(&self, d: &ExplicitDistribution) -> Result<f64> {
        d.support()
            .iter()
            .zip(d.weights())
            .map(|(v, w)| Ok(w * self.revenue(v)?))
            .sum()
    }

    /// Monte Carlo mean and standard error of revenue over `n` draws.
    ///
    /// The standard error is reported as 0 when `n == 1`.
    pub fn estimate_revenue(&self, sampler: &mut Sampler, n: usize) -> Result<(f64, f64)> {
        if n == 0 {
            return Err(Error::param("n", "need at least one draw"));
        }
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let r = self.revenue(&sampler.draw())?;
            sum += r;
            sum_sq += r * r;
        }
        let nf = n as f64;
        let mean = sum / nf;
        if n == 1 {
            return Ok((mean, 0.0));
        }
        let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
        Ok((mean, (var / nf).sqrt()))
    }
}

/// Argmax over `{0} ∪ utils` with the tie rule; `price(i)` gives entry prices.
pub(crate) fn pick(utils: &[f64], price: impl Fn(usize) -> f64) -> Choice {
    let best = utils.iter().copied().fold(0.0_f64, f64::max);
    let mut chosen = Choice::Abstain;
    let mut chosen_price = 0.0;
    let mut have = 0.0 >= best - TIE_TOL;
    for (i, &u) in utils.iter().enumerate() {
        if u < best - TIE_TOL {
            continue;
        }
        let p = price(i);
        if !have || p > chosen_price || (p == chosen_price && chosen == Choice::Abstain) {
            chosen = Choice::Entry(i);
            chosen_price = p;
            have = true;
        }
    }
    chosen
}
