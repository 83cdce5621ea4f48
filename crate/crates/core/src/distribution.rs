//! Explicit distributions, seeded samplers and the parametric families used
//! by the experiments.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ValueClass, Valuation};

/// The random stream type behind every sampler.
pub type SeedRng = ChaCha8Rng;

/// Weight sums must be within this of one.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Finite weighted support of valuations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawExplicit")]
pub struct ExplicitDistribution {
    support: Vec<Valuation>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawExplicit {
    support: Vec<Valuation>,
    weights: Vec<f64>,
}

impl TryFrom<RawExplicit> for ExplicitDistribution {
    type Error = Error;

    fn try_from(raw: RawExplicit) -> Result<Self> {
        for v in &raw.support {
            v.validate()?;
        }
        ExplicitDistribution::new(raw.support, raw.weights)
    }
}

impl ExplicitDistribution {
    pub fn new(support: Vec<Valuation>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if support.len() != weights.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} support points but {} weights",
                support.len(),
                weights.len()
            )));
        }
        let m = support[0].m();
        if m == 0 {
            return Err(Error::InvalidDistribution("valuations over zero items".into()));
        }
        if let Some(v) = support.iter().find(|v| v.m() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: v.m(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidDistribution("negative or non-finite weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}, not 1")));
        }
        Ok(ExplicitDistribution { support, weights })
    }

    /// Uniform weights over the samples; duplicates stay separate points.
    pub fn uniform(samples: Vec<Valuation>) -> Result<Self> {
        let n = samples.len();
        ExplicitDistribution::new(samples, vec![1.0 / n.max(1) as f64; n])
    }

    /// Rescales nonnegative weights to sum to one.
    pub fn normalized(support: Vec<Valuation>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidDistribution("weights do not have positive finite sum".into()));
        }
        ExplicitDistribution::new(support, weights.iter().map(|w| w / total).collect())
    }

    pub fn support(&self) -> &[Valuation] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn m(&self) -> usize {
        self.support[0].m()
    }

    /// `Σ_i w_i max_j v_ij`, an upper bound on the revenue of any menu.
    pub fn expected_max_value(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * v.max_value())
            .sum()
    }

    /// Largest value across the support.
    pub fn max_value(&self) -> f64 {
        self.support.iter().map(Valuation::max_value).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Collapses bit-identical support points, adding their weights.
    /// First-occurrence order is kept.
    pub fn merge_duplicates(&self) -> ExplicitDistribution {
        let mut support: Vec<Valuation> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut index = std::collections::HashMap::new();
        for (v, &w) in self.support.iter().zip(&self.weights) {
            let key: Vec<u64> = v.values().iter().map(|x| x.to_bits()).collect();
            match index.get(&key) {
                Some(&i) => weights[i] += w,
                None => {
                    index.insert(key, support.len());
                    support.push(v.clone());
                    weights.push(w);
                }
            }
        }
        ExplicitDistribution { support, weights }
    }

    /// The points' shared class tag; untagged supports are classified by their values.
    pub fn value_class(&self) -> ValueClass {
        let c = self.support[0].class();
        if c != ValueClass::Nonneg && self.support.iter().all(|v| v.class() == c) {
            return c;
        }
        let all = || self.support.iter().flat_map(|v| v.values().iter().copied());
        if all().all(|x| x >= 1.0) {
            ValueClass::Bounded { h: self.max_value() }
        } else if all().all(|x| (0.0..=1.0).contains(&x)) {
            ValueClass::UnitInterval
        } else {
            ValueClass::Nonneg
        }
    }
}

/// Metadata every valuation law reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawInfo {
    pub m: usize,
    pub class: ValueClass,
    /// Every draw is nondecreasing in item index.
    pub monotone: bool,
}

/// The empirical distribution of `samples`: weight `1/n` each, duplicates kept.
pub fn explicit_from_samples(samples: Vec<Valuation>) -> Result<ExplicitDistribution> {
    if samples.is_empty() {
        return Err(Error::InvalidDistribution("no samples".into()));
    }
    ExplicitDistribution::uniform(samples)
}

/// A distribution over valuations that can be sampled given a random stream.
pub trait ValuationLaw: Send + Sync + std::fmt::Debug {
    fn info(&self) -> LawInfo;
    fn draw(&self, rng: &mut SeedRng) -> Valuation;
}

impl ValuationLaw for ExplicitDistribution {
    fn info(&self) -> LawInfo {
        LawInfo {
            m: self.m(),
            class: self.value_class(),
            monotone: self.support.iter().all(Valuation::is_monotone),
        }
    }

    /// Sampling with replacement according to the weights.
    fn draw(&self, rng: &mut SeedRng) -> Valuation {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (v, w) in self.support.iter().zip(&self.weights) {
            acc += w;
            if u < acc {
                return v.clone();
            }
        }
        self.support.last().expect("nonempty support").clone()
    }
}

/// A law paired with its own seeded random stream.
#[derive(Debug, Clone)]
pub struct Sampler {
    law: Arc<dyn ValuationLaw>,
    rng: SeedRng,
}

impl Sampler {
    pub fn new(law: Arc<dyn ValuationLaw>, seed: u64) -> Self {
        Sampler {
            law,
            rng: SeedRng::seed_from_u64(seed),
        }
    }

    pub fn info(&self) -> LawInfo {
        self.law.info()
    }

    pub fn law(&self) -> &Arc<dyn ValuationLaw> {
        &self.law
    }

    pub fn draw(&mut self) -> Valuation {
        self.law.draw(&mut self.rng)
    }

    pub fn draw_n(&mut self, n: usize) -> Vec<Valuation> {
        (0..n).map(|_| self.draw()).collect()
    }
}

/// Item values i.i.d.: 1 w.p. δ, 2 w.p. δ/m, otherwise 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverfitProductParams {
    pub m: usize,
    pub delta: f64,
}

impl OverfitProductParams {
    pub fn new(m: usize, delta: f64) -> Result<Self> {
        let p = OverfitProductParams { m, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::param("m", "need at least one item"));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::param("delta", format!("{} not in (0, 1/2)", self.delta)));
        }
        Ok(())
    }
}

impl ValuationLaw for OverfitProductParams {
    fn info(&self) -> LawInfo {
        LawInfo {
            m: self.m,
            class: ValueClass::Nonneg,
            monotone: false,
        }
    }

    fn draw(&self, rng: &mut SeedRng) -> Valuation {
        let two = self.delta + self.delta / self.m as f64;
        let values = (0..self.m)
            .map(|_| {
                let u: f64 = rng.random();
                if u < self.delta {
                    1.0
                } else if u < two {
                    2.0
                } else {
                    0.0
                }
            })
            .collect();
        Valuation::tagged(values, ValueClass::Nonneg)
    }
}

/// Equal-revenue scale spread over a random third of the items.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualRevenueSpreadParams {
    pub m: usize,
    #[serde(rename = "H")]
    pub h: f64,
}

impl EqualRevenueSpreadParams {
    pub fn new(m: usize, h: f64) -> Result<Self> {
        let p = EqualRevenueSpreadParams { m, h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || !self.m.is_multiple_of(3) {
            return Err(Error::param("m", format!("{} is not a positive multiple of 3", self.m)));
        }
        log2_exact(self.h).ok_or_else(|| Error::param("H", format!("{} is not a power of 2 ≥ 2", self.h)))?;
        Ok(())
    }

    /// Size of the high-value set, m/3.
    pub fn k(&self) -> usize {
        self.m / 3
    }

    pub fn log2_h(&self) -> u32 {
        log2_exact(self.h).expect("validated")
    }

    /// One draw together with the set it spreads over and its scale.
    pub fn draw_point(&self, rng: &mut SeedRng) -> (Valuation, SpreadPoint) {
        let set = floyd_subset(self.m, self.k(), rng);
        let z = truncated_scale(self.log2_h(), rng);
        (self.valuation_for(&set, z), SpreadPoint { set, z })
    }

    pub fn valuation_for(&self, set: &[usize], z: u32) -> Valuation {
        let mut values = vec![1.0; self.m];
        let high = f64::from(2u32.pow(z));
        for &i in set {
            values[i] = high;
        }
        Valuation::tagged(values, ValueClass::Bounded { h: self.h })
    }
}

impl ValuationLaw for EqualRevenueSpreadParams {
    fn info(&self) -> LawInfo {
        LawInfo {
            m: self.m,
            class: ValueClass::Bounded { h: self.h },
            monotone: false,
        }
    }

    fn draw(&self, rng: &mut SeedRng) -> Valuation {
        self.draw_point(rng).0
    }
}

/// `log2(h)` when `h` is a power of two ≥ 2.
pub fn log2_exact(h: f64) -> Option<u32> {
    if !(h >= 2.0 && h.is_finite() && h <= f64::from(1u32 << 30)) {
        return None;
    }
    let l = h.log2().round() as u32;
    (f64::from(2u32.pow(l)) == h).then_some(l)
}

/// `Pr[z = x] = 2^-x` for `x < L`; the remaining `2^-(L-1)` sits on `z = L`.
fn truncated_scale(log2_h: u32, rng: &mut SeedRng) -> u32 {
    let mut z = 1;
    while z < log2_h && rng.random_bool(0.5) {
        z += 1;
    }
    z
}

/// Floyd's algorithm: a uniform `k`-subset of `0..m`, sorted.
pub fn floyd_subset(m: usize, k: usize, rng: &mut SeedRng) -> Vec<usize> {
    debug_assert!(k <= m);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for j in (m - k)..m {
        let t = rng.random_range(0..=j);
        if chosen.contains(&t) {
            chosen.push(j);
        } else {
            chosen.push(t);
        }
    }
    chosen.sort_unstable();
    chosen
}

/// The (S, z) pair behind one equal-revenue spread valuation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpreadPoint {
    pub set: Vec<usize>,
    pub z: u32,
}

/// When two spread sets count as "far apart" in a sparse subsample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntersectionRule {
    /// `|S ∩ T| < m/6`.
    #[default]
    Strict,
    /// `|S ∩ T| ≤ |S|/2`; still enough for every point to buy its own entry
    /// in the lower-bound menu, because every other entry costs at least 1.
    HalfSet,
}

impl IntersectionRule {
    pub fn admits(&self, overlap: usize, m: usize, k: usize) -> bool {
        match self {
            IntersectionRule::Strict => 6 * overlap < m,
            IntersectionRule::HalfSet => 2 * overlap <= k,
        }
    }
}

/// How hard [`sparse_subsample`] tries before giving up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsampleEffort {
    /// Fresh set draws for a single point before the whole subsample restarts.
    pub per_point: usize,
    /// Whole-subsample restarts.
    pub restarts: usize,
}

impl Default for SubsampleEffort {
    fn default() -> Self {
        SubsampleEffort {
            per_point: 10_000,
            restarts: 100,
        }
    }
}

/// A uniform distribution over `K` equal-revenue spread draws, with their (S, z).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSubsample {
    pub params: EqualRevenueSpreadParams,
    pub distribution: ExplicitDistribution,
    pub points: Vec<SpreadPoint>,
    pub rule: IntersectionRule,
}

impl SparseSubsample {
    /// Every pair of sets satisfies `rule`.
    pub fn intersection_property_holds(&self) -> bool {
        let (m, k) = (self.params.m, self.params.k());
        let masks: Vec<BitSet> = self.points.iter().map(|p| BitSet::from_items(m, &p.set)).collect();
        masks.iter().enumerate().all(|(i, a)| {
            masks[i + 1..]
                .iter()
                .all(|b| self.rule.admits(a.overlap(b), m, k))
        })
    }
}

/// `K` draws from the spread law, each point's set redrawn until it is far
/// from every earlier set under `rule`.
///
/// Scales are drawn once per point and never redrawn. If a point exhausts
/// `effort.per_point` set draws, the whole subsample restarts on the next
/// stream; after `effort.restarts` restarts the property is declared
/// unattainable.
pub fn sparse_subsample(
    params: EqualRevenueSpreadParams,
    k_points: usize,
    seed: u64,
    rule: IntersectionRule,
    effort: SubsampleEffort,
) -> Result<SparseSubsample> {
    params.validate()?;
    if k_points == 0 {
        return Err(Error::param("K", "need at least one point"));
    }
    let m = params.m;
    for attempt in 0..effort.restarts.max(1) {
        let mut rng = SeedRng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        if let Some(points) = try_subsample(&params, k_points, rule, effort.per_point, &mut rng) {
            let support = points.iter().map(|p| params.valuation_for(&p.set, p.z)).collect();
            return Ok(SparseSubsample {
                params,
                distribution: ExplicitDistribution::uniform(support)?,
                points,
                rule,
            });
        }
    }
    Err(Error::IntersectionUnattainable {
        attempts: effort.restarts.max(1),
        m,
        k: k_points,
    })
}

fn try_subsample(
    params: &EqualRevenueSpreadParams,
    k_points: usize,
    rule: IntersectionRule,
    per_point: usize,
    rng: &mut SeedRng,
) -> Option<Vec<SpreadPoint>> {
    let (m, k) = (params.m, params.k());
    let mut masks: Vec<BitSet> = Vec::with_capacity(k_points);
    let mut points = Vec::with_capacity(k_points);
    for _ in 0..k_points {
        let z = truncated_scale(params.log2_h(), rng);
        let mut found = None;
        for _ in 0..per_point.max(1) {
            let set = floyd_subset(m, k, rng);
            let mask = BitSet::from_items(m, &set);
            if masks.iter().all(|b| rule.admits(mask.overlap(b), m, k)) {
                found = Some((set, mask));
                break;
            }
        }
        let (set, mask) = found?;
        masks.push(mask);
        points.push(SpreadPoint { set, z });
    }
    Some(points)
}

#[derive(Debug, Clone)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn from_items(m: usize, items: &[usize]) -> Self {
        let mut words = vec![0u64; m.div_ceil(64)];
        for &i in items {
            words[i / 64] |= 1 << (i % 64);
        }
        BitSet(words)
    }

    fn overlap(&self, other: &BitSet) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }
}

/// Where the leftover `2^-L` mass of the scalar equal-revenue law goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Residual {
    /// Added to the top value `H`.
    Top,
    /// Placed on value 0 (a buyer who never pays).
    Zero,
}

/// Scalar law `Pr[v = 2^z] = 2^-z`, `z = 1..log2 H`, over one item.
pub fn equal_revenue_scalar(h: f64, residual: Residual) -> Result<ExplicitDistribution> {
    let l = log2_exact(h).ok_or_else(|| Error::param("H", format!("{h} is not a power of 2 ≥ 2")))?;
    let mut support = Vec::new();
    let mut weights = Vec::new();
    for z in 1..=l {
        support.push(Valuation::new(vec![f64::from(2u32.pow(z))]));
        weights.push(0.5f64.powi(z as i32));
    }
    let rest = 0.5f64.powi(l as i32);
    match residual {
        Residual::Top => *weights.last_mut().expect("l ≥ 1") += rest,
        Residual::Zero => {
            support.push(Valuation::new(vec![0.0]));
            weights.push(rest);
        }
    }
    ExplicitDistribution::new(support, weights)
}

/// `m` i.i.d. uniforms on `[1, H]`, sorted ascending.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneUniformParams {
    pub m: usize,
    #[serde(rename = "H")]
    pub h: f64,
}

impl MonotoneUniformParams {
    pub fn new(m: usize, h: f64) -> Result<Self> {
        let p = MonotoneUniformParams { m, h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::param("m", "need at least one item"));
        }
        if !(self.h >= 1.0 && self.h.is_finite()) {
            return Err(Error::param("H", format!("{} < 1", self.h)));
        }
        Ok(())
    }
}

impl ValuationLaw for MonotoneUniformParams {
    fn info(&self) -> LawInfo {
        LawInfo {
            m: self.m,
            class: ValueClass::Bounded { h: self.h },
            monotone: true,
        }
    }

    fn draw(&self, rng: &mut SeedRng) -> Valuation {
        let mut values: Vec<f64> = (0..self.m)
            .map(|_| 1.0 + (self.h - 1.0) * rng.random::<f64>())
            .collect();
        values.sort_by(f64::total_cmp);
        Valuation::tagged(values, ValueClass::Bounded { h: self.h })
    }
}

/// Value convention for two-level instances built from a set family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoLevel {
    /// `H` on the set, 1 elsewhere.
    #[default]
    OneH,
    /// 1 on the set, 0 elsewhere.
    ZeroOne,
}

/// A family of nonempty subsets of `0..m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingSetInstance {
    pub m: usize,
    #[serde(rename = "H")]
    pub h: f64,
    /// Item indices per set, zero-based.
    pub sets: Vec<Vec<usize>>,
}

impl HittingSetInstance {
    pub fn new(m: usize, h: f64, mut sets: Vec<Vec<usize>>) -> Result<Self> {
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
        }
        let inst = HittingSetInstance { m, h, sets };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::param("m", "need at least one item"));
        }
        if !(self.h > 1.0 && self.h.is_finite()) {
            return Err(Error::param("H", format!("{} must exceed 1", self.h)));
        }
        if self.sets.is_empty() {
            return Err(Error::InvalidDistribution("empty set family".into()));
        }
        for (i, s) in self.sets.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::InvalidDistribution(format!("set {i} is empty")));
            }
            if let Some(&j) = s.iter().find(|&&j| j >= self.m) {
                return Err(Error::InvalidDistribution(format!("set {i} has item {j} ≥ m")));
            }
        }
        Ok(())
    }

    /// `n` uniform random sets whose sizes are uniform in `1..=max_size` (capped at `m`).
    pub fn random(m: usize, h: f64, n: usize, max_size: usize, seed: u64) -> Result<Self> {
        if m == 0 || max_size == 0 {
            return Err(Error::param("max_size", "sets need at least one item"));
        }
        let mut rng = SeedRng::seed_from_u64(seed);
        let sets = (0..n)
            .map(|_| {
                let size = rng.random_range(1..=max_size.min(m));
                floyd_subset(m, size, &mut rng)
            })
            .collect();
        HittingSetInstance::new(m, h, sets)
    }

    /// Text form: a header line `m n`, then one line of one-based item indices per set.
    pub fn parse_text(text: &str, h: f64) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
        let nums: Vec<usize> = parse_ints(header)?;
        let [m, n] = nums[..] else {
            return Err(Error::Parse(format!("header `{header}` is not `m n`")));
        };
        let mut sets = Vec::with_capacity(n);
        for line in lines.by_ref().take(n) {
            let items = parse_ints(line)?;
            if items.contains(&0) {
                return Err(Error::Parse(format!("item index 0 in `{line}`; indices are one-based")));
            }
            sets.push(items.into_iter().map(|j| j - 1).collect());
        }
        if sets.len() != n {
            return Err(Error::Parse(format!("expected {n} sets, found {}", sets.len())));
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing lines after the declared sets".into()));
        }
        HittingSetInstance::new(m, h, sets)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.m, self.sets.len());
        for s in &self.sets {
            let line: Vec<String> = s.iter().map(|j| (j + 1).to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// One valuation per set, uniform weights.
    pub fn valuations(&self, convention: TwoLevel) -> Result<ExplicitDistribution> {
        self.validate()?;
        let (hi, lo, class) = match convention {
            TwoLevel::OneH => (self.h, 1.0, ValueClass::Bounded { h: self.h }),
            TwoLevel::ZeroOne => (1.0, 0.0, ValueClass::UnitInterval),
        };
        let support = self
            .sets
            .iter()
            .map(|s| {
                let mut values = vec![lo; self.m];
                for &j in s {
                    values[j] = hi;
                }
                Valuation::tagged(values, class)
            })
            .collect();
        ExplicitDistribution::uniform(support)
    }
}

fn parse_ints(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("`{t}`: {e}"))))
        .collect()
}

/// `{1, H}` valuations of a set family: `H` on the set, 1 elsewhere.
pub fn hitting_set_valuations(h: &HittingSetInstance) -> Result<ExplicitDistribution> {
    h.valuations(TwoLevel::OneH)
}

/// Parameters of a sparse equal-revenue subsample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparseSubsampleParams {
    pub m: usize,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "K")]
    pub k_points: usize,
    #[serde(default)]
    pub rule: IntersectionRule,
}

/// Hitting-set family plus value convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingSetParams {
    #[serde(flatten)]
    pub instance: HittingSetInstance,
    #[serde(default)]
    pub convention: TwoLevel,
}

/// Every distribution family the tool can name in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum Family {
    Explicit(ExplicitDistribution),
    Overfit(OverfitProductParams),
    EqualRevenue(EqualRevenueSpreadParams),
    SparseSubsample(SparseSubsampleParams),
    HittingSet(HittingSetParams),
    MonotoneUniform(MonotoneUniformParams),
}

/// `{"type": ..., "params": {...}, "seed": u64}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub seed: u64,
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        match &self.family {
            Family::Explicit(_) => Ok(()),
            Family::Overfit(p) => p.validate(),
            Family::EqualRevenue(p) => p.validate(),
            Family::SparseSubsample(p) => {
                EqualRevenueSpreadParams { m: p.m, h: p.h }.validate()?;
                if p.k_points == 0 {
                    return Err(Error::param("K", "need at least one point"));
                }
                Ok(())
            }
            Family::HittingSet(p) => p.instance.validate(),
            Family::MonotoneUniform(p) => p.validate(),
        }
    }

    /// The finite distribution, for families that have one.
    pub fn explicit(&self) -> Result<Option<ExplicitDistribution>> {
        Ok(match &self.family {
            Family::Explicit(d) => Some(d.clone()),
            Family::SparseSubsample(p) => Some(
                sparse_subsample(
                    EqualRevenueSpreadParams { m: p.m, h: p.h },
                    p.k_points,
                    self.seed,
                    p.rule,
                    SubsampleEffort::default(),
                )?
                .distribution,
            ),
            Family::HittingSet(p) => Some(p.instance.valuations(p.convention)?),
            _ => None,
        })
    }

    /// The law to draw from; finite families are resampled with replacement.
    pub fn law(&self) -> Result<Arc<dyn ValuationLaw>> {
        self.validate()?;
        if let Some(d) = self.explicit()? {
            return Ok(Arc::new(d));
        }
        Ok(match &self.family {
            Family::Overfit(p) => Arc::new(*p),
            Family::EqualRevenue(p) => Arc::new(*p),
            Family::MonotoneUniform(p) => Arc::new(*p),
            _ => unreachable!("finite families handled above"),
        })
    }

    /// A sampler seeded with `seed` (not `self.seed`, which fixes the family's own randomness).
    pub fn sampler(&self, seed: u64) -> Result<Sampler> {
        Ok(Sampler::new(self.law()?, seed))
    }
}
