//! Sample-and-round, item-pricing baselines and the two headline experiments.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cover::CoverKind;
use crate::distribution::{
    sparse_subsample, EqualRevenueSpreadParams, ExplicitDistribution, IntersectionRule, OverfitProductParams,
    Sampler, SparseSubsample, SpreadPoint, SubsampleEffort,
};
use crate::error::{Error, Result};
use crate::lp::{optimal_menu, LpSolution};
use crate::model::{Lottery, Menu, MenuEntry, Valuation};
use crate::rounding::{epsilon_for_target, round_menu, RoundingParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Optimal menu on the sample, unrounded.
    Naive,
    /// Optimal menu on the sample, rounded onto a cover.
    #[default]
    SampleAndRound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub sample_count: usize,
    /// Target revenue loss of the rounding step.
    pub epsilon: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub cover_kind: CoverKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    /// Level ratio; defaults to the square root of the rounding ε.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// ε used by the cover and price grid; derived from `epsilon` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounding_epsilon: Option<f64>,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::param("sample_count", "need at least one sample"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::param("epsilon", format!("{} not in (0, 1)", self.epsilon)));
        }
        if !(self.h >= 1.0 && self.h.is_finite()) {
            return Err(Error::param("H", format!("{} < 1", self.h)));
        }
        if let Some(e) = self.rounding_epsilon {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::param("rounding_epsilon", format!("{e} not in (0, 1)")));
            }
        }
        Ok(())
    }

    /// Rounding parameters over `m` items.
    pub fn rounding_params(&self, m: usize) -> Result<RoundingParams> {
        let eps = match self.rounding_epsilon {
            Some(e) => e,
            None => epsilon_for_target(self.epsilon, self.h)?,
        };
        RoundingParams::with_cover(eps, self.delta, self.h, self.cover_kind, m)
    }

    /// Refuses cover kinds whose guarantee does not apply to the sampler's valuations.
    pub fn check_sampler(&self, sampler: &Sampler) -> Result<()> {
        if self.mode == Mode::Naive {
            return Ok(());
        }
        let info = sampler.info();
        self.rounding_params(info.m)?.cover.check_compatible(info.class, info.monotone)
    }
}

/// Everything a pipeline run produces.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub menu: Menu,
    /// Optimal menu on the sample, before rounding.
    pub lp_menu: Menu,
    /// Sample with duplicate points merged.
    pub sample: ExplicitDistribution,
    pub lp: LpSolution,
    pub rounding: Option<RoundingParams>,
}

/// Draws `t` samples, solves the menu LP on them and (unless naive) rounds the result.
pub fn run_pipeline(sampler: &mut Sampler, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    cfg.check_sampler(sampler)?;
    let samples = sampler.draw_n(cfg.sample_count);
    let sample = ExplicitDistribution::uniform(samples)?.merge_duplicates();
    let (lp_menu, lp) = optimal_menu(&sample)?;
    let (menu, rounding) = match cfg.mode {
        Mode::Naive => (lp_menu.clone(), None),
        Mode::SampleAndRound => {
            let rp = cfg.rounding_params(sample.m())?;
            (round_menu(&lp_menu, &rp)?, Some(rp))
        }
    };
    Ok(PipelineOutput {
        menu,
        lp_menu,
        sample,
        lp,
        rounding,
    })
}

/// The output menu of [`run_pipeline`].
pub fn sample_and_round(sampler: &mut Sampler, cfg: &PipelineConfig) -> Result<Menu> {
    Ok(run_pipeline(sampler, cfg)?.menu)
}

/// Doubling prices `1, 2, 4, …, 2^⌈log₂H⌉`.
pub fn doubling_prices(h: f64) -> Vec<f64> {
    let top = h.max(1.0).log2().ceil() as i32;
    (0..=top).map(|j| 2f64.powi(j)).collect()
}

/// Best item-pricing menu among the doubling prices.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemPricing {
    pub menu: Menu,
    pub price: f64,
    pub revenue: f64,
}

/// Evaluates every doubling price exactly on `d` and keeps the best
/// (the cheapest among equals).
pub fn item_pricing_baseline(d: &ExplicitDistribution, h: f64) -> Result<ItemPricing> {
    let mut best: Option<ItemPricing> = None;
    for p in doubling_prices(h) {
        let menu = Menu::item_pricing(d.m(), p)?;
        let revenue = menu.expected_revenue(d)?;
        if best.as_ref().is_none_or(|b| revenue > b.revenue) {
            best = Some(ItemPricing { menu, price: p, revenue });
        }
    }
    Ok(best.expect("at least one price"))
}

/// [`item_pricing_baseline`] on `n` draws; `revenue` is the in-sample figure.
pub fn item_pricing_from_samples(sampler: &mut Sampler, h: f64, n: usize) -> Result<ItemPricing> {
    if n == 0 {
        return Err(Error::param("n", "need at least one sample"));
    }
    let d = ExplicitDistribution::uniform(sampler.draw_n(n))?;
    item_pricing_baseline(&d, h)
}

/// Every item at price 2, plus for each sample without a 2-valued item a
/// uniform lottery over its 1-valued items at price 1 (identical lotteries once).
pub fn naive_overfit_menu(samples: &[Valuation]) -> Result<Menu> {
    let m = samples.first().map(Valuation::m).ok_or_else(|| Error::param("samples", "empty"))?;
    let mut menu = Menu::item_pricing(m, 2.0)?;
    let mut seen: Vec<Vec<usize>> = Vec::new();
    for v in samples {
        crate::model::check_dim(m, v.m())?;
        if v.values().contains(&2.0) {
            continue;
        }
        let set: Vec<usize> = (0..m).filter(|&j| v.values()[j] == 1.0).collect();
        if set.is_empty() || seen.contains(&set) {
            continue;
        }
        menu.push(MenuEntry::new(Lottery::uniform_on(m, &set)?, 1.0)?)?;
        seen.push(set);
    }
    Ok(menu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverfitConfig {
    pub m: usize,
    pub delta: f64,
    pub sample_n: usize,
    pub eval_n: usize,
    /// Largest sample the LP column is computed for; beyond it the column is NaN.
    pub lp_cap: usize,
}

impl Default for OverfitConfig {
    fn default() -> Self {
        OverfitConfig {
            m: 64,
            delta: 0.1,
            sample_n: 200,
            eval_n: 10_000,
            lp_cap: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverfitReport {
    pub seed: u64,
    pub naive_on_sample: f64,
    pub naive_on_fresh: f64,
    pub price1_on_sample: f64,
    pub price1_on_fresh: f64,
    pub lp_on_sample: f64,
}

/// Fits on `sample_n` draws from stream `seed`, evaluates on `eval_n` fresh
/// draws from stream `seed + 1`.
pub fn overfit_experiment(cfg: &OverfitConfig, seed: u64) -> Result<OverfitReport> {
    let law = Arc::new(OverfitProductParams::new(cfg.m, cfg.delta)?);
    if cfg.sample_n == 0 || cfg.eval_n == 0 {
        return Err(Error::param("sample_n/eval_n", "must be positive"));
    }
    let samples = Sampler::new(law.clone(), seed).draw_n(cfg.sample_n);
    let fit = ExplicitDistribution::uniform(samples.clone())?;
    let fresh = ExplicitDistribution::uniform(Sampler::new(law, seed.wrapping_add(1)).draw_n(cfg.eval_n))?;
    let naive = naive_overfit_menu(&samples)?;
    let price1 = Menu::item_pricing(cfg.m, 1.0)?;
    let lp_on_sample = if cfg.sample_n <= cfg.lp_cap {
        optimal_menu(&fit.merge_duplicates())?.1.objective
    } else {
        f64::NAN
    };
    Ok(OverfitReport {
        seed,
        naive_on_sample: naive.expected_revenue(&fit)?,
        naive_on_fresh: naive.expected_revenue(&fresh)?,
        price1_on_sample: price1.expected_revenue(&fit)?,
        price1_on_fresh: price1.expected_revenue(&fresh)?,
        lp_on_sample,
    })
}

/// One entry per point: the uniform lottery on its set at price `2^{z−1}`.
pub fn lower_bound_menu(sub: &SparseSubsample) -> Result<Menu> {
    lower_bound_menu_from(sub.params.m, &sub.points, sub.distribution.len())
}

/// [`lower_bound_menu`] from bare metadata; `support_len` must match the point count.
pub fn lower_bound_menu_from(m: usize, points: &[SpreadPoint], support_len: usize) -> Result<Menu> {
    if points.len() != support_len {
        return Err(Error::MissingMetadata(format!(
            "{} (S, z) records for {} support points",
            points.len(),
            support_len
        )));
    }
    let mut menu = Menu::empty(m);
    for p in points {
        let price = 2f64.powi(p.z as i32 - 1);
        menu.push(MenuEntry::new(Lottery::uniform_on(m, &p.set)?, price)?)?;
    }
    Ok(menu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundConfig {
    pub m: usize,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "K")]
    pub k_points: usize,
    pub rule: IntersectionRule,
    pub effort: SubsampleEffort,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub seed: u64,
    pub lb_menu_revenue: f64,
    pub item_baseline_revenue: f64,
    pub best_item_price: f64,
    /// `lb_menu_revenue / item_baseline_revenue`.
    pub ratio: f64,
    /// Fraction of support points that buy their own entry.
    pub own_entry_rate: f64,
}

/// Exact revenues of the lower-bound menu and the best doubling price on a
/// sparse subsample.
pub fn lower_bound_experiment(cfg: &LowerBoundConfig, seed: u64) -> Result<LowerBoundReport> {
    let params = EqualRevenueSpreadParams::new(cfg.m, cfg.h)?;
    let sub = sparse_subsample(params, cfg.k_points, seed, cfg.rule, cfg.effort)?;
    lower_bound_report(&sub, seed)
}

pub fn lower_bound_report(sub: &SparseSubsample, seed: u64) -> Result<LowerBoundReport> {
    let menu = lower_bound_menu(sub)?;
    let d = &sub.distribution;
    let lb = menu.expected_revenue(d)?;
    let base = item_pricing_baseline(d, sub.params.h)?;
    let mut own = 0usize;
    for (i, v) in d.support().iter().enumerate() {
        if menu.choose(v)? == crate::model::Choice::Entry(i) {
            own += 1;
        }
    }
    Ok(LowerBoundReport {
        seed,
        lb_menu_revenue: lb,
        item_baseline_revenue: base.revenue,
        best_item_price: base.price,
        ratio: lb / base.revenue,
        own_entry_rate: own as f64 / d.len() as f64,
    })
}
