//! Rounding a menu onto a lottery cover with a small price grid.
//!
//! Entries are grouped into price levels `(1+δ)^{k−1} < p ≤ (1+δ)^k`. An entry
//! `(x, p)` at level `k` becomes
//!
//! ```text
//! x' = ξ((1−ε)^{K−k} x)
//! p' = ⌊(1−ε)^K p / ε⌋·ε − 2kε
//! ```
//!
//! where ξ is the cover's rounding map and `K` the top level. Cheaper levels
//! lose more allocation and less price, so no buyer drifts to a cheaper
//! level, and every buyer pays at least `(1−δ)(1−ε)^K p − (2K+1)ε`.

use serde::{Deserialize, Serialize};

use crate::cover::{CoverKind, CoverSpec};
use crate::error::{Error, Result};
use crate::model::{Menu, MenuEntry};

/// Prices up to this far above `H` are treated as `H`.
pub const PRICE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundingParams {
    pub epsilon: f64,
    pub delta: f64,
    #[serde(rename = "H")]
    pub h: f64,
    /// Number of price levels.
    #[serde(rename = "K")]
    pub k: u32,
    pub cover: CoverSpec,
}

impl RoundingParams {
    /// `delta` defaults to `√ε`.
    pub fn new(epsilon: f64, delta: Option<f64>, h: f64, cover: CoverSpec) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param("epsilon", format!("{epsilon} not in (0, 1)")));
        }
        let delta = delta.unwrap_or_else(|| epsilon.sqrt());
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param("delta", format!("{delta} not in (0, 1)")));
        }
        if !(h >= 1.0 && h.is_finite()) {
            return Err(Error::param("H", format!("{h} < 1")));
        }
        Ok(RoundingParams {
            epsilon,
            delta,
            h,
            k: top_level(h, delta),
            cover,
        })
    }

    /// Cover of `kind` over `m` items sharing `ε` and `H`.
    pub fn with_cover(epsilon: f64, delta: Option<f64>, h: f64, kind: CoverKind, m: usize) -> Result<Self> {
        let cover = CoverSpec::new(kind, epsilon, m, h)?;
        RoundingParams::new(epsilon, delta, h, cover)
    }

    /// Smallest `k ≥ 1` with `p ≤ (1+δ)^k`.
    pub fn level(&self, p: f64) -> u32 {
        level(p, self.delta)
    }

    /// `((1−δ)(1−ε)^K, (2K+1)ε)`.
    pub fn guarantee_bound(&self) -> (f64, f64) {
        proof_constants(self.epsilon, self.delta, self.k)
    }

    /// Rounded price for an entry of price `p` at level `k` (may be ≤ 0).
    pub fn rounded_price(&self, p: f64, k: u32) -> f64 {
        let scaled = (1.0 - self.epsilon).powi(self.k as i32) * p;
        (scaled / self.epsilon).floor() * self.epsilon - 2.0 * f64::from(k) * self.epsilon
    }

    /// Allocation scale `(1−ε)^{K−k}` applied before the cover map.
    pub fn level_scale(&self, k: u32) -> f64 {
        (1.0 - self.epsilon).powi((self.k - k) as i32)
    }
}

/// Smallest `k ≥ 1` with `p ≤ (1+δ)^k`, decided by direct comparison.
pub fn level(p: f64, delta: f64) -> u32 {
    let base = 1.0 + delta;
    let mut k = ((p.ln() / base.ln()).ceil().max(1.0)) as u32;
    while k > 1 && p <= base.powi(k as i32 - 1) {
        k -= 1;
    }
    while p > base.powi(k as i32) {
        k += 1;
    }
    k
}

/// Smallest `K ≥ 1` with `(1+δ)^K ≥ H`.
pub fn top_level(h: f64, delta: f64) -> u32 {
    level(h, delta)
}

/// The multiplicative and additive constants of the rounding guarantee.
pub fn proof_constants(epsilon: f64, delta: f64, k: u32) -> (f64, f64) {
    (
        (1.0 - delta) * (1.0 - epsilon).powi(k as i32),
        f64::from(2 * k + 1) * epsilon,
    )
}

/// Applies the level rounding to every entry. Entries whose rounded price is
/// not positive are dropped.
pub fn round_menu(menu: &Menu, rp: &RoundingParams) -> Result<Menu> {
    if menu.m() != rp.cover.m {
        return Err(Error::IncompatibleCover(format!(
            "cover over {} items, menu over {}",
            rp.cover.m,
            menu.m()
        )));
    }
    let mut out = Menu::empty(menu.m());
    for e in menu.entries() {
        let mut p = e.price();
        if !(p > 0.0 && p <= rp.h * (1.0 + PRICE_TOL)) {
            return Err(Error::PriceOutOfRange { price: p, h: rp.h });
        }
        p = p.min(rp.h);
        let k = rp.level(p);
        let price = rp.rounded_price(p, k);
        if price <= 0.0 {
            continue;
        }
        let lottery = rp.cover.round(&e.lottery().scaled(rp.level_scale(k)))?;
        out.push(MenuEntry::new(lottery, price)?)?;
    }
    Ok(out)
}

/// `⌈(H²/(2ε²))·(C + ln(2/failure_prob))⌉` samples, where `C` is the log of the
/// number of candidate menus.
pub fn sample_size_for_cover(cover_count_log: f64, h: f64, epsilon: f64, failure_prob: f64) -> Result<u64> {
    if !(cover_count_log >= 0.0 && cover_count_log.is_finite()) {
        return Err(Error::param("cover_count_log", format!("{cover_count_log} is negative")));
    }
    if !(h > 0.0 && epsilon > 0.0 && failure_prob > 0.0 && failure_prob < 2.0) {
        return Err(Error::param("H/epsilon/failure_prob", "must be positive (failure_prob < 2)"));
    }
    let t = h * h / (2.0 * epsilon * epsilon) * (cover_count_log + (2.0 / failure_prob).ln());
    Ok(t.ceil().max(1.0) as u64)
}

/// Largest rounding ε (with `δ = √ε`) whose guarantee constants satisfy
/// `(1−δ)(1−ε)^K ≥ 1 − target` and `(2K+1)ε ≤ target`.
pub fn epsilon_for_target(target: f64, h: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::param("epsilon", format!("{target} not in (0, 1)")));
    }
    if !(h >= 1.0 && h.is_finite()) {
        return Err(Error::param("H", format!("{h} < 1")));
    }
    let mut eps = target;
    while eps > 1e-12 {
        let delta = eps.sqrt();
        let (mult, add) = proof_constants(eps, delta, top_level(h, delta));
        if mult >= 1.0 - target && add <= target {
            return Ok(eps);
        }
        eps *= 0.95;
    }
    Err(Error::param("epsilon", format!("no rounding ε reaches target {target} at H={h}")))
}
