use std::sync::Arc;

use menuforge_core::cover::{CoverKind, CoverSpec};
use menuforge_core::distribution::{
    explicit_from_samples, EqualRevenueSpreadParams, HittingSetInstance, MonotoneUniformParams, OverfitProductParams,
    TwoLevel, ValuationLaw,
};
use menuforge_core::maxrev::{derandomize_lotteries, KMenuProblem};
use menuforge_core::model::{utility, TIE_TOL};
use menuforge_core::rounding::{round_menu, RoundingParams};
use menuforge_core::{Choice, ExplicitDistribution, Lottery, Menu, MenuEntry, Sampler, TailForm, Valuation};
use proptest::prelude::*;

const CASES: u32 = 1000;

fn lottery(m: usize) -> impl Strategy<Value = Lottery> {
    (prop::collection::vec(0.0..1.0f64, m), 0.0..1.0f64, 0usize..4).prop_map(move |(raw, slack, zeros)| {
        let mut raw = raw;
        for r in raw.iter_mut().take(zeros.min(m.saturating_sub(1))) {
            *r = 0.0;
        }
        let total: f64 = raw.iter().sum::<f64>() + slack;
        if total == 0.0 {
            return Lottery::zero(m);
        }
        // scaling can overshoot by an ulp; the constructor tolerates that
        Lottery::new(raw.iter().map(|x| x / total).collect()).unwrap()
    })
}

fn cover_kind() -> impl Strategy<Value = CoverKind> {
    prop_oneof![
        Just(CoverKind::Additive),
        Just(CoverKind::Multiplicative),
        Just(CoverKind::MonotoneTail)
    ]
}

fn cover_and_lottery() -> impl Strategy<Value = (CoverSpec, Lottery)> {
    (cover_kind(), 0.01..0.6f64, 1usize..=6, 1.0..20.0f64).prop_flat_map(|(kind, eps, m, h)| {
        let spec = CoverSpec::new(kind, eps, m, h).unwrap();
        lottery(m).prop_map(move |x| (spec, x))
    })
}

fn values(m: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..=hi, m)
}

fn menu(m: usize, max_price: f64) -> impl Strategy<Value = Menu> {
    prop::collection::vec((lottery(m), 0.01..=max_price), 0..=8).prop_map(move |es| {
        Menu::new(m, es.into_iter().map(|(x, p)| MenuEntry::new(x, p).unwrap()).collect()).unwrap()
    })
}

fn on_grid(grid: &[f64], x: f64) -> bool {
    grid.binary_search_by(|g| g.total_cmp(&x)).is_ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn rounding_is_idempotent((spec, x) in cover_and_lottery()) {
        let y = spec.round(&x).unwrap();
        prop_assert_eq!(spec.round(&y).unwrap(), y.clone());
        prop_assert!(spec.contains(&y));
    }

    #[test]
    fn rounding_dominates_from_below((spec, x) in cover_and_lottery()) {
        let y = spec.round(&x).unwrap();
        match spec.kind {
            CoverKind::MonotoneTail => {
                let (ty, tx) = (y.to_tail_form(), x.to_tail_form());
                for (a, b) in ty.tails().iter().zip(tx.tails()) {
                    prop_assert!(a <= b, "{} > {}", a, b);
                }
            }
            _ => {
                for (a, b) in y.probs().iter().zip(x.probs()) {
                    prop_assert!(a <= b, "{} > {}", a, b);
                }
            }
        }
    }

    #[test]
    fn rounded_lotteries_lie_on_the_grid((spec, x) in cover_and_lottery()) {
        let y = spec.round(&x).unwrap();
        let grid = spec.grid_values();
        prop_assert!(y.mass() <= 1.0 + 1e-9);
        let coords: Vec<f64> = match spec.kind {
            CoverKind::MonotoneTail => y.to_tail_form().tails().to_vec(),
            _ => y.probs().to_vec(),
        };
        for c in coords {
            prop_assert!(on_grid(&grid, c), "{} not on the grid", c);
        }
    }

    #[test]
    fn cover_inequalities_hold(
        (spec, x, raw) in cover_and_lottery().prop_flat_map(|(s, x)| {
            let m = s.m;
            (Just(s), Just(x), values(m, 0.0, 1.0))
        })
    ) {
        let y = spec.round(&x).unwrap();
        let eps = spec.epsilon;
        // map the unit draw into the class the cover is certified for
        let v: Vec<f64> = match spec.kind {
            CoverKind::Additive => raw,
            CoverKind::Multiplicative => raw.iter().map(|r| 1.0 + r * (spec.h - 1.0)).collect(),
            CoverKind::MonotoneTail => {
                let mut v: Vec<f64> = raw.iter().map(|r| 1.0 + r * (spec.h - 1.0)).collect();
                v.sort_by(f64::total_cmp);
                v
            }
        };
        let v = Valuation::new(v);
        let (a, b) = (v.value_of(&x).unwrap(), v.value_of(&y).unwrap());
        match spec.kind {
            CoverKind::Additive => prop_assert!((a - b).abs() <= eps + 1e-12, "{} vs {}", a, b),
            _ => {
                prop_assert!(a >= b - 1e-12, "{} < {}", a, b);
                prop_assert!(b >= (1.0 - eps) * a - eps - 1e-12, "{} vs {}", b, a);
            }
        }
    }

    #[test]
    fn choice_is_incentive_compatible_and_rational(
        (menu, v) in (1usize..=5).prop_flat_map(|m| (menu(m, 6.0), values(m, 0.0, 6.0)))
    ) {
        let v = Valuation::new(v);
        let choice = menu.choose(&v).unwrap();
        let u = match choice {
            Choice::Abstain => 0.0,
            Choice::Entry(k) => utility(&v, &menu.entries()[k]).unwrap(),
        };
        prop_assert!(u >= -TIE_TOL);
        for e in menu.entries() {
            prop_assert!(u >= utility(&v, e).unwrap() - TIE_TOL);
        }
        prop_assert!(menu.revenue(&v).unwrap() >= 0.0);
        prop_assert_eq!(menu.choose(&v).unwrap(), choice);
        // dropping any entry cannot raise the utility obtained
        for drop in 0..menu.len() {
            let rest: Vec<MenuEntry> = menu.entries().iter().enumerate()
                .filter(|&(k, _)| k != drop).map(|(_, e)| e.clone()).collect();
            let smaller = Menu::new(menu.m(), rest).unwrap();
            let u2 = match smaller.choose(&v).unwrap() {
                Choice::Abstain => 0.0,
                Choice::Entry(k) => utility(&v, &smaller.entries()[k]).unwrap(),
            };
            prop_assert!(u2 <= u + TIE_TOL);
        }
    }

    #[test]
    fn tail_form_round_trips(x in (1usize..=8).prop_flat_map(lottery)) {
        let t = x.to_tail_form();
        let back = t.to_lottery();
        for (a, b) in back.probs().iter().zip(x.probs()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        prop_assert_eq!(back.to_tail_form(), t);
    }

    #[test]
    fn tail_vectors_survive_a_lottery_trip(raw in prop::collection::vec(0.0..=1.0f64, 1..=8)) {
        let mut tails = raw;
        tails.sort_by(|a, b| b.total_cmp(a));
        let t = TailForm::new(tails).unwrap();
        let back = t.to_lottery().to_tail_form();
        for (a, b) in back.tails().iter().zip(t.tails()) {
            prop_assert!((a - b).abs() <= 2.0 * f64::EPSILON * b.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn grid_tails_survive_a_lottery_trip(
        tails in (0.01..0.6f64, 1.0..20.0f64, 1usize..=8).prop_flat_map(|(eps, h, m)| {
            let grid = CoverSpec::monotone_tail(eps, m, h).unwrap().grid_values();
            prop::collection::vec(prop::sample::select(grid), m)
        })
    ) {
        let mut tails = tails;
        tails.sort_by(|a, b| b.total_cmp(a));
        let t = TailForm::new(tails).unwrap();
        prop_assert_eq!(t.to_lottery().to_tail_form(), t);
    }

    #[test]
    fn conditional_expectations_never_drop(
        (m, sets, lots) in (1usize..=5).prop_flat_map(|m| (
            Just(m),
            prop::collection::vec(prop::collection::vec(0..m, 1..=m), 1..=8usize),
            prop::collection::vec(prop::collection::vec(0u32..=16, m), 1..=3),
        ))
    ) {
        // sixteenths and power-of-two point counts keep every quantity exact
        let n = sets.len().next_power_of_two();
        let mut sets = sets;
        while sets.len() < n {
            sets.push(sets[sets.len() % sets.len().max(1)].clone());
        }
        let d = HittingSetInstance::new(m, 2.0, sets).unwrap().valuations(TwoLevel::ZeroOne).unwrap();
        let p = KMenuProblem::new(d, lots.len(), 1.0, TwoLevel::ZeroOne).unwrap();
        let mut menu = Menu::empty(m);
        for raw in lots {
            let mut left = 16u32;
            let probs: Vec<f64> = raw.iter().map(|&q| {
                let q = q.min(left);
                left -= q;
                f64::from(q) / 16.0
            }).collect();
            menu.push(MenuEntry::new(Lottery::new(probs).unwrap(), 0.5).unwrap()).unwrap();
        }
        let r = derandomize_lotteries(&menu, &p).unwrap();
        for w in r.expectations.windows(2) {
            prop_assert!(w[1] >= w[0], "{:?}", r.expectations);
        }
        prop_assert_eq!(*r.expectations.last().unwrap(), p.hit_weight(&r.items));
    }

    #[test]
    fn menu_rounding_keeps_the_proof_bound(
        (kind, menu, v) in (1usize..=4, prop_oneof![Just(CoverKind::Multiplicative), Just(CoverKind::MonotoneTail)])
            .prop_flat_map(|(m, kind)| (Just(kind), menu(m, 16.0), values(m, 1.0, 16.0)))
    ) {
        let rp = RoundingParams::with_cover(0.04, Some(0.2), 16.0, kind, menu.m()).unwrap();
        let mut v = v;
        if kind == CoverKind::MonotoneTail {
            v.sort_by(f64::total_cmp);
        }
        let v = Valuation::new(v);
        let rounded = round_menu(&menu, &rp).unwrap();
        for e in rounded.entries() {
            prop_assert!(rp.cover.contains(e.lottery()));
        }
        let (mult, add) = rp.guarantee_bound();
        let p = menu.revenue(&v).unwrap();
        let q = rounded.revenue(&v).unwrap();
        prop_assert!(q >= mult * p - add - 1e-9, "q'={} p={}", q, p);
        prop_assert_eq!(round_menu(&menu, &rp).unwrap(), rounded);
    }

    #[test]
    fn price_gaps_shrink_across_levels(
        a in 0.01..16.0f64,
        b in 0.01..16.0f64,
        eps in 0.005..0.2f64,
        delta in 0.05..0.5f64,
    ) {
        // for a pricier entry at a strictly higher level:
        // p' − q' < (1−ε)^K (p − q) − ε
        let rp = RoundingParams::with_cover(eps, Some(delta), 16.0, CoverKind::Multiplicative, 2).unwrap();
        let (p, q) = if a >= b { (a, b) } else { (b, a) };
        let (k, kq) = (rp.level(p), rp.level(q));
        if k > kq {
            let scale = (1.0 - eps).powi(rp.k as i32);
            let gap = rp.rounded_price(p, k) - rp.rounded_price(q, kq);
            prop_assert!(gap < scale * (p - q) - eps + 1e-12, "gap {} vs {}", gap, scale * (p - q) - eps);
        }
    }

    #[test]
    fn samplers_replay_under_a_seed(seed in any::<u64>(), family in 0usize..3) {
        let law: Arc<dyn ValuationLaw> = match family {
            0 => Arc::new(OverfitProductParams::new(16, 0.1).unwrap()),
            1 => Arc::new(EqualRevenueSpreadParams::new(12, 8.0).unwrap()),
            _ => Arc::new(MonotoneUniformParams::new(5, 4.0).unwrap()),
        };
        let a = Sampler::new(law.clone(), seed).draw_n(20);
        let b = Sampler::new(law, seed).draw_n(20);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn empirical_revenue_is_the_sample_mean(
        (menu, samples) in (1usize..=4).prop_flat_map(|m| (
            menu(m, 4.0),
            prop::collection::vec(values(m, 0.0, 4.0), 1..=30),
        ))
    ) {
        let samples: Vec<Valuation> = samples.into_iter().map(Valuation::new).collect();
        let d: ExplicitDistribution = explicit_from_samples(samples.clone()).unwrap();
        prop_assert_eq!(d.len(), samples.len());
        let mean = samples.iter().map(|v| menu.revenue(v).unwrap()).sum::<f64>() / samples.len() as f64;
        prop_assert!((menu.expected_revenue(&d).unwrap() - mean).abs() <= 1e-12);
    }
}
