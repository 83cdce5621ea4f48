use menuforge_core::distribution::{HittingSetInstance, TwoLevel};
use menuforge_core::lp::{brute_force_k_optimal, BruteForceGrid};
use menuforge_core::maxrev::{
    brute_force_k_menu, derandomize_lotteries, greedy_k_item_menu, reduce_hitting_set, revenue_upper_bound,
    KMenuProblem, BRUTE_FORCE_BUDGET,
};
use menuforge_core::{Lottery, Menu, MenuEntry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(rng: &mut ChaCha8Rng, m: usize, n: usize, h: f64) -> HittingSetInstance {
    let sets = (0..n)
        .map(|_| {
            let size = rng.random_range(1..=m.min(3));
            (0..size).map(|_| rng.random_range(0..m)).collect()
        })
        .collect();
    HittingSetInstance::new(m, h, sets).unwrap()
}

fn random_menu(rng: &mut ChaCha8Rng, m: usize, k: usize) -> Menu {
    let mut menu = Menu::empty(m);
    for _ in 0..k {
        let raw: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
        let mass = raw.iter().sum::<f64>() + rng.random::<f64>();
        let x = Lottery::new(raw.iter().map(|a| a / mass).collect()).unwrap();
        menu.push(MenuEntry::new(x, rng.random_range(0.5..=4.0)).unwrap()).unwrap();
    }
    menu
}

#[test]
fn greedy_is_within_one_minus_one_over_e() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let bound = 1.0 - (-1.0f64).exp();
    for _ in 0..50 {
        let m = rng.random_range(2..=12);
        let n = rng.random_range(1..=10);
        let k = rng.random_range(1..=3);
        let p = reduce_hitting_set(&random_instance(&mut rng, m, n, 4.0), k).unwrap();
        let (_, greedy) = greedy_k_item_menu(&p).unwrap();
        let (_, best) = brute_force_k_menu(&p, BRUTE_FORCE_BUDGET).unwrap();
        assert!(greedy <= best + 1e-12);
        assert!(greedy >= bound * best - 1e-12, "{greedy} vs {best}");
    }
}

#[test]
fn zero_one_optimum_is_the_best_hit_fraction() {
    // The grid contains every item pricing at 1, so it reaches the hit
    // fraction; the claim is that no grid lottery menu does better.
    let grid = BruteForceGrid {
        prices: vec![0.25, 0.5, 0.75, 1.0],
        levels: vec![0.0, 0.25, 0.5, 0.75, 1.0],
        budget: 5_000_000,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..12 {
        let m = rng.random_range(2..=3);
        let n = rng.random_range(1..=4);
        let k = rng.random_range(1..=2);
        let inst = random_instance(&mut rng, m, n, 2.0);
        let d = inst.valuations(TwoLevel::ZeroOne).unwrap();
        let p = KMenuProblem::new(d.clone(), k, 1.0, TwoLevel::ZeroOne).unwrap();
        let (items, hit) = brute_force_k_menu(&p, BRUTE_FORCE_BUDGET).unwrap();
        let (menu, grid_best) = brute_force_k_optimal(&d, &grid, k).unwrap();
        assert!(menu.len() <= k);
        assert!((grid_best - hit).abs() < 1e-12, "{:?} k={k}: grid {grid_best} vs hit {hit} ({items:?})", inst.sets);
    }
}

#[test]
fn upper_bound_dominates_revenue() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for trial in 0..1000 {
        let m = rng.random_range(1..=6);
        let n = rng.random_range(1..=8);
        let h = rng.random_range(1.5..6.0);
        let inst = random_instance(&mut rng, m, n, h);
        let p = if trial % 2 == 0 {
            reduce_hitting_set(&inst, 2).unwrap()
        } else {
            KMenuProblem::new(inst.valuations(TwoLevel::ZeroOne).unwrap(), 2, 1.0, TwoLevel::ZeroOne).unwrap()
        };
        let k = rng.random_range(0..=3);
        let menu = random_menu(&mut rng, m, k);
        let rev = menu.expected_revenue(p.distribution()).unwrap();
        assert!(revenue_upper_bound(&menu, &p).unwrap() >= rev - 1e-12);
    }
}

#[test]
fn derandomized_set_beats_independent_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..1000 {
        let m = rng.random_range(1..=6);
        let n = rng.random_range(1..=8);
        let p = reduce_hitting_set(&random_instance(&mut rng, m, n, 3.0), 2).unwrap();
        let menu = random_menu(&mut rng, m, 2);
        let r = derandomize_lotteries(&menu, &p).unwrap();
        assert!(r.items.len() <= 2);
        let start = r.expectations[0];
        let end = *r.expectations.last().unwrap();
        assert!((end - p.hit_weight(&r.items)).abs() < 1e-12);
        assert!(end >= start - 1e-12);
        // the hitting set found by rounding is worth at least the bound's
        // hit-fraction term
        let item_rev = p.item_revenue(&r.items);
        assert!(item_rev >= p.high() * start - 1e-12);
    }
}
