//! `menuforge`: optimal and rounded lottery menus from the command line.
//!
//! Every command computes everything in memory first and only then writes its
//! files, so a failed run leaves no partial output behind.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use menuforge_core::cover::{enumerate_cover, CoverEnumeration, CoverKind, CoverSpec};
use menuforge_core::distribution::{
    DistributionSpec, Family, HittingSetInstance, IntersectionRule, SubsampleEffort, TwoLevel,
};
use menuforge_core::lp::{build_lp, optimal_menu};
use menuforge_core::maxrev::{brute_force_k_menu, greedy_items, KMenuProblem, BRUTE_FORCE_BUDGET};
use menuforge_core::pipeline::{
    item_pricing_baseline, lower_bound_experiment, overfit_experiment, run_pipeline, LowerBoundConfig, Mode,
    OverfitConfig, PipelineConfig,
};
use menuforge_core::rounding::{round_menu, RoundingParams};
use menuforge_core::{ExplicitDistribution, Lottery, Menu, Valuation};

mod error;
mod output;

use error::{CliError, CliResult};
use output::{fmt_f64, read_json, read_text, to_json, Cell, Csv, Outputs};

#[derive(Parser)]
#[command(name = "menuforge", version, about = "Revenue-maximizing lottery menus for a unit-demand buyer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Revenue of a menu on one valuation or a distribution
    Evaluate(EvaluateArgs),
    /// Optimal menu of a finite (or sampled) distribution
    SolveLp(SolveLpArgs),
    /// Round a menu onto a cover
    RoundMenu(RoundMenuArgs),
    /// Lottery covers
    #[command(subcommand)]
    Cover(CoverCommand),
    /// Sample, solve and round
    Pipeline(PipelineArgs),
    /// Seeded experiments, one CSV row per seed
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Turn a hitting-set instance into a two-level valuation distribution
    ReduceHittingSet(ReduceArgs),
}

fn parse_name<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|e| e.to_string())
}

fn name_of<T: Serialize>(t: &T) -> String {
    match serde_json::to_value(t) {
        Ok(serde_json::Value::String(s)) => s,
        other => panic!("not a unit variant: {other:?}"),
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn load_dist(path: &Path) -> CliResult<DistributionSpec> {
    let spec: DistributionSpec = read_json(path)?;
    spec.validate()?;
    Ok(spec)
}

/// The finite distribution of `spec`, or `samples` draws from it.
fn finite_or_sampled(spec: &DistributionSpec, samples: Option<usize>, seed: u64) -> CliResult<ExplicitDistribution> {
    match (samples, spec.explicit()?) {
        (Some(0), _) => Err(CliError::invalid("--samples must be positive")),
        (Some(n), _) => Ok(ExplicitDistribution::uniform(spec.sampler(seed)?.draw_n(n))?),
        (None, Some(d)) => Ok(d),
        (None, None) => Err(CliError::invalid("distribution has no finite support; pass --samples")),
    }
}

/// Runs `f` for every seed on a pool capped by `MENUFORGE_THREADS`; rows keep seed order.
fn per_seed<T: Send>(seed: u64, runs: usize, f: impl Fn(u64) -> CliResult<T> + Sync) -> CliResult<Vec<T>> {
    if runs == 0 {
        return Err(CliError::invalid("runs must be positive"));
    }
    let threads = match std::env::var("MENUFORGE_THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::invalid(format!("MENUFORGE_THREADS=`{s}` is not a positive integer")))?,
        Err(std::env::VarError::NotPresent) => 0,
        Err(e) => return Err(CliError::invalid(format!("MENUFORGE_THREADS: {e}"))),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::invalid(format!("thread pool: {e}")))?;
    let seeds: Vec<u64> = (0..runs as u64).map(|i| seed.wrapping_add(i)).collect();
    pool.install(|| seeds.par_iter().map(|&s| f(s)).collect())
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    menu: PathBuf,
    /// Distribution JSON
    #[arg(long, required_unless_present = "valuation", conflicts_with = "valuation")]
    dist: Option<PathBuf>,
    /// Valuation JSON
    #[arg(long)]
    valuation: Option<PathBuf>,
    /// Draws used when the distribution has no finite support
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn evaluate(a: &EvaluateArgs) -> CliResult<Outputs> {
    let menu: Menu = read_json(&a.menu)?;
    let mut out = Outputs::default();
    if let Some(path) = &a.valuation {
        let v: Valuation = read_json(path)?;
        v.validate()?;
        out.line("revenue", fmt_f64(menu.revenue(&v)?));
        return Ok(out);
    }
    let spec = load_dist(a.dist.as_deref().expect("clap enforces one source"))?;
    match spec.explicit()? {
        Some(d) => out.line("revenue", fmt_f64(menu.expected_revenue(&d)?)),
        None => {
            if a.samples == 0 {
                return Err(CliError::invalid("--samples must be positive"));
            }
            let (mean, stderr) = menu.estimate_revenue(&mut spec.sampler(a.seed)?, a.samples)?;
            out.line("revenue", fmt_f64(mean));
            out.line("stderr", fmt_f64(stderr));
            out.line("samples", a.samples);
        }
    }
    Ok(out)
}

#[derive(Args)]
struct SolveLpArgs {
    #[arg(long)]
    dist: PathBuf,
    /// Optimal menu, JSON
    #[arg(long)]
    out: PathBuf,
    /// Dense text dump of the full LP
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Solve on this many draws instead of the exact support
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn solve_lp(a: &SolveLpArgs) -> CliResult<Outputs> {
    let d = finite_or_sampled(&load_dist(&a.dist)?, a.samples, a.seed)?.merge_duplicates();
    let (menu, sol) = optimal_menu(&d)?;
    let mut out = Outputs::default();
    out.file(&a.out, to_json(&menu));
    if let Some(path) = &a.dump {
        out.file(path, build_lp(&d).to_dense_text());
    }
    out.line("objective", fmt_f64(sol.objective));
    out.line("points", d.len());
    out.line("entries", menu.len());
    out.line("max_violation", fmt_f64(sol.max_violation));
    Ok(out)
}

#[derive(Args)]
struct RoundingFlags {
    #[arg(long)]
    epsilon: f64,
    /// Level ratio; defaults to the square root of epsilon
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "H")]
    h: f64,
    #[arg(long, default_value = "multiplicative")]
    cover_kind: CoverKind,
}

#[derive(Args)]
struct RoundMenuArgs {
    #[arg(long)]
    menu: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    rounding: RoundingFlags,
}

fn round_menu_cmd(a: &RoundMenuArgs) -> CliResult<Outputs> {
    let menu: Menu = read_json(&a.menu)?;
    let r = &a.rounding;
    let rp = RoundingParams::with_cover(r.epsilon, r.delta, r.h, r.cover_kind, menu.m())?;
    let rounded = round_menu(&menu, &rp)?;
    let (mult, add) = rp.guarantee_bound();
    let mut out = Outputs::default();
    out.file(&a.out, to_json(&rounded));
    out.line("entries", rounded.len());
    out.line("levels", rp.k);
    out.line("delta", fmt_f64(rp.delta));
    out.line("guarantee_multiplier", fmt_f64(mult));
    out.line("guarantee_additive", fmt_f64(add));
    Ok(out)
}

#[derive(Subcommand)]
enum CoverCommand {
    /// Number of lotteries in the cover
    Count(CoverArgs),
    /// List the cover, or only its size past the budget
    Enumerate(EnumerateArgs),
    /// Round one lottery into the cover
    Round(CoverRoundArgs),
}

#[derive(Args)]
struct CoverArgs {
    /// CoverSpec JSON; replaces the individual flags
    #[arg(long, conflicts_with_all = ["kind", "epsilon", "m", "h"])]
    spec: Option<PathBuf>,
    #[arg(long)]
    kind: Option<CoverKind>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long = "H")]
    h: Option<f64>,
}

impl CoverArgs {
    fn spec(&self) -> CliResult<CoverSpec> {
        if let Some(path) = &self.spec {
            return read_json(path);
        }
        let missing = |flag: &str| CliError::invalid(format!("--{flag} is required without --spec"));
        let kind = self.kind.ok_or_else(|| missing("kind"))?;
        let epsilon = self.epsilon.ok_or_else(|| missing("epsilon"))?;
        let m = self.m.ok_or_else(|| missing("m"))?;
        Ok(CoverSpec::new(kind, epsilon, m, self.h.unwrap_or(1.0))?)
    }
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    cover: CoverArgs,
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    /// JSON output; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CoverRoundArgs {
    #[command(flatten)]
    cover: CoverArgs,
    /// Lottery as a JSON array
    #[arg(long)]
    lottery: String,
}

fn cover(c: &CoverCommand) -> CliResult<Outputs> {
    let mut out = Outputs::default();
    match c {
        CoverCommand::Count(a) => {
            let spec = a.spec()?;
            let count = spec.count();
            out.line("count", count.count);
            out.line("exact", count.exact);
            out.line("size_envelope", fmt_f64(spec.size_envelope()));
        }
        CoverCommand::Enumerate(a) => {
            let spec = a.cover.spec()?;
            let json = match enumerate_cover(&spec, u128::from(a.budget)) {
                CoverEnumeration::Lotteries(list) => compact_json(&list),
                CoverEnumeration::CountOnly(count) => compact_json(&count),
            };
            out.file_or_stdout(a.out.as_deref(), json);
        }
        CoverCommand::Round(a) => {
            let spec = a.cover.spec()?;
            let x: Lottery = serde_json::from_str(&a.lottery)
                .map_err(|e| CliError::invalid(format!("--lottery: {e}")))?;
            let y = spec.round(&x)?;
            out.line("lottery", serde_json::to_string(&y).expect("serializable"));
        }
    }
    Ok(out)
}

fn compact_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable") + "\n"
}

/// Pipeline config file: the distribution plus the run parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PipelineFile {
    distribution: DistributionSpec,
    #[serde(flatten)]
    run: PipelineConfig,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output menu, JSON
    #[arg(long)]
    out: PathBuf,
    /// One-row CSV summary
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sample_count: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "H")]
    h: Option<f64>,
    #[arg(long)]
    cover_kind: Option<CoverKind>,
    #[arg(long, value_parser = parse_name::<Mode>)]
    mode: Option<Mode>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    rounding_epsilon: Option<f64>,
}

fn pipeline(a: &PipelineArgs) -> CliResult<Outputs> {
    let mut cfg: PipelineFile = read_json(&a.config)?;
    let run = &mut cfg.run;
    set(&mut run.seed, a.seed);
    set(&mut run.sample_count, a.sample_count);
    set(&mut run.epsilon, a.epsilon);
    set(&mut run.h, a.h);
    set(&mut run.cover_kind, a.cover_kind);
    set(&mut run.mode, a.mode);
    if a.delta.is_some() {
        run.delta = a.delta;
    }
    if a.rounding_epsilon.is_some() {
        run.rounding_epsilon = a.rounding_epsilon;
    }
    cfg.distribution.validate()?;
    cfg.run.validate()?;

    let mut sampler = cfg.distribution.sampler(cfg.run.seed)?;
    let res = run_pipeline(&mut sampler, &cfg.run)?;
    let mut out = Outputs::default();
    out.file(&a.out, to_json(&res.menu));
    let on_sample = res.menu.expected_revenue(&res.sample)?;
    let on_truth = match cfg.distribution.explicit()? {
        Some(d) => res.menu.expected_revenue(&d)?,
        None => f64::NAN,
    };
    if let Some(path) = &a.report {
        let (eps, delta, levels, (mult, add)) = match &res.rounding {
            Some(rp) => (rp.epsilon, rp.delta, u64::from(rp.k), rp.guarantee_bound()),
            None => (f64::NAN, f64::NAN, 0, (1.0, 0.0)),
        };
        let mut csv = Csv::new(
            "pipeline",
            &cfg,
            &[
                "seed",
                "mode",
                "sample_count",
                "distinct_points",
                "lp_objective",
                "lp_entries",
                "menu_entries",
                "revenue_on_sample",
                "revenue_on_distribution",
                "rounding_epsilon",
                "delta",
                "levels",
                "guarantee_multiplier",
                "guarantee_additive",
            ],
        );
        csv.row(&[
            Cell::Int(cfg.run.seed),
            Cell::Text(name_of(&cfg.run.mode)),
            Cell::Int(cfg.run.sample_count as u64),
            Cell::Int(res.sample.len() as u64),
            Cell::Float(res.lp.objective),
            Cell::Int(res.lp_menu.len() as u64),
            Cell::Int(res.menu.len() as u64),
            Cell::Float(on_sample),
            Cell::Float(on_truth),
            Cell::Float(eps),
            Cell::Float(delta),
            Cell::Int(levels),
            Cell::Float(mult),
            Cell::Float(add),
        ]);
        out.file(path, csv.finish());
    }
    out.line("entries", res.menu.len());
    out.line("lp_objective", fmt_f64(res.lp.objective));
    out.line("revenue_on_sample", fmt_f64(on_sample));
    Ok(out)
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Naive sample-fitted menu against pricing every item at 1
    Overfit(OverfitArgs),
    /// Lower-bound menu against the best doubling price
    Lowerbound(LowerboundArgs),
    /// Best doubling item price
    Baseline(BaselineArgs),
    /// Greedy k-item menus against exhaustive search
    GreedyVsOpt(GreedyArgs),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OverfitParams {
    m: usize,
    delta: f64,
    sample_n: usize,
    eval_n: usize,
    lp_cap: usize,
    seed: u64,
    runs: usize,
}

impl Default for OverfitParams {
    fn default() -> Self {
        let c = OverfitConfig::default();
        OverfitParams {
            m: c.m,
            delta: c.delta,
            sample_n: c.sample_n,
            eval_n: c.eval_n,
            lp_cap: c.lp_cap,
            seed: 0,
            runs: 1,
        }
    }
}

#[derive(Args)]
struct OverfitArgs {
    /// JSON with any of the flag fields; flags win
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    sample_n: Option<usize>,
    #[arg(long)]
    eval_n: Option<usize>,
    #[arg(long)]
    lp_cap: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Seeds `seed, seed+1, …`
    #[arg(long)]
    runs: Option<usize>,
}

fn load_params<T: DeserializeOwned + Default>(config: Option<&Path>) -> CliResult<T> {
    match config {
        Some(path) => read_json(path),
        None => Ok(T::default()),
    }
}

fn overfit(a: &OverfitArgs) -> CliResult<Outputs> {
    let mut p: OverfitParams = load_params(a.config.as_deref())?;
    set(&mut p.m, a.m);
    set(&mut p.delta, a.delta);
    set(&mut p.sample_n, a.sample_n);
    set(&mut p.eval_n, a.eval_n);
    set(&mut p.lp_cap, a.lp_cap);
    set(&mut p.seed, a.seed);
    set(&mut p.runs, a.runs);
    let cfg = OverfitConfig {
        m: p.m,
        delta: p.delta,
        sample_n: p.sample_n,
        eval_n: p.eval_n,
        lp_cap: p.lp_cap,
    };
    let reports = per_seed(p.seed, p.runs, |s| Ok(overfit_experiment(&cfg, s)?))?;
    let mut csv = Csv::new(
        "experiment overfit",
        &p,
        &[
            "seed",
            "naive_on_sample",
            "naive_on_fresh",
            "price1_on_sample",
            "price1_on_fresh",
            "lp_on_sample",
        ],
    );
    for r in reports {
        csv.row(&[
            Cell::Int(r.seed),
            Cell::Float(r.naive_on_sample),
            Cell::Float(r.naive_on_fresh),
            Cell::Float(r.price1_on_sample),
            Cell::Float(r.price1_on_fresh),
            Cell::Float(r.lp_on_sample),
        ]);
    }
    let mut out = Outputs::default();
    out.file_or_stdout(a.out.as_deref(), csv.finish());
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LowerboundParams {
    m: usize,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "K")]
    k_points: usize,
    rule: IntersectionRule,
    per_point: usize,
    restarts: usize,
    seed: u64,
    runs: usize,
}

impl Default for LowerboundParams {
    fn default() -> Self {
        let effort = SubsampleEffort::default();
        LowerboundParams {
            m: 30,
            h: 8.0,
            k_points: 100,
            rule: IntersectionRule::Strict,
            per_point: effort.per_point,
            restarts: effort.restarts,
            seed: 0,
            runs: 1,
        }
    }
}

#[derive(Args)]
struct LowerboundArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long = "H")]
    h: Option<f64>,
    /// Support size of the subsample
    #[arg(long = "K")]
    k_points: Option<usize>,
    /// strict or half-set
    #[arg(long, value_parser = parse_name::<IntersectionRule>)]
    rule: Option<IntersectionRule>,
    #[arg(long)]
    per_point: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
}

fn lowerbound(a: &LowerboundArgs) -> CliResult<Outputs> {
    let mut p: LowerboundParams = load_params(a.config.as_deref())?;
    set(&mut p.m, a.m);
    set(&mut p.h, a.h);
    set(&mut p.k_points, a.k_points);
    set(&mut p.rule, a.rule);
    set(&mut p.per_point, a.per_point);
    set(&mut p.restarts, a.restarts);
    set(&mut p.seed, a.seed);
    set(&mut p.runs, a.runs);
    let cfg = LowerBoundConfig {
        m: p.m,
        h: p.h,
        k_points: p.k_points,
        rule: p.rule,
        effort: SubsampleEffort {
            per_point: p.per_point,
            restarts: p.restarts,
        },
    };
    let reports = per_seed(p.seed, p.runs, |s| Ok(lower_bound_experiment(&cfg, s)?))?;
    let mut csv = Csv::new(
        "experiment lowerbound",
        &p,
        &[
            "seed",
            "lb_menu_revenue",
            "item_baseline_revenue",
            "best_item_price",
            "ratio",
            "own_entry_rate",
        ],
    );
    for r in reports {
        csv.row(&[
            Cell::Int(r.seed),
            Cell::Float(r.lb_menu_revenue),
            Cell::Float(r.item_baseline_revenue),
            Cell::Float(r.best_item_price),
            Cell::Float(r.ratio),
            Cell::Float(r.own_entry_rate),
        ]);
    }
    let mut out = Outputs::default();
    out.file_or_stdout(a.out.as_deref(), csv.finish());
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BaselineParams {
    distribution: Option<DistributionSpec>,
    /// Largest value present when absent.
    #[serde(rename = "H", skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
    /// Draws per seed for distributions without a finite support.
    samples: usize,
    seed: u64,
    runs: usize,
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams {
            distribution: None,
            h: None,
            samples: 10_000,
            seed: 0,
            runs: 1,
        }
    }
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Distribution JSON
    #[arg(long)]
    dist: Option<PathBuf>,
    #[arg(long = "H")]
    h: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
}

fn baseline(a: &BaselineArgs) -> CliResult<Outputs> {
    let mut p: BaselineParams = load_params(a.config.as_deref())?;
    if let Some(path) = &a.dist {
        p.distribution = Some(load_dist(path)?);
    }
    if a.h.is_some() {
        p.h = a.h;
    }
    set(&mut p.samples, a.samples);
    set(&mut p.seed, a.seed);
    set(&mut p.runs, a.runs);
    let spec = p
        .distribution
        .clone()
        .ok_or_else(|| CliError::invalid("no distribution: pass --dist or set it in --config"))?;
    spec.validate()?;
    if let Some(h) = p.h {
        if !(h >= 1.0 && h.is_finite()) {
            return Err(CliError::invalid(format!("H={h} must be at least 1")));
        }
    }
    let finite = spec.explicit()?;
    if finite.is_none() && p.samples == 0 {
        return Err(CliError::invalid("samples must be positive"));
    }
    let rows = per_seed(p.seed, p.runs, |s| {
        let d = match &finite {
            Some(d) => d.clone(),
            None => ExplicitDistribution::uniform(spec.sampler(s)?.draw_n(p.samples))?,
        };
        let h = p.h.unwrap_or_else(|| d.max_value().max(1.0));
        let best = item_pricing_baseline(&d, h)?;
        let emax = d.expected_max_value();
        let guarantee = emax / (2.0 * h.log2().ceil().max(1.0));
        Ok((s, h, best.price, best.revenue, emax, guarantee, d.len()))
    })?;
    let mut csv = Csv::new(
        "experiment baseline",
        &p,
        &["seed", "H", "price", "revenue", "expected_max_value", "guarantee", "points"],
    );
    for (s, h, price, revenue, emax, guarantee, n) in rows {
        csv.row(&[
            Cell::Int(s),
            Cell::Float(h),
            Cell::Float(price),
            Cell::Float(revenue),
            Cell::Float(emax),
            Cell::Float(guarantee),
            Cell::Int(n as u64),
        ]);
    }
    let mut out = Outputs::default();
    out.file_or_stdout(a.out.as_deref(), csv.finish());
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GreedyParams {
    /// Hitting-set text files; random instances are drawn when empty.
    inputs: Vec<PathBuf>,
    k: usize,
    #[serde(rename = "H")]
    h: f64,
    convention: TwoLevel,
    count: usize,
    m: usize,
    n: usize,
    max_set_size: usize,
    budget: u64,
    seed: u64,
}

impl Default for GreedyParams {
    fn default() -> Self {
        GreedyParams {
            inputs: Vec::new(),
            k: 2,
            h: 4.0,
            convention: TwoLevel::OneH,
            count: 50,
            m: 12,
            n: 10,
            max_set_size: 4,
            budget: BRUTE_FORCE_BUDGET as u64,
            seed: 0,
        }
    }
}

#[derive(Args)]
struct GreedyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Hitting-set text file (repeatable)
    #[arg(long = "input")]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "H")]
    h: Option<f64>,
    /// one-h or zero-one
    #[arg(long, value_parser = parse_name::<TwoLevel>)]
    convention: Option<TwoLevel>,
    /// Random instances to draw when no input is given
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    max_set_size: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn k_problem(inst: &HittingSetInstance, k: usize, convention: TwoLevel) -> CliResult<KMenuProblem> {
    let high = match convention {
        TwoLevel::OneH => inst.h,
        TwoLevel::ZeroOne => 1.0,
    };
    Ok(KMenuProblem::new(inst.valuations(convention)?, k, high, convention)?)
}

fn greedy_vs_opt(a: &GreedyArgs) -> CliResult<Outputs> {
    let mut p: GreedyParams = load_params(a.config.as_deref())?;
    if !a.inputs.is_empty() {
        p.inputs = a.inputs.clone();
    }
    set(&mut p.k, a.k);
    set(&mut p.h, a.h);
    set(&mut p.convention, a.convention);
    set(&mut p.count, a.count);
    set(&mut p.m, a.m);
    set(&mut p.n, a.n);
    set(&mut p.max_set_size, a.max_set_size);
    set(&mut p.budget, a.budget);
    set(&mut p.seed, a.seed);
    let instances: Vec<HittingSetInstance> = if p.inputs.is_empty() {
        (0..p.count as u64)
            .map(|i| HittingSetInstance::random(p.m, p.h, p.n, p.max_set_size, p.seed.wrapping_add(i)))
            .collect::<Result<_, _>>()?
    } else {
        p.inputs
            .iter()
            .map(|path| {
                HittingSetInstance::parse_text(&read_text(path)?, p.h)
                    .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
            })
            .collect::<CliResult<_>>()?
    };
    if instances.is_empty() {
        return Err(CliError::invalid("no instances"));
    }
    let mut csv = Csv::new(
        "experiment greedy-vs-opt",
        &p,
        &["instance", "greedy_revenue", "oracle_revenue", "ratio", "greedy_items", "oracle_items"],
    );
    for (i, inst) in instances.iter().enumerate() {
        let prob = k_problem(inst, p.k, p.convention)?;
        let greedy = greedy_items(&prob);
        let greedy_rev = prob.item_revenue(&greedy);
        let (best, best_rev) = brute_force_k_menu(&prob, u128::from(p.budget))?;
        csv.row(&[
            Cell::Int(i as u64),
            Cell::Float(greedy_rev),
            Cell::Float(best_rev),
            Cell::Float(greedy_rev / best_rev),
            Cell::Text(one_based(&greedy)),
            Cell::Text(one_based(&best)),
        ]);
    }
    let mut out = Outputs::default();
    out.file_or_stdout(a.out.as_deref(), csv.finish());
    Ok(out)
}

/// Items as one-based indices joined by spaces, matching the text format.
fn one_based(items: &[usize]) -> String {
    items.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Args)]
struct ReduceArgs {
    /// Hitting-set text file
    #[arg(long)]
    input: PathBuf,
    /// Distribution JSON
    #[arg(long)]
    out: PathBuf,
    #[arg(long = "H", default_value_t = 2.0)]
    h: f64,
    /// one-h or zero-one
    #[arg(long, value_parser = parse_name::<TwoLevel>, default_value = "one_h")]
    convention: TwoLevel,
    /// Also report the greedy and best k-item menus
    #[arg(long)]
    k: Option<usize>,
}

fn reduce(a: &ReduceArgs) -> CliResult<Outputs> {
    let inst = HittingSetInstance::parse_text(&read_text(&a.input)?, a.h)
        .map_err(|e| CliError::invalid(format!("{}: {e}", a.input.display())))?;
    let d = inst.valuations(a.convention)?;
    let spec = DistributionSpec {
        family: Family::Explicit(d.clone()),
        seed: 0,
    };
    let mut out = Outputs::default();
    out.file(&a.out, to_json(&spec));
    out.line("points", d.len());
    out.line("m", d.m());
    if let Some(k) = a.k {
        let prob = k_problem(&inst, k, a.convention)?;
        let greedy = greedy_items(&prob);
        out.line("greedy_items", one_based(&greedy));
        out.line("greedy_revenue", fmt_f64(prob.item_revenue(&greedy)));
        let (best, rev) = brute_force_k_menu(&prob, BRUTE_FORCE_BUDGET)?;
        out.line("oracle_items", one_based(&best));
        out.line("oracle_revenue", fmt_f64(rev));
    }
    Ok(out)
}

fn run(command: &Command) -> CliResult<Outputs> {
    match command {
        Command::Evaluate(a) => evaluate(a),
        Command::SolveLp(a) => solve_lp(a),
        Command::RoundMenu(a) => round_menu_cmd(a),
        Command::Cover(c) => cover(c),
        Command::Pipeline(a) => pipeline(a),
        Command::Experiment(ExperimentCommand::Overfit(a)) => overfit(a),
        Command::Experiment(ExperimentCommand::Lowerbound(a)) => lowerbound(a),
        Command::Experiment(ExperimentCommand::Baseline(a)) => baseline(a),
        Command::Experiment(ExperimentCommand::GreedyVsOpt(a)) => greedy_vs_opt(a),
        Command::ReduceHittingSet(a) => reduce(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command).and_then(Outputs::commit) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.kind.exit_code())
        }
    }
}
