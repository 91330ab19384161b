//! Command-line front end.

use crate::demand::TieBreakPolicy;
use crate::error::Error;
use crate::instances::{from_spec, parse_spec, Instance};
use crate::market::{adversarial_order, expected_revenue, simulate, sweep_uniform_prices, EvalConfig, EvalMode, OrderModel, RevenueEstimate};
use crate::num::fmt_g17;
use crate::random::{derive_seed, SeededChooser};
use crate::strategies::{PublicInfo, StrategySpec};
use crate::verify::{run_suite, VerifyOptions, SUITES};
use crate::welfare::{opt_bruteforce, opt_xos};
use crate::random::Chooser;
use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Parser, Debug)]
#[command(name = "pricelab", version, about = "Item pricing in limited-supply sequential markets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one sale and write its transcript as CSV
    Simulate(RunArgs),
    /// Expected revenue against OPT
    Ratio(RunArgs),
    /// Revenue of every static uniform price
    Sweep(RunArgs),
    /// Run a named verification suite
    Verify(VerifyArgs),
    /// Write a generated instance as JSON
    Gen(RunArgs),
}

#[derive(Args, Debug, Default, Clone)]
struct RunArgs {
    /// generator spec such as harmonic:n=4, or file:<path>
    #[arg(long)]
    instance: Option<String>,
    /// strategy spec such as dynamic-uniform
    #[arg(long)]
    strategy: Option<String>,
    /// fixed:<buyer ids>, random or adversarial
    #[arg(long)]
    order: Option<String>,
    /// exact or mc:<trials>
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with any of the other options; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// strict or inclusive
    #[arg(long)]
    tie: Option<String>,
    /// OPT estimate given to the strategy
    #[arg(long)]
    opt: Option<f64>,
    /// number of random-xos instances, with seeds seed, seed+1, ..
    #[arg(long)]
    count: Option<u64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// suite name
    suite: String,
    #[arg(long, default_value_t = 500)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long = "F")]
    f: Option<u64>,
    #[arg(long = "Y")]
    y: Option<u64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    c_scale: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Options read from `--config`.
#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    instance: Option<String>,
    strategy: Option<String>,
    order: Option<String>,
    mode: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    tie: Option<String>,
    opt: Option<f64>,
    count: Option<u64>,
}

impl RunArgs {
    fn merged(mut self) -> Result<Self> {
        let Some(path) = &self.config else { return Ok(self) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let c: ConfigFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        self.instance = self.instance.or(c.instance);
        self.strategy = self.strategy.or(c.strategy);
        self.order = self.order.or(c.order);
        self.mode = self.mode.or(c.mode);
        self.seed = self.seed.or(c.seed);
        self.out = self.out.or(c.out);
        self.tie = self.tie.or(c.tie);
        self.opt = self.opt.or(c.opt);
        self.count = self.count.or(c.count);
        Ok(self)
    }

    fn instance_spec(&self) -> Result<&str> {
        self.instance.as_deref().ok_or_else(|| usage("--instance is required"))
    }

    fn strategy(&self) -> Result<StrategySpec> {
        let s = self.strategy.as_deref().ok_or_else(|| usage("--strategy is required"))?;
        let spec: StrategySpec = s.parse().map_err(|e: Error| usage(e.to_string()))?;
        if self.seed.is_none() && spec.is_randomized() {
            return Err(usage(format!("strategy {spec} is randomized; pass --seed")));
        }
        Ok(spec)
    }

    fn tie(&self) -> Result<TieBreakPolicy> {
        match self.tie.as_deref() {
            None | Some("strict") => Ok(TieBreakPolicy::STRICT),
            Some("inclusive") => Ok(TieBreakPolicy::INCLUSIVE),
            Some(t) => Err(usage(format!("--tie must be strict or inclusive, got {t:?}"))),
        }
    }

    fn mode(&self) -> Result<EvalMode> {
        match &self.mode {
            None => Ok(EvalMode::Exact),
            Some(m) => m.parse().map_err(|e: Error| usage(e.to_string())),
        }
    }
}

/// A mistake in the invocation; exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

/// Raised when a verification suite fails; exit code 1.
#[derive(Debug)]
struct ChecksFailed;

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(Ok(())) => 0,
        Ok(Err(ChecksFailed)) => 1,
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            eprintln!("run with --help for usage");
            2
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<std::result::Result<(), ChecksFailed>> {
    match cmd {
        Command::Simulate(a) => cmd_simulate(a.merged()?).map(Ok),
        Command::Ratio(a) => cmd_ratio(a.merged()?).map(Ok),
        Command::Sweep(a) => cmd_sweep(a.merged()?).map(Ok),
        Command::Gen(a) => cmd_gen(a.merged()?).map(Ok),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Where the OPT used in a run came from.
fn opt_of(inst: &Instance) -> Result<(f64, &'static str)> {
    if let Some(v) = inst.known_opt() {
        return Ok((v, "known_opt"));
    }
    match opt_xos(inst) {
        Ok(r) => Ok((r.opt, "opt_xos")),
        Err(_) => Ok((opt_bruteforce(inst)?.opt, "opt_bruteforce")),
    }
}

fn public_info(inst: &Arc<Instance>, spec: &StrategySpec, opt: Option<f64>, tie: TieBreakPolicy) -> Result<PublicInfo> {
    let opt = match opt {
        Some(v) => v,
        None => opt_of(inst)?.0,
    };
    let mut info = PublicInfo::for_instance(inst, opt)?.with_tie(tie);
    if spec.needs_full_information() {
        info = info.with_full_information(inst.clone());
    }
    Ok(info)
}

fn fixed_order(a: &RunArgs, inst: &Instance) -> Result<Option<Vec<usize>>> {
    match a.order.as_deref() {
        None => Ok(Some((0..inst.m()).collect())),
        Some(s) => match OrderModel::parse(s, inst).map_err(|e| usage(e.to_string()))? {
            OrderModel::Fixed(o) => Ok(Some(o)),
            OrderModel::UniformRandom => {
                let seed = a.seed.ok_or_else(|| usage("--order random needs --seed"))?;
                let mut o: Vec<usize> = (0..inst.m()).collect();
                o.shuffle(SeededChooser::new(derive_seed(seed, u64::MAX)).rng()?);
                Ok(Some(o))
            }
            OrderModel::AdversarialSearch => Ok(None),
        },
    }
}

fn cmd_simulate(a: RunArgs) -> Result<()> {
    let inst = Arc::new(from_spec(a.instance_spec()?)?);
    let spec = a.strategy()?;
    let tie = a.tie()?;
    let info = public_info(&inst, &spec, a.opt, tie)?;
    let seed = a.seed.unwrap_or(0);
    let order = match fixed_order(&a, &inst)? {
        Some(o) => o,
        None => adversarial_order(&inst, &spec, &info, &EvalConfig { seed, tie, ..EvalConfig::default() })?.0,
    };
    let mut strat = spec.instantiate(&info, seed)?;
    let mut t = simulate(&inst, &mut strat, &order, tie)?;
    t.seed = a.seed;
    emit(a.out.as_deref(), &t.to_csv())?;
    eprintln!("total_revenue {}", fmt_g17(t.total_revenue));
    Ok(())
}

#[derive(Serialize)]
struct RatioRow {
    instance: String,
    strategy: String,
    expected_revenue: RevenueEstimate,
    opt: f64,
    opt_source: &'static str,
    ratio: f64,
}

fn instance_specs(a: &RunArgs) -> Result<Vec<String>> {
    let spec = a.instance_spec()?;
    let count = a.count.unwrap_or(1);
    if count <= 1 {
        return Ok(vec![spec.to_string()]);
    }
    let (name, mut kv) = parse_spec(spec)?;
    if name != "random-xos" {
        return Err(usage("--count needs a random-xos instance"));
    }
    let base: u64 = kv.get("seed").map(|s| s.parse()).transpose().map_err(|_| usage("bad seed parameter"))?.unwrap_or(0);
    Ok((0..count)
        .map(|i| {
            kv.insert("seed".into(), (base + i).to_string());
            format!("{name}:{}", kv.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(","))
        })
        .collect())
}

fn cmd_ratio(a: RunArgs) -> Result<()> {
    let spec = a.strategy()?;
    let tie = a.tie()?;
    let mode = a.mode()?;
    if matches!(mode, EvalMode::MonteCarlo { .. }) && a.seed.is_none() {
        return Err(usage("monte carlo mode needs --seed"));
    }
    let cfg = EvalConfig { mode, seed: a.seed.unwrap_or(0), tie, ..EvalConfig::default() };
    let mut rows = Vec::new();
    for s in instance_specs(&a)? {
        let inst = Arc::new(from_spec(&s)?);
        let (opt, opt_source) = opt_of(&inst)?;
        let info = public_info(&inst, &spec, Some(a.opt.unwrap_or(opt)), tie)?;
        let order = match a.order.as_deref() {
            None => OrderModel::Fixed((0..inst.m()).collect()),
            Some(o) => OrderModel::parse(o, &inst).map_err(|e| usage(e.to_string()))?,
        };
        let est = expected_revenue(&inst, &spec, &info, &order, &cfg)?;
        let ratio = if est.mean > 0.0 { opt / est.mean } else { f64::INFINITY };
        rows.push(RatioRow { instance: s, strategy: spec.to_string(), expected_revenue: est, opt, opt_source, ratio });
    }
    let csv = a.out.as_deref().is_some_and(|p| p.extension().is_some_and(|e| e == "csv"));
    let text = if csv {
        let mut s = String::from("instance,strategy,expected_revenue,std_error,opt,opt_source,ratio\n");
        for r in &rows {
            let _ = writeln!(
                s,
                "\"{}\",{},{},{},{},{},{}",
                r.instance,
                r.strategy,
                fmt_g17(r.expected_revenue.mean),
                fmt_g17(r.expected_revenue.std_error),
                fmt_g17(r.opt),
                r.opt_source,
                fmt_g17(r.ratio)
            );
        }
        s
    } else {
        serde_json::to_string_pretty(&rows)? + "\n"
    };
    emit(a.out.as_deref(), &text)
}

fn cmd_sweep(a: RunArgs) -> Result<()> {
    let inst = from_spec(a.instance_spec()?)?;
    let tie = a.tie()?;
    let order = fixed_order(&a, &inst)?.ok_or_else(|| usage("sweep needs a fixed or random order"))?;
    let r = sweep_uniform_prices(&inst, &order, tie)?;
    let json = a.out.as_deref().is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
    let text = if json {
        serde_json::to_string_pretty(&r)? + "\n"
    } else {
        let mut s = String::from("price,revenue_at,revenue_below\n");
        for p in &r.curve {
            let _ = writeln!(s, "{},{},{}", fmt_g17(p.price), fmt_g17(p.revenue_at), fmt_g17(p.revenue_below));
        }
        s
    };
    emit(a.out.as_deref(), &text)?;
    eprintln!("max_revenue {} at price {} (supremum {})", fmt_g17(r.max_revenue), fmt_g17(r.argmax_price), fmt_g17(r.supremum));
    Ok(())
}

fn cmd_gen(a: RunArgs) -> Result<()> {
    let inst = from_spec(a.instance_spec()?)?;
    let out = a.out.as_deref().ok_or_else(|| usage("gen needs --out <file>.market.json"))?;
    inst.save(out)?;
    eprintln!("wrote {} ({} groups, {} buyers)", out.display(), inst.n_groups(), inst.m());
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<std::result::Result<(), ChecksFailed>> {
    if !SUITES.contains(&a.suite.as_str()) {
        return Err(usage(format!("unknown suite {:?}; known suites: {}", a.suite, SUITES.join(", "))));
    }
    let opts = VerifyOptions { seeds: a.seeds, seed: a.seed, k: a.k, f: a.f, y: a.y, m: a.m, c_scale: a.c_scale };
    let report = run_suite(&a.suite, &opts).map_err(|e| match e {
        Error::Config(m) => usage(m),
        e => anyhow!(e),
    })?;
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    eprintln!("{} {}: {} checks, {} failed", a.suite, if report.passed { "PASS" } else { "FAIL" }, report.cases, report.failure_count);
    Ok(if report.passed { Ok(()) } else { Err(ChecksFailed) })
}
