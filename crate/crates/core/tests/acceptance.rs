//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Criteria 6 and 7 are known to fail; docs/constants.md explains why. The
//! target exits non-zero if the set of failing criteria differs from that.

use pricelab::demand::{demand, demand_bruteforce, TieBreakPolicy};
use pricelab::guess::GuessMode;
use pricelab::instances::{
    gen_harmonic, gen_hard_static, gen_random_xos_with, validate_hard_static, HardDynamicParams, HardStaticParams,
    HardStaticVariant, Instance, RandomXosParams,
};
use pricelab::market::{expected_revenue, simulate, sweep_uniform_prices, uniform_revenue, EvalConfig, OrderModel};
use pricelab::num::ceil_log2;
use pricelab::pricing::{GroupPrice, PriceAssignment};
use pricelab::random::SeededChooser;
use pricelab::strategies::{nonuniform_ladder, p_infinity_assignment, sample_branch_b, PublicInfo, StrategySpec};
use pricelab::verify::{hard_dynamic_rounds_report, random_case, random_prices, run_suite, VerifyOptions};
use pricelab::welfare::{opt_bruteforce, opt_xos};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::sync::Arc;
use std::time::Instant;

/// relative tolerance on utilities and revenues
const TOL: f64 = 1e-9;
/// criteria whose failure is explained in docs/constants.md
const KNOWN_RED: &[u32] = &[6, 7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn ge(a: f64, b: f64) -> bool {
    a >= b - TOL * a.abs().max(b.abs()).max(1e-300)
}

fn harmonic_sum(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

fn k_ladder(n: u128) -> u32 {
    ceil_log2(n) + 1
}

fn criterion_1() -> Outcome {
    let mut worst = 0f64;
    let mut failures = 0;
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let case = random_case(&mut rng, 14);
        let prices = random_prices(&mut rng, &case.available);
        let oracle = demand_bruteforce(&case.valuation, &case.available, &prices).unwrap();
        let d = demand(&case.valuation, &case.available, &prices, TieBreakPolicy::STRICT).unwrap();
        let err = (d.utility - oracle.utility).abs() / oracle.utility.abs().max(1.0);
        worst = worst.max(err);
        if err > TOL {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("1000 cases, {failures} mismatches, worst relative error {worst:.1e}"))
}

fn criterion_2() -> Outcome {
    let opts = VerifyOptions { seeds: 500, seed: 2, ..VerifyOptions::default() };
    let mut parts = Vec::new();
    let mut pass = true;
    for s in ["lemma-supported-set", "lemma-monotone-demand", "lemma-breakpoints", "lemma-ladder"] {
        let r = run_suite(s, &opts).unwrap();
        pass &= r.passed && r.cases >= 500;
        parts.push(format!("{s} {}/{}", r.cases - r.failure_count, r.cases));
    }
    outcome(pass, parts.join(", "))
}

fn criterion_3() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [4, 8, 16, 20] {
        let inst = gen_harmonic(n).unwrap();
        let sweep = sweep_uniform_prices(&inst, &[0], TieBreakPolicy::INCLUSIVE).unwrap();
        let opt = opt_bruteforce(&inst).unwrap().opt;
        let h = harmonic_sum(n);
        pass &= (sweep.max_revenue - 1.0).abs() <= 1e-12 && (opt - h).abs() <= 1e-12 * h;
        parts.push(format!("n={n} max={} OPT={opt:.4}", sweep.max_revenue));
    }
    outcome(pass, parts.join(", "))
}

/// The fixed suite of criteria 4 and 10.
fn suite_4() -> Vec<Instance> {
    let mut out: Vec<Instance> = [2, 4, 8, 16].iter().map(|&n| gen_harmonic(n).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..30 {
        let n = [4, 8, 16, 32][i % 4];
        let p = RandomXosParams {
            n,
            m: rng.random_range(1..=4),
            l: rng.random_range(1..=3),
            density: rng.random_range(0.5..=1.0),
            seed: 400 + i as u64,
            ..RandomXosParams::default()
        };
        out.push(gen_random_xos_with(&p).unwrap());
    }
    out
}

fn true_opt(inst: &Instance) -> f64 {
    inst.known_opt().unwrap_or_else(|| opt_xos(inst).unwrap().opt)
}

fn adversarial_exact(inst: &Instance, spec: &StrategySpec, opt: f64) -> f64 {
    let info = PublicInfo::for_instance(inst, opt).unwrap();
    expected_revenue(inst, spec, &info, &OrderModel::AdversarialSearch, &EvalConfig::exact()).unwrap().mean
}

fn criterion_4() -> Outcome {
    let suite = suite_4();
    let rows: Vec<(f64, f64)> = suite
        .par_iter()
        .map(|inst| {
            let opt = true_opt(inst);
            let k = k_ladder(inst.total_units()) as f64;
            let er = adversarial_exact(inst, &StrategySpec::DynamicUniform, opt);
            (er, opt / (4.0 * (k + 1.0) * (k + 1.0)))
        })
        .collect();
    let fails = rows.iter().filter(|(er, b)| !ge(*er, *b)).count();
    let slack = rows.iter().map(|(er, b)| er / b).fold(f64::INFINITY, f64::min);
    outcome(fails == 0, format!("{} instances, {fails} below OPT/(4(k+1)^2), smallest E[R]/bound {slack:.2}", rows.len()))
}

fn criterion_5() -> Outcome {
    let mut cases = Vec::new();
    for (i, &n) in [4usize, 8, 16].iter().enumerate() {
        let k = k_ladder(n as u128) as usize;
        for m in k..=7 {
            for l in [1, 2, 3] {
                cases.push(RandomXosParams { n, m, l, seed: 500 + (i * 100 + m * 10 + l) as u64, ..RandomXosParams::default() });
            }
        }
    }
    let rows: Vec<(f64, f64)> = cases
        .par_iter()
        .map(|p| {
            let inst = gen_random_xos_with(p).unwrap();
            let opt = true_opt(&inst);
            let k = k_ladder(inst.total_units()) as f64;
            let info = PublicInfo::for_instance(&inst, opt).unwrap();
            let er = expected_revenue(&inst, &StrategySpec::DynamicMonotone, &info, &OrderModel::UniformRandom, &EvalConfig::exact())
                .unwrap()
                .mean;
            (er, opt / (8.0 * k * k))
        })
        .collect();
    let fails = rows.iter().filter(|(er, b)| !ge(*er, *b)).count();
    let slack = rows.iter().map(|(er, b)| er / b).fold(f64::INFINITY, f64::min);
    outcome(fails == 0, format!("{} instances, {fails} below OPT/(8k^2), smallest E[R]/bound {slack:.2}", rows.len()))
}

fn criterion_6() -> Outcome {
    let mut sweep_ok = true;
    let mut chain_ok = true;
    let mut parts = Vec::new();
    for k in 1..=3 {
        let p = HardStaticParams::two_buyer(k);
        let inst = gen_hard_static(&p).unwrap();
        let x = p.x();
        let opt = inst.known_opt().unwrap();
        let a = inst.buyer_index("b1").unwrap();
        let b = inst.buyer_index("b2").unwrap();
        let sweep = sweep_uniform_prices(&inst, &[a, b], TieBreakPolicy::STRICT).unwrap();
        let bound = 4.0 * opt / x;
        sweep_ok &= sweep.supremum <= bound * (1.0 + TOL);
        let chain = validate_hard_static(&p).unwrap();
        chain_ok &= chain.passed;
        parts.push(format!(
            "k={k}: sweep {:.3e} <= {:.3e}, chain {} (failing i = {:?})",
            sweep.supremum,
            bound,
            if chain.passed { "holds" } else { "broken" },
            chain.failing
        ));
    }
    outcome(sweep_ok && chain_ok, format!("sweep {}, chain {}; {}", ok(sweep_ok), ok(chain_ok), parts.join("; ")))
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILS"
    }
}

fn criterion_7() -> Outcome {
    let p = HardDynamicParams { k: 2, f: 81, y: 9, m: 18 };
    let r = hard_dynamic_rounds_report(&p).unwrap();
    let count = |tag: &str| r.failures.iter().filter(|f| f.starts_with(tag)).count();
    let (a, b, c, d) = (count("(a)"), count("(b)"), count("(c)"), count("(d)"));
    outcome(
        r.passed,
        format!(
            "{} checks, {} failed: (a) {} (b) {} (c) {} (d) {} listed; (b) failures with first price at f(j): {}, inside: {}",
            r.cases,
            r.failure_count,
            ok(a == 0),
            ok(b == 0),
            ok(c == 0),
            ok(d == 0),
            r.details["repeat_failures_first_price_at_top"],
            r.details["repeat_failures_first_price_inside"]
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut insts = vec![gen_hard_static(&HardStaticParams {
        k: 1,
        variant: HardStaticVariant::IdenticalBuyers,
        m: Some(4),
        buyers: Some(16),
        c_scale: 1.0,
    })
    .unwrap()];
    for i in 0..10 {
        let p = RandomXosParams { n: 8, m: 6 + i % 5, l: 3, identical: true, seed: 800 + i as u64, ..RandomXosParams::default() };
        insts.push(gen_random_xos_with(&p).unwrap());
    }
    let mut fails = 0;
    let mut worst = f64::INFINITY;
    for inst in insts {
        let inst = Arc::new(inst);
        let opt = true_opt(&inst);
        let info = PublicInfo::for_instance(&inst, opt).unwrap().with_full_information(inst.clone());
        let (_, run) = p_infinity_assignment(&info).unwrap();
        let mut s = StrategySpec::PInfinity.instantiate(&info, 0).unwrap();
        let order: Vec<usize> = (0..inst.m()).collect();
        let replay = simulate(&inst, &mut s, &order, info.tie).unwrap().total_revenue;
        let best = run.phase_revenues.iter().cloned().fold(0.0, f64::max);
        let total: f64 = run.phase_revenues.iter().sum();
        let share = total / (run.k + 1) as f64;
        if !(ge(replay, best) && ge(replay, share)) {
            fails += 1;
        }
        if best > 0.0 {
            worst = worst.min(replay / best);
        }
    }
    outcome(fails == 0, format!("11 instances, {fails} failures, smallest replay/best-phase {worst:.3}"))
}

/// `a_z(g)` for every group.
fn a_z(inst: &Instance, z: &[usize]) -> Vec<f64> {
    let comps: Vec<_> = inst.buyers().iter().zip(z).map(|(b, &c)| b.valuation.component(c).unwrap()).collect();
    (0..inst.n_groups()).map(|g| comps.iter().map(|c| c.value_of(g)).fold(0.0, f64::max)).collect()
}

/// Bracket `i` in `1..=k` holding `a`, using `[p_i, p_{i-1})` with `p_0 = OPT`.
fn bracket(a: f64, opt: f64, k: u32) -> Option<usize> {
    (1..=k as i32).find(|&i| a >= opt * 2f64.powi(-i) && a < opt * 2f64.powi(1 - i)).map(|i| i as usize)
}

fn criterion_9() -> Outcome {
    // lemma on the uniform branch
    let mut fails_a = 0;
    let mut cases_a = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..20 {
        let p = RandomXosParams {
            n: rng.random_range(4..=12),
            m: rng.random_range(2..=3),
            l: rng.random_range(2..=3),
            seed: 900 + i,
            ..RandomXosParams::default()
        };
        let inst = gen_random_xos_with(&p).unwrap();
        let opt = true_opt(&inst);
        let info = PublicInfo::for_instance(&inst, opt).unwrap();
        let lad = nonuniform_ladder(&info);
        let k = lad.k;
        let m = inst.m();
        let log_l = (p.l as f64).log2();
        let orders: Vec<Vec<usize>> = itertools_permutations(m);
        let er = orders
            .iter()
            .map(|o| lad.branch_a.iter().map(|&pr| uniform_revenue(&inst, o, pr, TieBreakPolicy::STRICT).unwrap()).sum::<f64>() / k as f64)
            .fold(f64::INFINITY, f64::min);
        for _ in 0..5 {
            let z: Vec<usize> = (0..m).map(|_| rng.random_range(0..p.l)).collect();
            let az = a_z(&inst, &z);
            let mut sizes = vec![0u128; k as usize + 1];
            for (g, &a) in az.iter().enumerate() {
                if let Some(b) = bracket(a, opt, k) {
                    sizes[b] += inst.groups()[g].count;
                }
            }
            let large = 16.0 * m as f64 * log_l;
            let b_z: f64 = az
                .iter()
                .enumerate()
                .filter_map(|(g, &a)| bracket(a, opt, k).filter(|&b| (sizes[b] as f64) < large).map(|_| a * inst.groups()[g].count as f64))
                .sum();
            cases_a += 1;
            if !ge(er, b_z / (k as f64 * m as f64 * log_l)) {
                fails_a += 1;
            }
        }
    }
    // lemma on the per-unit branch
    let mut freqs = Vec::new();
    for s in 0..3u64 {
        let p = RandomXosParams { n: 6, m: 2, l: 2, units_per_group: 400, seed: 950 + s, ..RandomXosParams::default() };
        let inst = gen_random_xos_with(&p).unwrap();
        let opt = true_opt(&inst);
        let info = PublicInfo::for_instance(&inst, opt).unwrap();
        let lad = nonuniform_ladder(&info);
        let k = lad.k as usize;
        let large = 16.0 * 2.0 * 1.0;
        let tuples: Vec<Vec<usize>> = (0..4).map(|t| vec![t / 2, t % 2]).collect();
        // per tuple and bracket: the groups in Gamma, and whether Gamma is large
        let gammas: Vec<Vec<(Vec<usize>, bool)>> = tuples
            .iter()
            .map(|z| {
                let az = a_z(&inst, z);
                (1..=k)
                    .map(|i| {
                        let gs: Vec<usize> = (0..inst.n_groups()).filter(|&g| bracket(az[g], opt, k as u32) == Some(i)).collect();
                        let size: u128 = gs.iter().map(|&g| inst.groups()[g].count).sum();
                        let is_large = size as f64 >= large;
                        (gs, is_large)
                    })
                    .collect()
            })
            .collect();
        assert!(gammas.iter().flatten().any(|g| g.1), "instance needs a large set");
        let mut hits = 0;
        let draws = 400;
        for d in 0..draws {
            let mut ch = SeededChooser::new(9_000 + s * 1000 + d);
            let prices = sample_branch_b(&info, &inst.full_bundle(), &mut ch).unwrap();
            let priced_at = |g: usize, price: f64| -> u128 {
                match &prices {
                    PriceAssignment::Uniform(p) => if *p == price { inst.groups()[g].count } else { 0 },
                    PriceAssignment::PerGroup(v) => match &v[g] {
                        GroupPrice::Price(p) if *p == price => inst.groups()[g].count,
                        GroupPrice::Tiered(t) => t.iter().filter(|x| x.0 == price).map(|x| x.1).sum(),
                        _ => 0,
                    },
                }
            };
            let event = gammas.iter().all(|per_i| {
                per_i.iter().enumerate().all(|(i0, (gs, is_large))| {
                    let in_a: u128 = if *is_large { gs.iter().map(|&g| inst.groups()[g].count).sum() } else { 0 };
                    let pi: u128 = gs.iter().map(|&g| priced_at(g, lad.branch_b[i0])).sum();
                    pi as f64 >= in_a as f64 / (2.0 * k as f64)
                })
            });
            if event {
                hits += 1;
            }
        }
        freqs.push(hits as f64 / draws as f64);
    }
    let pass_b = freqs.iter().all(|&f| f >= 0.70);
    outcome(
        fails_a == 0 && pass_b,
        format!("uniform branch: {cases_a} (instance, z) pairs, {fails_a} below bound; per-unit branch event frequencies {freqs:?} (need >= 0.70)"),
    )
}

fn itertools_permutations(m: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (0..m).permutations(m).collect()
}

fn criterion_10() -> Outcome {
    let suite = suite_4();
    let rows: Vec<(f64, f64)> = suite
        .par_iter()
        .map(|inst| {
            let opt = true_opt(inst);
            let low = 2f64.powi(opt.log2().floor() as i32 - 1);
            let high = 2f64.powi(opt.log2().ceil() as i32 + 1);
            let spec = StrategySpec::Guess { mode: GuessMode::Bounded { low, high }, inner: Box::new(StrategySpec::DynamicUniform) };
            let k = k_ladder(inst.total_units()) as f64;
            // the estimate handed over is ignored: the wrapper replaces it with its guess
            let er = adversarial_exact(inst, &spec, opt);
            (er, opt / (4.0 * (k + 1.0) * (k + 1.0) * (2.0 * high / low).log2()))
        })
        .collect();
    let fails = rows.iter().filter(|(er, b)| !ge(*er, *b)).count();
    let slack = rows.iter().map(|(er, b)| er / b).fold(f64::INFINITY, f64::min);
    outcome(fails == 0, format!("{} instances, {fails} below bound, smallest E[R]/bound {slack:.2}", rows.len()))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = Vec::new();
    for (n, f) in criteria {
        let t = Instant::now();
        let o = f();
        println!("criterion {n:>2}: {} ({:.1} s) {}", if o.pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed.push(n);
        }
    }
    println!("failing criteria: {failed:?}; expected {KNOWN_RED:?}");
    if failed != KNOWN_RED {
        eprintln!("acceptance outcome differs from the documented analysis");
        std::process::exit(1);
    }
}
