use pricelab::instances::{gen_harmonic, gen_hard_static, gen_random_xos_with, HardStaticParams, RandomXosParams};
use pricelab::welfare::{opt_analytic, opt_bruteforce, opt_xos};

#[test]
fn xos_matches_bruteforce() {
    for seed in 0..60 {
        let p = RandomXosParams { n: 2 + (seed % 5) as usize, m: 1 + (seed % 3) as usize, l: 1 + (seed % 3) as usize, units_per_group: 1 + (seed % 5 < 2) as u128, density: 0.7, seed, ..RandomXosParams::default() };
        let inst = gen_random_xos_with(&p).unwrap();
        let a = opt_xos(&inst).unwrap();
        let b = opt_bruteforce(&inst).unwrap();
        assert!((a.opt - b.opt).abs() <= 1e-9 * b.opt.max(1.0), "seed {seed}: {} vs {}", a.opt, b.opt);
        assert!((a.allocation_value(&inst).unwrap() - a.opt).abs() <= 1e-9 * a.opt.max(1.0));
    }
}

#[test]
fn harmonic_opt_is_harmonic_number() {
    for n in [1, 4, 9] {
        let h: f64 = (1..=n).map(|i| 1.0 / i as f64).sum();
        let inst = gen_harmonic(n).unwrap();
        assert!((opt_bruteforce(&inst).unwrap().opt - h).abs() < 1e-12);
        assert!((opt_analytic(&inst).unwrap().opt - h).abs() < 1e-12);
    }
}

#[test]
fn hard_static_analytic_agrees_with_xos() {
    let inst = gen_hard_static(&HardStaticParams::two_buyer(1)).unwrap();
    let a = opt_analytic(&inst).unwrap().opt;
    let x = opt_xos(&inst).unwrap().opt;
    assert!((a - x).abs() <= 1e-9 * x);
}

#[test]
fn report_serializes() {
    let inst = gen_harmonic(3).unwrap();
    let json = opt_bruteforce(&inst).unwrap().to_json().unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(v["opt"].as_f64().is_some());
}
