use pricelab::demand::TieBreakPolicy;
use pricelab::guess::GuessMode;
use pricelab::instances::{gen_harmonic, gen_random_xos_with, RandomXosParams};
use pricelab::market::simulate;
use pricelab::strategies::{nonuniform_ladder, PublicInfo, StrategySpec};

#[test]
fn same_seed_same_transcript() {
    let inst = gen_random_xos_with(&RandomXosParams { n: 8, m: 4, l: 3, seed: 2, ..RandomXosParams::default() }).unwrap();
    let info = PublicInfo::for_instance(&inst, 3.0).unwrap();
    let order = [2, 0, 3, 1];
    for spec in ["dynamic-uniform", "static-nonuniform", "guess:bounded(1,8):dynamic-uniform", "guess:unbounded(0.5):dynamic-monotone"] {
        let spec: StrategySpec = spec.parse().unwrap();
        let run = |seed| simulate(&inst, &mut spec.instantiate(&info, seed).unwrap(), &order, TieBreakPolicy::STRICT).unwrap();
        assert_eq!(run(5), run(5), "{spec}");
    }
}

#[test]
fn grammar_round_trips() {
    for s in ["static-uniform:p=0.25", "dynamic-uniform", "dynamic-monotone", "k-phase", "p-infinity", "static-nonuniform", "guess:bounded(2,16):k-phase", "guess:unbounded(0.5):dynamic-uniform"] {
        let spec: StrategySpec = s.parse().unwrap();
        assert_eq!(spec.to_string(), s);
    }
    let g: StrategySpec = "guess:bounded(1,4):dynamic-uniform".parse().unwrap();
    assert!(matches!(g, StrategySpec::Guess { mode: GuessMode::Bounded { low, high }, .. } if low == 1.0 && high == 4.0));
    for bad in ["static-uniform:p=-1", "guess:bounded(3,4):dynamic-uniform", "bogus", "guess:bounded(1,4)"] {
        assert!(bad.parse::<StrategySpec>().map(|s| s.instantiate(&PublicInfo::new(4, 1.0, 2).unwrap(), 0)).map_or(true, |r| r.is_err()), "{bad}");
    }
}

#[test]
fn monotone_needs_enough_buyers() {
    let info = PublicInfo::new(16, 1.0, 2).unwrap();
    assert!(StrategySpec::DynamicMonotone.instantiate(&info, 0).is_err());
    assert!(StrategySpec::DynamicMonotone.instantiate(&PublicInfo::new(16, 1.0, 5).unwrap(), 0).is_ok());
}

#[test]
fn monotone_prices_fall() {
    let info = PublicInfo::new(16, 8.0, 10).unwrap();
    let mut s = StrategySpec::DynamicMonotone.instantiate(&info, 0).unwrap();
    let unsold = pricelab::valuation::Bundle::from_counts(vec![16]);
    let prices: Vec<f64> = (0..10).map(|t| s.next_prices(t, &unsold).unwrap().min_price()).collect();
    assert!(prices.windows(2).all(|w| w[1] < w[0]));
    assert!(prices[0] <= 4.0);
}

#[test]
fn static_uniform_ignores_history() {
    let inst = gen_harmonic(4).unwrap();
    let info = PublicInfo::for_instance(&inst, 1.0).unwrap();
    let mut s = StrategySpec::StaticUniform { price: 0.3 }.instantiate(&info, 0).unwrap();
    let a = s.next_prices(0, &inst.full_bundle()).unwrap();
    let b = s.next_prices(3, &pricelab::valuation::Bundle::from_counts(vec![0; 4])).unwrap();
    assert_eq!(a, b);
}

#[test]
fn nonuniform_ladder_shape() {
    let lad = nonuniform_ladder(&PublicInfo::new(16, 1.0, 2).unwrap());
    assert_eq!(lad.k, 8);
    assert_eq!(lad.branch_a.len(), 8);
    assert_eq!(lad.branch_b.len(), 9);
    assert_eq!(lad.branch_a[0], 0.5);
    assert_eq!(lad.branch_b[0], 0.25);
    assert_eq!(nonuniform_ladder(&PublicInfo::new(1, 1.0, 1).unwrap()).k, 1);
}
