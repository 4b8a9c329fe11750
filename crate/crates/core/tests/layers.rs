use corsearch::behaviors::{feedback, random_theta, unit_gaussian, Branch};
use corsearch::corpv::{AlgoParams, CorPvKnown};
use corsearch::layers::{
    corruption_tolerance_audit, layer_corruption_bound, layer_count, layer_probability, sample_layer, simulate_routing,
    LayerBank,
};
use corsearch::rng::substream;

#[test]
fn layer_counts() {
    assert_eq!(layer_count(1), 1);
    assert_eq!(layer_count(2), 1);
    assert_eq!(layer_count(3), 2);
    assert_eq!(layer_count(1024), 10);
    assert_eq!(layer_count(8192), 13);
}

#[test]
fn probabilities_sum_to_one() {
    for t in [2, 8, 100, 8192] {
        let s: f64 = (1..=layer_count(t)).map(|j| layer_probability(j, t)).sum();
        assert!((s - 1.0).abs() < 1e-15, "T={t}: {s}");
    }
    // Layer 1 absorbs the leftover mass.
    assert_eq!(layer_probability(1, 8), 0.625);
    assert_eq!(layer_probability(2, 8), 0.25);
    assert_eq!(layer_probability(3, 8), 0.125);
}

#[test]
fn sampled_layers_are_in_range() {
    let mut rng = substream(3, "t");
    for _ in 0..10_000 {
        let j = sample_layer(&mut rng, 100);
        assert!((1..=7).contains(&j));
    }
}

#[test]
fn bound_for_ten_percent_failure() {
    assert!((layer_corruption_bound(0.1) - (10f64.ln() + 3.0)).abs() < 1e-15);
}

#[test]
fn audit_counts_corrupted_rounds_per_layer() {
    let rows = vec![(1, true), (2, true), (2, false), (3, true), (3, true), (1, false)];
    assert_eq!(corruption_tolerance_audit(rows, 3), vec![1, 1, 2]);
}

#[test]
fn routing_simulation_is_deterministic() {
    let rounds: Vec<usize> = (1..=100).collect();
    let a = simulate_routing(5, 8192, &rounds);
    assert_eq!(a, simulate_routing(5, 8192, &rounds));
    assert_eq!(a.len(), 13);
    assert_eq!(a.iter().sum::<usize>(), 100);
    assert_ne!(a, simulate_routing(6, 8192, &rounds));
}

#[test]
fn single_layer_bank_equals_known_learner() {
    let params = AlgoParams::new(2, 0.1, 2).unwrap();
    let mut known = CorPvKnown::new(params.clone(), 9).unwrap();
    let mut bank = LayerBank::with_params(params, 2, 0.1, 9).unwrap();
    assert_eq!(bank.layers().len(), 1);
    let mut rng = substream(9, "test/stream");
    let theta = random_theta(2, 1.0, &mut rng);
    let mut epochs = 0;
    for t in 1..=400 {
        let x = unit_gaussian(2, &mut rng);
        let a = known.query(&x).unwrap();
        let (b, _) = bank.query(&x).unwrap();
        assert_eq!(a.branch, b.branch, "round {t}");
        assert_eq!(a.omega.to_bits(), b.omega.to_bits(), "round {t}");
        let y = feedback(x.dot(&theta), a.omega);
        let ea = known.observe(t, &x, &a, y).unwrap().is_some();
        let eb = bank.observe(t, &x, &b, y).unwrap().is_some();
        assert_eq!(ea, eb);
        epochs += usize::from(ea);
    }
    assert!(epochs >= 3);
    assert_eq!(known.state().kappa(), bank.layer(1).kappa());
}

#[test]
fn clean_bank_keeps_theta_and_nesting() {
    let params = AlgoParams::new(2, 0.1, 0).unwrap();
    let mut bank = LayerBank::agnostic(params, 1024, 0.1, 4).unwrap();
    assert_eq!(bank.params().budget, 27);
    let mut rng = substream(4, "test/stream");
    let theta = random_theta(2, 1.0, &mut rng);
    let mut explores = vec![0usize; bank.layers().len()];
    for t in 1..=1024 {
        let x = unit_gaussian(2, &mut rng);
        let (d, _) = bank.query(&x).unwrap();
        if d.branch == Branch::Explore {
            explores[d.layer.unwrap() - 1] += 1;
        }
        let y = feedback(x.dot(&theta), d.omega);
        bank.observe(t, &x, &d, y).unwrap();
    }
    assert!(bank.nesting_holds());
    for j in 1..=bank.layers().len() {
        assert!(bank.layer(j).body().contains(&theta, 1e-9), "layer {j}");
    }
    // Layer 1 is picked about half the time.
    assert!(explores[0] > explores[1]);
}
