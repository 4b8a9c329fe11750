use corsearch::behaviors::{feedback, flipped_value, random_theta, unit_gaussian, Branch};
use corsearch::corpv::{protected_point_below, separating_cut, AlgoParams, CheckStrategy, CorPvKnown, EpochState};
use corsearch::geometry::Halfspace;
use corsearch::rng::{indexed, substream};
use corsearch::Vector;

/// Fill one epoch's explore set; the first `lies` answers are flipped.
fn filled_state(params: &AlgoParams, seed: u64, lies: usize) -> (EpochState, Vector) {
    let mut rng = indexed(seed, "test/fill", params.dim);
    let mut st = EpochState::initial(params, &mut rng).unwrap();
    let theta = random_theta(params.dim, 1.0, &mut rng);
    let mut t = 0;
    while st.records().len() < params.tau {
        let mut x = unit_gaussian(params.dim, &mut rng);
        if x.dot(&theta) < 0.0 {
            x = -x;
        }
        let d = st.step(params, &x).unwrap();
        if d.branch != Branch::Explore {
            continue;
        }
        t += 1;
        let v = x.dot(&theta);
        let vt = if t <= lies { flipped_value(d.omega, v).unwrap_or(v) } else { v };
        st.record_explore(params, &x, d.omega_raw, feedback(vt, d.omega), t).unwrap();
    }
    (st, theta)
}

#[test]
fn clean_learner_keeps_theta_and_cuts_near_centroid() {
    let params = AlgoParams::new(2, 0.1, 1).unwrap();
    let mut learner = CorPvKnown::new(params.clone(), 3).unwrap();
    let mut rng = substream(3, "test/stream");
    let theta = random_theta(2, 1.0, &mut rng);
    for t in 1..=800 {
        let mut x = unit_gaussian(2, &mut rng);
        if x.dot(&theta) < 0.0 {
            x = -x;
        }
        let d = learner.query(&x).unwrap();
        let y = feedback(x.dot(&theta), d.omega);
        if let Some(r) = learner.observe(t, &x, &d, y).unwrap() {
            assert!(r.cut.contains(&theta, 1e-12), "round {t}");
            assert!(r.kappa_distance() <= 2.0 * params.nu_hi + 1e-12);
        }
    }
    assert!(learner.reports().len() >= 5);
    assert!(learner.state().body().contains(&theta, 1e-9));
}

#[test]
fn separating_cut_survives_lies_within_budget() {
    for (dim, budget, seed) in [(2, 1, 1), (2, 2, 2), (3, 1, 3)] {
        let params = AlgoParams::new(dim, 0.1, budget).unwrap();
        let (st, theta) = filled_state(&params, seed, budget);
        let rep = separating_cut(&st, &params, &mut substream(seed, "test/cut")).unwrap();
        assert!(rep.cut.contains(&theta, 1e-12), "d={dim} c̄={budget}");
        // Valid: no protected point on the discarded side.
        let left = protected_point_below(&st, &params, Some(&rep.cut.complement()), CheckStrategy::Auto).unwrap();
        assert!(left.is_none());
        // Orthogonal to the small directions.
        for s in st.small() {
            assert!(s.dot(rep.cut.normal()).abs() < 1e-9);
        }
    }
}

#[test]
fn protected_region_checks_agree() {
    let params = AlgoParams::new(2, 0.1, 1).unwrap();
    for seed in 0..6 {
        let (st, _) = filled_state(&params, 100 + seed, 1);
        let mut rng = substream(seed, "test/dirs");
        for _ in 0..4 {
            let u = unit_gaussian(2, &mut rng);
            let h = Halfspace::upper(&u, u.dot(st.kappa()) + 0.02).unwrap();
            let a = protected_point_below(&st, &params, Some(&h), CheckStrategy::Arrangement).unwrap();
            let b = protected_point_below(&st, &params, Some(&h), CheckStrategy::Subsets { max_subsets: 1 << 20 })
                .unwrap();
            assert_eq!(a.is_some(), b.is_some(), "seed {seed}");
            for p in a.iter().chain(b.iter()) {
                assert!(h.contains(p, 1e-7));
                assert!(st.undesirability(p, params.nu) <= params.budget);
            }
        }
    }
}

#[test]
fn undesirability_of_theta_counts_lies_only() {
    let params = AlgoParams::new(2, 0.1, 2).unwrap();
    let (st, theta) = filled_state(&params, 7, 2);
    assert!(st.undesirability(&theta, params.nu) <= 2);
    let (clean, theta) = filled_state(&params, 7, 0);
    assert_eq!(clean.undesirability(&theta, params.nu), 0);
}

#[test]
fn known_learner_needs_two_dimensions() {
    assert!(CorPvKnown::new(AlgoParams::new(1, 0.1, 1).unwrap(), 0).is_err());
}
