use corsearch::behaviors::{
    cone_contexts, feedback, flipped_value, Behavior, Branch, ContextSource, ContextStream, FnStrategy, NatureState,
    StrategyKind,
};
use corsearch::losses::NoiseModel;
use corsearch::rng::substream;
use corsearch::Vector;

fn v(x: &[f64]) -> Vector {
    Vector::from_row_slice(x)
}

#[test]
fn feedback_ties_are_sales() {
    assert_eq!(feedback(0.5, 0.5), 1);
    assert_eq!(feedback(0.5, 0.50001), -1);
    assert_eq!(feedback(0.7, 0.2), 1);
}

#[test]
fn flipped_values_invert_feedback() {
    for (omega, value) in [(0.3, 0.6), (0.6, 0.3), (0.5, 0.5)] {
        let vt = flipped_value(omega, value).unwrap();
        assert_ne!(feedback(vt, omega), feedback(value, omega));
    }
    // No room below ω = 0.
    assert_eq!(flipped_value(0.0, 0.4), None);
}

#[test]
fn budget_is_never_exceeded() {
    let behavior = Behavior::Adversarial { budget: 3, strategy: StrategyKind::FrontLoad.build() };
    let mut nature = NatureState::new(v(&[0.5, 0.0]), behavior, 10, substream(0, "t")).unwrap();
    let x = v(&[1.0, 0.0]);
    let corrupted: Vec<bool> =
        (1..=10).map(|t| nature.perceived_value(t, &x, 0.3, Branch::Explore, None).corrupted).collect();
    assert_eq!(corrupted.iter().filter(|c| **c).count(), 3);
    assert!(corrupted[..3].iter().all(|c| *c));
    assert_eq!(nature.corruptions_used(), 3);
}

#[test]
fn targeted_spares_exploit_rounds() {
    let behavior = Behavior::Adversarial { budget: 5, strategy: StrategyKind::Targeted.build() };
    let mut nature = NatureState::new(v(&[0.5, 0.0]), behavior, 10, substream(0, "t")).unwrap();
    let x = v(&[1.0, 0.0]);
    assert!(!nature.perceived_value(1, &x, 0.5, Branch::Exploit, None).corrupted);
    let p = nature.perceived_value(2, &x, 0.4, Branch::Explore, None);
    assert!(p.corrupted && feedback(p.v_tilde, 0.4) == -1);
}

#[test]
fn scripted_adversary_sees_the_round() {
    let strategy = FnStrategy(|view: &corsearch::behaviors::RoundView<'_>| (view.t == 2).then_some(0.0));
    let behavior = Behavior::Adversarial { budget: 1, strategy: Box::new(strategy) };
    let mut nature = NatureState::new(v(&[0.5, 0.0]), behavior, 3, substream(0, "t")).unwrap();
    let x = v(&[1.0, 0.0]);
    let hits: Vec<bool> = (1..=3).map(|t| nature.perceived_value(t, &x, 0.2, Branch::Explore, None).corrupted).collect();
    assert_eq!(hits, vec![false, true, false]);
}

#[test]
fn truncated_noise_is_bounded() {
    let noise = NoiseModel::Normal { sigma: 0.5, truncation: Some(0.01) };
    let mut nature = NatureState::new(v(&[0.5, 0.0]), Behavior::Bounded(noise), 100, substream(1, "t")).unwrap();
    let x = v(&[1.0, 0.0]);
    for t in 1..=100 {
        let p = nature.perceived_value(t, &x, 0.5, Branch::Explore, None);
        assert!((p.v_tilde - 0.5).abs() <= 0.01 + 1e-15);
    }
    assert!(nature.max_noise <= 0.01);
}

#[test]
fn folding_keeps_values_nonnegative() {
    let theta = v(&[0.3, -0.4, 0.1]);
    let mut s = ContextStream::new(ContextSource::UniformSphere, 3, true, substream(2, "t")).unwrap();
    for _ in 0..200 {
        let x = s.next(&theta);
        assert!(x.dot(&theta) >= 0.0);
        assert!((x.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn script_cycles_and_validates() {
    let src = ContextSource::Script { contexts: vec![vec![1.0, 0.0], vec![0.0, 1.0]] };
    let mut s = ContextStream::new(src, 2, false, substream(0, "t")).unwrap();
    let theta = v(&[0.1, 0.1]);
    assert_eq!(s.next(&theta), v(&[1.0, 0.0]));
    assert_eq!(s.next(&theta), v(&[0.0, 1.0]));
    assert_eq!(s.next(&theta), v(&[1.0, 0.0]));
    let bad = ContextSource::Script { contexts: vec![vec![2.0, 0.0]] };
    assert!(ContextStream::new(bad, 2, false, substream(0, "t")).is_err());
}

#[test]
fn cone_contexts_are_unit_and_tilted() {
    let xs = cone_contexts(3, 25, 4.0, &mut substream(0, "t")).unwrap();
    assert_eq!(xs.len(), 25);
    for x in &xs {
        assert!((x.norm() - 1.0).abs() < 1e-12);
    }
    assert!(cone_contexts(2, 5, 4.0, &mut substream(0, "t")).is_err());
}

#[test]
fn unit_ball_required() {
    assert!(NatureState::new(v(&[1.0, 1.0]), Behavior::FullyRational, 1, substream(0, "t")).is_err());
}
