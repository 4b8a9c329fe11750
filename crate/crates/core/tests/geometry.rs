use corsearch::geometry::arrangement::{min_violations, Constraint};
use corsearch::geometry::{
    approx_centroid, cylindrify, mc_volume, sample_ball, CentroidOptions, Halfspace, KnowledgeSet, Subspace,
};
use corsearch::rng::substream;
use corsearch::Vector;
use proptest::prelude::*;

fn v(x: &[f64]) -> Vector {
    Vector::from_row_slice(x)
}

/// Polygon strictly inside the unit disc: intersection of `⟨nᵢ, x⟩ ≤ bᵢ`.
fn polygon(rows: &[([f64; 2], f64)]) -> KnowledgeSet {
    let cuts = rows.iter().map(|(n, b)| Halfspace::lower(&v(n), *b).unwrap()).collect();
    KnowledgeSet::from_cuts(2, cuts).unwrap()
}

/// Vertices by brute force over all pairs of boundary lines.
fn vertices(rows: &[([f64; 2], f64)]) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let ([a, b], c) = rows[i];
            let ([d, e], f) = rows[j];
            let det = a * e - b * d;
            if det.abs() < 1e-12 {
                continue;
            }
            let p = [(c * e - b * f) / det, (a * f - c * d) / det];
            if rows.iter().all(|([x, y], r)| x * p[0] + y * p[1] <= r + 1e-12) {
                out.push(p);
            }
        }
    }
    out
}

const HEXAGON: [([f64; 2], f64); 6] = [
    ([1.0, 0.0], 0.5),
    ([-1.0, 0.0], 0.3),
    ([0.0, 1.0], 0.4),
    ([0.0, -1.0], 0.6),
    ([1.0, 1.0], 0.6),
    ([-1.0, 1.0], 0.5),
];

#[test]
fn width_matches_vertex_enumeration() {
    let body = polygon(&HEXAGON);
    let vs = vertices(&HEXAGON);
    assert!(vs.len() >= 5);
    for k in 0..36 {
        let a = std::f64::consts::PI * k as f64 / 36.0;
        let u = v(&[a.cos(), a.sin()]);
        let dots: Vec<f64> = vs.iter().map(|p| u[0] * p[0] + u[1] * p[1]).collect();
        let lo = dots.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = dots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (l, h) = body.range(&u).unwrap();
        assert!((l - lo).abs() < 1e-7 && (h - hi).abs() < 1e-7, "direction {k}: {l},{h} vs {lo},{hi}");
    }
}

#[test]
fn ball_width_is_two() {
    let ball = KnowledgeSet::unit_ball(3);
    for u in [v(&[1.0, 0.0, 0.0]), v(&[0.6, 0.8, 0.0]), v(&[1.0, 1.0, 1.0]).normalize()] {
        assert!((ball.width(&u).unwrap() - 2.0).abs() < 1e-6);
    }
}

#[test]
fn width_scales_with_direction() {
    let body = polygon(&HEXAGON);
    let u = v(&[0.3, 0.7]);
    assert!((body.width(&(&u * 3.0)).unwrap() - 3.0 * body.width(&u).unwrap()).abs() < 1e-7);
}

#[test]
fn contradictory_cuts_are_empty() {
    let body = polygon(&[([1.0, 0.0], -0.2), ([-1.0, 0.0], -0.2)]);
    assert!(body.is_empty());
    assert!(body.width(&v(&[1.0, 0.0])).is_err());
}

#[test]
fn chebyshev_center_of_half_disc() {
    // {y ≥ 0} ∩ disc: inscribed radius 1/2 at (0, 1/2).
    let body = KnowledgeSet::from_cuts(2, vec![Halfspace::upper(&v(&[0.0, 1.0]), 0.0).unwrap()]).unwrap();
    let w = body.chebyshev().unwrap();
    assert!((w.radius - 0.5).abs() < 1e-6);
    assert!((w.center[1] - 0.5).abs() < 1e-4 && w.center[0].abs() < 1e-4);
}

#[test]
fn monte_carlo_volume_of_square() {
    let body = polygon(&[([1.0, 0.0], 0.5), ([-1.0, 0.0], 0.5), ([0.0, 1.0], 0.5), ([0.0, -1.0], 0.5)]);
    let est = mc_volume(&body, &Subspace::full(2), &mut substream(1, "t"), 200_000).unwrap();
    assert!((est.value - 1.0).abs() < 4.0 * est.std_err + 1e-9, "{est:?}");
}

#[test]
fn monte_carlo_volume_of_half_ball() {
    let body = KnowledgeSet::from_cuts(3, vec![Halfspace::upper(&v(&[0.0, 0.0, 1.0]), 0.0).unwrap()]).unwrap();
    let est = mc_volume(&body, &Subspace::full(3), &mut substream(2, "t"), 200_000).unwrap();
    let exact = 2.0 * std::f64::consts::PI / 3.0;
    assert!((est.value - exact).abs() < 4.0 * est.std_err, "{est:?} vs {exact}");
}

#[test]
fn centroid_of_half_disc() {
    // Centroid of the upper half disc is (0, 4/(3π)).
    let body = KnowledgeSet::from_cuts(2, vec![Halfspace::upper(&v(&[0.0, 1.0]), 0.0).unwrap()]).unwrap();
    let cyl = cylindrify(&body, &[]).unwrap();
    let c = approx_centroid(&cyl, &mut substream(3, "t"), 0.01, CentroidOptions::default()).unwrap();
    let exact = 4.0 / (3.0 * std::f64::consts::PI);
    assert!(c[0].abs() < 0.02 && (c[1] - exact).abs() < 0.02, "{c}");
}

#[test]
fn cylinder_keeps_small_range_and_large_projection() {
    // Thin slab in x₁; cylindrify along e₁ and check ranges.
    let body = polygon(&[([1.0, 0.0], 0.01), ([-1.0, 0.0], 0.01)]);
    let cyl = cylindrify(&body, &[v(&[1.0, 0.0])]).unwrap();
    let (lo, hi) = cyl.small_ranges()[0];
    assert!((lo + 0.01).abs() < 1e-7 && (hi - 0.01).abs() < 1e-7);
    assert_eq!(cyl.large().dim(), 1);
    assert!(cyl.contains(&v(&[0.0, 0.99]), 1e-9));
}

#[test]
fn min_violations_on_three_lines() {
    // x ≤ −0.5, x ≥ 0.5 and y ≤ −0.5 (soft): some point violates only one.
    let cons = vec![
        Constraint { a: v(&[1.0, 0.0]), b: -0.5, hard: false },
        Constraint { a: v(&[-1.0, 0.0]), b: -0.5, hard: false },
        Constraint { a: v(&[0.0, 1.0]), b: -0.5, hard: false },
    ];
    let m = min_violations(2, &cons, None).unwrap();
    assert_eq!(m.count, 1);
    // Forcing y ≥ 0.6 makes the third one violated too.
    let mut hard = cons.clone();
    hard.push(Constraint { a: v(&[0.0, -1.0]), b: -0.6, hard: true });
    assert_eq!(min_violations(2, &hard, None).unwrap().count, 2);
}

#[test]
fn min_violations_infeasible_hard_set() {
    let cons = vec![
        Constraint { a: v(&[1.0, 0.0]), b: -0.5, hard: true },
        Constraint { a: v(&[-1.0, 0.0]), b: -0.5, hard: true },
    ];
    assert!(min_violations(2, &cons, None).is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_points_are_in_the_ball(seed in 0u64..1000, r in 0.01f64..1.0) {
        let mut rng = substream(seed, "prop/ball");
        let c = v(&[0.1, -0.2, 0.05]);
        let q = sample_ball(&c, r, &Subspace::full(3), &mut rng).unwrap();
        prop_assert!((q - c).norm() <= r + 1e-12);
    }

    #[test]
    fn argmax_lies_in_body(phi in 0.0f64..6.28, c in -0.9f64..0.9) {
        let (a, b) = (phi.cos(), phi.sin());
        let body = KnowledgeSet::from_cuts(2, vec![Halfspace::upper(&v(&[a, b]), c).unwrap()]).unwrap();
        let u = v(&[b, -a]);
        let (val, p) = body.argmax(&u).unwrap();
        prop_assert!(body.contains(&p, 1e-6));
        prop_assert!((u.dot(&p) - val).abs() < 1e-7);
        let (lo, hi) = body.range(&u).unwrap();
        prop_assert!(lo <= hi && (hi - val).abs() < 1e-7);
    }

    #[test]
    fn cut_never_widens(phi in 0.0f64..6.28, c in -0.9f64..0.9, t in 0.0f64..3.14) {
        let (a, b) = (phi.cos(), phi.sin());
        let ball = KnowledgeSet::unit_ball(2);
        let cut = ball.with_cut(Halfspace::upper(&v(&[a, b]), c).unwrap());
        let u = v(&[t.cos(), t.sin()]);
        prop_assert!(cut.width(&u).unwrap() <= ball.width(&u).unwrap() + 1e-7);
    }

    #[test]
    fn complement_flips_membership(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        prop_assume!(a.abs() + b.abs() > 1e-3);
        let h = Halfspace::upper(&v(&[a, b]), c).unwrap();
        let p = v(&[x, y]);
        prop_assume!(h.distance(&p) > 1e-9);
        prop_assert_ne!(h.contains(&p, 0.0), h.complement().contains(&p, 0.0));
    }
}
