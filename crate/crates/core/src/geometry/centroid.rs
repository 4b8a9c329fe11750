use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::geometry::{Cylinder, Subspace};
use crate::rng::Rng;
use crate::{Error, Result, Vector};

/// Uniform point in the ball of `radius` around `center` within `center + span(L)`.
pub fn sample_ball(center: &Vector, radius: f64, l: &Subspace, rng: &mut Rng) -> Result<Vector> {
    if radius <= 0.0 || !radius.is_finite() {
        return Err(Error::invalid("sample_ball radius must be positive"));
    }
    let k = l.dim();
    if k == 0 {
        return Ok(center.clone());
    }
    let g = gaussian(k, rng);
    let r = radius * rng.random::<f64>().powf(1.0 / k as f64);
    Ok(center + l.embed(&(g * r)))
}

fn gaussian(k: usize, rng: &mut Rng) -> Vector {
    loop {
        let g = Vector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = g.norm();
        if n > 1e-12 {
            return g / n;
        }
    }
}

/// Chain parameters for [`approx_centroid`].
#[derive(Clone, Copy, Debug)]
pub struct CentroidOptions {
    /// Burn-in steps per dimension.
    pub burn_in_per_dim: usize,
    /// Samples per batch for the batch-means error estimate.
    pub batch: usize,
    pub min_samples: usize,
    pub max_samples: usize,
}

impl Default for CentroidOptions {
    fn default() -> Self {
        Self { burn_in_per_dim: 100, batch: 50, min_samples: 1000, max_samples: 400_000 }
    }
}

/// Hit-and-run walk over a convex body given by a chord oracle.
pub fn hit_and_run<F>(start: Vector, steps: usize, rng: &mut Rng, mut chord: F) -> Vector
where
    F: FnMut(&Vector, &Vector) -> Option<(f64, f64)>,
{
    let mut x = start;
    for _ in 0..steps {
        step(&mut x, rng, &mut chord);
    }
    x
}

fn step<F>(x: &mut Vector, rng: &mut Rng, chord: &mut F)
where
    F: FnMut(&Vector, &Vector) -> Option<(f64, f64)>,
{
    let u = gaussian(x.len(), rng);
    if let Some((lo, hi)) = chord(x, &u) {
        if hi > lo {
            let t = lo + (hi - lo) * rng.random::<f64>();
            x.axpy(t, &u, 1.0);
        }
    }
}

/// Chord of `{‖θ‖ ≤ 1} ∩ cuts` through `p` along `u`, in closed form.
fn body_chord(rows: &[(Vector, f64)], p: &Vector, u: &Vector) -> Option<(f64, f64)> {
    let pu = p.dot(u);
    let disc = pu * pu - p.norm_squared() + 1.0;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let (mut lo, mut hi) = (-pu - s, -pu + s);
    for (a, b) in rows {
        let au = a.dot(u);
        let slack = b - a.dot(p);
        if au > 1e-15 {
            hi = hi.min(slack / au);
        } else if au < -1e-15 {
            lo = lo.max(slack / au);
        }
    }
    Some((lo.min(0.0), hi.max(0.0)))
}

/// Approximate centroid of `Cyl(K, S)`.
///
/// The large-dimension part is the mean of a hit-and-run chain on `Π_L K`
/// (burn-in `100·dim`, thinning `dim`), run until the batch-means standard
/// error of the mean is at most `tol/3`; the small-dimension part is the
/// exact midpoint of each extent. When `dim L ≤ 1` the projection is an
/// interval and its midpoint is exact.
pub fn approx_centroid(cyl: &Cylinder, rng: &mut Rng, tol: f64, opts: CentroidOptions) -> Result<Vector> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::invalid("centroid tolerance must be positive"));
    }
    let body = cyl.body();
    let witness = body.chebyshev().filter(|w| w.radius >= -crate::geometry::FEAS_TOL).ok_or(Error::EmptyKnowledgeSet)?;
    let large = cyl.large();
    let k = large.dim();
    let mut center = cyl.small_center();
    match k {
        0 => return Ok(center),
        1 => {
            let e = &large.basis()[0];
            let (lo, hi) = body.range(e)?;
            center.axpy(0.5 * (lo + hi), e, 1.0);
            return Ok(center);
        }
        _ => {}
    }

    let mean = if cyl.small().is_empty() {
        let rows: Vec<(Vector, f64)> = body.rows().into_iter().map(|r| (Vector::from_vec(r.a), r.b)).collect();
        let chord = |p: &Vector, u: &Vector| body_chord(&rows, p, u);
        chain_mean(witness.center.clone(), rng, tol, opts, chord)
    } else {
        let start = large.coords(&witness.center);
        let chord = |p: &Vector, u: &Vector| cyl.projected_chord(p, u);
        large.embed(&chain_mean(start, rng, tol, opts, chord))
    };
    Ok(center + mean)
}

fn chain_mean<F>(start: Vector, rng: &mut Rng, tol: f64, opts: CentroidOptions, mut chord: F) -> Vector
where
    F: FnMut(&Vector, &Vector) -> Option<(f64, f64)>,
{
    let k = start.len();
    let mut x = start;
    for _ in 0..opts.burn_in_per_dim * k {
        step(&mut x, rng, &mut chord);
    }
    let batch = opts.batch.max(1);
    let mut batch_means: Vec<Vector> = Vec::new();
    let mut total = Vector::zeros(k);
    let mut count = 0usize;
    let target = (tol / 3.0).powi(2);
    loop {
        let mut acc = Vector::zeros(k);
        for _ in 0..batch {
            for _ in 0..k {
                step(&mut x, rng, &mut chord);
            }
            acc += &x;
        }
        total += &acc;
        count += batch;
        batch_means.push(acc / batch as f64);
        if count >= opts.max_samples {
            break;
        }
        if count >= opts.min_samples && batch_means.len() >= 20 {
            let mean = &total / count as f64;
            let nb = batch_means.len() as f64;
            let var: f64 = batch_means.iter().map(|b| (b - &mean).norm_squared()).sum::<f64>() / (nb - 1.0);
            if var / nb <= target {
                break;
            }
        }
    }
    total / count as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cylindrify, Halfspace, KnowledgeSet};
    use crate::rng::substream;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn ball_sample_stays_in_ball_and_slice() {
        let mut rng = substream(1, "test");
        let l = Subspace::new(3, vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])]).unwrap();
        let c = v(&[0.1, 0.2, 0.3]);
        for _ in 0..1000 {
            let q = sample_ball(&c, 0.05, &l, &mut rng).unwrap();
            assert!((&q - &c).norm() <= 0.05 + 1e-15);
            assert!((q[2] - 0.3).abs() < 1e-12);
        }
        assert!(sample_ball(&c, 0.0, &l, &mut rng).is_err());
    }

    #[test]
    fn unit_disk_centroid_is_origin() {
        let mut rng = substream(2, "test");
        let cyl = cylindrify(&KnowledgeSet::unit_ball(2), &[]).unwrap();
        let c = approx_centroid(&cyl, &mut rng, 0.02, CentroidOptions::default()).unwrap();
        assert!(c.norm() < 0.02, "{c}");
    }

    #[test]
    fn half_disk_centroid() {
        let mut rng = substream(3, "test");
        let k = KnowledgeSet::from_cuts(2, vec![Halfspace::upper(&v(&[1.0, 0.0]), 0.0).unwrap()]).unwrap();
        let cyl = cylindrify(&k, &[]).unwrap();
        let c = approx_centroid(&cyl, &mut rng, 0.01, CentroidOptions::default()).unwrap();
        let exact = v(&[4.0 / (3.0 * std::f64::consts::PI), 0.0]);
        assert!((c - exact).norm() < 0.01);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let mut rng = substream(4, "test");
        let cyl = cylindrify(&KnowledgeSet::unit_ball(2), &[]).unwrap();
        assert!(approx_centroid(&cyl, &mut rng, 0.0, CentroidOptions::default()).is_err());
    }
}
