use rand::Rng as _;

use crate::geometry::{cylindrify, KnowledgeSet, Subspace};
use crate::rng::Rng;
use crate::{Error, Result, Vector};

#[derive(Clone, Copy, Debug)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_err: f64,
}

/// Monte-Carlo `vol(Π_L K)` by rejection from the bounding box of the
/// projection (box extents solved along each basis vector of `L`).
///
/// A one-dimensional projection is an interval; its length is returned
/// exactly with zero standard error.
pub fn mc_volume(body: &KnowledgeSet, l: &Subspace, rng: &mut Rng, n: usize) -> Result<VolumeEstimate> {
    if n == 0 {
        return Err(Error::invalid("mc_volume needs at least one sample"));
    }
    let k = l.dim();
    if k == 0 {
        return Ok(VolumeEstimate { value: 1.0, std_err: 0.0 });
    }
    let extents = l.basis().iter().map(|e| body.range(e)).collect::<Result<Vec<_>>>()?;
    let box_vol: f64 = extents.iter().map(|(a, b)| b - a).product();
    if k == 1 || box_vol == 0.0 {
        return Ok(VolumeEstimate { value: box_vol, std_err: 0.0 });
    }
    let small = l.complement();
    let cyl = cylindrify(body, small.basis())?;
    let mut hits = 0usize;
    for _ in 0..n {
        let c = Vector::from_iterator(k, extents.iter().map(|(a, b)| a + (b - a) * rng.random::<f64>()));
        let z = l.embed(&c);
        let inside = if small.is_empty() { body.contains(&z, 0.0) } else { cyl.projected_contains(&z, 0.0) };
        if inside {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    Ok(VolumeEstimate { value: p * box_vol, std_err: box_vol * (p * (1.0 - p) / n as f64).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn zero_samples_rejected() {
        let mut rng = substream(0, "t");
        assert!(mc_volume(&KnowledgeSet::unit_ball(2), &Subspace::full(2), &mut rng, 0).is_err());
    }

    #[test]
    fn segment_length_is_exact() {
        let mut rng = substream(0, "t");
        let l = Subspace::new(2, vec![Vector::from_vec(vec![1.0, 0.0])]).unwrap();
        let v = mc_volume(&KnowledgeSet::unit_ball(2), &l, &mut rng, 10).unwrap();
        assert!((v.value - 2.0).abs() < 1e-9 && v.std_err == 0.0);
    }
}
