use crate::behaviors::{feedback, Branch};
use crate::geometry::{
    approx_centroid, cylindrify, orthonormal_complement, Cylinder, DimensionSplit, Halfspace, KnowledgeSet, Subspace,
    FEAS_TOL,
};
use crate::losses::exploit_query;
use crate::rng::Rng;
use crate::{Error, Result, Vector};

use super::{AlgoParams, CutReport, Decision};

/// One explore round, sign-normalized so the stored feedback is `+1`:
/// the record asserts `⟨direction, θ⟩ ≥ intercept` (projected on `L`).
#[derive(Clone, Debug, PartialEq)]
pub struct ExploreRecord {
    pub round: usize,
    pub context: Vector,
    /// Learner's query `⟨x, κ⟩` before clamping.
    pub omega: f64,
    /// Feedback as observed.
    pub feedback: i8,
    /// `y·Π_L x / ‖Π_L x‖`.
    pub direction: Vector,
    /// `‖Π_L x‖`.
    pub scale: f64,
    /// `⟨direction, κ⟩`.
    pub intercept: f64,
}

impl ExploreRecord {
    /// `1{⟨p − κ, y·Π_L x⟩ + ν < 0}`.
    pub fn violated_by(&self, p: &Vector, nu: f64) -> bool {
        self.scale * (self.direction.dot(p) - self.intercept) + nu < 0.0
    }

    /// `H⁺` through `κ` along the stored direction.
    pub fn halfspace(&self) -> Halfspace {
        Halfspace::new(self.direction.clone(), self.intercept, 1).expect("unit direction")
    }

    /// Points the record does not count against at margin `ν`.
    pub fn margin_halfspace(&self, nu: f64) -> Halfspace {
        Halfspace::new(self.direction.clone(), self.intercept - nu / self.scale, 1).expect("unit direction")
    }

    /// Feedback the stored (normalized) record would give for parameter `p`.
    pub fn replay(&self, p: &Vector) -> i8 {
        feedback(self.direction.dot(p), self.intercept)
    }
}

/// Bookkeeping of one epoch: `K_φ`, `S_φ / L_φ`, `κ_φ` and the explore set.
#[derive(Clone, Debug)]
pub struct EpochState {
    phi: usize,
    body: KnowledgeSet,
    split: DimensionSplit,
    cyl: Cylinder,
    kappa: Vector,
    records: Vec<ExploreRecord>,
}

/// What an epoch update changed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct UpdateOutcome {
    /// Directions moved from `L` to `S`.
    pub demoted: usize,
    /// The cut direction itself became small.
    pub cut_small: bool,
}

impl UpdateOutcome {
    pub fn small_changed(&self) -> bool {
        self.demoted > 0 || self.cut_small
    }
}

impl EpochState {
    pub fn initial(params: &AlgoParams, rng: &mut Rng) -> Result<Self> {
        let body = KnowledgeSet::unit_ball(params.dim);
        let split = DimensionSplit::initial(params.dim, params.delta);
        Self::centered(1, body, split, params, rng)
    }

    fn centered(phi: usize, body: KnowledgeSet, split: DimensionSplit, params: &AlgoParams, rng: &mut Rng) -> Result<Self> {
        let cyl = Cylinder::with_large(&body, &split.small, split.large.clone())?;
        let kappa = approx_centroid(&cyl, rng, params.nu_hi, params.centroid_options())?;
        Ok(Self { phi, body, split, cyl, kappa, records: Vec::new() })
    }

    /// State with an explicit centroid (scenario tests and replays).
    pub fn from_parts(phi: usize, body: KnowledgeSet, small: Vec<Vector>, kappa: Vector, delta: f64) -> Result<Self> {
        let cyl = cylindrify(&body, &small)?;
        let split = DimensionSplit { small, large: cyl.large().clone(), delta };
        Ok(Self { phi, body, split, cyl, kappa, records: Vec::new() })
    }

    pub fn phi(&self) -> usize {
        self.phi
    }

    pub fn body(&self) -> &KnowledgeSet {
        &self.body
    }

    pub fn split(&self) -> &DimensionSplit {
        &self.split
    }

    pub fn large(&self) -> &Subspace {
        &self.split.large
    }

    pub fn small(&self) -> &[Vector] {
        &self.split.small
    }

    pub fn cylinder(&self) -> &Cylinder {
        &self.cyl
    }

    pub fn kappa(&self) -> &Vector {
        &self.kappa
    }

    pub fn records(&self) -> &[ExploreRecord] {
        &self.records
    }

    /// Width of `Cyl(K, S)` along `x`.
    pub fn width(&self, x: &Vector) -> Result<f64> {
        self.cyl.width(x)
    }

    /// Exploit when the cylinder is `ε`-narrow along `x` or no large
    /// direction is left; otherwise explore at `⟨x, κ⟩`.
    pub fn step(&self, params: &AlgoParams, x: &Vector) -> Result<Decision> {
        check_unit(x)?;
        if self.split.large.is_empty() || self.cyl.width(x)? <= params.eps {
            Ok(Decision::new(Branch::Exploit, self.exploit(params, x)?, None))
        } else {
            Ok(Decision::new(Branch::Explore, x.dot(&self.kappa), None))
        }
    }

    pub fn exploit(&self, params: &AlgoParams, x: &Vector) -> Result<f64> {
        exploit_query(params.loss, params.noise, &self.body, x, Some(x.dot(&self.kappa)))
    }

    /// Store an explore outcome; returns `true` once `|A| ≥ τ`.
    pub fn record_explore(&mut self, params: &AlgoParams, x: &Vector, omega: f64, y: i8, round: usize) -> Result<bool> {
        if self.records.len() >= params.tau {
            return Err(Error::invalid("explore set already full; the epoch should have ended"));
        }
        if y != 1 && y != -1 {
            return Err(Error::invalid("feedback must be ±1"));
        }
        let px = self.split.large.project(x);
        let scale = px.norm();
        if scale < 1e-12 {
            return Err(Error::DegenerateProjection);
        }
        let direction = px * (f64::from(y) / scale);
        let intercept = direction.dot(&self.kappa);
        self.records.push(ExploreRecord { round, context: x.clone(), omega, feedback: y, direction, scale, intercept });
        Ok(self.records.len() >= params.tau)
    }

    /// `ν`-margin projected undesirability of `p`.
    pub fn undesirability(&self, p: &Vector, nu: f64) -> usize {
        self.records.iter().filter(|r| r.violated_by(p, nu)).count()
    }

    /// `κ ± ν̄·eᵢ` for the basis `eᵢ` of `L`.
    pub fn landmarks(&self, nu_hi: f64) -> Vec<Vector> {
        self.split
            .large
            .basis()
            .iter()
            .flat_map(|e| [&self.kappa + e * nu_hi, &self.kappa - e * nu_hi])
            .collect()
    }

    /// `K ← K ∩ H⁺(cut)`, update `S/L`, recenter, clear the explore set.
    pub fn epoch_update(&self, params: &AlgoParams, cut: &Halfspace, rng: &mut Rng) -> Result<(EpochState, UpdateOutcome)> {
        let body = self.body.with_cut(cut.clone());
        if body.is_empty() {
            return Err(Error::EmptyKnowledgeSet);
        }
        let (split, outcome) = refine_split(&self.split, &body, cut.normal(), params.delta)?;
        Ok((Self::centered(self.phi + 1, body, split, params, rng)?, outcome))
    }

    /// Apply a cut found by another layer. The epoch advances only when the
    /// centroid is cut off or the small directions change; otherwise the
    /// body shrinks and the explore set is kept. Returns whether it advanced.
    pub fn apply_external_cut(&mut self, params: &AlgoParams, cut: &Halfspace, rng: &mut Rng) -> Result<bool> {
        let body = self.body.with_cut(cut.clone());
        if body.is_empty() {
            return Err(Error::EmptyKnowledgeSet);
        }
        let (split, outcome) = refine_split(&self.split, &body, cut.normal(), params.delta)?;
        let cyl = Cylinder::with_large(&body, &split.small, split.large.clone())?;
        if outcome.small_changed() || !cyl.contains(&self.kappa, FEAS_TOL) {
            *self = Self::centered(self.phi + 1, body, split, params, rng)?;
            Ok(true)
        } else {
            self.body = body;
            self.cyl = cyl;
            Ok(false)
        }
    }

    /// Replace this state by a copy of another layer's geometry, opening a new epoch.
    pub fn reseed_from(&mut self, other: &EpochState) {
        let phi = self.phi + 1;
        *self = other.clone();
        self.phi = phi;
        self.records.clear();
    }
}

/// New split after intersecting with a cut of normal `normal`: the normal
/// (projected on `L`) joins `S` when the body is `delta`-thin along it, then
/// every `delta`-thin basis vector of the large part is demoted.
pub(crate) fn refine_split(split: &DimensionSplit, body: &KnowledgeSet, normal: &Vector, delta: f64) -> Result<(DimensionSplit, UpdateOutcome)> {
    let d = split.ambient();
    let mut small = split.small.clone();
    let mut large = split.large.basis().to_vec();
    let mut outcome = UpdateOutcome::default();
    let h = split.large.project(normal);
    if !large.is_empty() && h.norm() > 1e-9 {
        let h = h.normalize();
        if body.width(&h)? <= delta {
            small.push(h);
            large = orthonormal_complement(d, &small);
            outcome.cut_small = true;
        }
    }
    let mut kept = Vec::with_capacity(large.len());
    for e in large {
        if body.width(&e)? <= delta {
            small.push(e);
            outcome.demoted += 1;
        } else {
            kept.push(e);
        }
    }
    Ok((DimensionSplit { small, large: Subspace::new(d, kept)?, delta }, outcome))
}

fn check_unit(x: &Vector) -> Result<()> {
    if (x.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("context must be a unit vector (norm {})", x.norm())));
    }
    Ok(())
}

/// Everything known about an epoch when it ended.
#[derive(Clone, Debug)]
pub struct EpochReport {
    pub phi: usize,
    pub round: usize,
    pub kappa: Vector,
    pub records: Vec<ExploreRecord>,
    pub body_before: KnowledgeSet,
    pub small_before: Vec<Vector>,
    pub large_before: Subspace,
    pub body_after: KnowledgeSet,
    pub cut: Halfspace,
    pub mistakes: usize,
    pub restarts: usize,
    pub outcome: UpdateOutcome,
    /// Epoch state that ended (records and centroid included).
    pub ended: EpochState,
}

impl EpochReport {
    pub fn new(ended: EpochState, next: &EpochState, cut: CutReport, outcome: UpdateOutcome, round: usize) -> Self {
        Self {
            phi: ended.phi,
            round,
            kappa: ended.kappa.clone(),
            records: ended.records.clone(),
            body_before: ended.body.clone(),
            small_before: ended.split.small.clone(),
            large_before: ended.split.large.clone(),
            body_after: next.body.clone(),
            cut: cut.cut,
            mistakes: cut.mistakes,
            restarts: cut.restarts,
            outcome,
            ended,
        }
    }

    /// `dist(κ, cut)`.
    pub fn kappa_distance(&self) -> f64 {
        self.cut.distance(&self.kappa)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn origin_state(d: usize) -> EpochState {
        EpochState::from_parts(1, KnowledgeSet::unit_ball(d), Vec::new(), Vector::zeros(d), 0.01).unwrap()
    }

    #[test]
    fn fresh_ball_explores_near_zero() {
        let params = AlgoParams::new(2, 0.1, 1).unwrap();
        let st = EpochState::initial(&params, &mut substream(1, "c")).unwrap();
        let d = st.step(&params, &v(&[0.6, 0.8])).unwrap();
        assert_eq!(d.branch, Branch::Explore);
        assert!(d.omega_raw.abs() <= params.nu_hi);
    }

    #[test]
    fn tiny_body_always_exploits() {
        let params = AlgoParams::new(2, 0.1, 1).unwrap();
        let cuts = vec![
            Halfspace::upper(&v(&[1.0, 0.0]), 0.30).unwrap(),
            Halfspace::lower(&v(&[1.0, 0.0]), 0.32).unwrap(),
            Halfspace::upper(&v(&[0.0, 1.0]), 0.10).unwrap(),
            Halfspace::lower(&v(&[0.0, 1.0]), 0.12).unwrap(),
        ];
        let st = EpochState::from_parts(1, KnowledgeSet::from_cuts(2, cuts).unwrap(), Vec::new(), v(&[0.31, 0.11]), params.delta)
            .unwrap();
        for x in [v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.6, 0.8])] {
            assert_eq!(st.step(&params, &x).unwrap().branch, Branch::Exploit);
        }
    }

    #[test]
    fn epoch_ends_at_tau() {
        let params = AlgoParams::new(2, 0.1, 1).unwrap();
        let mut st = origin_state(2);
        let x = v(&[1.0, 0.0]);
        for i in 1..=13 {
            let full = st.record_explore(&params, &x, 0.0, 1, i).unwrap();
            assert_eq!(full, i == 13);
        }
        assert!(st.record_explore(&params, &x, 0.0, 1, 14).is_err());
    }

    #[test]
    fn negative_feedback_is_sign_normalized() {
        let params = AlgoParams::new(2, 0.1, 1).unwrap();
        let mut st = origin_state(2);
        let x = v(&[0.6, 0.8]);
        st.record_explore(&params, &x, 0.0, -1, 1).unwrap();
        let r = &st.records()[0];
        assert!((&r.direction + &x).norm() < 1e-15);
        assert_eq!(r.intercept, 0.0);
        // A parameter that produced y = −1 replays as +1 on the stored record.
        let theta = v(&[-0.3, -0.1]);
        assert_eq!(feedback(x.dot(&theta), 0.0), -1);
        assert_eq!(r.replay(&theta), 1);
    }

    #[test]
    fn undesirability_examples() {
        let params = AlgoParams::new(2, 0.1, 1).unwrap();
        let mut st = origin_state(2);
        st.record_explore(&params, &v(&[1.0, 0.0]), 0.0, 1, 1).unwrap();
        let nu = params.nu;
        assert_eq!(st.undesirability(&Vector::zeros(2), nu), 0);
        assert_eq!(st.undesirability(&v(&[-2.0 * nu, 0.0]), nu), 1);
        assert_eq!(st.undesirability(&v(&[-0.5 * nu, 0.0]), nu), 0);
    }

    #[test]
    fn landmarks_surround_kappa() {
        let st = origin_state(3);
        let lm = st.landmarks(0.02);
        assert_eq!(lm.len(), 6);
        assert!(lm.iter().all(|p| (p.norm() - 0.02).abs() < 1e-15));
    }

    #[test]
    fn thin_slab_cut_becomes_small() {
        let params = AlgoParams::new(2, 0.1, 1).unwrap();
        // Body already inside x₁ ≤ 0.005; cutting at x₁ ≥ 0 leaves width 0.005 ≤ δ.
        let body = KnowledgeSet::from_cuts(2, vec![Halfspace::lower(&v(&[1.0, 0.0]), 0.005).unwrap()]).unwrap();
        let st = EpochState::from_parts(1, body, Vec::new(), v(&[-0.4, 0.0]), params.delta).unwrap();
        let cut = Halfspace::upper(&v(&[1.0, 0.0]), 0.0).unwrap();
        let (next, outcome) = st.epoch_update(&params, &cut, &mut substream(2, "c")).unwrap();
        assert!(outcome.cut_small);
        assert_eq!(next.small().len(), 1);
        assert_eq!(next.large().dim(), 1);
        assert!(next.split().orthonormality_error() < 1e-9);
        assert_eq!(next.phi(), 2);
        assert!(next.records().is_empty());
    }

    #[test]
    fn far_cut_keeps_split() {
        let params = AlgoParams::new(2, 0.1, 1).unwrap();
        let st = origin_state(2);
        let cut = Halfspace::upper(&v(&[1.0, 0.0]), -0.999).unwrap();
        let (next, outcome) = st.epoch_update(&params, &cut, &mut substream(3, "c")).unwrap();
        assert!(!outcome.small_changed());
        assert_eq!(next.large().dim(), 2);
        assert_eq!(next.body().cuts().len(), 1);
    }
}
