//! Loss functions, the noisy-benchmark query and the min-max exploit query.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::geometry::KnowledgeSet;
use crate::{Error, Result, Vector};

/// Grid resolution for searches over `Ω = [0, 1]`.
pub const GRID: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossKind {
    EpsBall { eps: f64 },
    Absolute,
    Pricing,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    #[default]
    None,
    /// `ξ ~ N(0, σ²)`, optionally clamped to `[−truncation, truncation]`.
    Normal { sigma: f64, truncation: Option<f64> },
}

impl NoiseModel {
    pub fn sigma(&self) -> f64 {
        match self {
            NoiseModel::None => 0.0,
            NoiseModel::Normal { sigma, .. } => *sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::Normal { sigma, truncation } => {
                if !(*sigma >= 0.0 && sigma.is_finite()) {
                    return Err(Error::invalid("noise sigma must be finite and nonnegative"));
                }
                if truncation.is_some_and(|c| !(c >= 0.0)) {
                    return Err(Error::invalid("noise truncation must be nonnegative"));
                }
                Ok(())
            }
            NoiseModel::None => Ok(()),
        }
    }
}

fn in_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {x} outside [0, 1]")))
    }
}

/// `ℓ(ω, v, ṽ)`. Purchase happens when `ω ≤ ṽ` (inclusive).
pub fn loss(kind: LossKind, omega: f64, v: f64, v_tilde: f64) -> Result<f64> {
    in_unit("omega", omega)?;
    in_unit("v", v)?;
    in_unit("v_tilde", v_tilde)?;
    Ok(loss_unchecked(kind, omega, v, v_tilde))
}

pub(crate) fn loss_unchecked(kind: LossKind, omega: f64, v: f64, v_tilde: f64) -> f64 {
    match kind {
        LossKind::EpsBall { eps } => {
            if (v - omega).abs() >= eps {
                1.0
            } else {
                0.0
            }
        }
        LossKind::Absolute => (v - omega).abs(),
        LossKind::Pricing => {
            if omega <= v_tilde {
                v_tilde - omega
            } else {
                v_tilde
            }
        }
    }
}

/// Physicists' Gauss–Hermite rule via Golub–Welsch: `∫ e^{−x²} f ≈ Σ wᵢ f(xᵢ)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let j = DMatrix::from_fn(n, n, |r, c| {
        if r + 1 == c || c + 1 == r {
            (r.max(c) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

fn gh64() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite(64))
}

fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Perceived value `clamp(v + clamp(ξ, ±c), 0, 1)` equals `clamp(v + ξ, a, b)`.
fn perceived_bounds(v: f64, truncation: Option<f64>) -> (f64, f64) {
    match truncation {
        Some(c) => ((v - c).max(0.0), (v + c).min(1.0)),
        None => (0.0, 1.0),
    }
}

/// `E_ξ[ℓ(ω, v, ṽ)]` for the given noise.
///
/// Pricing splits into `E[ṽ] − ω·P(ṽ ≥ ω)`: the smooth first term uses
/// 64-node Gauss–Hermite quadrature, the purchase probability (a step
/// function of ξ, where quadrature is inaccurate) uses the normal tail.
pub fn expected_loss(kind: LossKind, noise: NoiseModel, omega: f64, v: f64) -> f64 {
    let (sigma, truncation) = match noise {
        NoiseModel::Normal { sigma, truncation } if sigma > 0.0 => (sigma, truncation),
        _ => return loss_unchecked(kind, omega, v, v),
    };
    match kind {
        LossKind::EpsBall { .. } | LossKind::Absolute => loss_unchecked(kind, omega, v, v),
        LossKind::Pricing => {
            let (a, b) = perceived_bounds(v, truncation);
            let (xs, ws) = gh64();
            let mean: f64 = xs
                .iter()
                .zip(ws)
                .map(|(x, w)| w * (v + std::f64::consts::SQRT_2 * sigma * x).clamp(a, b))
                .sum::<f64>()
                / std::f64::consts::PI.sqrt();
            let purchase = if omega <= a {
                1.0
            } else if omega > b {
                0.0
            } else {
                normal_sf((omega - v) / sigma)
            };
            mean - omega * purchase
        }
    }
}

/// Eq.-2 style benchmark: `argmin_ω E[ℓ(ω, v, v + ξ)]` over the `Ω` grid.
pub fn benchmark_loss(kind: LossKind, noise: NoiseModel, true_value: f64) -> (f64, f64) {
    if noise.sigma() == 0.0 || !matches!(kind, LossKind::Pricing) {
        // The expectation is ℓ(ω, v, v), minimized (to 0) at ω = v.
        return (true_value, 0.0);
    }
    let n = (1.0 / GRID).round() as usize;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..=n {
        let w = i as f64 * GRID;
        let l = expected_loss(kind, noise, w, true_value);
        if l < best.1 {
            best = (w, l);
        }
    }
    best
}

/// Worst case of `E[ℓ(ω, v, ·)]` over `v ∈ [lo, hi]` (endpoints plus an interior grid).
pub fn worst_case(kind: LossKind, noise: NoiseModel, omega: f64, lo: f64, hi: f64) -> f64 {
    const INNER: usize = 16;
    (0..=INNER)
        .map(|i| lo + (hi - lo) * i as f64 / INNER as f64)
        .map(|v| expected_loss(kind, noise, omega, v))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Min-max query for a value interval `[lo, hi]` (already clipped to `[0, 1]`).
///
/// `anchor` is the learner's point estimate `⟨x, κ⟩`, used for the ε-ball
/// loss (clamped into the interval so it is `⟨x, θ′⟩` for some `θ′ ∈ K`).
pub fn exploit_from_range(kind: LossKind, noise: NoiseModel, lo: f64, hi: f64, anchor: Option<f64>) -> f64 {
    let (lo, hi) = (lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0));
    match kind {
        LossKind::EpsBall { .. } => anchor.map_or(0.5 * (lo + hi), |a| a.clamp(lo, hi)),
        LossKind::Absolute => 0.5 * (lo + hi),
        LossKind::Pricing if noise.sigma() == 0.0 => lo,
        LossKind::Pricing => {
            // Coarse pass at 10·GRID, then refine at GRID around the best point.
            let coarse = 10.0 * GRID;
            let mut best = (0.0, f64::INFINITY);
            let steps = (hi / coarse).ceil() as usize;
            for i in 0..=steps {
                let w = (i as f64 * coarse).min(hi);
                let l = worst_case(kind, noise, w, lo, hi);
                if l < best.1 {
                    best = (w, l);
                }
            }
            let center = best.0;
            for i in -10i32..=10 {
                let w = (center + f64::from(i) * GRID).clamp(0.0, 1.0);
                let l = worst_case(kind, noise, w, lo, hi);
                if l < best.1 {
                    best = (w, l);
                }
            }
            best.0
        }
    }
}

/// `min_ω max_{θ∈K} E[ℓ(ω, ⟨x,θ⟩, ·)]` with the value range solved by two LPs.
pub fn exploit_query(
    kind: LossKind,
    noise: NoiseModel,
    body: &KnowledgeSet,
    x: &Vector,
    anchor: Option<f64>,
) -> Result<f64> {
    let (lo, hi) = body.range(x)?;
    Ok(exploit_from_range(kind, noise, lo, hi, anchor))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pricing_examples() {
        assert!((loss(LossKind::Pricing, 0.5, 0.7, 0.7).unwrap() - 0.2).abs() < 1e-15);
        assert!((loss(LossKind::Pricing, 0.8, 0.7, 0.7).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(loss(LossKind::Pricing, 0.7, 0.7, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn eps_ball_and_absolute_examples() {
        assert_eq!(loss(LossKind::EpsBall { eps: 0.1 }, 0.45, 0.5, 0.5).unwrap(), 0.0);
        assert_eq!(loss(LossKind::EpsBall { eps: 0.1 }, 0.3, 0.5, 0.5).unwrap(), 1.0);
        assert!((loss(LossKind::Absolute, 0.2, 0.9, 0.9).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(loss(LossKind::Absolute, 1.2, 0.5, 0.5).is_err());
        assert!(loss(LossKind::Absolute, 0.2, -0.1, 0.5).is_err());
    }

    #[test]
    fn hermite_rule_integrates_moments() {
        let (x, w) = gauss_hermite(20);
        let pi_sqrt = std::f64::consts::PI.sqrt();
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m0 - pi_sqrt).abs() < 1e-12);
        assert!((m2 - pi_sqrt / 2.0).abs() < 1e-12);
        assert!((m4 - 3.0 * pi_sqrt / 4.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_benchmark_is_exact() {
        for kind in [LossKind::EpsBall { eps: 0.1 }, LossKind::Absolute, LossKind::Pricing] {
            assert_eq!(benchmark_loss(kind, NoiseModel::None, 0.37), (0.37, 0.0));
        }
    }

    #[test]
    fn pricing_exploit_without_noise_is_lower_end() {
        let w = exploit_from_range(LossKind::Pricing, NoiseModel::None, 0.48, 0.50, None);
        assert_eq!(w, 0.48);
        assert!(worst_case(LossKind::Pricing, NoiseModel::None, w, 0.48, 0.50) <= 0.02 + 1e-12);
    }
}
