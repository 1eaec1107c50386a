//! Projective measurement: Born-rule probabilities and Lüders reduction.
//!
//! A degenerate outcome projects onto the whole eigenspace. The post-state
//! is `P_k|ψ> / ‖P_k|ψ>‖`, which in general is a superposition of several
//! eigenvectors. No basis vector inside the eigenspace is ever selected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eigen::SpectralForm;
use crate::error::{GbtError, Result};
use crate::tensor::{DensityMat, OperatorMat, StateVec};
use crate::tol::{PROB_ZERO, TOL_NORM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    /// Position of the realized eigenspace in the spectral form (descending
    /// eigenvalue order).
    pub index: usize,
    pub eigenvalue: f64,
    pub probability: f64,
    pub post_state: StateVec,
    pub degenerate: bool,
}

/// The generator behind every sampled outcome: ChaCha8 seeded with
/// `seed_from_u64`, one uniform `f64` per draw.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn lifted_projectors(
    state: &StateVec,
    obs: &SpectralForm,
    subsystems: &[usize],
) -> Result<Vec<OperatorMat>> {
    let local: usize = subsystems
        .iter()
        .map(|&s| state.dims().get(s).copied().unwrap_or(0))
        .product();
    if subsystems.is_empty() || local != obs.dim() {
        return Err(GbtError::DimensionMismatch {
            expected: obs.dim(),
            found: local,
        });
    }
    obs.projectors()
        .iter()
        .map(|p| p.embed(state.dims(), subsystems))
        .collect()
}

fn born_weights(state: &StateVec, lifted: &[OperatorMat]) -> Result<Vec<f64>> {
    let probs = lifted
        .iter()
        .map(|p| {
            let v = p.apply(state.amps())?;
            Ok(v.iter().map(|a| a.norm_sqr()).sum())
        })
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = probs.iter().sum();
    if total < TOL_NORM || (total - 1.0).abs() > 1e-8 {
        return Err(GbtError::InconsistentSpectrum(total));
    }
    Ok(probs)
}

/// Exact Born distribution `(λ_k, ‖(P_k ⊗ 1)|ψ>‖²)` in descending
/// eigenvalue order.
pub fn outcome_distribution(
    state: &StateVec,
    obs: &SpectralForm,
    subsystems: &[usize],
) -> Result<Vec<(f64, f64)>> {
    let lifted = lifted_projectors(state, obs, subsystems)?;
    let probs = born_weights(state, &lifted)?;
    Ok(obs.eigenvalues().iter().copied().zip(probs).collect())
}

/// Inverse-CDF draw over `probs`; weights below `PROB_ZERO` are never chosen.
pub fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let support: Vec<(usize, f64)> = probs
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, p)| p >= PROB_ZERO)
        .collect();
    let total: f64 = support.iter().map(|&(_, p)| p).sum();
    let mut acc = 0.0;
    for &(k, p) in &support {
        acc += p / total;
        if u < acc {
            return k;
        }
    }
    support.last().map_or(0, |&(k, _)| k)
}

/// Measures `obs` on the factors `subsystems` of `state`.
pub fn measure(
    state: &StateVec,
    obs: &SpectralForm,
    subsystems: &[usize],
    rng_seed: u64,
) -> Result<MeasurementOutcome> {
    let lifted = lifted_projectors(state, obs, subsystems)?;
    let probs = born_weights(state, &lifted)?;
    let k = sample_index(&probs, &mut seeded_rng(rng_seed));
    collapse(state, obs, &lifted[k], k, probs[k])
}

/// Lüders reduction onto eigenspace `index` without sampling.
pub fn project_onto(
    state: &StateVec,
    obs: &SpectralForm,
    subsystems: &[usize],
    index: usize,
) -> Result<MeasurementOutcome> {
    let lifted = lifted_projectors(state, obs, subsystems)?;
    let probs = born_weights(state, &lifted)?;
    if index >= lifted.len() {
        return Err(GbtError::IndexOutOfRange {
            what: "eigenspace",
            index,
            bound: lifted.len(),
        });
    }
    collapse(state, obs, &lifted[index], index, probs[index])
}

fn collapse(
    state: &StateVec,
    obs: &SpectralForm,
    projector: &OperatorMat,
    index: usize,
    probability: f64,
) -> Result<MeasurementOutcome> {
    if probability < PROB_ZERO {
        return Err(GbtError::InconsistentSpectrum(probability));
    }
    let projected = projector.apply(state.amps())?;
    let post_state = StateVec::normalized(state.dims().to_vec(), projected)?;
    Ok(MeasurementOutcome {
        index,
        eigenvalue: obs.eigenvalues()[index],
        probability,
        post_state,
        degenerate: obs.multiplicities()[index] > 1,
    })
}

/// Reduced density matrix of factor `bob_index` of a pure state.
pub fn bob_marginal(post_state: &StateVec, bob_index: usize) -> Result<DensityMat> {
    post_state
        .density()
        .partial_trace(post_state.dims(), bob_index)
}
