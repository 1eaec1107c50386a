//! The teleportation protocol on qudits.
//!
//! Alice holds the input on particle 1 and shares the resource Bell pair on
//! particles A and B with Bob. The three-particle state expands as
//!
//! ```text
//! |in>_1 ⊗ |R>_AB = Σ_k (1/d) |bell_k>_1A ⊗ |cond_k>_B
//! ```
//!
//! with every conditional state `|cond_k>` a Weyl rotation of `|in>`.
//! Alice measures a Bell-diagonal observable on `1A`, sends the flat index
//! of the outcome, and Bob undoes the rotation.

use serde::{Deserialize, Serialize};

use crate::bell::{bell_state, check_dim, BellIndex};
use crate::eigen::eig_hermitian;
use crate::error::{GbtError, Result};
use crate::measurement::{
    bob_marginal, measure, outcome_distribution, project_onto, MeasurementOutcome,
};
use crate::tensor::{fidelity, CNum, OperatorMat, StateVec, ZERO};
use crate::tol::{FIDELITY_TOL, GROUP_TOL, PROB_ZERO, TOL_MAT, TOL_NORM};
use crate::weyl::{build_observable, phase_order, ObservableSpec, WeylWord};

/// Particle order in the three-particle state.
pub const INPUT: usize = 0;
pub const ALICE: usize = 1;
pub const BOB: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub d: usize,
    pub input_amps: Vec<CNum>,
    pub resource: BellIndex,
    pub observable: ObservableSpec,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn new(
        d: usize,
        input_amps: Vec<CNum>,
        resource: BellIndex,
        observable: ObservableSpec,
        seed: u64,
    ) -> Result<Self> {
        check_dim(d)?;
        if input_amps.len() != d {
            return Err(GbtError::DimensionMismatch {
                expected: d,
                found: input_amps.len(),
            });
        }
        StateVec::new(vec![d], input_amps.clone())?;
        if resource.dim() != d {
            return Err(GbtError::InvalidConfig(format!(
                "resource {resource} is not a d={d} Bell state"
            )));
        }
        if observable.dim() != d {
            return Err(GbtError::InvalidConfig(format!(
                "observable is for d={}, protocol uses d={d}",
                observable.dim()
            )));
        }
        Ok(Self {
            d,
            input_amps,
            resource,
            observable,
            seed,
        })
    }

    /// Qubit protocol with the singlet `(|01> - |10>)/√2` as resource and
    /// `σ_1⊗σ_1 + 2σ_3⊗σ_3` as Alice's observable.
    pub fn standard_d2(input_amps: Vec<CNum>, seed: u64) -> Result<Self> {
        Self::new(
            2,
            input_amps,
            BellIndex::new(2, 1, 1)?,
            ObservableSpec::good_qubit(),
            seed,
        )
    }

    /// Qutrit protocol with `(|01> + ω|12> + ω²|20>)/√3` as resource and
    /// eigenvalues `8, 7, .., 0` on the nine Bell states.
    pub fn standard_d3(input_amps: Vec<CNum>, seed: u64) -> Result<Self> {
        Self::new(
            3,
            input_amps,
            BellIndex::new(3, 1, 1)?,
            ObservableSpec::descending(3)?,
            seed,
        )
    }

    /// Resource `bell(0, 0)` and descending distinct eigenvalues.
    pub fn general(d: usize, input_amps: Vec<CNum>, seed: u64) -> Result<Self> {
        Self::new(
            d,
            input_amps,
            BellIndex::new(d, 0, 0)?,
            ObservableSpec::descending(d)?,
            seed,
        )
    }

    pub fn input_state(&self) -> StateVec {
        StateVec::new(vec![self.d], self.input_amps.clone()).expect("validated at construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalMessage {
    pub bell_flat_index: usize,
}

/// Bob's correction for each of Alice's outcomes, in flat Bell order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTable {
    pub d: usize,
    pub resource: BellIndex,
    pub entries: Vec<WeylWord>,
}

impl CorrectionTable {
    pub fn get(&self, bell_flat_index: usize) -> Option<&WeylWord> {
        bell_flat_index
            .checked_sub(1)
            .and_then(|k| self.entries.get(k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeleportReport {
    pub config: ProtocolConfig,
    pub outcome: MeasurementOutcome,
    pub message: ClassicalMessage,
    pub correction: WeylWord,
    pub bob_state: StateVec,
    pub fidelity: f64,
    pub success: bool,
}

/// `|in>_1 ⊗ |resource>_AB`.
pub fn three_particle_state(cfg: &ProtocolConfig) -> StateVec {
    cfg.input_state().kron(&bell_state(cfg.resource))
}

/// One term `weight · |bell>_1A ⊗ |state>_B` of the Bell-branch expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct BellBranch {
    pub bell: BellIndex,
    pub weight: f64,
    pub state: StateVec,
}

/// `(<bell|_1A ⊗ 1_B) |Ψ>` for a state on `(d, d, d)`.
fn contract_bell(state: &StateVec, bell: &StateVec) -> Vec<CNum> {
    let d = bell.dims()[0];
    let mut out = vec![ZERO; d];
    for (pair, b) in bell.amps().iter().enumerate() {
        if *b == ZERO {
            continue;
        }
        let bc = b.conj();
        for (k, slot) in out.iter_mut().enumerate() {
            *slot += bc * state.amps()[pair * d + k];
        }
    }
    out
}

/// Projects particles `1A` of the three-particle state onto every Bell state.
/// Bob's conditional states keep whatever phase the projection produces.
pub fn expand_in_bell_branches(cfg: &ProtocolConfig) -> Result<Vec<BellBranch>> {
    let psi = three_particle_state(cfg);
    BellIndex::all(cfg.d)?
        .into_iter()
        .map(|bell| {
            let raw = contract_bell(&psi, &bell_state(bell));
            let weight = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let state = StateVec::normalized(vec![cfg.d], raw)?;
            Ok(BellBranch {
                bell,
                weight,
                state,
            })
        })
        .collect()
}

/// `Σ_k weight_k |bell_k> ⊗ |state_k>` as an amplitude vector on `(d, d, d)`.
pub fn reassemble_branches(branches: &[BellBranch]) -> Vec<CNum> {
    let d = branches.first().map_or(0, |b| b.bell.dim());
    let mut out = vec![ZERO; d * d * d];
    for br in branches {
        let term = bell_state(br.bell).kron(&br.state);
        for (slot, a) in out.iter_mut().zip(term.amps()) {
            *slot += a * br.weight;
        }
    }
    out
}

/// The linear map `|in> -> d · (<outcome|_1A ⊗ 1_B)(|in>_1 ⊗ |resource>_AB)`,
/// which is unitary for every maximally entangled resource.
pub fn conditional_map(resource: BellIndex, outcome: BellIndex) -> Result<OperatorMat> {
    let d = resource.dim();
    if outcome.dim() != d {
        return Err(GbtError::DimensionMismatch {
            expected: d,
            found: outcome.dim(),
        });
    }
    let res = bell_state(resource);
    let out = bell_state(outcome);
    let mut m = OperatorMat::zeros(d);
    for i in 0..d {
        let column = contract_bell(&StateVec::basis(d, i)?.kron(&res), &out);
        for (r, v) in column.into_iter().enumerate() {
            m.set(r, i, v * d as f64);
        }
    }
    Ok(m)
}

/// Finds the Weyl word `W` with `W · M_outcome = c · 1`, `c > 0`, by
/// exhaustive search over the `d²` shift/clock pairs. The phase of `W` is
/// then fixed from the phase group so that `c` is real and positive.
pub fn solve_correction(d: usize, resource: BellIndex, outcome: BellIndex) -> Result<WeylWord> {
    check_dim(d)?;
    if resource.dim() != d {
        return Err(GbtError::DimensionMismatch {
            expected: d,
            found: resource.dim(),
        });
    }
    let m = conditional_map(resource, outcome)?;
    let order = phase_order(d);
    for word in WeylWord::all_phaseless(d)? {
        let composite = &word.materialize() * &m;
        let c = composite.get(0, 0);
        if c.norm() < 0.5 {
            continue;
        }
        let scaled = OperatorMat::identity(d).scale(c);
        if composite.max_abs_diff(&scaled) > TOL_MAT {
            continue;
        }
        for phase in 0..order {
            let candidate = WeylWord::new(d, word.x_pow(), word.z_pow(), phase)?;
            let total = candidate.phase_factor() * c;
            if total.im.abs() < 1e-9 && total.re > 0.0 {
                return Ok(candidate);
            }
        }
    }
    Err(GbtError::NoCorrection {
        outcome: outcome.flat(),
    })
}

/// `solve_correction` for every outcome.
pub fn solved_correction_table(d: usize, resource: BellIndex) -> Result<CorrectionTable> {
    let entries = BellIndex::all(d)?
        .into_iter()
        .map(|k| solve_correction(d, resource, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrectionTable {
        d,
        resource,
        entries,
    })
}

/// Standard corrections for the singlet (`d = 2`) and the
/// `(|01> + ω|12> + ω²|20>)/√3` resource (`d = 3`), in flat outcome order:
///
/// * `d = 2`: `iσ_2`, `σ_1`, `-σ_3`, `-1`
/// * `d = 3`: `Z²X²`, `X²`, `ZX²`, `ω²Z²X`, `ω²X`, `ω²ZX`, `ωZ²`, `ω1`, `ωZ`
pub fn standard_correction_table(d: usize) -> Result<CorrectionTable> {
    let entries = match d {
        2 => vec![
            WeylWord::new(2, 1, 1, 2)?, // iσ_2 = -XZ
            WeylWord::x(2, 1)?,
            WeylWord::new(2, 0, 1, 2)?,
            WeylWord::new(2, 0, 0, 2)?,
        ],
        3 => {
            let x = |p| WeylWord::x(3, p);
            let z = |p| WeylWord::z(3, p);
            let w = |p| WeylWord::omega(3, p);
            vec![
                z(2)? * x(2)?,
                x(2)?,
                z(1)? * x(2)?,
                w(2)? * z(2)? * x(1)?,
                w(2)? * x(1)?,
                w(2)? * z(1)? * x(1)?,
                w(1)? * z(2)?,
                w(1)?,
                w(1)? * z(1)?,
            ]
        }
        other => {
            return Err(GbtError::InvalidConfig(format!(
                "standard correction tables exist only for d = 2, 3 (got {other})"
            )))
        }
    };
    Ok(CorrectionTable {
        d,
        resource: BellIndex::new(d, 1, 1)?,
        entries,
    })
}

/// Exact probability of each classical message, in flat Bell order.
pub fn message_distribution(cfg: &ProtocolConfig) -> Result<Vec<f64>> {
    let form = eig_hermitian(&build_observable(&cfg.observable))?;
    let dist = outcome_distribution(&three_particle_state(cfg), &form, &[INPUT, ALICE])?;
    let mut per_message = vec![0.0; cfg.d * cfg.d];
    for (value, p) in dist {
        per_message[cfg.observable.nearest_bell(value).flat() - 1] += p;
    }
    Ok(per_message)
}

fn refuse_degenerate(spec: &ObservableSpec) -> Result<()> {
    match spec.degenerate_clusters().into_iter().next() {
        Some((value, states)) => Err(GbtError::DegenerateObservable { value, states }),
        None => Ok(()),
    }
}

/// One full run: measure, message, correct, score.
pub fn run_teleport(cfg: &ProtocolConfig) -> Result<TeleportReport> {
    refuse_degenerate(&cfg.observable)?;
    let input = cfg.input_state();
    let norm = input.norm();
    if (norm - 1.0).abs() > TOL_NORM {
        return Err(GbtError::NotNormalized { norm });
    }
    let form = eig_hermitian(&build_observable(&cfg.observable))?;
    if form.is_degenerate() {
        let k = form
            .multiplicities()
            .iter()
            .position(|&m| m > 1)
            .unwrap_or(0);
        let value = form.eigenvalues()[k];
        let states = (1..=cfg.d * cfg.d)
            .filter(|&j| (cfg.observable.eigenvalues()[j - 1] - value).abs() < GROUP_TOL)
            .collect();
        return Err(GbtError::DegenerateObservable { value, states });
    }

    let psi = three_particle_state(cfg);
    let outcome = measure(&psi, &form, &[INPUT, ALICE], cfg.seed)?;
    let bell = cfg.observable.nearest_bell(outcome.eigenvalue);
    let message = ClassicalMessage {
        bell_flat_index: bell.flat(),
    };
    let correction = solve_correction(cfg.d, cfg.resource, bell)?;
    let unitary = correction.materialize();

    let rho_b = bob_marginal(&outcome.post_state, BOB)?.conjugate_by(&unitary)?;
    let fid = fidelity(&input, &rho_b)?;
    let conditional = contract_bell(&outcome.post_state, &bell_state(bell));
    let bob_state = StateVec::normalized(vec![cfg.d], unitary.apply(&conditional)?)?;

    Ok(TeleportReport {
        config: cfg.clone(),
        outcome,
        message,
        correction,
        bob_state,
        fidelity: fid,
        success: fid > 1.0 - FIDELITY_TOL,
    })
}

/// Per-eigenspace result of teleporting through a possibly degenerate
/// observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoOutcome {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub probability: f64,
    /// Bell flat indices sharing this eigenvalue.
    pub bell_states: Vec<usize>,
    /// The Bell state Bob assumes; the first of `bell_states`.
    pub assumed_message: usize,
    pub correction: WeylWord,
    /// `None` when the outcome cannot occur.
    pub bob_purity: Option<f64>,
    pub fidelity: Option<f64>,
    /// Best fidelity over every Weyl word for this outcome.
    pub best_fidelity: Option<f64>,
    pub best_correction: Option<WeylWord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateDemoReport {
    pub input_amps: Vec<CNum>,
    pub observable: ObservableSpec,
    pub degenerate: bool,
    pub outcomes: Vec<DemoOutcome>,
    pub average_fidelity: f64,
    pub best_average_fidelity: f64,
}

/// Runs the protocol through every eigenspace of `cfg.observable` exactly
/// (no sampling), applying a fixed correction per outcome. For a degenerate
/// eigenvalue Bob cannot tell which Bell state occurred and applies the
/// correction of the first one; the exhaustive best Weyl correction is
/// reported alongside.
pub fn run_degenerate_demo(cfg: &ProtocolConfig) -> Result<DegenerateDemoReport> {
    if cfg.d != 2 {
        return Err(GbtError::InvalidConfig(format!(
            "the degeneracy demonstration runs on qubits (got d = {})",
            cfg.d
        )));
    }
    let input = cfg.input_state();
    let table = if cfg.resource == BellIndex::new(2, 1, 1)? {
        standard_correction_table(2)?
    } else {
        solved_correction_table(2, cfg.resource)?
    };
    let form = eig_hermitian(&build_observable(&cfg.observable))?;
    let psi = three_particle_state(cfg);
    let dist = outcome_distribution(&psi, &form, &[INPUT, ALICE])?;
    let candidates = WeylWord::all_phaseless(cfg.d)?;

    let mut outcomes = Vec::with_capacity(form.len());
    for (k, &(eigenvalue, probability)) in dist.iter().enumerate() {
        let bell_states: Vec<usize> = (1..=cfg.d * cfg.d)
            .filter(|&j| (cfg.observable.eigenvalues()[j - 1] - eigenvalue).abs() < GROUP_TOL)
            .collect();
        let assumed_message = bell_states[0];
        let correction = *table
            .get(assumed_message)
            .expect("table covers every outcome");
        if probability < PROB_ZERO {
            outcomes.push(DemoOutcome {
                eigenvalue,
                multiplicity: form.multiplicities()[k],
                probability,
                bell_states,
                assumed_message,
                correction,
                bob_purity: None,
                fidelity: None,
                best_fidelity: None,
                best_correction: None,
            });
            continue;
        }
        let post = project_onto(&psi, &form, &[INPUT, ALICE], k)?;
        let rho_b = bob_marginal(&post.post_state, BOB)?;
        let score = |w: &WeylWord| -> Result<f64> {
            fidelity(&input, &rho_b.conjugate_by(&w.materialize())?)
        };
        let fid = score(&correction)?;
        let mut best = (f64::NEG_INFINITY, correction);
        for w in &candidates {
            let f = score(w)?;
            if f > best.0 + 1e-15 {
                best = (f, *w);
            }
        }
        outcomes.push(DemoOutcome {
            eigenvalue,
            multiplicity: form.multiplicities()[k],
            probability,
            bell_states,
            assumed_message,
            correction,
            bob_purity: Some(rho_b.purity()),
            fidelity: Some(fid),
            best_fidelity: Some(best.0),
            best_correction: Some(best.1),
        });
    }
    let weighted = |f: fn(&DemoOutcome) -> Option<f64>| -> f64 {
        outcomes
            .iter()
            .filter_map(|o| f(o).map(|v| o.probability * v))
            .sum()
    };
    let average_fidelity = weighted(|o| o.fidelity);
    let best_average_fidelity = weighted(|o| o.best_fidelity);
    Ok(DegenerateDemoReport {
        input_amps: cfg.input_amps.clone(),
        observable: cfg.observable.clone(),
        degenerate: form.is_degenerate(),
        outcomes,
        average_fidelity,
        best_average_fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{max_abs_diff, omega, ONE};

    fn r(x: f64) -> CNum {
        CNum::new(x, 0.0)
    }

    #[test]
    fn config_validation() {
        assert!(matches!(
            ProtocolConfig::standard_d2(vec![r(1.0), r(1.0)], 0),
            Err(GbtError::NotNormalized { .. })
        ));
        assert!(ProtocolConfig::standard_d2(vec![r(1.0)], 0).is_err());
        let bad_resource = BellIndex::new(3, 0, 0).unwrap();
        assert!(ProtocolConfig::new(
            2,
            vec![ONE, ZERO],
            bad_resource,
            ObservableSpec::good_qubit(),
            0
        )
        .is_err());
        assert!(ProtocolConfig::general(1, vec![ONE], 0).is_err());
    }

    #[test]
    fn three_particle_examples() {
        let h = 1.0 / 2f64.sqrt();
        let cfg = ProtocolConfig::standard_d2(vec![ONE, ZERO], 0).unwrap();
        let mut want = vec![ZERO; 8];
        want[1] = r(h);
        want[2] = r(-h);
        assert!(max_abs_diff(three_particle_state(&cfg).amps(), &want) < 1e-15);

        let cfg = ProtocolConfig::new(
            2,
            vec![ZERO, ONE],
            BellIndex::new(2, 0, 0).unwrap(),
            ObservableSpec::good_qubit(),
            0,
        )
        .unwrap();
        let mut want = vec![ZERO; 8];
        want[4] = r(h);
        want[7] = r(h);
        assert!(max_abs_diff(three_particle_state(&cfg).amps(), &want) < 1e-15);
    }

    #[test]
    fn qubit_branches_carry_written_signs() {
        let (a, b) = (0.6, 0.8);
        let cfg = ProtocolConfig::standard_d2(vec![r(a), r(b)], 0).unwrap();
        let branches = expand_in_bell_branches(&cfg).unwrap();
        // α|1> - β|0>, α|1> + β|0>, -α|0> + β|1>, -α|0> - β|1>
        let want = [[-b, a], [b, a], [-a, b], [-a, -b]];
        for (br, w) in branches.iter().zip(want) {
            assert!((br.weight - 0.5).abs() < 1e-15);
            assert!(max_abs_diff(br.state.amps(), &[r(w[0]), r(w[1])]) < 1e-15);
        }
    }

    #[test]
    fn qutrit_branch_examples() {
        let (a, b, c) = (r(0.48), CNum::new(0.36, 0.48), r(0.64));
        let cfg = ProtocolConfig::standard_d3(vec![a, b, c], 0).unwrap();
        let branches = expand_in_bell_branches(&cfg).unwrap();
        let w = omega(3);
        // ψ2 branch: α|1> + β|2> + γ|0>
        assert!(max_abs_diff(branches[1].state.amps(), &[c, a, b]) < 1e-14);
        // ψ8 branch: ω²(α|0> + β|1> + γ|2>). The commonly printed form
        // ω²(α|2> + β|0> + γ|1>) has Bob's kets shifted; the correction ω·1
        // only inverts the unshifted state.
        let w2 = w * w;
        assert!(max_abs_diff(branches[7].state.amps(), &[a * w2, b * w2, c * w2]) < 1e-14);
    }

    #[test]
    fn correction_examples() {
        let phi4 = BellIndex::new(2, 1, 1).unwrap();
        let w = solve_correction(2, phi4, BellIndex::from_flat(2, 2).unwrap()).unwrap();
        assert_eq!(w, WeylWord::x(2, 1).unwrap());
        let id = BellIndex::new(5, 0, 0).unwrap();
        assert_eq!(
            solve_correction(5, id, id).unwrap(),
            WeylWord::identity(5).unwrap()
        );
        assert!(standard_correction_table(4).is_err());
    }

    #[test]
    fn standard_tables_match_solved_tables_exactly() {
        for d in [2, 3] {
            let standard = standard_correction_table(d).unwrap();
            let solved = solved_correction_table(d, standard.resource).unwrap();
            assert_eq!(standard.entries, solved.entries, "d = {d}");
        }
    }

    #[test]
    fn degenerate_observable_is_refused() {
        let cfg = ProtocolConfig::new(
            2,
            vec![r(0.6), r(0.8)],
            BellIndex::new(2, 1, 1).unwrap(),
            ObservableSpec::op13(),
            0,
        )
        .unwrap();
        match run_teleport(&cfg) {
            Err(GbtError::DegenerateObservable { value, states }) => {
                assert_eq!(value, 0.0);
                assert_eq!(states, vec![2, 3]);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn basis_ket_teleports() {
        for seed in 0..20 {
            let cfg = ProtocolConfig::standard_d3(vec![ONE, ZERO, ZERO], seed).unwrap();
            let report = run_teleport(&cfg).unwrap();
            assert!(report.success);
            assert!(max_abs_diff(report.bob_state.amps(), &[ONE, ZERO, ZERO]) < 1e-12);
        }
    }

    #[test]
    fn degenerate_demo_for_basis_input() {
        let mut cfg = ProtocolConfig::standard_d2(vec![ONE, ZERO], 0).unwrap();
        cfg.observable = ObservableSpec::op13();
        let report = run_degenerate_demo(&cfg).unwrap();
        assert!(report.degenerate);
        let zero = report
            .outcomes
            .iter()
            .find(|o| o.multiplicity == 2)
            .unwrap();
        assert!((zero.probability - 0.5).abs() < 1e-12);
        // branches |1> and -|0> mix evenly: Bob holds 1/2
        assert!((zero.bob_purity.unwrap() - 0.5).abs() < 1e-12);
        assert!((zero.fidelity.unwrap() - 0.5).abs() < 1e-12);
        assert!((report.average_fidelity - 0.75).abs() < 1e-12);
    }
}
