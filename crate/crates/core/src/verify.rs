//! Named numerical checks of every identity the protocol relies on.
//!
//! For `d = 2` and `d = 3` the Bell states, product expansions, Bell
//! branches and correction tables are compared against hand-transcribed
//! tables that do not go through the general-`d` formulas. Other
//! dimensions fall back to structural checks (Gram matrix, round trips,
//! reassembly).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bell::{
    bell_basis, bell_state, check_dim, product_in_bell_basis, resum_bell_coefficients, BellIndex,
};
use crate::eigen::eig_hermitian;
use crate::error::{GbtError, Result};
use crate::measurement::seeded_rng;
use crate::teleport::{
    expand_in_bell_branches, reassemble_branches, solve_correction, solved_correction_table,
    standard_correction_table, three_particle_state, ProtocolConfig,
};
use crate::tensor::{
    fidelity, max_abs_diff, omega_pow, random_state, CNum, OperatorMat, StateVec, ONE, ZERO,
};
use crate::weyl::{
    assemble_pauli_form, assemble_weyl_expansion, build_observable, ketbra_decomposition_qubit,
    ketbra_decomposition_qutrit, pauli, pauli_form_qubit, weyl_expansion, weyl_x, weyl_z,
    ObservableSpec, WeylWord,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Orthonormality,
    Inversion,
    Formula,
    Projectors,
    Coefficients,
    Corrections,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Orthonormality,
        Suite::Inversion,
        Suite::Formula,
        Suite::Projectors,
        Suite::Coefficients,
        Suite::Corrections,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Orthonormality => "orthonormality",
            Suite::Inversion => "inversion",
            Suite::Formula => "formula",
            Suite::Projectors => "projectors",
            Suite::Coefficients => "coefficients",
            Suite::Corrections => "corrections",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = GbtError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| GbtError::InvalidConfig(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub dim: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(
        suite: Suite,
        name: impl Into<String>,
        dim: usize,
        max_error: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            suite,
            name: name.into(),
            dim,
            max_error,
            tolerance,
            passed: max_error.is_finite() && max_error < tolerance,
        }
    }
}

/// Random inputs per statistical check.
pub const RANDOM_INPUTS: usize = 100;
pub const RANDOM_OBSERVABLES: usize = 50;
pub const CORRECTION_INPUTS: usize = 20;

pub const TOL_ORTHONORMAL: f64 = 1e-10;
pub const TOL_INVERSION: f64 = 1e-12;
pub const TOL_FORMULA: f64 = 1e-12;
pub const TOL_PROJECTOR: f64 = 1e-12;
pub const TOL_COEFFICIENT: f64 = 1e-10;
pub const TOL_CORRECTION: f64 = 1e-9;

/// Bell states written out term by term: `(ket_1, ket_2, ω-power)` with
/// amplitude `ω^p / √d`. At `d = 2`, `ω = -1`.
pub fn transcribed_bell_terms(d: usize) -> Option<Vec<Vec<(usize, usize, i64)>>> {
    match d {
        2 => Some(vec![
            vec![(0, 0, 0), (1, 1, 0)],
            vec![(0, 0, 0), (1, 1, 1)],
            vec![(0, 1, 0), (1, 0, 0)],
            vec![(0, 1, 0), (1, 0, 1)],
        ]),
        3 => Some(vec![
            vec![(0, 0, 0), (1, 1, 0), (2, 2, 0)],
            vec![(0, 0, 0), (1, 1, 1), (2, 2, 2)],
            vec![(0, 0, 0), (1, 1, 2), (2, 2, 1)],
            vec![(0, 1, 0), (1, 2, 0), (2, 0, 0)],
            vec![(0, 1, 0), (1, 2, 1), (2, 0, 2)],
            vec![(0, 1, 0), (1, 2, 2), (2, 0, 1)],
            vec![(0, 2, 0), (1, 0, 0), (2, 1, 0)],
            vec![(0, 2, 0), (1, 0, 1), (2, 1, 2)],
            vec![(0, 2, 0), (1, 0, 2), (2, 1, 1)],
        ]),
        _ => None,
    }
}

/// `|i>⊗|j>` and its Bell terms `(bell flat index, ω-power)`, each with
/// coefficient `ω^p / √d`.
pub type InversionLine = ((usize, usize), Vec<(usize, i64)>);

pub fn transcribed_inversion(d: usize) -> Option<Vec<InversionLine>> {
    match d {
        2 => Some(vec![
            ((0, 0), vec![(1, 0), (2, 0)]),
            ((1, 1), vec![(1, 0), (2, 1)]),
            ((0, 1), vec![(3, 0), (4, 0)]),
            ((1, 0), vec![(3, 0), (4, 1)]),
        ]),
        3 => Some(vec![
            ((0, 0), vec![(1, 0), (2, 0), (3, 0)]),
            ((1, 1), vec![(1, 0), (2, 2), (3, 1)]),
            ((2, 2), vec![(1, 0), (2, 1), (3, 2)]),
            ((0, 1), vec![(4, 0), (5, 0), (6, 0)]),
            ((1, 2), vec![(4, 0), (5, 2), (6, 1)]),
            ((2, 0), vec![(4, 0), (5, 1), (6, 2)]),
            ((0, 2), vec![(7, 0), (8, 0), (9, 0)]),
            ((1, 0), vec![(7, 0), (8, 2), (9, 1)]),
            ((2, 1), vec![(7, 0), (8, 1), (9, 2)]),
        ]),
        _ => None,
    }
}

/// Bob's conditional states for the standard resources, as
/// `(input index, Bob ket, ω-power)` triples. Qutrit branches 7–9 follow
/// the correction list, where Bob's kets are unshifted.
pub fn transcribed_branches(d: usize) -> Option<Vec<Vec<(usize, usize, i64)>>> {
    match d {
        2 => Some(vec![
            vec![(0, 1, 0), (1, 0, 1)],
            vec![(0, 1, 0), (1, 0, 0)],
            vec![(0, 0, 1), (1, 1, 0)],
            vec![(0, 0, 1), (1, 1, 1)],
        ]),
        3 => Some(vec![
            vec![(0, 1, 0), (1, 2, 1), (2, 0, 2)],
            vec![(0, 1, 0), (1, 2, 0), (2, 0, 0)],
            vec![(0, 1, 0), (1, 2, 2), (2, 0, 1)],
            vec![(0, 2, 1), (1, 0, 2), (2, 1, 0)],
            vec![(0, 2, 1), (1, 0, 1), (2, 1, 1)],
            vec![(0, 2, 1), (1, 0, 0), (2, 1, 2)],
            vec![(0, 0, 2), (1, 1, 0), (2, 2, 1)],
            vec![(0, 0, 2), (1, 1, 2), (2, 2, 2)],
            vec![(0, 0, 2), (1, 1, 1), (2, 2, 0)],
        ]),
        _ => None,
    }
}

fn suite_orthonormality(d: usize) -> Result<Vec<Check>> {
    let basis = bell_basis(d)?;
    let n = basis.len();
    let gram = OperatorMat::from_fn(n, |a, b| basis[a].inner(&basis[b]).expect("same dims"));
    let mut checks = vec![Check::new(
        Suite::Orthonormality,
        "gram-matrix-identity",
        d,
        gram.max_abs_diff(&OperatorMat::identity(n)),
        TOL_ORTHONORMAL,
    )];
    if let Some(table) = transcribed_bell_terms(d) {
        let norm = 1.0 / (d as f64).sqrt();
        let mut worst: f64 = 0.0;
        for (state, terms) in basis.iter().zip(&table) {
            let mut want = vec![ZERO; d * d];
            for &(i, j, p) in terms {
                want[i * d + j] = omega_pow(d, p) * norm;
            }
            worst = worst.max(max_abs_diff(state.amps(), &want));
        }
        checks.push(Check::new(
            Suite::Orthonormality,
            "matches-transcribed-bell-table",
            d,
            worst,
            TOL_ORTHONORMAL,
        ));
    }
    let mut worst: f64 = 0.0;
    for state in &basis {
        let rho = state.density();
        for keep in 0..2 {
            let reduced = rho.partial_trace(&[d, d], keep)?;
            let mixed = OperatorMat::identity(d).scale(CNum::new(1.0 / d as f64, 0.0));
            worst = worst.max(reduced.matrix().max_abs_diff(&mixed));
        }
    }
    checks.push(Check::new(
        Suite::Orthonormality,
        "maximally-entangled-marginals",
        d,
        worst,
        TOL_ORTHONORMAL,
    ));
    let x = weyl_x(d)?;
    let z = weyl_z(d)?;
    let root = bell_state(BellIndex::new(d, 0, 0)?);
    let mut worst: f64 = 0.0;
    for idx in BellIndex::all(d)? {
        let gen = z.pow(idx.phase()).kron(&x.pow(idx.shift()));
        let v = gen.apply(root.amps())?;
        worst = worst.max(max_abs_diff(&v, bell_state(idx).amps()));
    }
    checks.push(Check::new(
        Suite::Orthonormality,
        "weyl-generated-from-root",
        d,
        worst,
        TOL_ORTHONORMAL,
    ));
    Ok(checks)
}

fn suite_inversion(d: usize) -> Result<Vec<Check>> {
    let mut round_trip: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let coeffs = product_in_bell_basis(i, j, d)?;
            let v = resum_bell_coefficients(&coeffs, d)?;
            let mut want = vec![ZERO; d * d];
            want[i * d + j] = ONE;
            round_trip = round_trip.max(max_abs_diff(&v, &want));
        }
    }
    let mut checks = vec![Check::new(
        Suite::Inversion,
        "product-kets-round-trip",
        d,
        round_trip,
        TOL_INVERSION,
    )];
    if let Some(table) = transcribed_inversion(d) {
        let norm = 1.0 / (d as f64).sqrt();
        let mut worst: f64 = 0.0;
        for ((i, j), terms) in &table {
            let mut want = vec![ZERO; d * d];
            for &(k, p) in terms {
                want[k - 1] = omega_pow(d, p) * norm;
            }
            // the transcribed line must hold as a vector identity on its own
            let resummed = resum_bell_coefficients(&want, d)?;
            let mut ket = vec![ZERO; d * d];
            ket[i * d + j] = ONE;
            worst = worst.max(max_abs_diff(&resummed, &ket));
            worst = worst.max(max_abs_diff(&product_in_bell_basis(*i, *j, d)?, &want));
        }
        checks.push(Check::new(
            Suite::Inversion,
            format!("transcribed-lines-{}", table.len()),
            d,
            worst,
            TOL_INVERSION,
        ));
    }
    Ok(checks)
}

fn standard_resource(d: usize) -> Result<BellIndex> {
    match d {
        2 | 3 => BellIndex::new(d, 1, 1),
        _ => BellIndex::new(d, 0, 0),
    }
}

fn config_for(d: usize, input: StateVec, seed: u64) -> Result<ProtocolConfig> {
    ProtocolConfig::new(
        d,
        input.amps().to_vec(),
        standard_resource(d)?,
        ObservableSpec::descending(d)?,
        seed,
    )
}

fn suite_formula(d: usize, seed: u64) -> Result<Vec<Check>> {
    let mut rng = seeded_rng(seed);
    let mut reassembly: f64 = 0.0;
    let mut weight: f64 = 0.0;
    let mut printed: f64 = 0.0;
    let table = transcribed_branches(d);
    for _ in 0..RANDOM_INPUTS {
        let input = random_state(d, &mut rng);
        let cfg = config_for(d, input.clone(), seed)?;
        let branches = expand_in_bell_branches(&cfg)?;
        let whole = three_particle_state(&cfg);
        reassembly = reassembly.max(max_abs_diff(&reassemble_branches(&branches), whole.amps()));
        for br in &branches {
            weight = weight.max((br.weight - 1.0 / d as f64).abs());
        }
        if let Some(table) = &table {
            for (br, terms) in branches.iter().zip(table) {
                let mut want = vec![ZERO; d];
                for &(j, b, p) in terms {
                    want[b] += input.amps()[j] * omega_pow(d, p);
                }
                printed = printed.max(max_abs_diff(br.state.amps(), &want));
            }
        }
    }
    let mut checks = vec![
        Check::new(
            Suite::Formula,
            "branches-reassemble-state",
            d,
            reassembly,
            TOL_FORMULA,
        ),
        Check::new(
            Suite::Formula,
            "branch-weight-is-1/d",
            d,
            weight,
            TOL_FORMULA,
        ),
    ];
    if table.is_some() {
        checks.push(Check::new(
            Suite::Formula,
            "branches-match-transcribed-table",
            d,
            printed,
            TOL_FORMULA,
        ));
    }
    Ok(checks)
}

fn suite_projectors(d: usize) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    match d {
        2 => {
            for i in 0..2 {
                for j in 0..2 {
                    let c = ketbra_decomposition_qubit(i, j)?;
                    checks.push(Check::new(
                        Suite::Projectors,
                        c.label,
                        d,
                        c.error,
                        TOL_PROJECTOR,
                    ));
                }
            }
        }
        3 => {
            for (i, j) in [
                (0, 0),
                (1, 1),
                (2, 2),
                (0, 1),
                (1, 0),
                (0, 2),
                (2, 0),
                (1, 2),
                (2, 1),
            ] {
                let c = ketbra_decomposition_qutrit(i, j)?;
                checks.push(Check::new(
                    Suite::Projectors,
                    c.label,
                    d,
                    c.error,
                    TOL_PROJECTOR,
                ));
            }
        }
        _ => {}
    }
    // |i><j| = (1/d) Σ_n ω^{-i n} Z^n X^{i-j}, valid for every d
    let x = weyl_x(d)?;
    let z = weyl_z(d)?;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let shift = x.pow((i + d - j) % d);
            let mut sum = OperatorMat::zeros(d);
            for n in 0..d {
                let term = (&z.pow(n) * &shift).scale(omega_pow(d, -((i * n) as i64)));
                sum = &sum + &term;
            }
            let sum = sum.scale(CNum::new(1.0 / d as f64, 0.0));
            worst = worst.max(sum.max_abs_diff(&OperatorMat::ketbra(d, i, j)));
        }
    }
    checks.push(Check::new(
        Suite::Projectors,
        "general-clock-shift-expansion",
        d,
        worst,
        TOL_PROJECTOR,
    ));
    Ok(checks)
}

fn bell_eigen_error(spec: &ObservableSpec, q: &OperatorMat) -> Result<f64> {
    let d = spec.dim();
    let mut worst: f64 = 0.0;
    for (state, &a) in bell_basis(d)?.iter().zip(spec.eigenvalues()) {
        let v = q.apply(state.amps())?;
        let want: Vec<CNum> = state.amps().iter().map(|x| x * a).collect();
        worst = worst.max(max_abs_diff(&v, &want));
    }
    Ok(worst)
}

fn suite_coefficients(d: usize, seed: u64) -> Result<Vec<Check>> {
    let mut rng = seeded_rng(seed ^ 0x5eed_c0ef);
    let mut checks = Vec::new();
    if d == 2 {
        let mut reassembly: f64 = 0.0;
        let mut eigen: f64 = 0.0;
        for _ in 0..RANDOM_OBSERVABLES {
            let values: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0)).collect();
            let spec = ObservableSpec::new(2, values)?;
            let q = build_observable(&spec);
            let pauli_q = assemble_pauli_form(&pauli_form_qubit(&spec)?);
            reassembly = reassembly.max(pauli_q.max_abs_diff(&q));
            eigen = eigen.max(bell_eigen_error(&spec, &q)?);
        }
        checks.push(Check::new(
            Suite::Coefficients,
            "pauli-form-reassembly",
            d,
            reassembly,
            TOL_COEFFICIENT,
        ));
        checks.push(Check::new(
            Suite::Coefficients,
            "bell-states-are-eigenvectors",
            d,
            eigen,
            TOL_COEFFICIENT,
        ));

        let good = ObservableSpec::good_qubit();
        let coeffs = pauli_form_qubit(&good)?;
        let coeff_err = coeffs
            .iter()
            .zip([0.0, 1.0, 0.0, 2.0])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let s1 = pauli(1)?;
        let s3 = pauli(3)?;
        let want = &s1.kron(&s1) + &s3.kron(&s3).scale(CNum::new(2.0, 0.0));
        let matrix_err = build_observable(&good).max_abs_diff(&want);
        checks.push(Check::new(
            Suite::Coefficients,
            "preset-3,1,-1,-3-is-xx+2zz",
            d,
            coeff_err.max(matrix_err),
            TOL_COEFFICIENT,
        ));
    } else {
        let spec = ObservableSpec::descending(d)?;
        let q = build_observable(&spec);
        let terms = weyl_expansion(&q, d)?;
        checks.push(Check::new(
            Suite::Coefficients,
            format!("weyl-expansion-reassembly-{}-terms", terms.len()),
            d,
            assemble_weyl_expansion(&terms, d).max_abs_diff(&q),
            TOL_COEFFICIENT,
        ));
        checks.push(Check::new(
            Suite::Coefficients,
            "bell-states-are-eigenvectors",
            d,
            bell_eigen_error(&spec, &q)?,
            TOL_COEFFICIENT,
        ));
    }
    let spec = ObservableSpec::descending(d)?;
    let form = eig_hermitian(&build_observable(&spec))?;
    let mut err = if form.multiplicities().iter().all(|&m| m == 1) {
        0.0
    } else {
        1.0
    };
    for (k, p) in form.projectors().iter().enumerate() {
        let bell = spec.nearest_bell(form.eigenvalues()[k]);
        err = f64::max(err, p.max_abs_diff(bell_state(bell).density().matrix()));
    }
    checks.push(Check::new(
        Suite::Coefficients,
        "eigensolver-recovers-bell-projectors",
        d,
        err,
        TOL_COEFFICIENT,
    ));
    Ok(checks)
}

/// Worst `1 - fidelity` after applying `word` to the conditional states of
/// `outcome` for random inputs.
fn correction_infidelity(
    d: usize,
    resource: BellIndex,
    outcome: BellIndex,
    word: &WeylWord,
    rng: &mut impl Rng,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..CORRECTION_INPUTS {
        let input = random_state(d, rng);
        let cfg = ProtocolConfig::new(
            d,
            input.amps().to_vec(),
            resource,
            ObservableSpec::descending(d)?,
            0,
        )?;
        let branches = expand_in_bell_branches(&cfg)?;
        let cond = &branches[outcome.flat() - 1].state;
        let corrected = cond.apply(&word.materialize())?;
        worst = worst.max(1.0 - fidelity(&input, &corrected.density())?);
    }
    Ok(worst)
}

fn suite_corrections(d: usize, seed: u64) -> Result<Vec<Check>> {
    let mut rng = seeded_rng(seed ^ 0xc0_44ec7);
    let mut checks = Vec::new();
    match d {
        2 | 3 => {
            let table = standard_correction_table(d)?;
            let mut matches = 0;
            let mut worst: f64 = 0.0;
            for outcome in BellIndex::all(d)? {
                let standard = table.get(outcome.flat()).expect("full table");
                let solved = solve_correction(d, table.resource, outcome)?;
                if solved.same_up_to_phase(standard) {
                    matches += 1;
                }
                worst = worst.max(correction_infidelity(
                    d,
                    table.resource,
                    outcome,
                    standard,
                    &mut rng,
                )?);
            }
            let mismatches = (d * d - matches) as f64;
            checks.push(Check::new(
                Suite::Corrections,
                format!("standard-table-phase-equivalent-{matches}/{}", d * d),
                d,
                mismatches,
                0.5,
            ));
            checks.push(Check::new(
                Suite::Corrections,
                "standard-table-restores-input",
                d,
                worst,
                TOL_CORRECTION,
            ));
        }
        _ => {}
    }
    let resource = standard_resource(d)?;
    let table = solved_correction_table(d, resource)?;
    let mut worst: f64 = 0.0;
    for outcome in BellIndex::all(d)? {
        let word = table.get(outcome.flat()).expect("full table");
        worst = worst.max(correction_infidelity(d, resource, outcome, word, &mut rng)?);
    }
    checks.push(Check::new(
        Suite::Corrections,
        "solved-table-restores-input",
        d,
        worst,
        TOL_CORRECTION,
    ));
    Ok(checks)
}

pub fn run_suite(suite: Suite, d: usize, seed: u64) -> Result<Vec<Check>> {
    check_dim(d)?;
    match suite {
        Suite::Orthonormality => suite_orthonormality(d),
        Suite::Inversion => suite_inversion(d),
        Suite::Formula => suite_formula(d, seed),
        Suite::Projectors => suite_projectors(d),
        Suite::Coefficients => suite_coefficients(d, seed),
        Suite::Corrections => suite_corrections(d, seed),
    }
}

pub fn run_all(d: usize, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for suite in Suite::ALL {
        checks.extend(run_suite(suite, d, seed)?);
    }
    Ok(checks)
}
