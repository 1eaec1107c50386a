//! Acceptance criteria, one line each. Reference values are computed here
//! from explicit formulas and literal matrices, independent of the library
//! internals they check.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};

use gbt_core::bell::{bell_basis, product_in_bell_basis, BellIndex};
use gbt_core::eigen::eig_hermitian;
use gbt_core::teleport::{
    conditional_map, expand_in_bell_branches, run_degenerate_demo, run_teleport, solve_correction,
    standard_correction_table, ProtocolConfig,
};
use gbt_core::tensor::random_state;
use gbt_core::verify::{run_suite, Suite};
use gbt_core::weyl::{
    assemble_pauli_form, build_observable, ketbra_decomposition_qubit, ketbra_decomposition_qutrit,
    pauli, pauli_form_qubit, weyl_x, weyl_z, ObservableSpec,
};
use gbt_core::OperatorMat;
use num_complex::Complex64 as C;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const RE: fn(f64) -> C = |x| C::new(x, 0.0);

fn omega(d: usize, k: usize) -> C {
    C::from_polar(1.0, 2.0 * PI * (k % d) as f64 / d as f64)
}

/// `bell(m, n) = d^{-1/2} Σ_j ω^{jn} |j>|j+m>` with `k = d·m + n + 1`.
fn bell_oracle(d: usize, k: usize) -> Vec<C> {
    let (m, n) = ((k - 1) / d, (k - 1) % d);
    let mut v = vec![C::new(0.0, 0.0); d * d];
    for j in 0..d {
        v[j * d + (j + m) % d] = omega(d, j * n) / (d as f64).sqrt();
    }
    v
}

fn kron(a: &[C], b: &[C]) -> Vec<C> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

fn inner(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn max_diff(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn outer_sum(vs: &[Vec<C>], weights: &[f64]) -> Vec<C> {
    let n = vs[0].len();
    let mut m = vec![C::new(0.0, 0.0); n * n];
    for (v, w) in vs.iter().zip(weights) {
        for r in 0..n {
            for c in 0..n {
                m[r * n + c] += v[r] * v[c].conj() * w;
            }
        }
    }
    m
}

fn mat_vec(m: &[C], v: &[C]) -> Vec<C> {
    let n = v.len();
    (0..n)
        .map(|r| (0..n).map(|c| m[r * n + c] * v[c]).sum())
        .collect()
}

fn normalize(v: Vec<C>) -> Vec<C> {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn pure_fidelity(a: &[C], b: &[C]) -> f64 {
    inner(a, b).norm_sqr()
}

fn lit(rows: &[[(f64, f64); 2]; 2]) -> Vec<C> {
    rows.iter()
        .flatten()
        .map(|&(re, im)| C::new(re, im))
        .collect()
}

fn sigma(k: usize) -> Vec<C> {
    match k {
        1 => lit(&[[(0., 0.), (1., 0.)], [(1., 0.), (0., 0.)]]),
        2 => lit(&[[(0., 0.), (0., -1.)], [(0., 1.), (0., 0.)]]),
        3 => lit(&[[(1., 0.), (0., 0.)], [(0., 0.), (-1., 0.)]]),
        _ => lit(&[[(1., 0.), (0., 0.)], [(0., 0.), (1., 0.)]]),
    }
}

fn mat_kron(a: &[C], b: &[C]) -> Vec<C> {
    let (na, nb) = (
        (a.len() as f64).sqrt() as usize,
        (b.len() as f64).sqrt() as usize,
    );
    let n = na * nb;
    let mut m = vec![C::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            m[r * n + c] = a[(r / nb) * na + c / nb] * b[(r % nb) * nb + c % nb];
        }
    }
    m
}

fn add(a: &[C], b: &[C], s: f64) -> Vec<C> {
    a.iter().zip(b).map(|(x, y)| x + y * s).collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_input(d: usize, r: &mut ChaCha8Rng) -> Vec<C> {
    random_state(d, r).amps().to_vec()
}

/// Bob's unnormalized conditional state `(<bell_k|_1A ⊗ 1)(|in> ⊗ |R>)`.
fn oracle_branch(d: usize, input: &[C], resource_k: usize, outcome_k: usize) -> Vec<C> {
    let psi = kron(input, &bell_oracle(d, resource_k));
    let b = bell_oracle(d, outcome_k);
    (0..d)
        .map(|j| (0..d * d).map(|p| b[p].conj() * psi[p * d + j]).sum())
        .collect()
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn suite_error(suite: Suite, d: usize) -> (f64, bool) {
    let checks = run_suite(suite, d, 2024).expect("suite runs");
    let worst = checks.iter().map(|c| c.max_error).fold(0.0, f64::max);
    (worst, !checks.is_empty() && checks.iter().all(|c| c.passed))
}

fn c1_orthonormality() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in 2..=6 {
        let basis = bell_basis(d).unwrap();
        for (a, va) in basis.iter().enumerate() {
            for (b, vb) in basis.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((inner(va.amps(), vb.amps()) - RE(want)).norm());
            }
            worst = worst.max(max_diff(va.amps(), &bell_oracle(d, a + 1)));
        }
    }
    // the four qubit states written out term by term
    let h = 1.0 / 2f64.sqrt();
    let written = [
        [h, 0., 0., h],
        [h, 0., 0., -h],
        [0., h, h, 0.],
        [0., h, -h, 0.],
    ];
    let basis = bell_basis(2).unwrap();
    for (v, w) in basis.iter().zip(written) {
        worst = worst.max(max_diff(v.amps(), &w.map(RE)));
    }
    let (suite, ok) = suite_error(Suite::Orthonormality, 3);
    worst = worst.max(suite);
    outcome(
        ok && worst < 1e-10,
        format!("d = 2..6, max |G - 1| = {worst:.2e} (tol 1e-10)"),
    )
}

fn c2_inversion() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in [2, 3] {
        for i in 0..d {
            for j in 0..d {
                let coeffs = product_in_bell_basis(i, j, d).unwrap();
                let mut want = vec![C::new(0.0, 0.0); d * d];
                let mut resum = vec![C::new(0.0, 0.0); d * d];
                for n in 0..d {
                    let m = (j + d - i) % d;
                    want[d * m + n] = omega(d, (d - i % d) * n) / (d as f64).sqrt();
                }
                for (k, c) in coeffs.iter().enumerate() {
                    resum = add(
                        &resum,
                        &bell_oracle(d, k + 1)
                            .iter()
                            .map(|x| x * c)
                            .collect::<Vec<_>>(),
                        1.0,
                    );
                }
                let mut ket = vec![C::new(0.0, 0.0); d * d];
                ket[i * d + j] = RE(1.0);
                worst = worst
                    .max(max_diff(&coeffs, &want))
                    .max(max_diff(&resum, &ket));
            }
        }
        let (suite, ok) = suite_error(Suite::Inversion, d);
        if !ok {
            worst = worst.max(f64::INFINITY);
        }
        worst = worst.max(suite);
    }
    outcome(
        worst < 1e-12,
        format!("4 + 9 lines, max error {worst:.2e} (tol 1e-12)"),
    )
}

fn formula(d: usize) -> Outcome {
    let mut r = rng(100 + d as u64);
    let (mut rebuild, mut weight): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let input = random_input(d, &mut r);
        let cfg = match d {
            2 => ProtocolConfig::standard_d2(input.clone(), 0),
            _ => ProtocolConfig::standard_d3(input.clone(), 0),
        }
        .unwrap();
        let resource_k = cfg.resource.flat();
        let psi = kron(&input, &bell_oracle(d, resource_k));
        let branches = expand_in_bell_branches(&cfg).unwrap();
        assert_eq!(branches.len(), d * d);
        let mut sum = vec![C::new(0.0, 0.0); d * d * d];
        for br in &branches {
            weight = weight.max((br.weight - 1.0 / d as f64).abs());
            let term = kron(&bell_oracle(d, br.bell.flat()), br.state.amps());
            sum = add(&sum, &term, br.weight);
        }
        rebuild = rebuild.max(max_diff(&sum, &psi));
    }
    let (suite, ok) = suite_error(Suite::Formula, d);
    let worst = rebuild.max(weight).max(suite);
    outcome(
        ok && worst < 1e-12,
        format!(
            "d = {d}, 100 inputs, reassembly {rebuild:.2e}, |coeff - 1/{d}| {weight:.2e}, transcribed {suite:.2e} (tol 1e-12)"
        ),
    )
}

fn c5_projectors() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        worst = worst.max(max_diff(pauli(k).unwrap().entries(), &sigma(k)));
    }
    let x3: Vec<C> = (0..9)
        .map(|p| RE(if p / 3 == (p % 3 + 1) % 3 { 1.0 } else { 0.0 }))
        .collect();
    let z3: Vec<C> = (0..9)
        .map(|p| {
            if p / 3 == p % 3 {
                omega(3, p / 3)
            } else {
                RE(0.0)
            }
        })
        .collect();
    worst = worst
        .max(max_diff(weyl_x(3).unwrap().entries(), &x3))
        .max(max_diff(weyl_z(3).unwrap().entries(), &z3));
    let mut count = 0;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max(ketbra_decomposition_qubit(i, j).unwrap().error);
            count += 1;
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max(ketbra_decomposition_qutrit(i, j).unwrap().error);
            count += 1;
        }
    }
    outcome(
        count == 13 && worst < 1e-12,
        format!("{count} identities, max matrix difference {worst:.2e} (tol 1e-12)"),
    )
}

fn c6_coefficients() -> Outcome {
    use rand::Rng;
    let mut r = rng(6);
    let bells: Vec<Vec<C>> = (1..=4).map(|k| bell_oracle(2, k)).collect();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let vals: Vec<f64> = (0..4).map(|_| r.random_range(-5.0..5.0)).collect();
        let spec = ObservableSpec::new(2, vals.clone()).unwrap();
        let assembled = assemble_pauli_form(&pauli_form_qubit(&spec).unwrap());
        worst = worst.max(max_diff(assembled.entries(), &outer_sum(&bells, &vals)));
    }
    let preset = pauli_form_qubit(&ObservableSpec::good_qubit()).unwrap();
    let target = add(
        &mat_kron(&sigma(1), &sigma(1)),
        &mat_kron(&sigma(3), &sigma(3)),
        2.0,
    );
    let preset_err = max_diff(assemble_pauli_form(&preset).entries(), &target).max(max_diff(
        build_observable(&ObservableSpec::good_qubit()).entries(),
        &target,
    ));
    let exact = preset == [0.0, 1.0, 0.0, 2.0];
    outcome(
        worst < 1e-10 && exact && preset_err < 1e-12,
        format!(
            "50 random (a,b,c,d) max error {worst:.2e} (tol 1e-10); preset coefficients {preset:?}, preset error {preset_err:.2e}"
        ),
    )
}

fn c7_hazard_spectrum() -> Outcome {
    let h = add(
        &mat_kron(&sigma(1), &sigma(1)),
        &mat_kron(&sigma(3), &sigma(3)),
        1.0,
    );
    let form = eig_hermitian(&OperatorMat::from_entries(4, h).unwrap()).unwrap();
    let want = [2.0, 0.0, -2.0];
    let values_ok = form.eigenvalues().len() == 3
        && form
            .eigenvalues()
            .iter()
            .zip(want)
            .all(|(v, w)| (v - w).abs() < 1e-10);
    let mults_ok = form.multiplicities() == [1, 2, 1];
    let proj_err = if values_ok {
        let p0 = outer_sum(&[bell_oracle(2, 2), bell_oracle(2, 3)], &[1.0, 1.0]);
        max_diff(form.projectors()[1].entries(), &p0)
    } else {
        f64::INFINITY
    };
    outcome(
        values_ok && mults_ok && proj_err < 1e-10,
        format!(
            "eigenvalues {:?}, multiplicities {:?}, 0-eigenspace projector error {proj_err:.2e} (tol 1e-10)",
            form.eigenvalues(),
            form.multiplicities()
        ),
    )
}

fn c8_corrections() -> Outcome {
    let mut r = rng(8);
    let mut matches = 0;
    let mut total = 0;
    let mut worst_fid: f64 = 1.0;
    for d in [2, 3] {
        let resource = BellIndex::new(d, 1, 1).unwrap();
        let table = standard_correction_table(d).unwrap();
        for outcome_k in 1..=d * d {
            let bell = BellIndex::from_flat(d, outcome_k).unwrap();
            let solved = solve_correction(d, resource, bell).unwrap();
            let printed = table.get(outcome_k).unwrap();
            total += 1;
            matches += usize::from(solved.same_up_to_phase(printed));
            let map = conditional_map(resource, bell).unwrap();
            for _ in 0..20 {
                let input = random_input(d, &mut r);
                let branch = normalize(oracle_branch(d, &input, resource.flat(), outcome_k));
                let via_map = normalize(map.apply(&input).unwrap());
                for w in [&solved, printed] {
                    let u = w.materialize();
                    let fixed = u.apply(&branch).unwrap();
                    let fixed_map = u.apply(&via_map).unwrap();
                    worst_fid = worst_fid
                        .min(pure_fidelity(&input, &fixed))
                        .min(pure_fidelity(&input, &fixed_map));
                }
            }
        }
    }
    outcome(
        matches == total && total == 13 && worst_fid > 1.0 - 1e-9,
        format!("{matches}/{total} entries phase-equivalent, min fidelity over 20 inputs {worst_fid:.15} (tol 1 - 1e-9)"),
    )
}

fn c9_end_to_end() -> Outcome {
    const RUNS: usize = 200;
    let mut parts = Vec::new();
    let mut ok = true;
    for d in [2, 3, 4, 5] {
        let mut r = rng(900 + d as u64);
        let mut counts = vec![0usize; d * d];
        let mut worst: f64 = 1.0;
        for seed in 0..RUNS as u64 {
            let input = random_input(d, &mut r);
            let cfg = match d {
                2 => ProtocolConfig::standard_d2(input.clone(), seed),
                3 => ProtocolConfig::standard_d3(input.clone(), seed),
                _ => ProtocolConfig::general(d, input.clone(), seed),
            }
            .unwrap();
            let report = run_teleport(&cfg).unwrap();
            counts[report.message.bell_flat_index - 1] += 1;
            let independent = pure_fidelity(&input, report.bob_state.amps());
            worst = worst.min(report.fidelity).min(independent);
        }
        let p = 1.0 / (d * d) as f64;
        let sigma = (RUNS as f64 * p * (1.0 - p)).sqrt();
        let dev = counts
            .iter()
            .map(|&c| (c as f64 - RUNS as f64 * p).abs() / sigma)
            .fold(0.0, f64::max);
        ok &= worst > 1.0 - 1e-9 && dev <= 4.0;
        parts.push(format!("d={d}: min F {worst:.12}, max dev {dev:.2}σ"));
    }
    outcome(ok, format!("{RUNS} runs each; {}", parts.join("; ")))
}

fn c10_degeneracy() -> Outcome {
    let input = vec![RE(0.6), RE(0.8)];
    let cfg = ProtocolConfig::new(
        2,
        input.clone(),
        BellIndex::new(2, 1, 1).unwrap(),
        ObservableSpec::op13(),
        0,
    )
    .unwrap();
    let report = run_degenerate_demo(&cfg).unwrap();
    let zero = report
        .outcomes
        .iter()
        .find(|o| o.eigenvalue.abs() < 1e-9)
        .expect("0 is an eigenvalue");
    let purity = zero.bob_purity.unwrap();

    // oracle: project 1A of |in>|φ4> onto span{φ2, φ3}, trace out 1A
    let psi = kron(&input, &bell_oracle(2, 4));
    let p0 = mat_kron(
        &outer_sum(&[bell_oracle(2, 2), bell_oracle(2, 3)], &[1.0, 1.0]),
        &sigma(0),
    );
    let post = normalize(mat_vec(&p0, &psi));
    let mut rho = [[C::new(0.0, 0.0); 2]; 2];
    for a in 0..4 {
        for (i, row) in rho.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot += post[a * 2 + i] * post[a * 2 + j].conj();
            }
        }
    }
    let oracle_purity: f64 = rho.iter().flatten().map(|x| x.norm_sqr()).sum();
    let paulis = [
        sigma(0),
        sigma(1),
        sigma(3),
        mat_vec_mul(&sigma(1), &sigma(3)),
    ];
    let best_zero = paulis
        .iter()
        .map(|u| {
            let ui = mat_vec(&dagger(u), &input);
            (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| ui[i].conj() * rho[i][j] * ui[j])
                .sum::<C>()
                .re
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let oracle_best_avg = 0.25 + zero.probability * best_zero + 0.25;
    let agree = (purity - oracle_purity).abs() < 1e-10
        && (report.best_average_fidelity - oracle_best_avg).abs() < 1e-10;
    outcome(
        agree && purity < 1.0 - 1e-3 && report.best_average_fidelity < 1.0 - 1e-3,
        format!(
            "outcome-0 purity {purity:.6} (oracle {oracle_purity:.6}), best-correction average fidelity {:.6} (oracle {oracle_best_avg:.6}), both < 1 - 1e-3",
            report.best_average_fidelity
        ),
    )
}

fn dagger(m: &[C]) -> Vec<C> {
    let n = (m.len() as f64).sqrt() as usize;
    (0..n * n).map(|p| m[(p % n) * n + p / n].conj()).collect()
}

fn mat_vec_mul(a: &[C], b: &[C]) -> Vec<C> {
    let n = (a.len() as f64).sqrt() as usize;
    (0..n * n)
        .map(|p| (0..n).map(|k| a[(p / n) * n + k] * b[k * n + p % n]).sum())
        .collect()
}

fn c11_determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_gbt");
    let args = [
        "teleport", "--dim", "3", "--input", "random", "--seed", "42", "--trials", "25", "--json",
    ];
    let run = || {
        Command::new(exe)
            .args(args)
            .env_remove("GBT_SEED")
            .output()
            .expect("gbt runs")
    };
    let (a, b) = (run(), run());
    let env_run = Command::new(exe)
        .args([
            "teleport", "--dim", "3", "--input", "random", "--trials", "25", "--json",
        ])
        .env("GBT_SEED", "42")
        .output()
        .expect("gbt runs");
    let lines = a.stdout.iter().filter(|&&c| c == b'\n').count();
    let identical = a.stdout == b.stdout && a.stdout == env_run.stdout;
    outcome(
        a.status.success() && b.status.success() && lines == 25 && identical,
        format!(
            "{} bytes, {lines} reports, identical across runs and via GBT_SEED: {identical}",
            a.stdout.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("Bell-basis orthonormality", c1_orthonormality),
        ("product-to-Bell inversion", c2_inversion),
        ("qubit branch expansion", || formula(2)),
        ("qutrit branch expansion", || formula(3)),
        ("ket-bra operator identities", c5_projectors),
        ("Pauli coefficients of the observable", c6_coefficients),
        ("spectrum of s1s1 + s3s3", c7_hazard_spectrum),
        ("correction tables", c8_corrections),
        ("end-to-end teleportation", c9_end_to_end),
        ("degenerate observable hazard", c10_degeneracy),
        ("CLI determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let out = check();
        failed += usize::from(!out.passed);
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if out.passed { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
