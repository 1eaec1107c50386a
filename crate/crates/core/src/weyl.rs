//! Pauli matrices, the Weyl shift/clock pair, canonical Weyl words and the
//! Bell-diagonal observable Alice measures.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::bell::{bell_basis, check_dim, BellIndex};
use crate::error::{GbtError, Result};
use crate::tensor::{omega_pow, CNum, OperatorMat, ONE, ZERO};
use crate::tol::GROUP_TOL;

const I: CNum = CNum::new(0.0, 1.0);

/// `σ_1`, `σ_2`, `σ_3`.
pub fn pauli(k: usize) -> Result<OperatorMat> {
    let entries = match k {
        1 => vec![ZERO, ONE, ONE, ZERO],
        2 => vec![ZERO, -I, I, ZERO],
        3 => vec![ONE, ZERO, ZERO, -ONE],
        _ => {
            return Err(GbtError::IndexOutOfRange {
                what: "Pauli",
                index: k,
                bound: 4,
            })
        }
    };
    OperatorMat::from_entries(2, entries)
}

pub fn identity(d: usize) -> OperatorMat {
    OperatorMat::identity(d)
}

/// Shift: `X|j> = |j+1 mod d>`.
pub fn weyl_x(d: usize) -> Result<OperatorMat> {
    check_dim(d)?;
    Ok(OperatorMat::from_fn(d, |r, c| {
        if r == (c + 1) % d {
            ONE
        } else {
            ZERO
        }
    }))
}

/// Clock: `Z|j> = ω^j |j>`.
pub fn weyl_z(d: usize) -> Result<OperatorMat> {
    check_dim(d)?;
    let diag: Vec<CNum> = (0..d).map(|j| omega_pow(d, j as i64)).collect();
    Ok(OperatorMat::diagonal(&diag))
}

/// Order of the scalar phase group carried by a [`WeylWord`]: quarter turns
/// at `d = 2` (so that `iσ_2` is expressible), powers of `ω` otherwise.
pub fn phase_order(d: usize) -> usize {
    if d == 2 {
        4
    } else {
        d
    }
}

/// The unitary `e^{2πi phase / phase_order(d)} · X^x_pow · Z^z_pow`.
///
/// Every product of shifts, clocks and admissible phases normalizes to
/// exactly one word, with the shift power written to the left. Multiplying
/// words moves clocks past shifts with `Z^b X^c = ω^{bc} X^c Z^b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeylWord {
    d: usize,
    x_pow: usize,
    z_pow: usize,
    phase: usize,
}

impl WeylWord {
    /// `phase` is in units of `1 / phase_order(d)` of a full turn.
    pub fn new(d: usize, x_pow: usize, z_pow: usize, phase: usize) -> Result<Self> {
        check_dim(d)?;
        if x_pow >= d || z_pow >= d {
            return Err(GbtError::InvalidWord(format!(
                "powers ({x_pow}, {z_pow}) must lie in Z_{d}"
            )));
        }
        let order = phase_order(d);
        if phase >= order {
            return Err(GbtError::InvalidWord(format!(
                "phase {phase} outside the order-{order} phase group of d={d}"
            )));
        }
        Ok(Self {
            d,
            x_pow,
            z_pow,
            phase,
        })
    }

    /// `ω^k X^x Z^z` with the exponents reduced mod `d`.
    pub fn with_omega_power(d: usize, x_pow: i64, z_pow: i64, k: i64) -> Result<Self> {
        check_dim(d)?;
        let reduce = |v: i64| v.rem_euclid(d as i64) as usize;
        let per_omega = (phase_order(d) / d) as i64;
        let phase = (k * per_omega).rem_euclid(phase_order(d) as i64) as usize;
        Self::new(d, reduce(x_pow), reduce(z_pow), phase)
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(d, 0, 0, 0)
    }

    pub fn x(d: usize, power: i64) -> Result<Self> {
        Self::with_omega_power(d, power, 0, 0)
    }

    pub fn z(d: usize, power: i64) -> Result<Self> {
        Self::with_omega_power(d, 0, power, 0)
    }

    /// The scalar `ω^k · 1`.
    pub fn omega(d: usize, k: i64) -> Result<Self> {
        Self::with_omega_power(d, 0, 0, k)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn x_pow(&self) -> usize {
        self.x_pow
    }

    pub fn z_pow(&self) -> usize {
        self.z_pow
    }

    pub fn phase(&self) -> usize {
        self.phase
    }

    pub fn phase_factor(&self) -> CNum {
        omega_pow(phase_order(self.d), self.phase as i64)
    }

    /// Same operator up to a global phase.
    pub fn same_up_to_phase(&self, other: &WeylWord) -> bool {
        self.d == other.d && self.x_pow == other.x_pow && self.z_pow == other.z_pow
    }

    pub fn materialize(&self) -> OperatorMat {
        let d = self.d;
        let phase = self.phase_factor();
        // X^a Z^b |j> = ω^{b j} |j + a>
        OperatorMat::from_fn(d, |r, c| {
            if r == (c + self.x_pow) % d {
                phase * omega_pow(d, (self.z_pow * c) as i64)
            } else {
                ZERO
            }
        })
    }

    /// All `d²` words with trivial phase, in `(x, z)` lexicographic order.
    pub fn all_phaseless(d: usize) -> Result<Vec<WeylWord>> {
        check_dim(d)?;
        Ok((0..d)
            .flat_map(|x_pow| {
                (0..d).map(move |z_pow| WeylWord {
                    d,
                    x_pow,
                    z_pow,
                    phase: 0,
                })
            })
            .collect())
    }
}

impl Mul for WeylWord {
    type Output = WeylWord;

    fn mul(self, rhs: WeylWord) -> WeylWord {
        assert_eq!(
            self.d, rhs.d,
            "multiplying Weyl words of different dimension"
        );
        let d = self.d;
        let order = phase_order(d);
        let commute = self.z_pow * rhs.x_pow * (order / d);
        WeylWord {
            d,
            x_pow: (self.x_pow + rhs.x_pow) % d,
            z_pow: (self.z_pow + rhs.z_pow) % d,
            phase: (self.phase + rhs.phase + commute) % order,
        }
    }
}

impl fmt::Display for WeylWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order = phase_order(self.d);
        let phase = match (self.d, self.phase) {
            (_, 0) => String::new(),
            (2, 1) => "i·".into(),
            (2, 2) => "-".into(),
            (2, 3) => "-i·".into(),
            (_, 1) => "ω·".into(),
            (_, p) => format!("ω^{p}·"),
        };
        debug_assert!(self.phase < order);
        let factor = |sym: char, p: usize| match p {
            0 => String::new(),
            1 => sym.to_string(),
            p => format!("{sym}^{p}"),
        };
        let body = format!("{}{}", factor('X', self.x_pow), factor('Z', self.z_pow));
        if body.is_empty() {
            write!(f, "{phase}1")
        } else {
            write!(f, "{phase}{body}")
        }
    }
}

/// Product of shift/clock factors written compactly, e.g. `"XZ2X2"` for
/// `X Z² X²`; `"1"` is the identity.
pub fn word_product(d: usize, expr: &str) -> Result<OperatorMat> {
    let x = weyl_x(d)?;
    let z = weyl_z(d)?;
    let mut out = OperatorMat::identity(d);
    let mut chars = expr.chars().peekable();
    while let Some(ch) = chars.next() {
        let base = match ch {
            'X' => &x,
            'Z' => &z,
            '1' => continue,
            other => {
                return Err(GbtError::InvalidWord(format!(
                    "unexpected {other:?} in {expr:?}"
                )))
            }
        };
        let mut power = 0;
        while let Some(digit) = chars.peek().and_then(|c| c.to_digit(10)) {
            power = power * 10 + digit as usize;
            chars.next();
        }
        out = &out * &base.pow(power.max(1));
    }
    Ok(out)
}

/// One side-by-side check of an operator identity.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub label: String,
    pub lhs: OperatorMat,
    pub rhs: OperatorMat,
    pub error: f64,
}

impl IdentityCheck {
    fn new(label: String, lhs: OperatorMat, rhs: OperatorMat) -> Self {
        let error = lhs.max_abs_diff(&rhs);
        Self {
            label,
            lhs,
            rhs,
            error,
        }
    }
}

/// `|i><j|` against its Pauli expansion, e.g. `|0><1| = ½(σ_1 + iσ_2)`.
pub fn ketbra_decomposition_qubit(i: usize, j: usize) -> Result<IdentityCheck> {
    let one = identity(2);
    let (s1, s2, s3) = (pauli(1)?, pauli(2)?, pauli(3)?);
    let half = CNum::new(0.5, 0.0);
    let (expr, label) = match (i, j) {
        (0, 0) => (&one + &s3, "|0><0| = (1 + s3)/2"),
        (1, 1) => (&one - &s3, "|1><1| = (1 - s3)/2"),
        (0, 1) => (&s1 + &s2.scale(I), "|0><1| = (s1 + i s2)/2"),
        (1, 0) => (&s1 - &s2.scale(I), "|1><0| = (s1 - i s2)/2"),
        _ => {
            return Err(GbtError::IndexOutOfRange {
                what: "qubit ket",
                index: i.max(j),
                bound: 2,
            })
        }
    };
    Ok(IdentityCheck::new(
        label.into(),
        OperatorMat::ketbra(2, i, j),
        expr.scale(half),
    ))
}

/// `|i><j|` against its three-term shift/clock expansion on a qutrit.
pub fn ketbra_decomposition_qutrit(i: usize, j: usize) -> Result<IdentityCheck> {
    let terms: [&str; 3] = match (i, j) {
        (0, 0) => ["1", "Z", "Z2"],
        (1, 1) => ["1", "XZX2", "XZ2X2"],
        (2, 2) => ["1", "X2ZX", "X2Z2X"],
        (0, 1) => ["X2", "ZX2", "Z2X2"],
        (1, 0) => ["X", "XZ", "XZ2"],
        (0, 2) => ["X", "ZX", "Z2X"],
        (2, 0) => ["X2", "X2Z", "X2Z2"],
        (1, 2) => ["X2", "XZX", "XZ2X"],
        (2, 1) => ["X", "X2ZX2", "X2Z2X2"],
        _ => {
            return Err(GbtError::IndexOutOfRange {
                what: "qutrit ket",
                index: i.max(j),
                bound: 3,
            })
        }
    };
    let mut sum = OperatorMat::zeros(3);
    for t in terms {
        sum = &sum + &word_product(3, t)?;
    }
    let label = format!("|{i}><{j}| = ({})/3", terms.join(" + "));
    Ok(IdentityCheck::new(
        label,
        OperatorMat::ketbra(3, i, j),
        sum.scale(CNum::new(1.0 / 3.0, 0.0)),
    ))
}

/// Eigenvalues assigned to the Bell states in flat order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    d: usize,
    eigenvalues: Vec<f64>,
}

impl ObservableSpec {
    pub fn new(d: usize, eigenvalues: Vec<f64>) -> Result<Self> {
        check_dim(d)?;
        if eigenvalues.len() != d * d {
            return Err(GbtError::DimensionMismatch {
                expected: d * d,
                found: eigenvalues.len(),
            });
        }
        if eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(GbtError::NonFinite("observable eigenvalues"));
        }
        Ok(Self { d, eigenvalues })
    }

    /// `(3, 1, -1, -3)`, giving `σ_1⊗σ_1 + 2σ_3⊗σ_3`.
    pub fn good_qubit() -> Self {
        Self {
            d: 2,
            eigenvalues: vec![3.0, 1.0, -1.0, -3.0],
        }
    }

    /// `σ_1⊗σ_1 + σ_3⊗σ_3`: eigenvalue 0 on both `φ_2` and `φ_3`.
    pub fn op13() -> Self {
        Self {
            d: 2,
            eigenvalues: vec![2.0, 0.0, 0.0, -2.0],
        }
    }

    /// `σ_1⊗σ_1 + σ_2⊗σ_2`: eigenvalue 0 on both `φ_1` and `φ_2`.
    pub fn op12() -> Self {
        Self {
            d: 2,
            eigenvalues: vec![0.0, 0.0, 2.0, -2.0],
        }
    }

    /// `a_k = d² - k` for `k = 1..d²`: distinct, descending in flat order.
    pub fn descending(d: usize) -> Result<Self> {
        check_dim(d)?;
        Self::new(d, (1..=d * d).map(|k| (d * d - k) as f64).collect())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Groups of Bell flat indices whose assigned eigenvalues lie within
    /// `GROUP_TOL` of each other, keeping only groups of size > 1.
    pub fn degenerate_clusters(&self) -> Vec<(f64, Vec<usize>)> {
        let mut order: Vec<usize> = (0..self.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| self.eigenvalues[b].total_cmp(&self.eigenvalues[a]));
        let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
        let mut last = f64::NAN;
        for k in order {
            let v = self.eigenvalues[k];
            match clusters.last_mut() {
                Some((_, members)) if last - v < GROUP_TOL => members.push(k + 1),
                _ => clusters.push((v, vec![k + 1])),
            }
            last = v;
        }
        clusters
            .into_iter()
            .filter(|(_, members)| members.len() > 1)
            .map(|(v, mut members)| {
                members.sort_unstable();
                (v, members)
            })
            .collect()
    }

    pub fn is_non_degenerate(&self) -> bool {
        self.degenerate_clusters().is_empty()
    }

    /// Flat index of the Bell state whose assigned eigenvalue is nearest `value`.
    pub fn nearest_bell(&self, value: f64) -> BellIndex {
        let k = self
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - value).abs().total_cmp(&(b.1 - value).abs()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        BellIndex::from_flat(self.d, k + 1).expect("eigenvalue list has d² entries")
    }
}

/// `Q = Σ_k a_k |bell_k><bell_k|`.
pub fn build_observable(spec: &ObservableSpec) -> OperatorMat {
    let basis = bell_basis(spec.d).expect("spec dimension validated");
    spec.eigenvalues
        .iter()
        .zip(&basis)
        .fold(OperatorMat::zeros(spec.d * spec.d), |acc, (&a, state)| {
            &acc + &state.density().matrix().scale(CNum::new(a, 0.0))
        })
}

/// Coefficients of `1⊗1`, `σ_1⊗σ_1`, `σ_2⊗σ_2`, `σ_3⊗σ_3` for a qubit
/// observable `(a, b, c, d)`.
pub fn pauli_form_qubit(spec: &ObservableSpec) -> Result<[f64; 4]> {
    if spec.d != 2 {
        return Err(GbtError::DimensionMismatch {
            expected: 2,
            found: spec.d,
        });
    }
    let [a, b, c, d]: [f64; 4] = spec.eigenvalues[..].try_into().expect("length 4");
    Ok([
        (a + b + c + d) / 4.0,
        (a - b + c - d) / 4.0,
        (-a + b + c - d) / 4.0,
        (a + b - c - d) / 4.0,
    ])
}

/// `c_0 1⊗1 + c_1 σ_1⊗σ_1 + c_2 σ_2⊗σ_2 + c_3 σ_3⊗σ_3`.
pub fn assemble_pauli_form(coeffs: &[f64; 4]) -> OperatorMat {
    let paulis = [
        identity(2),
        pauli(1).unwrap(),
        pauli(2).unwrap(),
        pauli(3).unwrap(),
    ];
    coeffs
        .iter()
        .zip(&paulis)
        .fold(OperatorMat::zeros(4), |acc, (&c, p)| {
            &acc + &p.kron(p).scale(CNum::new(c, 0.0))
        })
}

/// One term `coeff · (X^a Z^b) ⊗ (X^c Z^e)` of a two-qudit operator.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylTerm {
    pub left: WeylWord,
    pub right: WeylWord,
    pub coeff: CNum,
}

/// Expands a `d²×d²` operator over the orthogonal basis
/// `{X^a Z^b ⊗ X^c Z^e}` using `coeff = tr(W^† Q) / d²`. Terms with
/// magnitude below `1e-12` are dropped.
pub fn weyl_expansion(op: &OperatorMat, d: usize) -> Result<Vec<WeylTerm>> {
    check_dim(d)?;
    if op.dim() != d * d {
        return Err(GbtError::DimensionMismatch {
            expected: d * d,
            found: op.dim(),
        });
    }
    let words = WeylWord::all_phaseless(d)?;
    let mats: Vec<OperatorMat> = words.iter().map(WeylWord::materialize).collect();
    let norm = (d * d) as f64;
    let mut terms = Vec::new();
    for (lw, lm) in words.iter().zip(&mats) {
        for (rw, rm) in words.iter().zip(&mats) {
            let basis = lm.kron(rm);
            let coeff = (&basis.dagger() * op).trace() / norm;
            if coeff.norm() > 1e-12 {
                terms.push(WeylTerm {
                    left: *lw,
                    right: *rw,
                    coeff,
                });
            }
        }
    }
    Ok(terms)
}

pub fn assemble_weyl_expansion(terms: &[WeylTerm], d: usize) -> OperatorMat {
    terms.iter().fold(OperatorMat::zeros(d * d), |acc, t| {
        &acc + &t
            .left
            .materialize()
            .kron(&t.right.materialize())
            .scale(t.coeff)
    })
}
