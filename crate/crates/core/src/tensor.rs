//! Dense complex linear algebra on small tensor-product spaces.
//!
//! Composite indices are big-endian: for a product of factors with local
//! dimensions `[d0, d1, ..]` the basis ket `|j0 j1 ..>` sits at
//! `j0 * (d1 * d2 ..) + j1 * (d2 ..) + ..`, so the left factor is the most
//! significant digit.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GbtError, Result};
use crate::tol::{PHASE_TOL, TOL_MAT, TOL_NORM};

pub type CNum = Complex64;

pub(crate) const ZERO: CNum = CNum::new(0.0, 0.0);
pub(crate) const ONE: CNum = CNum::new(1.0, 0.0);

/// `exp(2 pi i / d)`.
pub fn omega(d: usize) -> CNum {
    CNum::from_polar(1.0, 2.0 * std::f64::consts::PI / d as f64)
}

/// `omega(d)^k` with the exponent reduced mod `d` first, so that large or
/// negative powers do not accumulate round-off.
pub fn omega_pow(d: usize, k: i64) -> CNum {
    let k = k.rem_euclid(d as i64);
    match k {
        0 => ONE,
        _ => CNum::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64),
    }
}

/// Decomposes a composite index into its digits under `dims`.
pub fn split_index(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (slot, &d) in digits.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    digits
}

pub fn join_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&j, &d)| acc * d + j)
}

fn check_finite(values: &[CNum], what: &'static str) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(GbtError::NonFinite(what))
    }
}

/// A normalized pure state on a tensor product of local spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVec {
    dims: Vec<usize>,
    amps: Vec<CNum>,
}

impl StateVec {
    /// Builds a state, requiring `||amps|| = 1` within `TOL_NORM`.
    pub fn new(dims: Vec<usize>, amps: Vec<CNum>) -> Result<Self> {
        let state = Self::unchecked(dims, amps)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(GbtError::NotNormalized { norm });
        }
        Ok(state)
    }

    /// Builds a state after rescaling `amps` to unit norm.
    pub fn normalized(dims: Vec<usize>, amps: Vec<CNum>) -> Result<Self> {
        let mut state = Self::unchecked(dims, amps)?;
        let norm = state.norm();
        if norm <= f64::MIN_POSITIVE {
            return Err(GbtError::ZeroVector);
        }
        state.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    fn unchecked(dims: Vec<usize>, amps: Vec<CNum>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(GbtError::InvalidConfig(format!(
                "local dimensions must be positive, got {dims:?}"
            )));
        }
        let total: usize = dims.iter().product();
        if amps.len() != total {
            return Err(GbtError::DimensionMismatch {
                expected: total,
                found: amps.len(),
            });
        }
        check_finite(&amps, "state amplitudes")?;
        Ok(Self { dims, amps })
    }

    /// `|index>` on a single factor of dimension `d`.
    pub fn basis(d: usize, index: usize) -> Result<Self> {
        if index >= d {
            return Err(GbtError::IndexOutOfRange {
                what: "basis",
                index,
                bound: d,
            });
        }
        let mut amps = vec![ZERO; d];
        amps[index] = ONE;
        Self::new(vec![d], amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[CNum] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `self ⊗ other`, left factor most significant.
    pub fn kron(&self, other: &StateVec) -> StateVec {
        let amps = self
            .amps
            .iter()
            .flat_map(|&a| other.amps.iter().map(move |&b| a * b))
            .collect();
        let dims = self.dims.iter().chain(&other.dims).copied().collect();
        StateVec { dims, amps }
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVec) -> Result<CNum> {
        if self.dims != other.dims {
            return Err(GbtError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies an operator on the full space and renormalizes.
    pub fn apply(&self, op: &OperatorMat) -> Result<StateVec> {
        let amps = op.apply(&self.amps)?;
        StateVec::normalized(self.dims.clone(), amps)
    }

    /// Fixes the global phase: the first amplitude with magnitude above
    /// `PHASE_TOL` becomes real and positive.
    pub fn global_phase_canonical(&self) -> Result<StateVec> {
        let pivot = self
            .amps
            .iter()
            .find(|a| a.norm() > PHASE_TOL)
            .ok_or(GbtError::ZeroVector)?;
        let phase = pivot.conj() / pivot.norm();
        Ok(StateVec {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|a| a * phase).collect(),
        })
    }

    /// Largest amplitude difference after canonicalizing both phases.
    pub fn distance_mod_phase(&self, other: &StateVec) -> Result<f64> {
        if self.dims != other.dims {
            return Err(GbtError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let a = self.global_phase_canonical()?;
        let b = other.global_phase_canonical()?;
        Ok(max_abs_diff(&a.amps, &b.amps))
    }

    /// `|self><self|`.
    pub fn density(&self) -> DensityMat {
        DensityMat(OperatorMat::outer(&self.amps, &self.amps))
    }
}

pub(crate) fn max_abs_diff(a: &[CNum], b: &[CNum]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Dense row-major square complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorMat {
    dim: usize,
    entries: Vec<CNum>,
}

impl OperatorMat {
    pub fn from_entries(dim: usize, entries: Vec<CNum>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(GbtError::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        check_finite(&entries, "matrix entries")?;
        Ok(Self { dim, entries })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> CNum) -> Self {
        let entries = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn diagonal(diag: &[CNum]) -> Self {
        Self::from_fn(diag.len(), |r, c| if r == c { diag[r] } else { ZERO })
    }

    /// `|ket><bra|`.
    pub fn outer(ket: &[CNum], bra: &[CNum]) -> Self {
        assert_eq!(ket.len(), bra.len(), "outer product of unequal lengths");
        Self::from_fn(ket.len(), |r, c| ket[r] * bra[c].conj())
    }

    /// `|i><j|` on a `d`-dimensional space.
    pub fn ketbra(d: usize, i: usize, j: usize) -> Self {
        Self::from_fn(d, |r, c| if r == i && c == j { ONE } else { ZERO })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[CNum] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> CNum {
        self.entries[row * self.dim + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: CNum) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn kron(&self, other: &OperatorMat) -> Self {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |r, c| {
            self.get(r / m, c / m) * other.get(r % m, c % m)
        })
    }

    pub fn scale(&self, factor: CNum) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    pub fn trace(&self) -> CNum {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn pow(&self, exponent: usize) -> Self {
        (0..exponent).fold(Self::identity(self.dim), |acc, _| &acc * self)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[CNum]) -> Result<Vec<CNum>> {
        if v.len() != self.dim {
            return Err(GbtError::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(self
            .entries
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entrywise deviation `max |self - other|`.
    pub fn max_abs_diff(&self, other: &OperatorMat) -> f64 {
        assert_eq!(self.dim, other.dim, "comparing matrices of unequal size");
        max_abs_diff(&self.entries, &other.entries)
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() <= TOL_MAT
    }

    pub fn unitarity_error(&self) -> f64 {
        (&self.dagger() * self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_error() <= TOL_MAT
    }

    /// Lifts an operator acting on the factors `targets` of a product space
    /// with local dimensions `dims` to the full space, acting as identity on
    /// the remaining factors. `targets` lists the factors in the order of the
    /// operator's own tensor structure.
    pub fn embed(&self, dims: &[usize], targets: &[usize]) -> Result<OperatorMat> {
        for &t in targets {
            if t >= dims.len() {
                return Err(GbtError::IndexOutOfRange {
                    what: "subsystem",
                    index: t,
                    bound: dims.len(),
                });
            }
        }
        let mut seen = vec![false; dims.len()];
        for &t in targets {
            if std::mem::replace(&mut seen[t], true) {
                return Err(GbtError::InvalidConfig(format!(
                    "subsystem {t} listed twice"
                )));
            }
        }
        let target_dims: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
        let local: usize = target_dims.iter().product();
        if local != self.dim {
            return Err(GbtError::DimensionMismatch {
                expected: local,
                found: self.dim,
            });
        }
        let total: usize = dims.iter().product();
        let local_index = |digits: &[usize]| {
            let sub: Vec<usize> = targets.iter().map(|&t| digits[t]).collect();
            join_index(&sub, &target_dims)
        };
        let mut out = OperatorMat::zeros(total);
        for r in 0..total {
            let rd = split_index(r, dims);
            for c in 0..total {
                let cd = split_index(c, dims);
                let spectators_match = (0..dims.len())
                    .filter(|k| !seen[*k])
                    .all(|k| rd[k] == cd[k]);
                if spectators_match {
                    out.set(r, c, self.get(local_index(&rd), local_index(&cd)));
                }
            }
        }
        Ok(out)
    }
}

impl Mul for &OperatorMat {
    type Output = OperatorMat;

    fn mul(self, rhs: &OperatorMat) -> OperatorMat {
        assert_eq!(self.dim, rhs.dim, "multiplying matrices of unequal size");
        let n = self.dim;
        let mut out = OperatorMat::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.entries[r * n + c] += a * rhs.get(k, c);
                }
            }
        }
        out
    }
}

impl Mul for OperatorMat {
    type Output = OperatorMat;

    fn mul(self, rhs: OperatorMat) -> OperatorMat {
        &self * &rhs
    }
}

impl Add for &OperatorMat {
    type Output = OperatorMat;

    fn add(self, rhs: &OperatorMat) -> OperatorMat {
        assert_eq!(self.dim, rhs.dim, "adding matrices of unequal size");
        OperatorMat {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Add for OperatorMat {
    type Output = OperatorMat;

    fn add(self, rhs: OperatorMat) -> OperatorMat {
        &self + &rhs
    }
}

impl Sub for &OperatorMat {
    type Output = OperatorMat;

    fn sub(self, rhs: &OperatorMat) -> OperatorMat {
        assert_eq!(self.dim, rhs.dim, "subtracting matrices of unequal size");
        OperatorMat {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Sub for OperatorMat {
    type Output = OperatorMat;

    fn sub(self, rhs: OperatorMat) -> OperatorMat {
        &self - &rhs
    }
}

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMat(OperatorMat);

impl DensityMat {
    /// Validates Hermiticity and unit trace. Positivity is checked by
    /// [`crate::eigen::eig_hermitian`] callers that need it.
    pub fn new(matrix: OperatorMat) -> Result<Self> {
        let herm = matrix.hermiticity_error();
        if herm > TOL_MAT {
            return Err(GbtError::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TOL_NORM || tr.im.abs() > TOL_NORM {
            return Err(GbtError::NotNormalized { norm: tr.re });
        }
        Ok(Self(matrix))
    }

    /// The maximally mixed state `1_d / d`.
    pub fn maximally_mixed(d: usize) -> Self {
        Self(OperatorMat::identity(d).scale(CNum::new(1.0 / d as f64, 0.0)))
    }

    pub fn matrix(&self) -> &OperatorMat {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        // tr(rho rho) = sum |rho_ij|^2 for Hermitian rho
        self.0.entries().iter().map(|e| e.norm_sqr()).sum()
    }

    pub fn kron(&self, other: &DensityMat) -> DensityMat {
        DensityMat(self.0.kron(&other.0))
    }

    /// `U rho U^dagger`.
    pub fn conjugate_by(&self, unitary: &OperatorMat) -> Result<DensityMat> {
        if unitary.dim() != self.dim() {
            return Err(GbtError::DimensionMismatch {
                expected: self.dim(),
                found: unitary.dim(),
            });
        }
        Ok(DensityMat(&(unitary * &self.0) * &unitary.dagger()))
    }

    /// Reduced state of the single factor `keep` of a product space with
    /// local dimensions `dims`.
    pub fn partial_trace(&self, dims: &[usize], keep: usize) -> Result<DensityMat> {
        let total: usize = dims.iter().product();
        if total != self.dim() {
            return Err(GbtError::DimensionMismatch {
                expected: self.dim(),
                found: total,
            });
        }
        if keep >= dims.len() {
            return Err(GbtError::IndexOutOfRange {
                what: "subsystem",
                index: keep,
                bound: dims.len(),
            });
        }
        let dk = dims[keep];
        let mut out = OperatorMat::zeros(dk);
        for r in 0..total {
            let rd = split_index(r, dims);
            for c in 0..total {
                let cd = split_index(c, dims);
                let traced_diag = (0..dims.len())
                    .filter(|&k| k != keep)
                    .all(|k| rd[k] == cd[k]);
                if traced_diag {
                    let cur = out.get(rd[keep], cd[keep]);
                    out.set(rd[keep], cd[keep], cur + self.0.get(r, c));
                }
            }
        }
        Ok(DensityMat(out))
    }
}

/// Haar-random pure state on `C^d`: independent complex Gaussian
/// amplitudes, normalized.
pub fn random_state(d: usize, rng: &mut impl Rng) -> StateVec {
    loop {
        let amps: Vec<CNum> = (0..d)
            .map(|_| CNum::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(state) = StateVec::normalized(vec![d], amps) {
            return state;
        }
    }
}

/// `<pure|rho|pure>`, clamped to `[0, 1]`.
pub fn fidelity(pure: &StateVec, rho: &DensityMat) -> Result<f64> {
    let v = rho.matrix().apply(pure.amps())?;
    let f: CNum = pure.amps().iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
    Ok(f.re.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> CNum {
        CNum::new(re, im)
    }

    fn sigma(k: usize) -> OperatorMat {
        let e = match k {
            1 => vec![ZERO, ONE, ONE, ZERO],
            2 => vec![ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO],
            _ => vec![ONE, ZERO, ZERO, -ONE],
        };
        OperatorMat::from_entries(2, e).unwrap()
    }

    #[test]
    fn kron_places_basis_kets_big_endian() {
        let s = StateVec::basis(2, 0)
            .unwrap()
            .kron(&StateVec::basis(2, 1).unwrap());
        assert_eq!(s.amps(), &[ZERO, ONE, ZERO, ZERO]);
        assert_eq!(s.dims(), &[2, 2]);
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = OperatorMat::identity(2);
        assert_eq!(i2.kron(&i2), OperatorMat::identity(4));
    }

    #[test]
    fn zz_fixes_phi_plus() {
        let h = 1.0 / 2f64.sqrt();
        let phi = StateVec::new(vec![2, 2], vec![c(h, 0.0), ZERO, ZERO, c(h, 0.0)]).unwrap();
        let zz = sigma(3).kron(&sigma(3));
        let out = zz.apply(phi.amps()).unwrap();
        assert!(max_abs_diff(&out, phi.amps()) < 1e-15);
    }

    #[test]
    fn dagger_of_sigma2_is_sigma2() {
        assert_eq!(sigma(2).dagger(), sigma(2));
    }

    #[test]
    fn inner_rejects_mismatched_dims() {
        let a = StateVec::basis(2, 0).unwrap();
        let b = StateVec::basis(3, 0).unwrap();
        assert!(matches!(
            a.inner(&b),
            Err(GbtError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn new_rejects_unnormalized_and_non_finite() {
        assert!(matches!(
            StateVec::new(vec![2], vec![ONE, ONE]),
            Err(GbtError::NotNormalized { .. })
        ));
        assert!(matches!(
            StateVec::new(vec![2], vec![c(f64::NAN, 0.0), ZERO]),
            Err(GbtError::NonFinite(_))
        ));
        assert!(matches!(
            StateVec::normalized(vec![2], vec![ZERO, ZERO]),
            Err(GbtError::ZeroVector)
        ));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let s = StateVec::basis(2, 0)
            .unwrap()
            .kron(&StateVec::basis(2, 1).unwrap());
        let rho = s.density().partial_trace(&[2, 2], 0).unwrap();
        assert_eq!(rho.matrix(), &OperatorMat::ketbra(2, 0, 0));
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let rho = DensityMat::maximally_mixed(4);
        assert!(matches!(
            rho.partial_trace(&[2, 2], 2),
            Err(GbtError::IndexOutOfRange { .. })
        ));
        assert!(rho.partial_trace(&[2, 3], 0).is_err());
    }

    #[test]
    fn fidelity_basics() {
        let zero = StateVec::basis(2, 0).unwrap();
        let one = StateVec::basis(2, 1).unwrap();
        assert_eq!(fidelity(&zero, &zero.density()).unwrap(), 1.0);
        assert_eq!(fidelity(&zero, &one.density()).unwrap(), 0.0);
        let h = 1.0 / 2f64.sqrt();
        let plus = StateVec::new(vec![2], vec![c(h, 0.0), c(h, 0.0)]).unwrap();
        let f = fidelity(&plus, &DensityMat::maximally_mixed(2)).unwrap();
        assert!((f - 0.5).abs() < 1e-15);
    }

    #[test]
    fn canonical_phase_examples() {
        let w = omega(3);
        let r = 1.0 / 3f64.sqrt();
        let s = StateVec::new(vec![3], vec![w * r, w * r, w * r]).unwrap();
        let canon = s.global_phase_canonical().unwrap();
        assert!(max_abs_diff(canon.amps(), &[c(r, 0.0); 3]) < 1e-15);

        let minus_one = StateVec::new(vec![2], vec![ZERO, -ONE]).unwrap();
        assert_eq!(
            minus_one.global_phase_canonical().unwrap().amps(),
            &[ZERO, ONE]
        );

        let h = 1.0 / 2f64.sqrt();
        let s = StateVec::new(vec![2], vec![c(0.0, h), c(-h, 0.0)]).unwrap();
        let canon = s.global_phase_canonical().unwrap();
        assert!(max_abs_diff(canon.amps(), &[c(h, 0.0), c(0.0, h)]) < 1e-15);
    }

    #[test]
    fn embed_matches_kron_on_leading_factor() {
        let x = sigma(1);
        let full = x.embed(&[2, 3], &[0]).unwrap();
        assert_eq!(full, x.kron(&OperatorMat::identity(3)));
        let full = x.embed(&[3, 2], &[1]).unwrap();
        assert_eq!(full, OperatorMat::identity(3).kron(&x));
    }

    #[test]
    fn embed_respects_target_order() {
        // swapping the targets of X ⊗ Z swaps which factor each acts on
        let xz = sigma(1).kron(&sigma(3));
        let swapped = xz.embed(&[2, 2], &[1, 0]).unwrap();
        assert_eq!(swapped, sigma(3).kron(&sigma(1)));
    }

    #[test]
    fn omega_pow_reduces_exponent() {
        let w = omega(3);
        assert!((omega_pow(3, -1) - w * w).norm() < 1e-15);
        assert!((omega_pow(3, 4) - w).norm() < 1e-15);
        assert_eq!(omega_pow(5, 10), ONE);
    }
}
