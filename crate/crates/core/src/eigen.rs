//! Hermitian eigendecomposition by cyclic complex Jacobi rotations, and the
//! eigenspace-grouped [`SpectralForm`] that measurement works with.

use serde::{Deserialize, Serialize};

use crate::error::{GbtError, Result};
use crate::tensor::{CNum, OperatorMat, ZERO};
use crate::tol::{GROUP_TOL, TOL_MAT};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-13;

/// Raw eigenpairs: eigenvalues sorted descending, `vectors[k]` is the unit
/// eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<CNum>>,
}

fn off_diagonal_norm(a: &OperatorMat) -> f64 {
    let n = a.dim();
    let mut sum = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                sum += a.get(r, c).norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Diagonalizes a Hermitian matrix with cyclic Jacobi sweeps.
///
/// Each rotation `U` acts on the `(p, q)` plane as
///
/// ```text
/// U_pp = c        U_pq = s
/// U_qp = -s e^-iφ U_qq = c e^-iφ
/// ```
///
/// where `φ = arg(a_pq)`. This is a phase shift on column `q` that makes
/// `a_pq` real, followed by a real symmetric Jacobi rotation.
pub fn jacobi_eigenpairs(h: &OperatorMat) -> Result<EigenPairs> {
    let herm = h.hermiticity_error();
    if herm > TOL_MAT {
        return Err(GbtError::NotHermitian(herm));
    }
    let n = h.dim();
    // symmetrize so round-off in the input does not bias the rotations
    let mut a = OperatorMat::from_fn(n, |r, c| (h.get(r, c) + h.get(c, r).conj()) * 0.5);
    let mut v = OperatorMat::identity(n);
    let threshold = OFF_DIAGONAL_TOL * a.frobenius_norm().max(1.0);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r; // e^{iφ}
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;

                // A <- A U (columns p, q)
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * c + akq * u_qp);
                    a.set(k, q, akp * s + akq * u_qq);
                }
                // A <- U^dagger A (rows p, q)
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, apk * c + aqk * u_qp.conj());
                    a.set(q, k, apk * s + aqk * u_qq.conj());
                }
                a.set(p, q, ZERO);
                a.set(q, p, ZERO);
                a.set(p, p, CNum::new(a.get(p, p).re, 0.0));
                a.set(q, q, CNum::new(a.get(q, q).re, 0.0));
                // V <- V U
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * c + vkq * u_qp);
                    v.set(k, q, vkp * s + vkq * u_qq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).re.total_cmp(&a.get(i, i).re));
    let values = order.iter().map(|&k| a.get(k, k).re).collect();
    let vectors = order
        .iter()
        .map(|&k| (0..n).map(|r| v.get(r, k)).collect())
        .collect();
    Ok(EigenPairs { values, vectors })
}

/// The spectral decomposition `H = Σ λ_k P_k` over distinct eigenvalues,
/// with each eigenspace kept whole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralForm {
    eigenvalues: Vec<f64>,
    projectors: Vec<OperatorMat>,
    multiplicities: Vec<usize>,
}

impl SpectralForm {
    /// Assembles a spectral form from explicit eigenspaces. Each entry pairs
    /// an eigenvalue with an orthonormal basis of its eigenspace.
    pub fn from_eigenspaces(mut spaces: Vec<(f64, Vec<Vec<CNum>>)>) -> Result<Self> {
        let dim = spaces
            .first()
            .and_then(|(_, basis)| basis.first())
            .map(Vec::len)
            .ok_or_else(|| GbtError::InvalidConfig("empty spectral form".into()))?;
        spaces.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut form = SpectralForm {
            eigenvalues: Vec::new(),
            projectors: Vec::new(),
            multiplicities: Vec::new(),
        };
        for (value, basis) in spaces {
            let mut proj = OperatorMat::zeros(dim);
            for vec in &basis {
                if vec.len() != dim {
                    return Err(GbtError::DimensionMismatch {
                        expected: dim,
                        found: vec.len(),
                    });
                }
                proj = &proj + &OperatorMat::outer(vec, vec);
            }
            form.eigenvalues.push(value);
            form.projectors.push(proj);
            form.multiplicities.push(basis.len());
        }
        let total: usize = form.multiplicities.iter().sum();
        if total != dim {
            return Err(GbtError::DimensionMismatch {
                expected: dim,
                found: total,
            });
        }
        Ok(form)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[OperatorMat] {
        &self.projectors
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn dim(&self) -> usize {
        self.projectors.first().map_or(0, OperatorMat::dim)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.multiplicities.iter().any(|&m| m > 1)
    }

    /// `Σ λ_k P_k`.
    pub fn reconstruct(&self) -> OperatorMat {
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(OperatorMat::zeros(self.dim()), |acc, (&l, p)| {
                &acc + &p.scale(CNum::new(l, 0.0))
            })
    }

    /// Worst violation of `P_j P_k = δ_jk P_j` and `Σ P_k = 1`.
    pub fn projector_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for (j, pj) in self.projectors.iter().enumerate() {
            for (k, pk) in self.projectors.iter().enumerate() {
                let prod = pj * pk;
                let expected = if j == k {
                    pj.clone()
                } else {
                    OperatorMat::zeros(n)
                };
                worst = worst.max(prod.max_abs_diff(&expected));
            }
        }
        let sum = self
            .projectors
            .iter()
            .fold(OperatorMat::zeros(n), |acc, p| &acc + p);
        worst.max(sum.max_abs_diff(&OperatorMat::identity(n)))
    }
}

/// Eigendecomposition of a Hermitian matrix with near-equal eigenvalues
/// (adjacent gap below `GROUP_TOL`) merged into one eigenspace.
pub fn eig_hermitian(h: &OperatorMat) -> Result<SpectralForm> {
    let pairs = jacobi_eigenpairs(h)?;
    let mut spaces: Vec<(Vec<f64>, Vec<Vec<CNum>>)> = Vec::new();
    for (value, vector) in pairs.values.into_iter().zip(pairs.vectors) {
        match spaces.last_mut() {
            Some((values, basis)) if values.last().unwrap() - value < GROUP_TOL => {
                values.push(value);
                basis.push(vector);
            }
            _ => spaces.push((vec![value], vec![vector])),
        }
    }
    let spaces = spaces
        .into_iter()
        .map(|(values, basis)| {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            (mean, basis)
        })
        .collect();
    SpectralForm::from_eigenspaces(spaces)
}
