//! Generalized Bell basis on `C^d ⊗ C^d`.
//!
//! `bell(m, n) = d^{-1/2} Σ_j ω^{j n} |j> ⊗ |j + m mod d>`, where `m` is the
//! shift index and `n` the phase index. The flat numbering `k = d m + n + 1`
//! gives the familiar lists: at `d = 2`, `k = 1..4` are
//! `(|00>+|11>)`, `(|00>-|11>)`, `(|01>+|10>)`, `(|01>-|10>)` (each over √2);
//! at `d = 3`, `k = 1..9` run through the three shifts, each with phases
//! `1, ω, ω²` on successive terms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GbtError, Result};
use crate::tensor::{omega_pow, CNum, StateVec, ZERO};

/// Names one generalized Bell state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BellIndex {
    m: usize,
    n: usize,
    d: usize,
}

impl BellIndex {
    pub fn new(d: usize, m: usize, n: usize) -> Result<Self> {
        check_dim(d)?;
        for (what, v) in [("shift", m), ("phase", n)] {
            if v >= d {
                return Err(GbtError::IndexOutOfRange {
                    what,
                    index: v,
                    bound: d,
                });
            }
        }
        Ok(Self { m, n, d })
    }

    /// From the 1-based flat index `k = d m + n + 1`.
    pub fn from_flat(d: usize, k: usize) -> Result<Self> {
        check_dim(d)?;
        if k == 0 || k > d * d {
            return Err(GbtError::IndexOutOfRange {
                what: "Bell flat",
                index: k,
                bound: d * d,
            });
        }
        Ok(Self {
            m: (k - 1) / d,
            n: (k - 1) % d,
            d,
        })
    }

    pub fn flat(&self) -> usize {
        self.d * self.m + self.n + 1
    }

    pub fn shift(&self) -> usize {
        self.m
    }

    pub fn phase(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// All `d²` indices in flat order.
    pub fn all(d: usize) -> Result<Vec<BellIndex>> {
        check_dim(d)?;
        Ok((0..d)
            .flat_map(|m| (0..d).map(move |n| BellIndex { m, n, d }))
            .collect())
    }
}

impl fmt::Display for BellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bell[{}](m={}, n={})", self.flat(), self.m, self.n)
    }
}

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(GbtError::InvalidDimension(d))
    } else {
        Ok(())
    }
}

pub fn bell_state(idx: BellIndex) -> StateVec {
    let d = idx.d;
    let norm = 1.0 / (d as f64).sqrt();
    let mut amps = vec![ZERO; d * d];
    for j in 0..d {
        let partner = (j + idx.m) % d;
        amps[j * d + partner] = omega_pow(d, (j * idx.n) as i64) * norm;
    }
    StateVec::new(vec![d, d], amps).expect("Bell states are normalized by construction")
}

/// The `d²` Bell states in flat-index order.
pub fn bell_basis(d: usize) -> Result<Vec<StateVec>> {
    Ok(BellIndex::all(d)?.into_iter().map(bell_state).collect())
}

/// Coefficients `c_k` of `|i> ⊗ |j> = Σ_k c_k |bell_k>` in flat order.
///
/// Only the `d` states with shift `m = j - i mod d` contribute, each with
/// `c = ω^{-i n} / √d`.
pub fn product_in_bell_basis(i: usize, j: usize, d: usize) -> Result<Vec<CNum>> {
    check_dim(d)?;
    for (what, v) in [("left ket", i), ("right ket", j)] {
        if v >= d {
            return Err(GbtError::IndexOutOfRange {
                what,
                index: v,
                bound: d,
            });
        }
    }
    let m = (j + d - i) % d;
    let norm = 1.0 / (d as f64).sqrt();
    let mut coeffs = vec![ZERO; d * d];
    for n in 0..d {
        coeffs[d * m + n] = omega_pow(d, -((i * n) as i64)) * norm;
    }
    Ok(coeffs)
}

/// Re-sums a coefficient list over the Bell basis into an amplitude vector.
pub fn resum_bell_coefficients(coeffs: &[CNum], d: usize) -> Result<Vec<CNum>> {
    if coeffs.len() != d * d {
        return Err(GbtError::DimensionMismatch {
            expected: d * d,
            found: coeffs.len(),
        });
    }
    let basis = bell_basis(d)?;
    let mut out = vec![ZERO; d * d];
    for (c, state) in coeffs.iter().zip(&basis) {
        for (slot, a) in out.iter_mut().zip(state.amps()) {
            *slot += c * a;
        }
    }
    Ok(out)
}
