//! Superoperators on the two-qutrit space.
//!
//! Density matrices are vectorized column-major, `vec(ρ)[i + 9j] = ρ[i, j]`,
//! so `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.

use crate::linalg::{c, Mat9, C64};
use crate::model::{DensityMatrix, PairUnitary};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub const DIM: usize = 9;
pub const SUPER_DIM: usize = DIM * DIM;

#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    matrix: DMatrix<C64>,
}

#[inline]
pub(crate) fn vec_index(row: usize, col: usize) -> usize {
    row + DIM * col
}

impl Superoperator {
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.shape() != (SUPER_DIM, SUPER_DIM) {
            return Err(Error::InvalidChannel(format!(
                "superoperator must be {SUPER_DIM}x{SUPER_DIM}, got {:?}",
                matrix.shape()
            )));
        }
        Ok(Self { matrix })
    }

    pub fn identity() -> Self {
        Self {
            matrix: DMatrix::identity(SUPER_DIM, SUPER_DIM),
        }
    }

    /// `ρ ↦ U ρ U†`, i.e. `conj(U) ⊗ U`.
    pub fn from_unitary(u: &PairUnitary) -> Self {
        Self::conjugation(u.matrix())
    }

    pub(crate) fn conjugation(u: &Mat9) -> Self {
        let mut m = DMatrix::zeros(SUPER_DIM, SUPER_DIM);
        for b in 0..DIM {
            for j in 0..DIM {
                let ubj = u[(b, j)].conj();
                if ubj == c(0.0, 0.0) {
                    continue;
                }
                for a in 0..DIM {
                    for i in 0..DIM {
                        m[(vec_index(a, b), vec_index(i, j))] = u[(a, i)] * ubj;
                    }
                }
            }
        }
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// `self` followed by `later`.
    pub fn then(&self, later: &Superoperator) -> Superoperator {
        Superoperator {
            matrix: &later.matrix * &self.matrix,
        }
    }

    /// Weighted sum `Σ wₖ Sₖ`; weights should be a probability vector for
    /// the result to stay a channel.
    pub fn mixture(parts: &[(f64, Superoperator)]) -> Result<Superoperator> {
        let mut m = DMatrix::zeros(SUPER_DIM, SUPER_DIM);
        for (w, s) in parts {
            m += &s.matrix * c(*w, 0.0);
        }
        Superoperator::from_matrix(m)
    }

    pub fn apply_matrix(&self, rho: &Mat9) -> Mat9 {
        let v = DVector::from_iterator(SUPER_DIM, rho.iter().copied());
        let out = &self.matrix * v;
        Mat9::from_iterator(out.iter().copied())
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.apply_matrix(rho.matrix()))
    }

    /// Choi matrix `Σ |i><j| ⊗ E(|i><j|)`.
    pub fn choi(&self) -> DMatrix<C64> {
        let mut choi = DMatrix::zeros(SUPER_DIM, SUPER_DIM);
        for i in 0..DIM {
            for j in 0..DIM {
                let col = vec_index(i, j);
                for a in 0..DIM {
                    for b in 0..DIM {
                        choi[(i * DIM + a, j * DIM + b)] = self.matrix[(vec_index(a, b), col)];
                    }
                }
            }
        }
        choi
    }

    /// Smallest eigenvalue of the (Hermitized) Choi matrix.
    pub fn min_choi_eigenvalue(&self) -> f64 {
        let choi = self.choi();
        let h = (&choi + choi.adjoint()) * c(0.5, 0.0);
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `max |Tr E(|i><j|) − δᵢⱼ|`.
    pub fn trace_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..DIM {
            for j in 0..DIM {
                let col = vec_index(i, j);
                let mut tr = c(0.0, 0.0);
                for a in 0..DIM {
                    tr += self.matrix[(vec_index(a, a), col)];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((tr - c(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn is_completely_positive(&self, tol: f64) -> bool {
        self.min_choi_eigenvalue() >= -tol
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_deviation() <= tol
    }

    /// Fails with `InvalidChannel` unless CP and TP within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let eig = self.min_choi_eigenvalue();
        if eig < -tol {
            return Err(Error::InvalidChannel(format!("Choi eigenvalue {eig:e}")));
        }
        let tp = self.trace_deviation();
        if tp > tol {
            return Err(Error::InvalidChannel(format!("trace deviation {tp:e}")));
        }
        Ok(())
    }
}
