//! Dense complex linear algebra used by the Bloch and propagation code.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::grid::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative singular-value threshold below which a direction counts as
/// kernel.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Matrix exponential by Padé scaling-and-squaring.
pub fn expm(m: &CMatrix) -> CMatrix {
    m.exp()
}

pub fn is_lower_triangular(m: &CMatrix) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (i + 1..n).all(|j| m[(i, j)] == C64::default()))
}

pub fn is_hermitian(m: &CMatrix) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (i..n).all(|j| m[(i, j)] == m[(j, i)].conj()))
}

/// Eigenvalues of a square matrix. Triangular matrices return their
/// diagonal exactly; Hermitian ones use the symmetric solver.
pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    if is_lower_triangular(m) {
        return m.diagonal().iter().copied().collect();
    }
    if is_hermitian(m) {
        return SymmetricEigen::new(m.clone())
            .eigenvalues
            .iter()
            .map(|e| C64::from(*e))
            .collect();
    }
    m.eigenvalues()
        .expect("complex Schur decomposition always yields eigenvalues")
        .iter()
        .copied()
        .collect()
}

/// Singular value decomposition with values sorted descending; `v` holds the
/// right singular vectors as columns.
pub struct SvdParts {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

impl SvdParts {
    pub fn new(m: &CMatrix) -> Self {
        let svd = SVD::new(m.clone(), true, true);
        let u = svd.u.expect("u requested");
        let v = svd.v_t.expect("v requested").adjoint();
        let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
        debug_assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
        Self { u, sigma, v }
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values below `RANK_THRESHOLD * sigma_max`.
    pub fn kernel_dim(&self) -> usize {
        let cut = RANK_THRESHOLD * self.sigma_max();
        self.sigma.iter().filter(|s| **s < cut).count()
    }

    /// Right singular vector for the `k`-th smallest singular value.
    pub fn right_null(&self, k: usize) -> CVector {
        let idx = self.sigma.len() - 1 - k;
        self.v.column(idx).into_owned()
    }

    pub fn left_null(&self, k: usize) -> CVector {
        let idx = self.sigma.len() - 1 - k;
        self.u.column(idx).into_owned()
    }

    /// Minimum-norm least-squares solution of `m x = b`, discarding the
    /// numerically null directions.
    pub fn solve(&self, b: &CVector) -> CVector {
        let cut = RANK_THRESHOLD * self.sigma_max();
        let mut x = CVector::zeros(self.v.nrows());
        for (k, s) in self.sigma.iter().enumerate() {
            if *s < cut {
                continue;
            }
            let coeff = self.u.column(k).dotc(b) / *s;
            x += self.v.column(k) * coeff;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_eigenvalues_are_exact_diagonal() {
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = C64::from(0.25);
        m[(1, 1)] = C64::from(0.25);
        m[(2, 2)] = C64::from(2.25);
        m[(1, 0)] = C64::from(0.3);
        assert_eq!(eigenvalues(&m), vec![C64::from(0.25), C64::from(0.25), C64::from(2.25)]);
    }

    #[test]
    fn jordan_block_has_one_dimensional_kernel() {
        let mut m = CMatrix::zeros(2, 2);
        m[(1, 0)] = C64::from(1.0);
        let svd = SvdParts::new(&m);
        assert_eq!(svd.kernel_dim(), 1);
        let u = svd.right_null(0);
        assert!((m.clone() * &u).norm() < 1e-15);
        // m v = u is solvable because u = e_1 lies in the range
        let b = CVector::from_vec(vec![C64::from(0.0), C64::from(1.0)]);
        let v = svd.solve(&b);
        assert!((m * v - b).norm() < 1e-15);
    }

    #[test]
    fn expm_of_diagonal() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(0.0, -3.0);
        m[(1, 1)] = C64::new(0.0, 7.5);
        let e = expm(&m);
        assert!((e[(0, 0)] - C64::new(0.0, -3.0).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - C64::new(0.0, 7.5).exp()).norm() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-15);
    }
}
