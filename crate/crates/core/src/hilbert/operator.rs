use std::ops::{Add, Mul, Sub};

use super::{CMatrix, CVector, HilbertError, Result, C64, FLAG_TOL};

/// Properties that have been checked for an [`Operator`].
///
/// A `false` flag means "not certified", not "known to fail".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OperatorFlags {
    pub hermitian: bool,
    pub unitary: bool,
    pub projector: bool,
}

impl OperatorFlags {
    pub const NONE: Self = Self {
        hermitian: false,
        unitary: false,
        projector: false,
    };

    fn and(self, other: Self) -> Self {
        Self {
            hermitian: self.hermitian && other.hermitian,
            unitary: self.unitary && other.unitary,
            projector: self.projector && other.projector,
        }
    }
}

/// Dense square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    flags: OperatorFlags,
}

impl Operator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(HilbertError::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(HilbertError::ZeroDimension);
        }
        Ok(Self {
            matrix,
            flags: OperatorFlags::NONE,
        })
    }

    /// Builds an operator and certifies its flags at [`FLAG_TOL`].
    pub fn certified(matrix: CMatrix) -> Result<Self> {
        Ok(Self::new(matrix)?.certify(FLAG_TOL))
    }

    pub(crate) fn with_flags(matrix: CMatrix, flags: OperatorFlags) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Self { matrix, flags }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(HilbertError::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Self {
        Self::with_flags(
            CMatrix::identity(dim, dim),
            OperatorFlags {
                hermitian: true,
                unitary: true,
                projector: true,
            },
        )
    }

    pub fn zeros(dim: usize) -> Self {
        Self::with_flags(
            CMatrix::zeros(dim, dim),
            OperatorFlags {
                hermitian: true,
                unitary: false,
                projector: true,
            },
        )
    }

    /// Real diagonal matrix; hermitian by construction.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let m = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self::with_flags(
            m,
            OperatorFlags {
                hermitian: true,
                unitary: false,
                projector: false,
            },
        )
        .certify(FLAG_TOL)
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &CVector, b: &CVector) -> Self {
        Self::with_flags(a * b.adjoint(), OperatorFlags::NONE)
    }

    /// Rank-one projector onto the span of `v` (normalized internally).
    pub fn projector_onto(v: &CVector) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 {
            return Err(HilbertError::ZeroVector);
        }
        let u = v.unscale(norm);
        Ok(Self::with_flags(
            &u * u.adjoint(),
            OperatorFlags {
                hermitian: true,
                unitary: false,
                projector: true,
            },
        ))
    }

    /// Orthogonal projector onto the span of orthonormal columns.
    pub fn projector_onto_span(vectors: &[CVector]) -> Result<Self> {
        let first = vectors.first().ok_or(HilbertError::ZeroDimension)?;
        let mut m = CMatrix::zeros(first.len(), first.len());
        for v in vectors {
            if v.len() != first.len() {
                return Err(HilbertError::DimensionMismatch {
                    expected: first.len(),
                    found: v.len(),
                });
            }
            m += v * v.adjoint();
        }
        Ok(Self::with_flags(
            m,
            OperatorFlags {
                hermitian: true,
                unitary: false,
                projector: true,
            },
        ))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn flags(&self) -> OperatorFlags {
        self.flags
    }

    /// Recomputes every flag at tolerance `tol`.
    pub fn certify(mut self, tol: f64) -> Self {
        let hermitian = self.max_asymmetry().2 <= tol;
        let unitary = self.unitarity_residual() <= tol;
        let projector = hermitian && self.idempotency_residual() <= tol;
        self.flags = OperatorFlags {
            hermitian,
            unitary,
            projector,
        };
        self
    }

    /// Location and size of the largest `|M[r,c] - conj(M[c,r])|`.
    pub fn max_asymmetry(&self) -> (usize, usize, f64) {
        let n = self.dim();
        let mut worst = (0, 0, 0.0);
        for r in 0..n {
            for c in r..n {
                let d = (self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm();
                if d > worst.2 {
                    worst = (r, c, d);
                }
            }
        }
        worst
    }

    pub fn unitarity_residual(&self) -> f64 {
        let prod = self.matrix.adjoint() * &self.matrix;
        max_abs_entry(&(prod - CMatrix::identity(self.dim(), self.dim())))
    }

    pub fn idempotency_residual(&self) -> f64 {
        max_abs_entry(&(&self.matrix * &self.matrix - &self.matrix))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.flags.hermitian || self.max_asymmetry().2 <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.flags.unitary || self.unitarity_residual() <= tol
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        self.flags.projector || (self.max_asymmetry().2 <= tol && self.idempotency_residual() <= tol)
    }

    /// Errors with the worst asymmetric entry when not hermitian at `tol`.
    pub fn require_hermitian(&self, tol: f64) -> Result<()> {
        if self.flags.hermitian {
            return Ok(());
        }
        let (row, col, asymmetry) = self.max_asymmetry();
        if asymmetry > tol {
            return Err(HilbertError::NotHermitian {
                row,
                col,
                asymmetry,
            });
        }
        Ok(())
    }

    pub fn require_projector(&self, tol: f64) -> Result<()> {
        if self.flags.projector {
            return Ok(());
        }
        let residual = self.max_asymmetry().2.max(self.idempotency_residual());
        if residual > tol {
            return Err(HilbertError::NotProjector { residual });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        let flags = OperatorFlags {
            hermitian: self.flags.hermitian,
            unitary: self.flags.unitary,
            projector: self.flags.projector,
        };
        Self::with_flags(self.matrix.adjoint(), flags)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::with_flags(&self.matrix * factor, OperatorFlags::NONE)
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `AB - BA`.
    pub fn commutator(&self, other: &Operator) -> Operator {
        Self::with_flags(
            &self.matrix * &other.matrix - &other.matrix * &self.matrix,
            OperatorFlags::NONE,
        )
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_abs_entry(&(&self.matrix - &other.matrix))
    }

    pub fn approx_eq(&self, other: &Operator, tol: f64) -> bool {
        self.dim() == other.dim() && self.max_abs_diff(other) <= tol
    }

    /// `(M + M†)/2`, flagged hermitian.
    pub fn hermitian_part(&self) -> Self {
        let m = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        Self::with_flags(
            m,
            OperatorFlags {
                hermitian: true,
                unitary: false,
                projector: false,
            },
        )
    }

    /// `exp(−iθM)` for hermitian `M`, through its eigendecomposition.
    pub fn unitary_exp(&self, theta: f64) -> Result<Self> {
        self.require_hermitian(FLAG_TOL)?;
        let eig = self.hermitian_part().matrix.symmetric_eigen();
        let phases = CVector::from_iterator(
            self.dim(),
            eig.eigenvalues
                .iter()
                .map(|&l| C64::from_polar(1.0, -theta * l)),
        );
        let v = &eig.eigenvectors;
        let m = v * CMatrix::from_diagonal(&phases) * v.adjoint();
        Ok(Self::with_flags(
            m,
            OperatorFlags {
                unitary: true,
                ..OperatorFlags::NONE
            },
        ))
    }

    /// Hermitian eigenvalues in ascending order (caller guarantees hermiticity).
    pub(crate) fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .hermitian_part()
            .matrix
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

pub(crate) fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        // Products of commuting projectors are projectors, but that is not
        // known here; flags are dropped.
        Operator::with_flags(&self.matrix * &rhs.matrix, OperatorFlags::NONE)
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        let flags = OperatorFlags {
            hermitian: self.flags.hermitian && rhs.flags.hermitian,
            ..OperatorFlags::NONE
        };
        Operator::with_flags(&self.matrix + &rhs.matrix, flags)
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        let flags = OperatorFlags {
            hermitian: self.flags.hermitian && rhs.flags.hermitian,
            ..OperatorFlags::NONE
        };
        Operator::with_flags(&self.matrix - &rhs.matrix, flags)
    }
}

pub(crate) fn kron_flags(a: OperatorFlags, b: OperatorFlags) -> OperatorFlags {
    a.and(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::pauli;

    #[test]
    fn exp_of_sigma_z_is_diagonal_phase() {
        let u = pauli::sigma_z().unitary_exp(0.3).unwrap();
        assert!((u.entry(0, 0) - C64::from_polar(1.0, -0.3)).norm() < 1e-15);
        assert!((u.entry(1, 1) - C64::from_polar(1.0, 0.3)).norm() < 1e-15);
        assert!(u.entry(0, 1).norm() < 1e-15);
        assert!(u.is_unitary(FLAG_TOL));
    }

    #[test]
    fn exp_of_sigma_x_matches_rotation() {
        // exp(−iθσx) = cos θ I − i sin θ σx
        let th = 0.7f64;
        let u = pauli::sigma_x().unitary_exp(th).unwrap();
        let expected = Operator::identity(2).scale(C64::new(th.cos(), 0.0)).matrix()
            + pauli::sigma_x().matrix() * C64::new(0.0, -th.sin());
        assert!(max_abs_entry(&(u.matrix() - expected)) < 1e-15);
    }

    #[test]
    fn exp_rejects_non_hermitian() {
        let m = Operator::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(m.unitary_exp(1.0).is_err());
    }
}
