use super::{
    CVector, HilbertError, Operator, OperatorFlags, Result, C64, FLAG_TOL, NORM_TOL, PSD_TOL,
};

/// Unit vector in `C^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    /// Wraps `amplitudes`, rejecting vectors whose norm is off by more than 1e-12.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(HilbertError::ZeroDimension);
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(HilbertError::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(HilbertError::ZeroDimension);
        }
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(HilbertError::ZeroVector);
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::normalized(CVector::from_iterator(
            values.len(),
            values.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    pub fn from_complex(values: &[C64]) -> Result<Self> {
        Self::normalized(CVector::from_column_slice(values))
    }

    /// Computational basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self { amplitudes: v }
    }

    pub(crate) fn from_unit_unchecked(amplitudes: CVector) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `⟨ψ|M|ψ⟩`, real part.
    pub fn expectation(&self, op: &Operator) -> f64 {
        self.amplitudes.dotc(&op.apply(&self.amplitudes)).re
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::pure(self)
    }
}

/// Validated mixed state: hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        op.require_hermitian(FLAG_TOL)?;
        let trace = op.trace();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(HilbertError::BadTrace { trace: trace.re });
        }
        let min_eigenvalue = op.hermitian_eigenvalues()[0];
        if min_eigenvalue < PSD_TOL {
            return Err(HilbertError::NotPositive { min_eigenvalue });
        }
        let flags = OperatorFlags {
            hermitian: true,
            ..op.flags()
        };
        Ok(Self {
            op: Operator::with_flags(op.into_matrix(), flags),
        })
    }

    pub fn pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        Self {
            op: Operator::with_flags(
                a * a.adjoint(),
                OperatorFlags {
                    hermitian: true,
                    unitary: false,
                    projector: true,
                },
            ),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let m = super::CMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0);
        Self {
            op: Operator::with_flags(
                m,
                OperatorFlags {
                    hermitian: true,
                    unitary: false,
                    projector: dim == 1,
                },
            ),
        }
    }

    /// Convex combination `Σ w_k |ψ_k⟩⟨ψ_k|`; weights must sum to one.
    pub fn mixture(members: &[(f64, StateVector)]) -> Result<Self> {
        let first = members.first().ok_or(HilbertError::ZeroDimension)?;
        let dim = first.1.dim();
        let mut m = super::CMatrix::zeros(dim, dim);
        for (w, psi) in members {
            if psi.dim() != dim {
                return Err(HilbertError::DimensionMismatch {
                    expected: dim,
                    found: psi.dim(),
                });
            }
            let a = psi.amplitudes();
            m += a * a.adjoint() * C64::new(*w, 0.0);
        }
        Self::new(Operator::new(m)?.hermitian_part())
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    /// `Tr(Mρ)`, real part.
    pub fn expectation(&self, m: &Operator) -> f64 {
        (m.matrix() * self.op.matrix()).trace().re
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.op.max_abs_diff(&other.op)
    }
}
