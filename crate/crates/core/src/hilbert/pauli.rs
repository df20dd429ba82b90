//! Named operators and states used across the crate.

use super::{CVector, Operator, OperatorFlags, SpectralObservable, StateVector, C64};

const PAULI_FLAGS: OperatorFlags = OperatorFlags {
    hermitian: true,
    unitary: true,
    projector: false,
};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn matrix2(entries: [C64; 4]) -> Operator {
    Operator::with_flags(
        super::CMatrix::from_row_slice(2, 2, &entries),
        PAULI_FLAGS,
    )
}

pub fn sigma_x() -> Operator {
    matrix2([c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn sigma_y() -> Operator {
    matrix2([c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn sigma_z() -> Operator {
    matrix2([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

pub fn ket0() -> StateVector {
    StateVector::basis(2, 0)
}

pub fn ket1() -> StateVector {
    StateVector::basis(2, 1)
}

pub fn plus() -> StateVector {
    StateVector::from_real(&[1.0, 1.0]).expect("nonzero")
}

pub fn minus() -> StateVector {
    StateVector::from_real(&[1.0, -1.0]).expect("nonzero")
}

/// `(|01⟩ − |10⟩)/√2`.
pub fn singlet() -> StateVector {
    StateVector::from_real(&[0.0, 1.0, -1.0, 0.0]).expect("nonzero")
}

/// Fourier basis vector `f_k = (1, ω^k, ω^{2k}, …)/√n`, `ω = e^{2πi/n}`.
pub fn fourier_vector(n: usize, k: usize) -> StateVector {
    let v = CVector::from_fn(n, |m, _| {
        let angle = 2.0 * std::f64::consts::PI * (k * m) as f64 / n as f64;
        C64::from_polar(1.0, angle)
    });
    StateVector::normalized(v).expect("nonzero")
}

/// Rank-one Fourier-basis observable on `C^n`, outcome `k` ↔ `f_k`.
pub fn fourier_observable(n: usize) -> SpectralObservable {
    let projectors = (0..n)
        .map(|k| Operator::projector_onto(fourier_vector(n, k).amplitudes()).expect("nonzero"))
        .collect();
    SpectralObservable::from_projectors(projectors).expect("Fourier basis is orthonormal")
}

/// Rank-one computational-basis observable on `C^n`.
pub fn computational_observable(n: usize) -> SpectralObservable {
    let projectors = (0..n)
        .map(|k| Operator::projector_onto(StateVector::basis(n, k).amplitudes()).expect("nonzero"))
        .collect();
    SpectralObservable::from_projectors(projectors).expect("basis is orthonormal")
}

/// Spectral decomposition of σ_x, σ_y or σ_z; outcome 0 is eigenvalue +1.
pub fn pauli_observable(axis: Axis) -> SpectralObservable {
    let (up, down) = match axis {
        Axis::X => (plus(), minus()),
        Axis::Y => (
            StateVector::from_complex(&[c(1.0, 0.0), c(0.0, 1.0)]).expect("nonzero"),
            StateVector::from_complex(&[c(1.0, 0.0), c(0.0, -1.0)]).expect("nonzero"),
        ),
        Axis::Z => (ket0(), ket1()),
    };
    SpectralObservable::new(
        vec![1.0, -1.0],
        vec![
            Operator::projector_onto(up.amplitudes()).expect("nonzero"),
            Operator::projector_onto(down.amplitudes()).expect("nonzero"),
        ],
    )
    .expect("Pauli eigenbasis")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn operator(self) -> Operator {
        match self {
            Axis::X => sigma_x(),
            Axis::Y => sigma_y(),
            Axis::Z => sigma_z(),
        }
    }
}
