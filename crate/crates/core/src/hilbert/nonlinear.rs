use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::{CVector, HilbertError, Operator, Result, C64, FLAG_TOL};
use crate::sampling;

/// Shared vector-to-vector transformation.
pub type VectorFn = Arc<dyn Fn(&CVector) -> CVector + Send + Sync>;

/// Properties a [`NonlinearMap`] claims; each has a sampling verifier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MapClaims {
    pub norm_preserving: bool,
    pub invertible: bool,
}

/// Outcome of [`NonlinearMap::verify`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapVerification {
    pub samples: usize,
    pub max_norm_deviation: f64,
    pub max_inverse_deviation: Option<f64>,
    pub norm_ok: bool,
    pub inverse_ok: bool,
}

impl MapVerification {
    pub fn passed(&self) -> bool {
        self.norm_ok && self.inverse_ok
    }
}

/// Possibly nonlinear map `C^dim → C^dim`, defined on all vectors (not only
/// unit vectors).
#[derive(Clone)]
pub struct NonlinearMap {
    name: String,
    dim: usize,
    forward: VectorFn,
    inverse: Option<VectorFn>,
    claims: MapClaims,
}

impl fmt::Debug for NonlinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearMap")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("claims", &self.claims)
            .finish()
    }
}

impl NonlinearMap {
    /// Norm tolerance for the `norm_preserving` verifier.
    pub const NORM_TOL: f64 = 1e-10;
    /// Round-trip tolerance for the `invertible` verifier.
    pub const INVERSE_TOL: f64 = 1e-9;

    pub fn new(
        name: impl Into<String>,
        dim: usize,
        forward: impl Fn(&CVector) -> CVector + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            forward: Arc::new(forward),
            inverse: None,
            claims: MapClaims::default(),
        }
    }

    pub fn claim_norm_preserving(mut self) -> Self {
        self.claims.norm_preserving = true;
        self
    }

    /// Attaches an inverse and claims invertibility.
    pub fn with_inverse(
        mut self,
        inverse: impl Fn(&CVector) -> CVector + Send + Sync + 'static,
    ) -> Self {
        self.inverse = Some(Arc::new(inverse));
        self.claims.invertible = true;
        self
    }

    pub fn identity(dim: usize) -> Self {
        Self::new("identity", dim, |v| v.clone())
            .claim_norm_preserving()
            .with_inverse(|v| v.clone())
    }

    /// Linear map; unitary operators get their adjoint as inverse.
    pub fn linear(name: impl Into<String>, op: Operator) -> Self {
        let dim = op.dim();
        let unitary = op.is_unitary(FLAG_TOL);
        let m = op.matrix().clone();
        let map = Self::new(name, dim, move |v| &m * v);
        if unitary {
            let adj = op.matrix().adjoint();
            map.claim_norm_preserving().with_inverse(move |v| &adj * v)
        } else {
            map
        }
    }

    /// `ψ ↦ e^{iα} ψ`.
    pub fn global_phase(dim: usize, alpha: f64) -> Self {
        let phase = C64::from_polar(1.0, alpha);
        Self::new(format!("global-phase({alpha})"), dim, move |v| v * phase)
            .claim_norm_preserving()
            .with_inverse(move |v| v * phase.conj())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn claims(&self) -> MapClaims {
        self.claims
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        (self.forward)(v)
    }

    pub fn invert(&self, v: &CVector) -> Option<CVector> {
        self.inverse.as_ref().map(|g| g(v))
    }

    /// The claimed inverse as a map of its own.
    pub fn inverse_map(&self) -> Option<NonlinearMap> {
        let inverse = self.inverse.clone()?;
        Some(Self {
            name: format!("{}^-1", self.name),
            dim: self.dim,
            forward: inverse,
            inverse: Some(self.forward.clone()),
            claims: self.claims,
        })
    }

    /// Replaces the inverse (used to build deliberately broken controls).
    pub fn replace_inverse(mut self, inverse: VectorFn) -> Self {
        self.inverse = Some(inverse);
        self
    }

    pub fn forward_fn(&self) -> VectorFn {
        self.forward.clone()
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &NonlinearMap) -> Result<NonlinearMap> {
        if g.dim != self.dim {
            return Err(HilbertError::DimensionMismatch {
                expected: self.dim,
                found: g.dim,
            });
        }
        let f = self.forward.clone();
        let h = g.forward.clone();
        let mut out = Self::new(format!("{}∘{}", g.name, self.name), self.dim, move |v| {
            h(&f(v))
        });
        out.claims.norm_preserving = self.claims.norm_preserving && g.claims.norm_preserving;
        if let (Some(fi), Some(gi)) = (self.inverse.clone(), g.inverse.clone()) {
            out = out.with_inverse(move |v| fi(&gi(v)));
        }
        Ok(out)
    }

    /// Checks every claimed flag on `samples` seeded pseudo-random unit vectors.
    pub fn verify(&self, samples: usize, seed: u64) -> MapVerification {
        let mut rng = sampling::rng(seed);
        let mut max_norm: f64 = 0.0;
        let mut max_inv: Option<f64> = None;
        for _ in 0..samples {
            let psi = sampling::random_unit_vector(&mut rng, self.dim);
            let image = self.apply(psi.amplitudes());
            max_norm = max_norm.max((image.norm() - 1.0).abs());
            if let Some(inv) = &self.inverse {
                let back = inv(&image);
                let d = (back - psi.amplitudes()).norm();
                max_inv = Some(max_inv.map_or(d, |m: f64| m.max(d)));
            }
        }
        let norm_ok = !self.claims.norm_preserving || max_norm <= Self::NORM_TOL;
        let inverse_ok = !self.claims.invertible
            || max_inv.is_some_and(|d| d <= Self::INVERSE_TOL);
        MapVerification {
            samples,
            max_norm_deviation: max_norm,
            max_inverse_deviation: max_inv,
            norm_ok,
            inverse_ok,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::pauli;

    #[test]
    fn identity_and_phase_pass_verification() {
        for map in [NonlinearMap::identity(3), NonlinearMap::global_phase(4, 0.3)] {
            let report = map.verify(1000, 0);
            assert!(report.passed(), "{}: {report:?}", map.name());
        }
    }

    #[test]
    fn false_norm_claim_is_caught() {
        let map = NonlinearMap::new("double", 2, |v| v * C64::new(2.0, 0.0)).claim_norm_preserving();
        let report = map.verify(10, 0);
        assert!(!report.norm_ok);
        assert!((report.max_norm_deviation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_inverse_is_caught() {
        let map = NonlinearMap::global_phase(2, 0.5).replace_inverse(Arc::new(|v: &CVector| v.clone()));
        let report = map.verify(10, 0);
        assert!(report.norm_ok);
        assert!(!report.inverse_ok);
    }

    #[test]
    fn unitary_linear_map_gets_inverse() {
        let map = NonlinearMap::linear("sx", pauli::sigma_x());
        assert!(map.claims().invertible && map.claims().norm_preserving);
        assert!(map.verify(200, 1).passed());
        let composed = map.then(&map).unwrap();
        let v = pauli::plus().into_amplitudes();
        assert!((composed.apply(&v) - &v).norm() < 1e-15);
    }
}
