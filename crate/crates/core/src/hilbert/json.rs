//! `{"dim": n, "re": [...], "im": [...]}` row-major encoding for operators
//! and states.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{CMatrix, CVector, DensityMatrix, HilbertError, Operator, StateVector, C64};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Wire {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Wire {
    fn complex(&self, expected_len: usize) -> Result<Vec<C64>, HilbertError> {
        if self.re.len() != expected_len || self.im.len() != expected_len {
            return Err(HilbertError::Malformed(format!(
                "expected {expected_len} real and imaginary parts, found {} and {}",
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| C64::new(r, i))
            .collect())
    }
}

impl Operator {
    pub fn from_wire_parts(dim: usize, re: Vec<f64>, im: Vec<f64>) -> Result<Self, HilbertError> {
        let wire = Wire { dim, re, im };
        let entries = wire.complex(dim * dim)?;
        Operator::certified(CMatrix::from_row_slice(dim, dim, &entries))
    }
}

impl StateVector {
    pub fn from_wire_parts(dim: usize, re: Vec<f64>, im: Vec<f64>) -> Result<Self, HilbertError> {
        let wire = Wire { dim, re, im };
        let entries = wire.complex(dim)?;
        StateVector::new(CVector::from_column_slice(&entries))
    }
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let n = self.dim();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let z = self.entry(r, c);
                re.push(z.re);
                im.push(z.im);
            }
        }
        Wire { dim: n, re, im }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        Operator::from_wire_parts(w.dim, w.re, w.im).map_err(D::Error::custom)
    }
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let a = self.amplitudes();
        Wire {
            dim: a.len(),
            re: a.iter().map(|z| z.re).collect(),
            im: a.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        StateVector::from_wire_parts(w.dim, w.re, w.im).map_err(D::Error::custom)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.operator().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let op = Operator::deserialize(d)?;
        DensityMatrix::new(op).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use proptest::prelude::*;

    #[test]
    fn schema_is_row_major() {
        let op = crate::hilbert::pauli::sigma_y();
        let json = serde_json::to_value(&op).unwrap();
        assert_eq!(json["dim"], 2);
        assert_eq!(json["re"], serde_json::json!([0.0, 0.0, 0.0, 0.0]));
        assert_eq!(json["im"], serde_json::json!([0.0, -1.0, 1.0, 0.0]));
    }

    #[test]
    fn rejects_wrong_lengths() {
        let bad = r#"{"dim":2,"re":[1.0,0.0,0.0],"im":[0.0,0.0,0.0,0.0]}"#;
        assert!(serde_json::from_str::<Operator>(bad).is_err());
        let extra = r#"{"dim":1,"re":[1.0],"im":[0.0],"x":1}"#;
        assert!(serde_json::from_str::<StateVector>(extra).is_err());
    }

    proptest! {
        #[test]
        fn operator_round_trip_is_exact(seed in any::<u64>(), dim in 1usize..6) {
            let mut rng = sampling::rng(seed);
            let op = sampling::random_hermitian(&mut rng, dim);
            let text = serde_json::to_string(&op).unwrap();
            let back: Operator = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back.matrix(), op.matrix());
        }

        #[test]
        fn state_round_trip_is_exact(seed in any::<u64>(), dim in 1usize..9) {
            let mut rng = sampling::rng(seed);
            let psi = sampling::random_unit_vector(&mut rng, dim);
            let text = serde_json::to_string(&psi).unwrap();
            let back: StateVector = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back.amplitudes(), psi.amplitudes());
        }
    }
}
