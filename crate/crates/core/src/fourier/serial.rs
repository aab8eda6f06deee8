//! JSON form: `{"d": int, "coeffs": [{"k": [..], "re": .., "im": ..}, ..]}`,
//! coefficients sorted lexicographically by `k`.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{FourierSeries, LatticeVector};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesRepr {
    d: usize,
    coeffs: Vec<CoeffRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffRepr {
    k: Vec<i64>,
    re: f64,
    im: f64,
}

impl Serialize for FourierSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SeriesRepr {
            d: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, a)| CoeffRepr {
                    k: k.components().to_vec(),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FourierSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = SeriesRepr::deserialize(deserializer)?;
        if repr.d == 0 || repr.coeffs.iter().any(|c| c.k.len() != repr.d) {
            return Err(D::Error::custom("every k must have d components"));
        }
        FourierSeries::from_terms(
            repr.d,
            repr.coeffs
                .into_iter()
                .map(|c| (LatticeVector::new(c.k), Complex64::new(c.re, c.im))),
        )
        .map_err(D::Error::custom)
    }
}
