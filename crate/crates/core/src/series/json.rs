//! JSON form: `{"vars":[..],"trunc":[..],"mode":..,"coeffs":[[[exps..],[re,im]],..]}`.
//!
//! Only nonzero coefficients are listed; exact rationals are `"p/q"` strings.

use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{SeriesMeta, TruncatedSeries, Var};
use crate::coeff::{Coeff, Mode};

impl Serialize for TruncatedSeries {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let has_meta = self.meta != SeriesMeta::default();
        let mut st = s.serialize_struct("TruncatedSeries", if has_meta { 5 } else { 4 })?;
        st.serialize_field("vars", &self.vars)?;
        st.serialize_field("trunc", &self.trunc)?;
        st.serialize_field("mode", &self.mode)?;
        let terms: Vec<(Vec<usize>, &Coeff)> = self.terms().collect();
        st.serialize_field("coeffs", &terms)?;
        if has_meta {
            st.serialize_field("meta", &self.meta)?;
        }
        st.end()
    }
}

#[derive(Deserialize)]
struct Raw {
    vars: Vec<Var>,
    trunc: Vec<usize>,
    mode: Mode,
    coeffs: Vec<(Vec<usize>, Coeff)>,
    #[serde(default)]
    meta: SeriesMeta,
}

impl<'de> Deserialize<'de> for TruncatedSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Raw::deserialize(d)?;
        if raw.vars.len() != raw.trunc.len() {
            return Err(D::Error::custom("vars and trunc must have equal length"));
        }
        let mut s = TruncatedSeries::zeros_like_vars(&raw.vars, &raw.trunc, raw.mode);
        for (e, c) in raw.coeffs {
            if e.len() != raw.vars.len() || e.iter().zip(&raw.trunc).any(|(a, b)| a > b) {
                return Err(D::Error::custom(format!("exponent {e:?} outside truncation {:?}", raw.trunc)));
            }
            s.set(&e, c.to_mode(raw.mode));
        }
        s.meta = raw.meta;
        Ok(s)
    }
}
