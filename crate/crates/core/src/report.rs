//! Serialization helpers shared by the report payloads: every rational is
//! emitted as an exact `"n/d"` string together with a decimal convenience
//! value, never as a lossy float alone.

use crate::puiseux::{ExpPair, PuiseuxPoly};
use crate::rat::{rat_string, rat_to_f64, ExtRat, Rat};
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

/// Exact-plus-decimal rendering of a rational.
#[derive(Clone, Debug, Serialize)]
pub struct RatJson {
    pub rational: String,
    pub decimal: f64,
}

impl From<&Rat> for RatJson {
    fn from(x: &Rat) -> Self {
        RatJson { rational: rat_string(x), decimal: rat_to_f64(x) }
    }
}

impl From<&ExtRat> for RatJson {
    fn from(x: &ExtRat) -> Self {
        match x {
            ExtRat::Finite(r) => RatJson::from(r),
            ExtRat::Infinity => RatJson { rational: "inf".into(), decimal: f64::INFINITY },
        }
    }
}

pub fn ser_rat<S: Serializer>(x: &Rat, s: S) -> Result<S::Ok, S::Error> {
    RatJson::from(x).serialize(s)
}

pub fn ser_ext_rat<S: Serializer>(x: &ExtRat, s: S) -> Result<S::Ok, S::Error> {
    RatJson::from(x).serialize(s)
}

impl Serialize for ExpPair {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("p", &RatJson::from(&self.p))?;
        map.serialize_entry("q", &self.q)?;
        map.end()
    }
}

#[derive(Serialize)]
struct TermJson {
    p: RatJson,
    q: u32,
    coeff: String,
    coeff_decimal: f64,
}

pub fn ser_poly<S: Serializer>(poly: &PuiseuxPoly, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(poly.num_terms()))?;
    for (e, c) in poly.terms() {
        seq.serialize_element(&TermJson {
            p: RatJson::from(&e.p),
            q: e.q,
            coeff: c.display_string(),
            coeff_decimal: c.to_f64(),
        })?;
    }
    seq.end()
}

pub fn ser_poly_opt<S: Serializer>(
    poly: &Option<PuiseuxPoly>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match poly {
        Some(p) => ser_poly(p, s),
        None => s.serialize_none(),
    }
}
