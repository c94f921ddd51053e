//! Serde helpers for extended reals: `-inf`/`inf` are written as strings
//! because JSON has no infinities.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Ext {
    Num(f64),
    Text(String),
}

fn to_ext(x: f64) -> Ext {
    if x.is_finite() {
        Ext::Num(x)
    } else if x == f64::NEG_INFINITY {
        Ext::Text("-inf".into())
    } else if x == f64::INFINITY {
        Ext::Text("inf".into())
    } else {
        Ext::Text("nan".into())
    }
}

fn from_ext<E: serde::de::Error>(e: Ext) -> Result<f64, E> {
    match e {
        Ext::Num(x) => Ok(x),
        Ext::Text(s) => match s.as_str() {
            "-inf" | "mandatory" => Ok(f64::NEG_INFINITY),
            "inf" => Ok(f64::INFINITY),
            "nan" => Ok(f64::NAN),
            other => crate::distributions::parse_exact_number(other).map_err(E::custom),
        },
    }
}

pub(crate) fn format(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else {
        "nan".into()
    }
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| to_ext(*x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Ext>::deserialize(d)?.into_iter().map(from_ext).collect()
    }
}

pub mod scalar {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_ext(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_ext(Ext::deserialize(d)?)
    }
}
