//! JSON envelopes shared by all reports.

use serde::Serialize;
use serde_json::{json, Value};

/// Version stamped into every serialized report.
pub const SCHEMA_VERSION: u32 = 1;

/// Wrap a serializable payload as `{"schema_version", "kind", "result"}`.
pub fn envelope<T: Serialize>(kind: &str, payload: &T) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "result": serde_json::to_value(payload).expect("report payloads serialize"),
    })
}

/// Serialize big numbers as decimal strings so JSON readers never round them.
pub mod decimal {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::fmt::Display;
    use std::str::FromStr;

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub mod decimal_vec {
    use serde::ser::SerializeSeq;
    use serde::Serializer;
    use std::fmt::Display;

    pub fn serialize<T: Display, S: Serializer>(v: &[T], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }
}

pub mod rational {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::bigmath::rat_string(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        crate::bigmath::parse_rat(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
    }
}
