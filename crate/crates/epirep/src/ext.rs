//! Extended-real helpers.
//!
//! `+∞` is stored as `f64::INFINITY`; anything above [`INF_THRESHOLD`] is
//! treated as infinite so that sums like `INF + 1.0` stay infinite.

pub const INF: f64 = f64::INFINITY;
pub const INF_THRESHOLD: f64 = 1e300;

#[inline]
pub fn is_inf(v: f64) -> bool {
    v > INF_THRESHOLD
}

#[inline]
pub fn is_finite(v: f64) -> bool {
    v.is_finite() && v.abs() <= INF_THRESHOLD
}

/// Adds two extended reals, keeping `+∞` absorbing.
#[inline]
pub fn add(a: f64, b: f64) -> f64 {
    if is_inf(a) || is_inf(b) {
        INF
    } else {
        a + b
    }
}

/// Text form used in CSV and JSON output.
pub fn fmt(v: f64) -> String {
    if is_inf(v) {
        "inf".to_string()
    } else if v < -INF_THRESHOLD {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

pub fn parse(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "+inf" => Some(INF),
        "-inf" => Some(-INF),
        other => other.parse().ok(),
    }
}

pub fn to_json(v: f64) -> serde_json::Value {
    if is_finite(v) {
        serde_json::json!(v)
    } else {
        serde_json::Value::String(fmt(v))
    }
}

/// Serde adapter writing infinities as the strings `"inf"` / `"-inf"`.
pub mod serde_ext {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if super::is_finite(*v) {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&super::fmt(*v))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => super::parse(&t).ok_or_else(|| de::Error::custom(format!("bad number {t}"))),
        }
    }
}
