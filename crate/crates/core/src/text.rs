//! Decimal-string encodings for values that must survive JSON round trips.

/// 17 significant digits, enough to round-trip any binary64 value.
pub fn sci(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn parse_sci(s: &str) -> Option<f64> {
    match s {
        "NaN" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// `#[serde(with = "crate::text::f64_string")]`
pub mod f64_string {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::sci(*x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_sci(&s).ok_or_else(|| de::Error::custom(format!("bad number `{s}`")))
    }
}

/// `#[serde(with = "crate::text::opt_f64_string")]`
pub mod opt_f64_string {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_str(&super::sci(*v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<String>::deserialize(d)? {
            Some(s) => super::parse_sci(&s).map(Some).ok_or_else(|| de::Error::custom(format!("bad number `{s}`"))),
            None => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [1.0206e-37, 0.1 + 0.2, -3.0, 0.0, f64::MAX, 5e-324, f64::INFINITY] {
            assert_eq!(parse_sci(&sci(x)), Some(x));
        }
        assert!(parse_sci(&sci(f64::NAN)).unwrap().is_nan());
    }
}
