//! Text output helpers. Every float leaves the crate with 17 significant
//! digits so that written results parse back to the identical `f64`.

use std::io::Write;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Formats a float with 17 significant digits in scientific notation.
/// Non-finite values are written as `inf`, `-inf` or `nan`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// A float that serializes as a 17-significant-digit JSON number, or `null`
/// when it is not finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(fmt_f64(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

pub fn sig17<S: Serializer>(x: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    Sig17(*x).serialize(serializer)
}

pub fn sig17_opt<S: Serializer>(x: &Option<f64>, serializer: S) -> Result<S::Ok, S::Error> {
    x.map(Sig17).serialize(serializer)
}

pub fn sig17_vec<S: Serializer>(xs: &[f64], serializer: S) -> Result<S::Ok, S::Error> {
    serializer.collect_seq(xs.iter().copied().map(Sig17))
}

/// Writes equal-length float columns as CSV with a header row.
pub fn write_columns<W: Write>(
    mut out: W,
    headers: &[&str],
    columns: &[&[f64]],
) -> std::io::Result<()> {
    assert_eq!(headers.len(), columns.len());
    let rows = columns.first().map_or(0, |c| c.len());
    assert!(columns.iter().all(|c| c.len() == rows));
    writeln!(out, "{}", headers.join(","))?;
    for i in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| fmt_f64(c[i])).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn json_numbers() {
        #[derive(Serialize)]
        struct Row {
            #[serde(serialize_with = "sig17")]
            a: f64,
            #[serde(serialize_with = "sig17")]
            b: f64,
            #[serde(serialize_with = "sig17_vec")]
            c: Vec<f64>,
        }
        let text = serde_json::to_string(&Row {
            a: 0.1,
            b: f64::NEG_INFINITY,
            c: vec![1.0, -2.5],
        })
        .unwrap();
        assert_eq!(
            text,
            r#"{"a":1.0000000000000001e-1,"b":null,"c":[1.0000000000000000e0,-2.5000000000000000e0]}"#
        );
    }

    proptest! {
        #[test]
        fn round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let back: f64 = fmt_f64(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }

        #[test]
        fn json_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::ZERO) {
            let text = serde_json::to_string(&Sig17(x)).unwrap();
            let back: f64 = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
