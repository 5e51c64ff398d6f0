use std::io::Write;

use ddrec::Rational;
use serde_json::Value;

use crate::{Failure, Format, Output};

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn real(x: f64) -> Value {
    serde_json::Number::from_f64(round12(x)).map_or(Value::Null, Value::Number)
}

pub fn real_csv(x: f64) -> String {
    let r = round12(x);
    if !r.is_finite() {
        String::new()
    } else if r != 0.0 && !(1e-4..1e15).contains(&r.abs()) {
        format!("{r:e}")
    } else {
        r.to_string()
    }
}

pub fn exact(r: &Rational) -> String {
    r.to_string()
}

/// Rendered output: a JSON document and the equivalent CSV rows (header
/// first; rows may be ragged).
pub struct Rendered {
    pub json: Value,
    pub csv: Vec<Vec<String>>,
}

pub fn emit(out: &Output, rendered: Rendered) -> Result<(), Failure> {
    let text = match out.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rendered.json)
                .map_err(|e| Failure::usage(e.to_string()))?;
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
            for row in &rendered.csv {
                w.write_record(row).map_err(|e| Failure::usage(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Failure::usage(e.to_string()))?
        }
    };
    let io_failure = |e: std::io::Error| Failure::usage(format!("cannot write output: {e}"));
    match &out.out {
        Some(path) => std::fs::write(path, text).map_err(io_failure),
        None => std::io::stdout().lock().write_all(&text).map_err(io_failure),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(round12(1e6 / 7.0), 142857.142857);
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round12(2.5e-20), 2.5e-20);
        assert_eq!(real(f64::NAN), Value::Null);
        assert_eq!(real_csv(f64::INFINITY), "");
        assert_eq!(real_csv(7.105427357601e-15), "7.1054273576e-15");
        assert_eq!(real_csv(-0.25), "-0.25");
    }
}
