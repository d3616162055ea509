//! Deterministic JSON and CSV artifacts.
//!
//! Floats are written as C's `%.17g`, which round-trips every `f64`.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, Serializer};

use crate::error::Result;
use crate::resum::GridSample;

/// `%.17g` of a finite float.
pub fn fmt_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let e: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&e) {
        let mant = strip_zeros(mant);
        let sign = if e < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", e.abs());
    }
    let decimals = (16 - e).max(0) as usize;
    strip_zeros(&format!("{x:.decimals$}")).to_string()
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

struct G17;

impl Formatter for G17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_g17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        CompactFormatter.begin_array(w)
    }
}

/// Compact JSON with `%.17g` floats; non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, G17);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON output is UTF-8"))
}

pub const CSV_HEADER: &str = "t_re,t_im,x_re,x_im,u_re,u_im,residual";

/// Grid samples as CSV with [`CSV_HEADER`].
pub fn grid_csv(samples: &[GridSample]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in samples {
        let row = [s.t.re, s.t.im, s.x.re, s.x.im, s.u.re, s.u.im, s.residual].map(fmt_g17).join(",");
        out.push_str(&row);
        out.push('\n');
    }
    out
}

/// Writes `contents` to `path` in one call.
pub fn write_artifact(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn g17_matches_c() {
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1e20, "1e+20"),
            (1.5e-7, "1.4999999999999999e-07"),
            (123456.0, "123456"),
            (0.0001, "0.0001"),
            (std::f64::consts::PI, "3.1415926535897931"),
            (1e16, "10000000000000000"),
            (1e17, "1e+17"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g17(x), want);
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_is_deterministic() {
        #[derive(Serialize)]
        struct R {
            directions_rad: Vec<f64>,
            v: f64,
            bad: f64,
        }
        let r = R { directions_rad: vec![], v: 0.1, bad: f64::NAN };
        let a = to_json(&r).unwrap();
        assert_eq!(a, to_json(&r).unwrap());
        assert_eq!(a, "{\"directions_rad\":[],\"v\":0.10000000000000001,\"bad\":null}\n");
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert!(v["directions_rad"].as_array().unwrap().is_empty());
    }

    #[test]
    fn csv_header_and_rows() {
        let s = GridSample {
            t: Complex64::new(1.0, 0.0),
            x: Complex64::new(-0.1, 0.0),
            u: Complex64::new(0.5, -0.25),
            residual: 1e-12,
        };
        let csv = grid_csv(&[s]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("1,0,-0.10000000000000001,0,0.5,-0.25,9.9999999999999998e-13"));
    }
}
