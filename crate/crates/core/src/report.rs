//! Artifact serialization: versioned JSON, CSV tables and SVG heatmaps.

use serde::Serialize;

use crate::error::{FinslerError, Result};
use crate::schwarz::{FieldSample, SampleRow};

pub const SCHEMA: &str = "finslerium/1";

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    kind: &'a str,
    result: &'a T,
}

/// Pretty JSON wrapped as `{"schema", "kind", "result"}`.
pub fn to_json<T: Serialize>(kind: &str, result: &T) -> Result<String> {
    let env = Envelope {
        schema: SCHEMA,
        kind,
        result,
    };
    let mut s = serde_json::to_string_pretty(&env).map_err(|e| FinslerError::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// CSV with a header row from any flat serializable record type.
pub fn rows_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| FinslerError::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| FinslerError::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| FinslerError::Parse(e.to_string()))
}

pub fn field_csv(samples: &[FieldSample]) -> Result<String> {
    if samples.is_empty() {
        return Ok("re,im,value\n".into());
    }
    rows_csv(samples)
}

/// Ratio table keyed by the first chart coordinate.
pub fn ratio_field(rows: &[SampleRow]) -> Vec<FieldSample> {
    rows.iter()
        .map(|r| FieldSample {
            re: r.z[0].re,
            im: r.z[0].im,
            value: r.ratio,
        })
        .collect()
}

const COLD: [f64; 3] = [33.0, 102.0, 172.0];
const MID: [f64; 3] = [247.0, 247.0, 247.0];
const HOT: [f64; 3] = [178.0, 24.0, 43.0];

/// Diverging colour: blue below `mid`, white at `mid`, red above.
pub fn diverging_color(value: f64, lo: f64, mid: f64, hi: f64) -> String {
    let (t, end) = if value <= mid {
        let span = (mid - lo).max(f64::MIN_POSITIVE);
        (((mid - value) / span).clamp(0.0, 1.0), COLD)
    } else {
        let span = (hi - mid).max(f64::MIN_POSITIVE);
        (((value - mid) / span).clamp(0.0, 1.0), HOT)
    };
    let c: Vec<u8> = (0..3).map(|i| (MID[i] + t * (end[i] - MID[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Scatter heatmap of a planar field with `midpoint` at the palette centre.
pub fn heatmap_svg(samples: &[FieldSample], midpoint: f64, title: &str) -> String {
    let size = 480.0;
    let pad = 20.0;
    let extent = samples
        .iter()
        .map(|s| s.re.abs().max(s.im.abs()))
        .fold(1e-12, f64::max);
    let finite = samples.iter().map(|s| s.value).filter(|v| v.is_finite());
    let lo = finite.clone().fold(midpoint, f64::min);
    let hi = finite.fold(midpoint, f64::max);
    let scale = (size / 2.0 - pad) / extent;
    let dot = (size / (samples.len() as f64).sqrt().max(1.0) * 0.6).clamp(1.0, 6.0);
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{h}\" viewBox=\"0 0 {size} {h}\">\n",
        h = size + 30.0
    ));
    out.push_str(&format!(
        "<title>{}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n",
        escape(title)
    ));
    for s in samples {
        let x = size / 2.0 + s.re * scale;
        let y = size / 2.0 - s.im * scale;
        let fill = if s.value.is_finite() {
            diverging_color(s.value, lo, midpoint, hi)
        } else {
            "#000000".into()
        };
        out.push_str(&format!(
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{dot:.2}\" fill=\"{fill}\"/>\n"
        ));
    }
    out.push_str(&format!(
        "<text x=\"{pad}\" y=\"{ty}\" font-family=\"monospace\" font-size=\"12\">{} min {lo:.6e} mid {midpoint:.6e} max {hi:.6e}</text>\n",
        escape(title),
        ty = size + 20.0
    ));
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_and_csv() {
        let s = to_json("demo", &vec![1.0, 2.0]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        let rows = vec![FieldSample {
            re: 0.5,
            im: -0.25,
            value: 1.0,
        }];
        let c = field_csv(&rows).unwrap();
        assert!(c.starts_with("re,im,value\n0.5,-0.25,1.0"));
    }

    #[test]
    fn palette_midpoint() {
        assert_eq!(diverging_color(1.0, 0.0, 1.0, 2.0), "#f7f7f7");
        assert_eq!(diverging_color(0.0, 0.0, 1.0, 2.0), "#2166ac");
        assert_eq!(diverging_color(2.0, 0.0, 1.0, 2.0), "#b2182b");
        let svg = heatmap_svg(&[FieldSample { re: 0.0, im: 0.0, value: 1.0 }], 1.0, "u");
        assert!(svg.contains("<circle") && svg.ends_with("</svg>\n"));
    }
}
