//! Map and report serialization: CSV, binary PGM and JSON.

use std::io::{Read, Write};

use ndarray::Array2;

use crate::distortion::DldReport;
use crate::error::{Error, Result};
use crate::loudness::DirectionalLoudnessMap;

/// Significant digits used for every number written to CSV.
pub const CSV_DIGITS: usize = 12;

/// Formats `x` with [`CSV_DIGITS`] significant digits, trailing zeros
/// removed, switching to exponent notation outside `[1e-5, 1e12)`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", CSV_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..CSV_DIGITS as i32).contains(&exp) {
        let decimals = (CSV_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes the map as CSV: a header of direction values, then one row per
/// frame.
pub fn write_map_csv<W: Write>(out: W, map: &DirectionalLoudnessMap) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::MapFormat(e.to_string());
    w.write_record(map.directions().iter().map(|d| format_sig(*d)))
        .map_err(io)?;
    for row in map.values().rows() {
        w.write_record(row.iter().map(|v| format_sig(*v)))
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::MapFormat(e.to_string()))
}

/// Reads a map CSV back into its direction grid and value matrix.
pub fn read_map_csv<R: Read>(input: R) -> Result<(Vec<f64>, Array2<f64>)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::MapFormat(format!("not a number: {s:?}")))
    };
    let directions = r
        .headers()
        .map_err(|e| Error::MapFormat(e.to_string()))?
        .iter()
        .map(parse)
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::new();
    let mut frames = 0;
    for record in r.records() {
        let record = record.map_err(|e| Error::MapFormat(e.to_string()))?;
        for field in record.iter() {
            values.push(parse(field)?);
        }
        frames += 1;
    }
    let values = Array2::from_shape_vec((frames, directions.len()), values)
        .map_err(|e| Error::MapFormat(e.to_string()))?;
    Ok((directions, values))
}

/// Writes the map as an 8-bit binary PGM scaled to the map's own maximum.
///
/// Time runs left to right, one pixel column per frame. Rows are directions
/// with +1 (right) at the top and -1 (left) at the bottom; brighter is louder.
pub fn write_pgm<W: Write>(mut out: W, map: &DirectionalLoudnessMap) -> std::io::Result<()> {
    let (frames, directions) = map.values().dim();
    let max = map.max();
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    write!(out, "P5\n{frames} {directions}\n255\n")?;
    let mut pixels = Vec::with_capacity(frames * directions);
    for j in (0..directions).rev() {
        pixels.extend(
            map.values()
                .column(j)
                .iter()
                .map(|v| (v * scale).round().clamp(0.0, 255.0) as u8),
        );
    }
    out.write_all(&pixels)
}

/// Parses a binary PGM as written by [`write_pgm`]: (width, height, pixels).
pub fn read_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let bad = |what: &str| Error::MapFormat(format!("bad PGM: {what}"));
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(
            std::str::from_utf8(&bytes[start..pos])
                .map_err(|_| bad("header"))?
                .to_string(),
        );
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(bad("expected 8-bit P5"));
    }
    let width: usize = fields[1].parse().map_err(|_| bad("width"))?;
    let height: usize = fields[2].parse().map_err(|_| bad("height"))?;
    let pixels = bytes.get(pos + 1..).ok_or_else(|| bad("missing raster"))?;
    if pixels.len() != width * height {
        return Err(bad("raster size"));
    }
    Ok((width, height, pixels.to_vec()))
}

/// The report as a single-line JSON object.
pub fn report_json(report: &DldReport) -> String {
    serde_json::to_string(report).expect("report is always serializable")
}
