//! File formats.
//!
//! * Signals: CSV, one value per line, no header.
//! * Images: binary PGM (`P5`, 8-bit), scaled to `[0, 1]` on read, plus a
//!   lossless raw sidecar of little-endian `f64` in row-major order.
//! * Reports: pretty-printed JSON.

use std::fs;
use std::path::{Path, PathBuf};

use fractree::{Field, Image};
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn read_csv(path: &Path) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let values = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|e| CliError::format(path, format!("line {}: {e}", i + 1)))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(CliError::format(path, "no values"));
    }
    Ok(values)
}

/// Shortest round-trip representation, so re-reading is lossless.
pub fn write_csv(path: &Path, values: &[f64]) -> CliResult<()> {
    let mut out = String::with_capacity(values.len() * 20);
    for v in values {
        out.push_str(&format!("{v:?}\n"));
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

fn pgm_header_tokens(bytes: &[u8], path: &Path) -> CliResult<([usize; 3], usize)> {
    let mut pos = 0;
    let next_token = |pos: &mut usize| -> CliResult<String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(CliError::format(path, "truncated PGM header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    if next_token(&mut pos)? != "P5" {
        return Err(CliError::format(path, "only binary PGM (P5) is supported"));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        let tok = next_token(&mut pos)?;
        *d = tok
            .parse()
            .map_err(|_| CliError::format(path, format!("bad PGM header field {tok:?}")))?;
    }
    // Exactly one whitespace byte separates the header from the raster.
    Ok((dims, pos + 1))
}

/// Reads an 8-bit P5 image, scaling samples to `[0, 1]` by the maxval.
pub fn read_pgm(path: &Path) -> CliResult<Image> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let ([cols, rows, maxval], start) = pgm_header_tokens(&bytes, path)?;
    if maxval == 0 || maxval > 255 {
        return Err(CliError::format(path, format!("unsupported maxval {maxval} (8-bit only)")));
    }
    let raster = bytes
        .get(start..start + rows * cols)
        .ok_or_else(|| CliError::format(path, "raster shorter than the header promises"))?;
    let data = raster.iter().map(|&b| b as f64 / maxval as f64).collect();
    Ok(Image::new(rows, cols, data)?)
}

/// Writes `(v - lo) / (hi - lo)` quantised to 8 bits, clamped.
pub fn write_pgm(path: &Path, image: &Image, lo: f64, hi: f64) -> CliResult<()> {
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = format!("P5\n{} {}\n255\n", image.cols(), image.rows()).into_bytes();
    out.extend(
        image
            .data()
            .iter()
            .map(|v| (((v - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

pub fn write_raw_f64(path: &Path, values: &[f64]) -> CliResult<()> {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn read_raw_f64(path: &Path, rows: usize, cols: usize) -> CliResult<Image> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    if bytes.len() != rows * cols * 8 {
        return Err(CliError::format(
            path,
            format!("{} bytes, expected {rows}x{cols} f64 values", bytes.len()),
        ));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok(Image::new(rows, cols, data)?)
}

/// Loads a signal (`.csv`), an image (`.pgm`), or a raw image (`.f64`,
/// needs `shape`).
pub fn read_field(path: &Path, shape: Option<(usize, usize)>) -> CliResult<Field> {
    match extension(path).as_deref() {
        Some("csv") | Some("txt") => Ok(Field::Signal(read_csv(path)?)),
        Some("pgm") => Ok(Field::Image(read_pgm(path)?)),
        Some("f64") | Some("raw") => {
            let (rows, cols) = shape.ok_or_else(|| {
                CliError::Param(format!("{} is raw; pass --shape ROWSxCOLS", path.display()))
            })?;
            Ok(Field::Image(read_raw_f64(path, rows, cols)?))
        }
        _ => Err(CliError::Param(format!(
            "{}: unknown input format (expected .csv, .pgm or .f64)",
            path.display()
        ))),
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase())
}

/// Paths of the files written for one field.
pub fn write_field(dir: &Path, stem: &str, field: &Field) -> CliResult<Vec<PathBuf>> {
    match field {
        Field::Signal(x) => {
            let path = dir.join(format!("{stem}.csv"));
            write_csv(&path, x)?;
            Ok(vec![path])
        }
        Field::Image(im) => {
            let pgm = dir.join(format!("{stem}.pgm"));
            let raw = dir.join(format!("{stem}.f64"));
            write_pgm(&pgm, im, 0.0, 1.0)?;
            write_raw_f64(&raw, im.data())?;
            Ok(vec![pgm, raw])
        }
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// JSON has no infinities: they are written as the strings `"inf"` / `"-inf"`.
pub fn json_number(v: f64) -> serde_json::Value {
    if v.is_nan() {
        serde_json::Value::Null
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        v.into()
    }
}
