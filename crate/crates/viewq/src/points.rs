//! Point clouds as whitespace-separated XYZ text or a compact binary form:
//! a little-endian u64 point count followed by x, y, z as little-endian f32.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use viewq_core::Vec3;

use crate::error::{Error, Result};

pub fn write_xyz(points: &[Vec3], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(Error::io(path))?;
    let mut w = BufWriter::new(file);
    for p in points {
        writeln!(w, "{:?} {:?} {:?}", p.x, p.y, p.z).map_err(Error::io(path))?;
    }
    w.flush().map_err(Error::io(path))
}

pub fn read_xyz(path: &Path) -> Result<Vec<Vec3>> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let c: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .ok()
            .filter(|c: &Vec<f64>| c.len() >= 3)
            .ok_or_else(|| Error::Format {
                path: path.to_path_buf(),
                line: i + 1,
                message: "expected three coordinates".into(),
            })?;
        points.push(Vec3::new(c[0], c[1], c[2]));
    }
    Ok(points)
}

/// Encodes points in the binary layout; coordinates are rounded to f32.
pub fn encode_binary(points: &[Vec3]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 12 * points.len());
    out.extend_from_slice(&(points.len() as u64).to_le_bytes());
    for p in points {
        for c in [p.x, p.y, p.z] {
            out.extend_from_slice(&(c as f32).to_le_bytes());
        }
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> std::result::Result<Vec<Vec3>, String> {
    let (head, body) = bytes
        .split_first_chunk::<8>()
        .ok_or("truncated count header")?;
    let n = u64::from_le_bytes(*head) as usize;
    if body.len() != n.checked_mul(12).ok_or("point count overflows")? {
        return Err(format!("header says {n} points, payload has {} bytes", body.len()));
    }
    Ok(body
        .chunks_exact(12)
        .map(|c| {
            let f = |k: usize| f32::from_le_bytes(c[4 * k..4 * k + 4].try_into().unwrap()) as f64;
            Vec3::new(f(0), f(1), f(2))
        })
        .collect())
}

pub fn write_binary(points: &[Vec3], path: &Path) -> Result<()> {
    fs::write(path, encode_binary(points)).map_err(Error::io(path))
}

pub fn read_binary(path: &Path) -> Result<Vec<Vec3>> {
    let bytes = fs::read(path).map_err(Error::io(path))?;
    decode_binary(&bytes).map_err(|message| Error::Format {
        path: path.to_path_buf(),
        line: 0,
        message,
    })
}
