//! Viewpoint-quality records, their CSV sidecar and sphere-map images.
//!
//! A record is a JSON document with a fixed key order:
//!
//! ```text
//! { "format": "viewq-record", "engine_version", "model_id",
//!   "sphere": { "kind": "fibonacci", "size" },
//!   "camera": { "width", "height", "fov_degrees", "distance_rule", "up_rule" },
//!   "measures": [ { "name", "orientation", "best_index", "worst_index",
//!                   "raw": [number | null], "normalized": [number] } ×4 ] }
//! ```
//!
//! Measures appear in the order VE, VR, VKL, VMI. Floats are written with 17
//! significant digits so they read back bit-exactly; `null` marks a view
//! excluded from a measure (nothing rendered).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use viewq_core::measures::{Measure, ModelEvaluation, Orientation, VQMap};
use viewq_core::raster::{CameraConfig, Rasterizer, NO_FACE};
use viewq_core::sampling::{fibonacci_sphere, ViewSphere};
use viewq_core::Vec3;

use crate::error::{Error, Result};

pub const RECORD_FORMAT: &str = "viewq-record";
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DISTANCE_RULE: &str = "eye = bbox_center + 0.5 * bbox_diagonal * view_direction";
pub const UP_RULE: &str = "+y, or +x when |view_direction . y| > 0.99";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereInfo {
    pub kind: String,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraProtocol {
    pub width: u32,
    pub height: u32,
    pub fov_degrees: f64,
    pub distance_rule: String,
    pub up_rule: String,
}

impl CameraProtocol {
    pub fn from_config(config: &CameraConfig) -> Self {
        CameraProtocol {
            width: config.width,
            height: config.height,
            fov_degrees: config.vertical_fov.to_degrees(),
            distance_rule: DISTANCE_RULE.into(),
            up_rule: UP_RULE.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureValues {
    pub name: String,
    /// "max" or "min": which end of the raw scale is best.
    pub orientation: String,
    pub best_index: usize,
    pub worst_index: usize,
    pub raw: Vec<Option<f64>>,
    pub normalized: Vec<f64>,
}

fn orientation_name(o: Orientation) -> &'static str {
    match o {
        Orientation::MaxIsBest => "max",
        Orientation::MinIsBest => "min",
    }
}

impl MeasureValues {
    pub fn from_map(map: &VQMap) -> Self {
        MeasureValues {
            name: map.measure.map_or("custom", Measure::name).into(),
            orientation: orientation_name(map.orientation).into(),
            best_index: map.best_index,
            worst_index: map.worst_index,
            raw: map.raw.clone(),
            normalized: map.normalized.clone(),
        }
    }

    pub fn to_map(&self) -> VQMap {
        let measure = Measure::from_name(&self.name);
        VQMap {
            measure,
            orientation: if self.orientation == "min" {
                Orientation::MinIsBest
            } else {
                Orientation::MaxIsBest
            },
            raw: self.raw.clone(),
            normalized: self.normalized.clone(),
            best_index: self.best_index,
            worst_index: self.worst_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub format: String,
    pub engine_version: String,
    pub model_id: String,
    pub sphere: SphereInfo,
    pub camera: CameraProtocol,
    pub measures: Vec<MeasureValues>,
}

fn invalid(key: impl Into<String>, message: impl Into<String>) -> Error {
    Error::InvalidRecord {
        key: key.into(),
        message: message.into(),
    }
}

impl ModelRecord {
    pub fn from_evaluation(model_id: &str, sphere_size: usize, camera: &CameraConfig, eval: &ModelEvaluation) -> Self {
        ModelRecord {
            format: RECORD_FORMAT.into(),
            engine_version: ENGINE_VERSION.into(),
            model_id: model_id.into(),
            sphere: SphereInfo {
                kind: "fibonacci".into(),
                size: sphere_size,
            },
            camera: CameraProtocol::from_config(camera),
            measures: eval.maps.iter().map(MeasureValues::from_map).collect(),
        }
    }

    pub fn measure(&self, measure: Measure) -> Option<&MeasureValues> {
        self.measures.iter().find(|m| m.name == measure.name())
    }

    /// Regenerates the view directions the record was sampled on.
    pub fn view_sphere(&self) -> Result<ViewSphere> {
        Ok(fibonacci_sphere(self.sphere.size)?)
    }

    /// Checks list lengths and the normalized-map contract.
    pub fn validate(&self) -> Result<()> {
        if self.format != RECORD_FORMAT {
            return Err(invalid("format", format!("expected `{RECORD_FORMAT}`")));
        }
        if self.sphere.kind != "fibonacci" {
            return Err(invalid("sphere.kind", "only `fibonacci` spheres are supported"));
        }
        let n = self.sphere.size;
        if n == 0 {
            return Err(invalid("sphere.size", "must be positive"));
        }
        let names: Vec<&str> = self.measures.iter().map(|m| m.name.as_str()).collect();
        let expected: Vec<&str> = Measure::ALL.iter().map(|m| m.name()).collect();
        if names != expected {
            return Err(invalid("measures", format!("expected {expected:?}, found {names:?}")));
        }
        for (m, measure) in self.measures.iter().zip(Measure::ALL) {
            let key = |field: &str| format!("measures[{}].{field}", m.name);
            if m.orientation != orientation_name(measure.orientation()) {
                return Err(invalid(key("orientation"), "does not match the measure"));
            }
            if m.raw.len() != n {
                return Err(invalid(key("raw"), format!("length {} != sphere size {n}", m.raw.len())));
            }
            if m.normalized.len() != n {
                return Err(invalid(
                    key("normalized"),
                    format!("length {} != sphere size {n}", m.normalized.len()),
                ));
            }
            if m.raw.iter().flatten().any(|r| !r.is_finite()) {
                return Err(invalid(key("raw"), "non-finite value"));
            }
            if m.normalized.iter().any(|q| !(0.0..=1.0).contains(q)) {
                return Err(invalid(key("normalized"), "value outside [0, 1]"));
            }
            if m.raw.iter().zip(&m.normalized).any(|(r, &q)| r.is_none() && q != 0.0) {
                return Err(invalid(key("normalized"), "excluded views must hold 0"));
            }
            // a constant map is all ones, so its worst view also holds 1
            let constant = m.normalized.iter().zip(&m.raw).all(|(&q, r)| r.is_none() || q == 1.0);
            for (field, i, q) in [("best_index", m.best_index, 1.0), ("worst_index", m.worst_index, 0.0)] {
                if i >= n || m.raw[i].is_none() {
                    return Err(invalid(key(field), "must index an included view"));
                }
                if m.normalized[i] != q && !constant {
                    return Err(invalid(key(field), format!("normalized value there is not {q}")));
                }
            }
        }
        Ok(())
    }
}

/// JSON formatter that writes every float with 17 significant digits.
struct RoundTripFloats;

impl serde_json::ser::Formatter for RoundTripFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn record_to_json(record: &ModelRecord) -> Result<String> {
    record.validate()?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, RoundTripFloats);
    record
        .serialize(&mut ser)
        .expect("records serialize to an in-memory buffer");
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// Parses and validates a record. `path` is only used in messages.
pub fn record_from_json(text: &str, path: &Path) -> Result<ModelRecord> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let record: ModelRecord = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        key: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    if record.engine_version != ENGINE_VERSION {
        log::warn!(
            "{}: written by engine version {}, reading with {}",
            path.display(),
            record.engine_version,
            ENGINE_VERSION
        );
    }
    record.validate().map_err(|e| match e {
        Error::InvalidRecord { key, message } => Error::Schema {
            path: path.to_path_buf(),
            key,
            message,
        },
        other => other,
    })?;
    Ok(record)
}

/// The CSV written next to a record at `path`.
pub fn csv_sibling(path: &Path) -> PathBuf {
    path.with_extension("csv")
}

/// Writes the JSON record to `path` and its CSV sidecar next to it. The
/// record is validated before anything touches the disk.
pub fn write_record(record: &ModelRecord, path: &Path) -> Result<()> {
    let json = record_to_json(record)?;
    let csv = record_to_csv(record)?;
    fs::write(path, json).map_err(Error::io(path))?;
    let sibling = csv_sibling(path);
    fs::write(&sibling, csv).map_err(Error::io(&sibling))
}

pub fn read_record(path: &Path) -> Result<ModelRecord> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    record_from_json(&text, path)
}

/// One CSV line: a view and its four raw and normalized qualities, in
/// [`Measure::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewRow {
    pub index: usize,
    pub direction: Vec3,
    pub raw: [Option<f64>; 4],
    pub normalized: [f64; 4],
}

pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = ["index", "x", "y", "z"].map(String::from).to_vec();
    h.extend(Measure::ALL.iter().map(|m| format!("{}_raw", m.name())));
    h.extend(Measure::ALL.iter().map(|m| format!("{}_norm", m.name())));
    h
}

pub fn record_rows(record: &ModelRecord) -> Result<Vec<ViewRow>> {
    record.validate()?;
    let sphere = record.view_sphere()?;
    Ok((0..record.sphere.size)
        .map(|i| ViewRow {
            index: i,
            direction: sphere.get(i),
            raw: core::array::from_fn(|m| record.measures[m].raw[i]),
            normalized: core::array::from_fn(|m| record.measures[m].normalized[i]),
        })
        .collect())
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn record_to_csv(record: &ModelRecord) -> Result<String> {
    let rows = record_rows(record)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| invalid("csv", e.to_string());
    w.write_record(csv_header()).map_err(csv_err)?;
    for row in &rows {
        let mut fields = vec![row.index.to_string()];
        fields.extend([row.direction.x, row.direction.y, row.direction.z].map(fmt_float));
        fields.extend(row.raw.iter().map(|r| r.map(fmt_float).unwrap_or_default()));
        fields.extend(row.normalized.iter().map(|&q| fmt_float(q)));
        w.write_record(&fields).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| invalid("csv", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV fields are ASCII"))
}

pub fn read_csv(path: &Path) -> Result<Vec<ViewRow>> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    parse_csv(&text, path)
}

/// Parses the sidecar CSV. `path` is only used in messages.
pub fn parse_csv(text: &str, path: &Path) -> Result<Vec<ViewRow>> {
    let format_err = |line: usize, message: String| Error::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| format_err(1, e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    if header != csv_header() {
        return Err(format_err(1, format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| format_err(line, e.to_string()))?;
        let float = |k: usize| -> Result<f64> {
            rec[k]
                .parse()
                .map_err(|_| format_err(line, format!("column `{}`: bad number `{}`", csv_header()[k], &rec[k])))
        };
        let index = rec[0]
            .parse()
            .map_err(|_| format_err(line, format!("bad index `{}`", &rec[0])))?;
        let mut raw = [None; 4];
        for (m, r) in raw.iter_mut().enumerate() {
            if !rec[4 + m].is_empty() {
                *r = Some(float(4 + m)?);
            }
        }
        let mut normalized = [0.0; 4];
        for (m, q) in normalized.iter_mut().enumerate() {
            *q = float(8 + m)?;
        }
        rows.push(ViewRow {
            index,
            direction: Vec3::new(float(1)?, float(2)?, float(3)?),
            raw,
            normalized,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Projection {
    /// Latitude clamped to ±85°; the image is square.
    #[default]
    Mercator,
    /// Plate carrée; the image is twice as wide as high.
    Equirectangular,
}

impl std::str::FromStr for Projection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mercator" => Ok(Projection::Mercator),
            "equirectangular" => Ok(Projection::Equirectangular),
            other => Err(format!("unknown projection `{other}`")),
        }
    }
}

const MERCATOR_LIMIT_DEG: f64 = 85.0;

/// A grayscale raster of normalized qualities, row 0 at the top (north, +z).
#[derive(Debug, Clone, PartialEq)]
pub struct SphereImage {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl SphereImage {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// 8-bit gray levels, round(255·value).
    pub fn to_bytes(&self) -> Vec<u8> {
        self.values.iter().map(|&v| (v * 255.0).round() as u8).collect()
    }
}

/// Unit direction for a pixel center; longitude runs −π..π left to right.
pub fn pixel_direction(projection: Projection, width: usize, height: usize, x: usize, y: usize) -> Vec3 {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    let lon = -PI + 2.0 * PI * (x as f64 + 0.5) / width as f64;
    let t = (y as f64 + 0.5) / height as f64;
    let lat = match projection {
        Projection::Equirectangular => FRAC_PI_2 - PI * t,
        Projection::Mercator => {
            let ymax = (FRAC_PI_4 + MERCATOR_LIMIT_DEG.to_radians() / 2.0).tan().ln();
            (ymax * (1.0 - 2.0 * t)).sinh().atan()
        }
    };
    Vec3::new(lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin())
}

/// Each pixel takes the normalized value of the nearest sampled view.
/// `size` is the image width.
pub fn render_sphere_map(map: &VQMap, sphere: &ViewSphere, projection: Projection, size: usize) -> Result<SphereImage> {
    if size == 0 {
        return Err(Error::InvalidArgument("image size must be positive".into()));
    }
    if map.len() != sphere.len() {
        return Err(Error::InvalidArgument("map and sphere differ in size".into()));
    }
    let (width, height) = match projection {
        Projection::Mercator => (size, size),
        Projection::Equirectangular => (size, (size / 2).max(1)),
    };
    let mut values = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let dir = pixel_direction(projection, width, height, x, y);
            values.push(map.normalized[sphere.nearest(dir)]);
        }
    }
    Ok(SphereImage { width, height, values })
}

pub fn pgm_bytes(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    debug_assert_eq!(pixels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    fs::write(path, pgm_bytes(width, height, pixels)).map_err(Error::io(path))
}

/// Parses a binary PGM with maxval 255 into (width, height, pixels).
pub fn parse_pgm(bytes: &[u8]) -> std::result::Result<(usize, usize, Vec<u8>), String> {
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
            return Err("truncated PGM header".into());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|e| e.to_string())?);
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return Err("expected a P5 image with maxval 255".into());
    }
    let w: usize = fields[1].parse().map_err(|_| "bad width")?;
    let h: usize = fields[2].parse().map_err(|_| "bad height")?;
    let data = &bytes[pos + 1..];
    if data.len() != w * h {
        return Err(format!("expected {} pixels, found {}", w * h, data.len()));
    }
    Ok((w, h, data.to_vec()))
}

pub fn export_sphere_map(
    map: &VQMap,
    sphere: &ViewSphere,
    path: &Path,
    projection: Projection,
    size: usize,
) -> Result<()> {
    let img = render_sphere_map(map, sphere, projection, size)?;
    write_pgm(path, img.width, img.height, &img.to_bytes())
}

/// The last item buffer as gray levels: face index modulo 255, background
/// white (255).
pub fn item_buffer_pixels(rasterizer: &Rasterizer) -> Vec<u8> {
    rasterizer
        .item_buffer()
        .iter()
        .map(|&f| if f == NO_FACE { 255 } else { (f % 255) as u8 })
        .collect()
}

pub fn write_item_buffer(rasterizer: &Rasterizer, path: &Path) -> Result<()> {
    let (w, h) = (rasterizer.width() as usize, rasterizer.height() as usize);
    write_pgm(path, w, h, &item_buffer_pixels(rasterizer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use viewq_core::measures::normalize_map;

    #[test]
    fn floats_have_17_significant_digits() {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, RoundTripFloats);
        vec![0.1f64, 1.0, -2.5e-300].serialize(&mut ser).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,1.0000000000000000e0,-2.5000000000000000e-300]");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, 1.0, -2.5e-300]);
    }

    #[test]
    fn constant_map_gives_constant_image() {
        let sphere = fibonacci_sphere(50).unwrap();
        let map = normalize_map(&[3.0; 50], Orientation::MaxIsBest).unwrap();
        for p in [Projection::Mercator, Projection::Equirectangular] {
            let img = render_sphere_map(&map, &sphere, p, 40).unwrap();
            assert!(img.values.iter().all(|&v| v == 1.0));
        }
        assert!(render_sphere_map(&map, &sphere, Projection::Mercator, 0).is_err());
    }

    #[test]
    fn mercator_rows_are_clamped() {
        let top = pixel_direction(Projection::Mercator, 100, 100, 0, 0);
        let bottom = pixel_direction(Projection::Mercator, 100, 100, 0, 99);
        assert!(top.z < 85f64.to_radians().sin() && top.z > 0.99);
        assert!((top.z + bottom.z).abs() < 1e-12);
    }

    #[test]
    fn pgm_round_trip() {
        let px: Vec<u8> = (0..12).collect();
        assert_eq!(parse_pgm(&pgm_bytes(4, 3, &px)).unwrap(), (4, 3, px));
        assert!(parse_pgm(b"P2\n1 1\n255\n0").is_err());
    }
}
