//! File formats: intrinsics, poses and rectified setups as JSON,
//! correspondences as CSV, and light fields as directories of 16-bit PGM
//! sub-aperture images with PBM masks and a `grid.json` index.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::{Matrix3, Vector3};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{LFIntrinsics, LFPoint, RelativePose};
use crate::pose::CorrespondenceSet;
use crate::rectify::{CameraId, RectifiedSetup};
use crate::resample::{Image, SampledLF, SpatialMapping, MASKED};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },
    #[error(transparent)]
    Core(#[from] Error),
}

pub type IoResult<T> = std::result::Result<T, IoError>;

fn file_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::File { path: path.to_path_buf(), source }
}

fn format_err(path: &Path, msg: impl Into<String>) -> IoError {
    IoError::Format { path: path.to_path_buf(), msg: msg.into() }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> IoResult<T> {
    let text = fs::read_to_string(path).map_err(file_err(path))?;
    serde_json::from_str(&text).map_err(|source| IoError::Json { path: path.to_path_buf(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> IoResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|source| IoError::Json { path: path.to_path_buf(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(file_err(path))
}

/// Intrinsics of both cameras.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicsPair {
    pub camera1: LFIntrinsics,
    pub camera2: LFIntrinsics,
}

pub fn read_intrinsics_pair(path: &Path) -> IoResult<IntrinsicsPair> {
    let pair: IntrinsicsPair = read_json(path)?;
    pair.camera1.validate()?;
    pair.camera2.validate()?;
    Ok(pair)
}

/// `{"layout": "row-major", "R": [9 values], "T": [3 values]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseFile {
    pub layout: String,
    #[serde(rename = "R")]
    pub r: [f64; 9],
    #[serde(rename = "T")]
    pub t: [f64; 3],
}

fn row_major(m: &Matrix3<f64>) -> [f64; 9] {
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = m[(i, j)];
        }
    }
    out
}

impl PoseFile {
    pub fn from_pose(pose: &RelativePose) -> Self {
        Self {
            layout: "row-major".into(),
            r: row_major(pose.rotation()),
            t: (*pose.translation()).into(),
        }
    }

    pub fn to_pose(&self) -> crate::Result<RelativePose> {
        if self.layout != "row-major" {
            return Err(Error::InvalidConfig(format!("unsupported layout {:?}", self.layout)));
        }
        RelativePose::new(Matrix3::from_row_slice(&self.r), Vector3::from(self.t))
    }
}

pub fn read_pose(path: &Path) -> IoResult<RelativePose> {
    Ok(read_json::<PoseFile>(path)?.to_pose()?)
}

pub fn write_pose(path: &Path, pose: &RelativePose) -> IoResult<()> {
    write_json(path, &PoseFile::from_pose(pose))
}

/// Rectified setup, matrices row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupFile {
    pub layout: String,
    #[serde(rename = "R_rect")]
    pub r_rect: [f64; 9],
    #[serde(rename = "R_l")]
    pub r_l: [f64; 9],
    #[serde(rename = "R_r")]
    pub r_r: [f64; 9],
    #[serde(rename = "T_l")]
    pub t_l: [f64; 3],
    #[serde(rename = "T_r")]
    pub t_r: [f64; 3],
    pub baseline_mm: f64,
}

impl SetupFile {
    pub fn from_setup(s: &RectifiedSetup) -> Self {
        Self {
            layout: "row-major".into(),
            r_rect: row_major(&s.r_rect),
            r_l: row_major(&s.r_l),
            r_r: row_major(&s.r_r),
            t_l: s.t_l.into(),
            t_r: s.t_r.into(),
            baseline_mm: s.baseline,
        }
    }
}

pub const CORRESPONDENCE_HEADER: [&str; 6] =
    ["u_c", "v_c", "lambda", "u_c_prime", "v_c_prime", "lambda_prime"];

pub fn write_correspondences(path: &Path, pairs: &[(LFPoint, LFPoint)]) -> IoResult<()> {
    let csv_err = |source| IoError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(CORRESPONDENCE_HEADER).map_err(csv_err)?;
    for (a, b) in pairs {
        let rec = [a.u_c, a.v_c, a.lambda, b.u_c, b.v_c, b.lambda].map(|v| format!("{v:.17e}"));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(file_err(path))
}

pub fn read_correspondences(path: &Path) -> IoResult<Vec<(LFPoint, LFPoint)>> {
    let csv_err = |source| IoError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != CORRESPONDENCE_HEADER {
        return Err(format_err(path, format!("expected header {}", CORRESPONDENCE_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 6 {
            return Err(format_err(path, format!("record {} has {} fields", line + 1, rec.len())));
        }
        let mut v = [0.0; 6];
        for (k, field) in rec.iter().enumerate() {
            v[k] = field.trim().parse().map_err(|_| {
                format_err(path, format!("record {}: cannot parse {field:?}", line + 1))
            })?;
        }
        out.push((LFPoint::new(v[0], v[1], v[2]), LFPoint::new(v[3], v[4], v[5])));
    }
    Ok(out)
}

/// Correspondences plus the intrinsics pair, validated.
pub fn read_correspondence_set(csv_path: &Path, intrinsics_path: &Path) -> IoResult<CorrespondenceSet> {
    let pairs = read_correspondences(csv_path)?;
    let k = read_intrinsics_pair(intrinsics_path)?;
    Ok(CorrespondenceSet::new(pairs, k.camera1, k.camera2)?)
}

const PGM_MAX: f64 = 65535.0;

/// Writes a 16-bit binary PGM; values in `[0, 1]` are scaled to 65535,
/// masked pixels are written as 0.
pub fn write_pgm16(path: &Path, img: &Image) -> IoResult<()> {
    let mut buf = format!("P5\n{} {}\n65535\n", img.width, img.height).into_bytes();
    buf.reserve(img.data.len() * 2);
    for &v in &img.data {
        let q = if v.is_nan() { 0 } else { (v.clamp(0.0, 1.0) * PGM_MAX).round() as u16 };
        buf.extend_from_slice(&q.to_be_bytes());
    }
    fs::write(path, buf).map_err(file_err(path))
}

/// Reads the whitespace-separated header fields of a binary PNM file.
fn pnm_header<R: BufRead>(r: &mut R, count: usize, path: &Path) -> IoResult<Vec<String>> {
    let mut fields = Vec::new();
    let mut token = String::new();
    let mut in_comment = false;
    let mut byte = [0u8; 1];
    while fields.len() < count {
        if r.read(&mut byte).map_err(file_err(path))? == 0 {
            return Err(format_err(path, "truncated header"));
        }
        let c = byte[0] as char;
        if in_comment {
            in_comment = c != '\n';
            continue;
        }
        if c == '#' {
            in_comment = true;
        } else if c.is_ascii_whitespace() {
            if !token.is_empty() {
                fields.push(std::mem::take(&mut token));
            }
        } else {
            token.push(c);
        }
    }
    Ok(fields)
}

fn parse_dim(s: &str, path: &Path) -> IoResult<usize> {
    s.parse().map_err(|_| format_err(path, format!("bad header field {s:?}")))
}

pub fn read_pgm16(path: &Path) -> IoResult<Image> {
    let mut r = BufReader::new(fs::File::open(path).map_err(file_err(path))?);
    let h = pnm_header(&mut r, 4, path)?;
    if h[0] != "P5" {
        return Err(format_err(path, "not a binary PGM"));
    }
    let (w, ht, max) = (parse_dim(&h[1], path)?, parse_dim(&h[2], path)?, parse_dim(&h[3], path)?);
    if max == 0 || max > 65535 {
        return Err(format_err(path, "unsupported maxval"));
    }
    let bytes = if max > 255 { 2 } else { 1 };
    let mut raw = vec![0u8; w * ht * bytes];
    r.read_exact(&mut raw).map_err(file_err(path))?;
    let data = if bytes == 2 {
        raw.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / max as f64).collect()
    } else {
        raw.iter().map(|&b| b as f64 / max as f64).collect()
    };
    Ok(Image { width: w, height: ht, data })
}

/// Writes a binary PBM whose set (black) bits mark masked pixels.
pub fn write_mask_pbm(path: &Path, img: &Image) -> IoResult<()> {
    let mut buf = format!("P4\n{} {}\n", img.width, img.height).into_bytes();
    let stride = img.width.div_ceil(8);
    for row in 0..img.height {
        let mut line = vec![0u8; stride];
        for col in 0..img.width {
            if !img.is_valid(col, row) {
                line[col / 8] |= 0x80 >> (col % 8);
            }
        }
        buf.extend_from_slice(&line);
    }
    fs::write(path, buf).map_err(file_err(path))
}

/// Reads a mask written by [`write_mask_pbm`]; `true` marks masked pixels.
pub fn read_mask_pbm(path: &Path) -> IoResult<(usize, usize, Vec<bool>)> {
    let mut r = BufReader::new(fs::File::open(path).map_err(file_err(path))?);
    let h = pnm_header(&mut r, 3, path)?;
    if h[0] != "P4" {
        return Err(format_err(path, "not a binary PBM"));
    }
    let (w, ht) = (parse_dim(&h[1], path)?, parse_dim(&h[2], path)?);
    let stride = w.div_ceil(8);
    let mut raw = vec![0u8; stride * ht];
    r.read_exact(&mut raw).map_err(file_err(path))?;
    let mut out = Vec::with_capacity(w * ht);
    for row in 0..ht {
        for col in 0..w {
            out.push(raw[row * stride + col / 8] & (0x80 >> (col % 8)) != 0);
        }
    }
    Ok((w, ht, out))
}

/// Index of a light-field directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFile {
    /// s-coordinates of the sub-aperture columns, mm.
    pub columns: Vec<f64>,
    /// t-coordinates of the sub-aperture rows, mm.
    pub rows: Vec<f64>,
    pub width: usize,
    pub height: usize,
    pub mapping: SpatialMapping,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Vec<Vec<Option<CameraId>>>>,
}

pub fn sai_file_name(row: usize, col: usize, ext: &str) -> String {
    format!("sai_r{row:02}_c{col:02}.{ext}")
}

/// Writes `lf` into `dir` (created if missing).
pub fn write_light_field(
    dir: &Path,
    lf: &SampledLF,
    provenance: Option<&[Vec<Option<CameraId>>]>,
) -> IoResult<()> {
    fs::create_dir_all(dir).map_err(file_err(dir))?;
    for r in 0..lf.n_t() {
        for c in 0..lf.n_s() {
            let img = lf.image(r, c);
            write_pgm16(&dir.join(sai_file_name(r, c, "pgm")), img)?;
            write_mask_pbm(&dir.join(sai_file_name(r, c, "pbm")), img)?;
        }
    }
    let grid = GridFile {
        columns: lf.s_positions.clone(),
        rows: lf.t_positions.clone(),
        width: lf.width,
        height: lf.height,
        mapping: lf.mapping,
        provenance: provenance.map(<[_]>::to_vec),
    };
    write_json(&dir.join("grid.json"), &grid)
}

/// Reads a light-field directory. Mask files are optional.
pub fn read_light_field(dir: &Path) -> IoResult<SampledLF> {
    let grid: GridFile = read_json(&dir.join("grid.json"))?;
    let mut images = Vec::with_capacity(grid.rows.len() * grid.columns.len());
    for r in 0..grid.rows.len() {
        for c in 0..grid.columns.len() {
            let path = dir.join(sai_file_name(r, c, "pgm"));
            let mut img = read_pgm16(&path)?;
            if img.width != grid.width || img.height != grid.height {
                return Err(format_err(&path, "image size differs from grid.json"));
            }
            let mask_path = dir.join(sai_file_name(r, c, "pbm"));
            if mask_path.exists() {
                let (w, h, mask) = read_mask_pbm(&mask_path)?;
                if w != img.width || h != img.height {
                    return Err(format_err(&mask_path, "mask size differs from image"));
                }
                for (v, m) in img.data.iter_mut().zip(mask) {
                    if m {
                        *v = MASKED;
                    }
                }
            }
            images.push(img);
        }
    }
    Ok(SampledLF::new(grid.columns, grid.rows, grid.mapping, images)?)
}

/// Writes an image as 16-bit PGM, normalizing valid values to `[0, 1]` if
/// any fall outside.
pub fn write_image_normalized(path: &Path, img: &Image) -> IoResult<()> {
    let valid = img.data.iter().filter(|v| !v.is_nan());
    let (lo, hi) = valid.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo >= 0.0 && hi <= 1.0 || !(hi > lo) {
        return write_pgm16(path, img);
    }
    let scaled = Image {
        width: img.width,
        height: img.height,
        data: img.data.iter().map(|v| (v - lo) / (hi - lo)).collect(),
    };
    write_pgm16(path, &scaled)
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> IoResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(file_err(parent))?;
    }
    let mut f = fs::File::create(path).map_err(file_err(path))?;
    f.write_all(text.as_bytes()).map_err(file_err(path))
}
