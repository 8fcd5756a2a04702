//! Time-frequency matrices and their on-disk form.
//!
//! A TFM file is `b"TFM1"`, a little-endian `u32` row count, a little-endian
//! `u32` column count, then `rows * cols` little-endian `f32` values in
//! row-major order. Axis metadata lives in a JSON sidecar named
//! `<name>.tfm.json`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TFM_MAGIC: &[u8; 4] = b"TFM1";

/// Dense row-major matrix of complex transform coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_mut(&mut self, row: usize) -> &mut [Complex64] {
        &mut self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// `|z|²` per element, same layout.
    pub fn power(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Largest element-wise `|a - b|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TfKind {
    Spectrogram,
    Scalogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowAxis {
    FrequencyHz,
    Scale,
}

/// Non-negative energy matrix indexed `[row][time]`, where rows are
/// frequency bins or wavelet scales.
#[derive(Debug, Clone, PartialEq)]
pub struct TfMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    row_axis: RowAxis,
    row_coords: Vec<f64>,
    time_step_s: f64,
    kind: TfKind,
}

impl TfMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        values: Vec<f64>,
        row_axis: RowAxis,
        row_coords: Vec<f64>,
        time_step_s: f64,
        kind: TfKind,
    ) -> Result<Self> {
        Self::check(rows, cols, &values, &row_coords, time_step_s)?;
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Shape(format!("energy value {v} is not finite and >= 0")));
        }
        Ok(Self {
            rows,
            cols,
            values,
            row_axis,
            row_coords,
            time_step_s,
            kind,
        })
    }

    fn check(rows: usize, cols: usize, values: &[f64], coords: &[f64], dt: f64) -> Result<()> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty {rows}x{cols} matrix")));
        }
        if values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        if coords.len() != rows {
            return Err(Error::Shape(format!(
                "{} row coordinates for {rows} rows",
                coords.len()
            )));
        }
        let increasing = coords.windows(2).all(|w| w[0] < w[1]);
        let decreasing = coords.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(Error::Shape("row coordinates are not strictly monotonic".into()));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Shape(format!("time step {dt} must be positive")));
        }
        Ok(())
    }

    /// Same axes, new values. Used by value-mapping stages such as dB
    /// conversion whose output may be negative.
    pub(crate) fn with_values_unchecked(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            ..self.clone()
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_axis(&self) -> RowAxis {
        self.row_axis
    }

    pub fn row_coords(&self) -> &[f64] {
        &self.row_coords
    }

    pub fn time_step_s(&self) -> f64 {
        self.time_step_s
    }

    pub fn kind(&self) -> TfKind {
        self.kind
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Mean over time of each row.
    pub fn row_means(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row(r).iter().sum::<f64>() / self.cols as f64)
            .collect()
    }

    /// Sum over `row_range` of each column.
    pub fn column_sums(&self, row_range: std::ops::Range<usize>) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in row_range {
            for (o, v) in out.iter_mut().zip(self.row(r)) {
                *o += v;
            }
        }
        out
    }
}

/// JSON sidecar written next to every TFM file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfmSidecar {
    pub kind: TfKind,
    pub row_axis: RowAxis,
    pub row_coords: Vec<f64>,
    pub time_step_s: f64,
    #[serde(default)]
    pub config: serde_json::Value,
}

/// `<path>.json`, i.e. `spec.tfm` → `spec.tfm.json`.
pub fn sidecar_path(tfm_path: &Path) -> PathBuf {
    let mut s = tfm_path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode_tfm(m: &TfMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * m.values.len());
    out.extend_from_slice(TFM_MAGIC);
    out.extend_from_slice(&(m.rows as u32).to_le_bytes());
    out.extend_from_slice(&(m.cols as u32).to_le_bytes());
    for &v in &m.values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

/// Parses a TFM payload into `(rows, cols, values)`.
pub fn decode_tfm(bytes: &[u8]) -> Result<(usize, usize, Vec<f32>)> {
    let bad = |detail: String| Error::Format { what: "TFM", detail };
    if bytes.len() < 12 || &bytes[..4] != TFM_MAGIC {
        return Err(bad("missing TFM1 magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (rows, cols) = (word(4), word(8));
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| bad("dimension overflow".into()))?;
    if bytes.len() - 12 != expected {
        return Err(bad(format!(
            "{rows}x{cols} needs {expected} payload bytes, found {}",
            bytes.len() - 12
        )));
    }
    let values = bytes[12..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((rows, cols, values))
}

/// Writes `m` as TFM plus its sidecar; `config` is echoed into the sidecar.
pub fn write_tfm(m: &TfMatrix, path: impl AsRef<Path>, config: serde_json::Value) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_tfm(m)).map_err(|e| Error::io(path, e))?;
    let sidecar = TfmSidecar {
        kind: m.kind,
        row_axis: m.row_axis,
        row_coords: m.row_coords.clone(),
        time_step_s: m.time_step_s,
        config,
    };
    let side = sidecar_path(path);
    let json = serde_json::to_vec_pretty(&sidecar)?;
    fs::write(&side, json).map_err(|e| Error::io(side, e))
}

pub fn read_tfm(path: impl AsRef<Path>) -> Result<(TfMatrix, TfmSidecar)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (rows, cols, values) = decode_tfm(&bytes)?;
    let side = sidecar_path(path);
    let text = fs::read(&side).map_err(|e| Error::io(&side, e))?;
    let sidecar: TfmSidecar = serde_json::from_slice(&text)?;
    let m = TfMatrix::new(
        rows,
        cols,
        values.into_iter().map(f64::from).collect(),
        sidecar.row_axis,
        sidecar.row_coords.clone(),
        sidecar.time_step_s,
        sidecar.kind,
    )?;
    Ok((m, sidecar))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> TfMatrix {
        TfMatrix::new(
            2,
            3,
            vec![0.0, 1.0, 2.0, 3.0, 4.5, 0.25],
            RowAxis::Scale,
            vec![2.0, 3.0],
            0.5,
            TfKind::Scalogram,
        )
        .unwrap()
    }

    #[test]
    fn layout_is_bit_exact() {
        let bytes = encode_tfm(&small());
        assert_eq!(&bytes[..4], b"TFM1");
        assert_eq!(&bytes[4..8], &[2, 0, 0, 0]);
        assert_eq!(&bytes[8..12], &[3, 0, 0, 0]);
        assert_eq!(&bytes[12..16], &0.0f32.to_le_bytes());
        assert_eq!(&bytes[16..20], &1.0f32.to_le_bytes());
        assert_eq!(bytes.len(), 12 + 6 * 4);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.tfm");
        write_tfm(&small(), &p, serde_json::json!({"n": 4})).unwrap();
        assert!(dir.path().join("m.tfm.json").exists());
        let (back, side) = read_tfm(&p).unwrap();
        assert_eq!(back, small());
        assert_eq!(side.config["n"], 4);
    }

    #[test]
    fn rejects_malformed() {
        assert!(decode_tfm(b"TFM2\0\0\0\0\0\0\0\0").is_err());
        let mut bytes = encode_tfm(&small());
        bytes.pop();
        assert!(decode_tfm(&bytes).is_err());
    }

    #[test]
    fn invariants_enforced() {
        let mk = |values: Vec<f64>, coords: Vec<f64>| {
            TfMatrix::new(1, 2, values, RowAxis::Scale, coords, 1.0, TfKind::Scalogram)
        };
        assert!(mk(vec![1.0, -1.0], vec![1.0]).is_err());
        assert!(mk(vec![1.0, f64::NAN], vec![1.0]).is_err());
        assert!(mk(vec![1.0], vec![1.0]).is_err());
        assert!(TfMatrix::new(
            2,
            1,
            vec![1.0, 1.0],
            RowAxis::Scale,
            vec![1.0, 1.0],
            1.0,
            TfKind::Scalogram
        )
        .is_err());
    }
}
