//! dB scaling, colormaps and heatmap rasterization.
//!
//! The rendered image has time on the x-axis and frequency/scale on the
//! y-axis, with matrix row 0 at the bottom of the image.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tf::TfMatrix;

pub type Rgb = [u8; 3];

const DB_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorMap {
    control_points: Vec<(f64, Rgb)>,
}

impl ColorMap {
    pub fn new(control_points: Vec<(f64, Rgb)>) -> Result<Self> {
        let ok = control_points.len() >= 2
            && control_points.first().map(|p| p.0) == Some(0.0)
            && control_points.last().map(|p| p.0) == Some(1.0)
            && control_points.windows(2).all(|w| w[0].0 < w[1].0);
        if !ok {
            return Err(Error::InvalidConfig(
                "colormap positions must increase strictly from 0.0 to 1.0".into(),
            ));
        }
        Ok(Self { control_points })
    }

    /// Dark blue through cyan and yellow to dark red.
    pub fn jet() -> Self {
        Self::new(vec![
            (0.0, [0, 0, 128]),
            (0.25, [0, 0, 255]),
            (0.5, [0, 255, 255]),
            (0.75, [255, 255, 0]),
            (0.875, [255, 0, 0]),
            (1.0, [128, 0, 0]),
        ])
        .expect("static colormap is valid")
    }

    pub fn control_points(&self) -> &[(f64, Rgb)] {
        &self.control_points
    }

    /// Piecewise-linear lookup; `pos` is clamped to `[0, 1]`.
    pub fn color(&self, pos: f64) -> Rgb {
        let pos = if pos.is_nan() { 0.0 } else { pos.clamp(0.0, 1.0) };
        let pts = &self.control_points;
        let i = pts.partition_point(|p| p.0 <= pos).clamp(1, pts.len() - 1);
        let (p0, c0) = pts[i - 1];
        let (p1, c1) = pts[i];
        let t = ((pos - p0) / (p1 - p0)).clamp(0.0, 1.0);
        let mut out = [0u8; 3];
        for ch in 0..3 {
            let v = f64::from(c0[ch]) + t * (f64::from(c1[ch]) - f64::from(c0[ch]));
            out[ch] = v.round() as u8;
        }
        out
    }
}

impl Default for ColorMap {
    fn default() -> Self {
        Self::jet()
    }
}

/// How the matrix grid is mapped onto the pixel grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resample {
    /// Point-sampled bilinear interpolation on both axes.
    Bilinear,
    /// Bilinear when upsampling an axis, box averaging over each pixel's
    /// footprint when downsampling it.
    #[default]
    AreaBilinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub width: usize,
    pub height: usize,
    pub floor_db: f64,
    #[serde(default)]
    pub colormap: ColorMap,
    #[serde(default)]
    pub resample: Resample,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            width: 128,
            height: 128,
            floor_db: 80.0,
            colormap: ColorMap::jet(),
            resample: Resample::AreaBilinear,
        }
    }
}

/// 8-bit RGB raster, row-major from the top-left pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeatmapImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl HeatmapImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::Shape(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    /// Pixel at column `x`, row `y` counted from the top.
    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    /// Interleaved RGB bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flatten().copied().collect()
    }

    pub fn write_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut encoder = png::Encoder::new(BufWriter::new(file), self.width as u32, self.height as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let png_err = |e: png::EncodingError| Error::Format {
            what: "PNG",
            detail: e.to_string(),
        };
        let mut writer = encoder.write_header().map_err(png_err)?;
        writer.write_image_data(&self.to_bytes()).map_err(png_err)?;
        writer.finish().map_err(png_err)
    }

    pub fn read_png(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let dec_err = |e: png::DecodingError| Error::Format {
            what: "PNG",
            detail: e.to_string(),
        };
        let mut reader = png::Decoder::new(std::io::BufReader::new(file))
            .read_info()
            .map_err(dec_err)?;
        let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
        let info = reader.next_frame(&mut buf).map_err(dec_err)?;
        if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
            return Err(Error::Format {
                what: "PNG",
                detail: format!("expected 8-bit RGB, found {:?} {:?}", info.color_type, info.bit_depth),
            });
        }
        let pixels = buf[..info.buffer_size()]
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect();
        Self::new(info.width as usize, info.height as usize, pixels)
    }
}

/// `10·log10(v + 1e-12)`, clamped to `[max − |floor_db|, max]`.
pub fn to_db(m: &TfMatrix, floor_db: f64) -> TfMatrix {
    let db: Vec<f64> = m.values().iter().map(|v| 10.0 * (v + DB_EPSILON).log10()).collect();
    let max = db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = max - floor_db.abs();
    m.with_values_unchecked(db.into_iter().map(|v| v.clamp(lo, max)).collect())
}

/// Sample positions and weights mapping `dst` output cells onto `src`
/// input cells along one axis.
fn axis_weights(src: usize, dst: usize, mode: Resample) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            if mode == Resample::AreaBilinear && src > dst {
                let lo = i as f64 * scale;
                let hi = lo + scale;
                let mut taps = Vec::new();
                let mut j = lo.floor() as usize;
                while (j as f64) < hi && j < src {
                    let w = (hi.min(j as f64 + 1.0) - lo.max(j as f64)).max(0.0);
                    if w > 0.0 {
                        taps.push((j, w / scale));
                    }
                    j += 1;
                }
                taps
            } else {
                // align cell centers
                let pos = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
                let j0 = pos.floor() as usize;
                let j1 = (j0 + 1).min(src - 1);
                let t = pos - j0 as f64;
                if j1 == j0 || t == 0.0 {
                    vec![(j0, 1.0)]
                } else {
                    vec![(j0, 1.0 - t), (j1, t)]
                }
            }
        })
        .collect()
}

/// Resamples `values` (`rows × cols`) to `height × width`; output row 0
/// corresponds to input row 0.
fn resample(values: &[f64], rows: usize, cols: usize, width: usize, height: usize, mode: Resample) -> Vec<f64> {
    let wx = axis_weights(cols, width, mode);
    let wy = axis_weights(rows, height, mode);
    let mut horizontal = vec![0.0; rows * width];
    for r in 0..rows {
        let src = &values[r * cols..(r + 1) * cols];
        for (x, taps) in wx.iter().enumerate() {
            horizontal[r * width + x] = taps.iter().map(|&(j, w)| src[j] * w).sum();
        }
    }
    let mut out = vec![0.0; height * width];
    for (y, taps) in wy.iter().enumerate() {
        for &(j, w) in taps {
            let src = &horizontal[j * width..(j + 1) * width];
            for (o, v) in out[y * width..(y + 1) * width].iter_mut().zip(src) {
                *o += v * w;
            }
        }
    }
    out
}

/// Colormap positions in `[0, 1]` for each output cell, row 0 = matrix
/// row 0 (the bottom of the image).
pub fn normalized_grid(m: &TfMatrix, width: usize, height: usize, mode: Resample) -> Vec<f64> {
    let (lo, hi) = (m.min(), m.max());
    let span = hi - lo;
    let normalized: Vec<f64> = m
        .values()
        .iter()
        .map(|v| if span > 0.0 { (v - lo) / span } else { 0.0 })
        .collect();
    resample(&normalized, m.rows(), m.cols(), width, height, mode)
}

/// Min-max normalizes `m`, resamples it to `width × height` and maps each
/// cell through `map`. A constant matrix renders entirely at position 0.
pub fn render_heatmap(
    m: &TfMatrix,
    map: &ColorMap,
    width: usize,
    height: usize,
    mode: Resample,
) -> Result<HeatmapImage> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidConfig("image dimensions must be positive".into()));
    }
    if m.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::Shape("cannot render non-finite values".into()));
    }
    let grid = normalized_grid(m, width, height, mode);
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        let row = height - 1 - y;
        pixels.extend(grid[row * width..(row + 1) * width].iter().map(|&p| map.color(p)));
    }
    HeatmapImage::new(width, height, pixels)
}

/// dB conversion followed by [`render_heatmap`], as configured.
pub fn render_db(m: &TfMatrix, config: &RenderConfig) -> Result<HeatmapImage> {
    render_heatmap(
        &to_db(m, config.floor_db),
        &config.colormap,
        config.width,
        config.height,
        config.resample,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tf::{RowAxis, TfKind};
    use proptest::prelude::*;

    fn matrix(rows: usize, cols: usize, values: Vec<f64>) -> TfMatrix {
        TfMatrix::new(
            rows,
            cols,
            values,
            RowAxis::FrequencyHz,
            (0..rows).map(|r| r as f64).collect(),
            0.01,
            TfKind::Spectrogram,
        )
        .unwrap()
    }

    #[test]
    fn colormap_endpoints() {
        let map = ColorMap::jet();
        assert_eq!(map.color(0.0), [0, 0, 128]);
        assert_eq!(map.color(1.0), [128, 0, 0]);
        assert_eq!(map.color(0.5), [0, 255, 255]);
        assert_eq!(map.color(0.125), [0, 0, 192]);
        assert_eq!(map.color(-3.0), [0, 0, 128]);
    }

    #[test]
    fn colormap_validation() {
        assert!(ColorMap::new(vec![(0.0, [0; 3])]).is_err());
        assert!(ColorMap::new(vec![(0.1, [0; 3]), (1.0, [0; 3])]).is_err());
        assert!(ColorMap::new(vec![(0.0, [0; 3]), (0.5, [0; 3]), (0.5, [0; 3]), (1.0, [0; 3])]).is_err());
    }

    #[test]
    fn db_examples() {
        let m = matrix(1, 3, vec![1.0, 0.0, 0.01]);
        let db = to_db(&m, 80.0);
        assert!(db.get(0, 0).abs() < 1e-9);
        assert!((db.get(0, 1) + 80.0).abs() < 1e-9);
        assert!((db.get(0, 2) + 20.0).abs() < 1e-6);
        let unclamped = to_db(&m, 200.0);
        assert!((unclamped.get(0, 1) + 120.0).abs() < 1e-9);
        let uniform = to_db(&matrix(2, 2, vec![3.0; 4]), 80.0);
        assert!(uniform.values().iter().all(|v| *v == uniform.values()[0]));
        assert_eq!(db.kind(), m.kind());
    }

    #[test]
    fn two_by_two_is_exact_and_bottom_up() {
        let m = matrix(2, 2, vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
        for mode in [Resample::Bilinear, Resample::AreaBilinear] {
            let img = render_heatmap(&m, &ColorMap::jet(), 2, 2, mode).unwrap();
            let map = ColorMap::jet();
            assert_eq!(img.pixel(0, 1), map.color(0.0));
            assert_eq!(img.pixel(1, 1), map.color(1.0 / 3.0));
            assert_eq!(img.pixel(0, 0), map.color(2.0 / 3.0));
            assert_eq!(img.pixel(1, 0), [128, 0, 0]);
        }
    }

    #[test]
    fn constant_matrix_renders_at_origin_color() {
        let img = render_heatmap(&matrix(3, 5, vec![7.0; 15]), &ColorMap::jet(), 4, 4, Resample::AreaBilinear).unwrap();
        assert!(img.pixels().iter().all(|p| *p == [0, 0, 128]));
    }

    #[test]
    fn area_mode_keeps_a_single_column_spike() {
        let cols = 1000;
        let mut v = vec![0.0; cols];
        v[501] = 1.0;
        let m = matrix(1, cols, v);
        let area = render_heatmap(&m, &ColorMap::jet(), 10, 1, Resample::AreaBilinear).unwrap();
        assert_ne!(area.pixel(5, 0), [0, 0, 128]);
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.png");
        let m = matrix(4, 6, (0..24).map(f64::from).collect());
        let img = render_db(&m, &RenderConfig { width: 7, height: 5, ..RenderConfig::default() }).unwrap();
        img.write_png(&p).unwrap();
        assert_eq!(HeatmapImage::read_png(&p).unwrap(), img);
    }

    proptest! {
        #[test]
        fn deterministic_and_monotone(values in prop::collection::vec(0.0f64..10.0, 12)) {
            let m = matrix(3, 4, values);
            let cfg = RenderConfig { width: 4, height: 3, ..RenderConfig::default() };
            prop_assert_eq!(render_db(&m, &cfg).unwrap(), render_db(&m, &cfg).unwrap());

            let db = to_db(&m, 80.0);
            let grid = normalized_grid(&db, 4, 3, Resample::Bilinear);
            for i in 0..12 {
                for j in 0..12 {
                    if db.values()[i] < db.values()[j] {
                        prop_assert!(grid[i] <= grid[j]);
                    }
                }
            }
        }
    }
}
