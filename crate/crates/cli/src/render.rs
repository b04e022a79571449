//! PNG heatmaps of signal × idler maps.
//!
//! Signal runs along x (left to right), idler along y (bottom to top), one
//! `scale × scale` block per grid point. Intensities use viridis scaled to
//! the map maximum; phases use the cyclic sinebow map over (−π, π]. Cells
//! that are masked or non-finite are drawn grey.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use colorous::{Gradient, SINEBOW, VIRIDIS};
use ndarray::Array2;
use ringjsa::Error;

const MASKED: [u8; 3] = [128, 128, 128];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Palette {
    Intensity,
    Phase,
}

fn color(gradient: Gradient, t: f64) -> [u8; 3] {
    let c = gradient.eval_continuous(t.clamp(0.0, 1.0));
    [c.r, c.g, c.b]
}

/// Maps each cell to RGB. `None` cells are masked.
fn colorize(map: &Array2<Option<f64>>, palette: Palette) -> Array2<[u8; 3]> {
    match palette {
        Palette::Intensity => {
            let peak = map
                .iter()
                .flatten()
                .copied()
                .filter(|v| v.is_finite())
                .fold(0.0, f64::max);
            map.mapv(|v| match v {
                Some(x) if x.is_finite() => color(VIRIDIS, if peak > 0.0 { x / peak } else { 0.0 }),
                _ => MASKED,
            })
        }
        Palette::Phase => map.mapv(|v| match v {
            Some(x) if x.is_finite() => color(SINEBOW, (x + PI) / (2.0 * PI)),
            _ => MASKED,
        }),
    }
}

/// Writes `map` (indexed `[signal][idler]`) as an RGB PNG of
/// `(n_signal·scale) × (n_idler·scale)` pixels.
pub fn heatmap(path: &Path, map: &Array2<Option<f64>>, palette: Palette, scale: usize) -> ringjsa::Result<()> {
    let scale = scale.max(1);
    let (ns, ni) = map.dim();
    let (w, h) = (ns * scale, ni * scale);
    let rgb = colorize(map, palette);
    let mut pixels = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        let idler = ni - 1 - y / scale;
        for x in 0..w {
            pixels.extend_from_slice(&rgb[(x / scale, idler)]);
        }
    }

    let fail = |reason: String| Error::Format {
        file: path.display().to_string(),
        reason,
    };
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut enc = png::Encoder::new(BufWriter::new(file), w as u32, h as u32);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().map_err(|e| fail(e.to_string()))?;
    writer.write_image_data(&pixels).map_err(|e| fail(e.to_string()))?;
    writer.finish().map_err(|e| fail(e.to_string()))
}

/// Finite values where `mask` is set, `None` elsewhere.
pub fn masked(values: &Array2<f64>, mask: Option<&Array2<bool>>) -> Array2<Option<f64>> {
    Array2::from_shape_fn(values.dim(), |idx| {
        let keep = mask.is_none_or(|m| m[idx]);
        Some(values[idx]).filter(|v| keep && v.is_finite())
    })
}

/// Rebuilds a map from the nested rows of a JSON report.
pub fn from_rows(rows: &[Vec<Option<f64>>]) -> Array2<Option<f64>> {
    let (ns, ni) = (rows.len(), rows.first().map_or(0, Vec::len));
    Array2::from_shape_fn((ns, ni), |(s, i)| rows[s].get(i).copied().flatten())
}
