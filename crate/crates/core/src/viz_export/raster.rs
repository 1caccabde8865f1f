use std::f64::consts::PI;

use crate::filterbank::Profile;
use crate::propagation::PinwheelMap;
use crate::{Error, Result};

use super::{ArgmaxField, Projection2D};

/// 8-bit grayscale raster, rows top to bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        GrayImage { width, height, pixels: vec![value; width * height] }
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    /// Linear map of a 2D projection to `[0, 255]` (min to black, max to
    /// white), one pixel per node with `y` pointing up.
    pub fn from_projection(p: &Projection2D) -> Result<Self> {
        if p.field.grid.axes().len() != 2 {
            return Err(Error::GridMismatch("image export needs a two-axis field".into()));
        }
        let (w, h) = (p.width(), p.height());
        let (lo, hi) = p.field.min_max();
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut img = GrayImage::filled(w, h, 0);
        for ix in 0..w {
            for iy in 0..h {
                let v = (p.values()[ix * h + iy] - lo) / span;
                img.pixels[(h - 1 - iy) * w + ix] = (255.0 * v).round().clamp(0.0, 255.0) as u8;
            }
        }
        Ok(img)
    }
}

/// 8-bit RGB raster, rows top to bottom, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl RgbImage {
    pub fn get(&self, row: usize, col: usize) -> [u8; 3] {
        let i = 3 * (row * self.width + col);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn set(&mut self, row: usize, col: usize, c: [u8; 3]) {
        let i = 3 * (row * self.width + col);
        self.pixels[i..i + 3].copy_from_slice(&c);
    }
}

/// Fully saturated colour for an orientation in `(−π/2, π/2]`, hue running
/// linearly over the half-turn.
pub fn hue_rgb(theta: f64) -> [u8; 3] {
    let h = ((theta + PI / 2.0) / PI).rem_euclid(1.0) * 6.0;
    let x = 1.0 - ((h % 2.0) - 1.0).abs();
    let (r, g, b) = match h as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    let q = |c: f64| (255.0 * c).round() as u8;
    [q(r), q(g), q(b)]
}

/// Placement of glyphs: each field node owns a `cell × cell` pixel block,
/// every `stride`-th node (counted from the centre) receives a `size × size`
/// stamp centred on its block. A stamp shows the square of half-width
/// `extent` around the filter centre, or the filter's whole window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlyphLayout {
    pub size: usize,
    pub cell: usize,
    pub stride: usize,
    pub extent: Option<f64>,
}

impl Default for GlyphLayout {
    fn default() -> Self {
        GlyphLayout { size: 9, cell: 4, stride: 2, extent: None }
    }
}

/// Real part of a profile sampled on a `size × size` square covering its
/// window, scaled to unit peak magnitude.
fn stamp(profile: &dyn Profile, size: usize, extent: Option<f64>) -> Vec<f64> {
    let w = profile.window();
    let (cx, cy) = (0.5 * (w.x0 + w.x1), 0.5 * (w.y0 + w.y1));
    let half = extent.unwrap_or(0.5 * (w.x1 - w.x0).max(w.y1 - w.y0));
    let n = size as f64;
    let mut out = Vec::with_capacity(size * size);
    for r in 0..size {
        for c in 0..size {
            let u = cx + ((c as f64 + 0.5) / n - 0.5) * 2.0 * half;
            let v = cy - ((r as f64 + 0.5) / n - 0.5) * 2.0 * half;
            out.push(profile.eval(u, v).re);
        }
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        out.iter_mut().for_each(|v| *v /= peak);
    }
    out
}

/// Association-field picture: the maximising filter of every masked node,
/// drawn as a small real-part glyph on a mid-gray background. Overlapping
/// stamps add and saturate at black and white.
pub fn render_glyph_field(af: &ArgmaxField, glyphs: &[&dyn Profile], layout: GlyphLayout) -> Result<GrayImage> {
    if layout.size % 2 == 0 || layout.cell == 0 || layout.stride == 0 || layout.extent.is_some_and(|e| !(e > 0.0)) {
        return Err(Error::invalid("glyph size must be odd; cell, stride and extent positive"));
    }
    let axes = af.grid.axes();
    if axes.len() != 2 {
        return Err(Error::GridMismatch("glyph rendering needs a two-axis argmax field".into()));
    }
    if glyphs.len() != af.axis.count {
        return Err(Error::GridMismatch(format!("{} glyphs for {} features", glyphs.len(), af.axis.count)));
    }
    let (nx, ny) = (axes[0].count, axes[1].count);
    let (w, h) = (nx * layout.cell, ny * layout.cell);
    let mut acc = vec![128.0f64; w * h];
    let mut stamps: Vec<Option<Vec<f64>>> = vec![None; glyphs.len()];
    let (cx, cy) = ((nx / 2) as isize, (ny / 2) as isize);
    let s = layout.stride as isize;
    let half = (layout.size / 2) as isize;
    for ix in 0..nx {
        for iy in 0..ny {
            if (ix as isize - cx) % s != 0 || (iy as isize - cy) % s != 0 {
                continue;
            }
            let Some(f) = af.index[ix * ny + iy] else { continue };
            let st = stamps[f].get_or_insert_with(|| stamp(glyphs[f], layout.size, layout.extent));
            let row0 = ((ny - 1 - iy) * layout.cell + layout.cell / 2) as isize - half;
            let col0 = (ix * layout.cell + layout.cell / 2) as isize - half;
            for r in 0..layout.size {
                for c in 0..layout.size {
                    let (pr, pc) = (row0 + r as isize, col0 + c as isize);
                    if pr >= 0 && pc >= 0 && (pr as usize) < h && (pc as usize) < w {
                        acc[pr as usize * w + pc as usize] += 127.0 * st[r * layout.size + c];
                    }
                }
            }
        }
    }
    let pixels = acc.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    Ok(GrayImage { width: w, height: h, pixels })
}

/// The orientation map in hue, with pixels whose projected value exceeds
/// `threshold` painted black and the node `origin` painted white.
pub fn overlay_threshold(field: &Projection2D, map: &PinwheelMap, threshold: f64, origin: (f64, f64)) -> Result<RgbImage> {
    if field.field.grid.axes().len() != 2 || field.width() != map.xs.count || field.height() != map.ys.count {
        return Err(Error::GridMismatch(format!(
            "{}x{} projection over a {}x{} orientation map",
            field.width(),
            field.height(),
            map.xs.count,
            map.ys.count
        )));
    }
    let (w, h) = (map.xs.count, map.ys.count);
    let mut img = RgbImage { width: w, height: h, pixels: vec![0; 3 * w * h] };
    for ix in 0..w {
        for iy in 0..h {
            let c = if field.values()[ix * h + iy] > threshold { [0, 0, 0] } else { hue_rgb(map.theta(ix, iy)) };
            img.set(h - 1 - iy, ix, c);
        }
    }
    if let (Some(ix), Some(iy)) = (map.xs.index_of(origin.0), map.ys.index_of(origin.1)) {
        img.set(h - 1 - iy, ix, [255, 255, 255]);
    }
    Ok(img)
}
