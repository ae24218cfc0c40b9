//! Stage 2: apply a precomputed sampling map as one resampling pass.
//!
//! All UV-to-image conversion lives in this module: v = 0 is the bottom
//! image row. [`uv_to_texel`] flips sample lookups and
//! [`map_row_to_image_row`] flips map rows into image rows; nothing
//! else in the crate touches orientation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sampling::SamplingMap;
use crate::texture::Texture;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    Bilinear,
    Nearest,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fill {
    None,
    Color([f32; 3]),
    Texture(Texture),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlendSettings {
    pub fill: Fill,
    /// Linear alpha ramp width, in pixels, inward from the mask boundary.
    pub feather_radius: u32,
}

impl Default for BlendSettings {
    fn default() -> Self {
        BlendSettings {
            fill: Fill::None,
            feather_radius: 0,
        }
    }
}

/// Continuous texel coordinates for a UV point: texel centers sit at
/// (x+0.5)/W, and v = 0 maps to the bottom image row.
#[inline]
fn uv_to_texel(u: f32, v: f32, w: u32, h: u32) -> (f32, f32) {
    (u * w as f32 - 0.5, (1.0 - v) * h as f32 - 0.5)
}

/// Map row j holds v = (j+0.5)/H, so it lands on image row H-1-j.
#[inline]
pub fn map_row_to_image_row(j: u32, h: u32) -> u32 {
    h - 1 - j
}

/// Bilinear interpolation of the four neighboring texel centers,
/// clamped to the texture edge.
#[inline]
pub fn sample_bilinear(tex: &Texture, u: f32, v: f32) -> [f32; 4] {
    let (fx, fy) = uv_to_texel(u, v, tex.width, tex.height);
    let x0f = fx.floor();
    let y0f = fy.floor();
    let tx = fx - x0f;
    let ty = fy - y0f;
    let max_x = tex.width as i64 - 1;
    let max_y = tex.height as i64 - 1;
    let x0 = (x0f as i64).clamp(0, max_x) as u32;
    let x1 = (x0f as i64 + 1).clamp(0, max_x) as u32;
    let y0 = (y0f as i64).clamp(0, max_y) as u32;
    let y1 = (y0f as i64 + 1).clamp(0, max_y) as u32;

    const INV: f32 = 1.0 / 255.0;
    let c = tex.channels as usize;
    let i00 = (y0 as usize * tex.width as usize + x0 as usize) * c;
    let i10 = (y0 as usize * tex.width as usize + x1 as usize) * c;
    let i01 = (y1 as usize * tex.width as usize + x0 as usize) * c;
    let i11 = (y1 as usize * tex.width as usize + x1 as usize) * c;
    let d = &tex.data;
    let mut out = [0.0, 0.0, 0.0, 1.0f32];
    for (ch, slot) in out.iter_mut().enumerate().take(c) {
        let t00 = d[i00 + ch] as f32 * INV;
        let t10 = d[i10 + ch] as f32 * INV;
        let t01 = d[i01 + ch] as f32 * INV;
        let t11 = d[i11 + ch] as f32 * INV;
        let top = t00 + (t10 - t00) * tx;
        let bot = t01 + (t11 - t01) * tx;
        *slot = top + (bot - top) * ty;
    }
    out
}

/// Nearest-texel lookup, clamped to the texture edge.
#[inline]
pub fn sample_nearest(tex: &Texture, u: f32, v: f32) -> [f32; 4] {
    let (fx, fy) = uv_to_texel(u, v, tex.width, tex.height);
    let x = (fx.round() as i64).clamp(0, tex.width as i64 - 1) as u32;
    let y = (fy.round() as i64).clamp(0, tex.height as i64 - 1) as u32;
    tex.get_f32(x, y)
}

/// The sampling map's coverage mask reordered into top-down image rows.
pub fn image_mask(map: &SamplingMap) -> Vec<u8> {
    let w = map.width as usize;
    let h = map.height as usize;
    let mut out = vec![0u8; w * h];
    for j in 0..h {
        let r = h - 1 - j;
        out[r * w..(r + 1) * w].copy_from_slice(&map.mask[j * w..(j + 1) * w]);
    }
    out
}

/// Applies the sampling map: one pass over output pixels, no
/// per-triangle work. Masked pixels sample the source at their stored
/// UV; unmasked pixels take the fill; a linear feather band blends the
/// two near the mask boundary.
pub fn apply(
    map: &SamplingMap,
    src: &Texture,
    blend: &BlendSettings,
    mode: SampleMode,
) -> Result<Texture> {
    if src.width == 0 || src.height == 0 {
        return Err(Error::Invalid("empty source texture".into()));
    }
    if let Fill::Texture(fill_tex) = &blend.fill {
        if fill_tex.width != map.width || fill_tex.height != map.height {
            return Err(Error::ResolutionMismatch {
                expected_w: map.width,
                expected_h: map.height,
                got_w: fill_tex.width,
                got_h: fill_tex.height,
            });
        }
    }
    let limit = map.width.min(map.height) / 4;
    if blend.feather_radius > limit {
        return Err(Error::Invalid(format!(
            "feather radius {} exceeds min(width,height)/4 = {limit}",
            blend.feather_radius
        )));
    }

    let w = map.width as usize;
    let h = map.height as usize;
    let channels = src.channels;
    // Feather weights in map-space rows; None means no feathering.
    let feather = feather_alpha(map, blend.feather_radius);

    let mut out = Texture::new(map.width, map.height, channels);
    out.data
        .par_chunks_mut(w * channels as usize)
        .enumerate()
        .for_each(|(row, out_row)| {
            let j = h - 1 - row; // map row for this image row
            let mask_row = &map.mask[j * w..(j + 1) * w];
            let uv_row = &map.src_uv[j * w..(j + 1) * w];
            for x in 0..w {
                let texel = if mask_row[x] != 0 {
                    let [u, v] = uv_row[x];
                    let s = match mode {
                        SampleMode::Bilinear => sample_bilinear(src, u, v),
                        SampleMode::Nearest => sample_nearest(src, u, v),
                    };
                    match &feather {
                        Some(alpha) => {
                            let fill = fill_texel(&blend.fill, x as u32, row as u32);
                            let a = alpha[j * w + x];
                            let mut t = [0.0f32; 4];
                            for c in 0..4 {
                                t[c] = a * s[c] + (1.0 - a) * fill[c];
                            }
                            t
                        }
                        None => s,
                    }
                } else {
                    fill_texel(&blend.fill, x as u32, row as u32)
                };
                let base = x * channels as usize;
                for c in 0..channels as usize {
                    out_row[base + c] = (texel[c].clamp(0.0, 1.0) * 255.0).round() as u8;
                }
            }
        });
    Ok(out)
}

#[inline]
fn fill_texel(fill: &Fill, x: u32, image_row: u32) -> [f32; 4] {
    match fill {
        Fill::None => [0.0, 0.0, 0.0, 0.0],
        Fill::Color(rgb) => [rgb[0], rgb[1], rgb[2], 1.0],
        Fill::Texture(t) => t.get_f32(x, image_row),
    }
}

/// Per-pixel blend weight from a euclidean distance transform of the
/// mask: 0 at the boundary, 1 at `radius` pixels inside.
fn feather_alpha(map: &SamplingMap, radius: u32) -> Option<Vec<f32>> {
    if radius == 0 {
        return None;
    }
    if map.mask.iter().all(|&m| m != 0) || map.mask.iter().all(|&m| m == 0) {
        return None; // no boundary
    }
    let sq = distance_transform_sq(&map.mask, map.width as usize, map.height as usize);
    let r = radius as f32;
    Some(
        sq.iter()
            .map(|&d2| ((d2 as f32).sqrt() / r).min(1.0))
            .collect(),
    )
}

/// Squared euclidean distance from each set pixel to the nearest clear
/// pixel (Felzenszwalb-Huttenlocher, separable).
fn distance_transform_sq(mask: &[u8], w: usize, h: usize) -> Vec<f64> {
    const INF: f64 = 1e18;
    let mut grid: Vec<f64> = mask.iter().map(|&m| if m != 0 { INF } else { 0.0 }).collect();

    let mut column = vec![0.0f64; h.max(w)];
    // Columns.
    for x in 0..w {
        for y in 0..h {
            column[y] = grid[y * w + x];
        }
        let out = dt_1d(&column[..h]);
        for y in 0..h {
            grid[y * w + x] = out[y];
        }
    }
    // Rows.
    let mut row = vec![0.0f64; w];
    for y in 0..h {
        row.copy_from_slice(&grid[y * w..(y + 1) * w]);
        let out = dt_1d(&row);
        grid[y * w..(y + 1) * w].copy_from_slice(&out);
    }
    grid
}

fn dt_1d(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut out = vec![0.0f64; n];
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64))
                / (2.0 * q as f64 - 2.0 * p as f64);
            if s <= z[k] {
                if k == 0 {
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        out[q] = d * d + f[p];
    }
    out
}

/// Round-trip: apply `fwd`, then apply `rev` with the original texture
/// backfilling everything outside `rev`'s coverage.
pub fn roundtrip(
    fwd: &SamplingMap,
    rev: &SamplingMap,
    original: &Texture,
    blend: &BlendSettings,
    mode: SampleMode,
) -> Result<Texture> {
    let mid = apply(fwd, original, blend, mode)?;
    let back_blend = BlendSettings {
        fill: Fill::Texture(original.clone()),
        feather_radius: blend.feather_radius,
    };
    apply(rev, &mid, &back_blend, mode)
}
