//! The conventional per-triangle affine-warp transfer.
//!
//! Every call re-solves the affine system and re-rasterizes each
//! triangle; nothing is cached between transfers. Edge and ownership
//! rules match the sampling-map path exactly so quality differences
//! isolate the algorithmic change.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{self, Triangle2D, Vec2, DEGENERATE_AREA_EPS};
use crate::sampling::TrianglePair;
use crate::texture::Texture;
use crate::transfer::{
    sample_bilinear, sample_nearest, BlendSettings, Fill, SampleMode,
};

/// 2D affine map: linear part `m` (row-major 2x2) plus translation `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform2D {
    pub m: [[f64; 2]; 2],
    pub t: [f64; 2],
}

impl AffineTransform2D {
    #[inline]
    pub fn apply(&self, p: Vec2) -> Vec2 {
        Vec2::new(
            self.m[0][0] * p.x + self.m[0][1] * p.y + self.t[0],
            self.m[1][0] * p.x + self.m[1][1] * p.y + self.t[1],
        )
    }
}

/// Solves the 6-dof system mapping `tgt`'s vertices onto `src`'s.
pub fn affine_from_triangles(tgt: &Triangle2D, src: &Triangle2D) -> Result<AffineTransform2D> {
    let e1 = tgt.b - tgt.a;
    let e2 = tgt.c - tgt.a;
    let det = e1.x * e2.y - e2.x * e1.y;
    if (0.5 * det).abs() < DEGENERATE_AREA_EPS {
        return Err(Error::DegenerateTriangle { area: 0.5 * det });
    }
    let inv = 1.0 / det;
    // Columns of M * [e1 e2] = [f1 f2], with f the source edges.
    let f1 = src.b - src.a;
    let f2 = src.c - src.a;
    let m00 = (f1.x * e2.y - f2.x * e1.y) * inv;
    let m01 = (f2.x * e1.x - f1.x * e2.x) * inv;
    let m10 = (f1.y * e2.y - f2.y * e1.y) * inv;
    let m11 = (f2.y * e1.x - f1.y * e2.x) * inv;
    let t = [
        src.a.x - (m00 * tgt.a.x + m01 * tgt.a.y),
        src.a.y - (m10 * tgt.a.x + m11 * tgt.a.y),
    ];
    Ok(AffineTransform2D {
        m: [[m00, m01], [m10, m11]],
        t,
    })
}

/// Per-triangle transfer: solves each pair's affine transform, then
/// rasterizes the target triangle and samples the source through the
/// transform. Single-threaded unless `parallel` is set.
#[allow(clippy::too_many_arguments)]
pub fn transfer_affine(
    pairs: &[TrianglePair],
    src: &Texture,
    width: u32,
    height: u32,
    eps: f64,
    blend: &BlendSettings,
    mode: SampleMode,
    parallel: bool,
) -> Result<Texture> {
    if src.width == 0 || src.height == 0 {
        return Err(Error::Invalid("empty source texture".into()));
    }
    if let Fill::Texture(fill_tex) = &blend.fill {
        if fill_tex.width != width || fill_tex.height != height {
            return Err(Error::ResolutionMismatch {
                expected_w: width,
                expected_h: height,
                got_w: fill_tex.width,
                got_h: fill_tex.height,
            });
        }
    }

    // Re-solved on every call by design.
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by_key(|&i| pairs[i].tgt_face);
    let transforms: Vec<AffineTransform2D> = pairs
        .iter()
        .map(|p| affine_from_triangles(&p.tgt, &p.src))
        .collect::<Result<_>>()?;

    let w = width as usize;
    let h = height as usize;
    let mut row_bins: Vec<Vec<u32>> = vec![Vec::new(); h];
    let pad_y = 1.0 / height as f64;
    for &pi in &order {
        let t = &pairs[pi].tgt;
        let min_y = t.a.y.min(t.b.y).min(t.c.y) - pad_y;
        let max_y = t.a.y.max(t.b.y).max(t.c.y) + pad_y;
        let j0 = ((min_y * height as f64 - 0.5).floor().max(0.0)) as usize;
        let j1 = ((max_y * height as f64 - 0.5).ceil().min(h as f64 - 1.0)).max(0.0) as usize;
        for bin in row_bins.iter_mut().take(j1 + 1).skip(j0) {
            bin.push(pi as u32);
        }
    }

    // Map-space rows (row j is v = (j+0.5)/H), sampled texels.
    let mut mask = vec![0u8; w * h];
    let mut sampled = vec![[0.0f32; 4]; w * h];

    let row_work = |j: usize, mask_row: &mut [u8], tex_row: &mut [[f32; 4]]| {
        let v = (j as f64 + 0.5) / height as f64;
        let pad_x = 1.0 / width as f64;
        for &pi in &row_bins[j] {
            let pair = &pairs[pi as usize];
            let tri = &pair.tgt;
            let min_x = tri.a.x.min(tri.b.x).min(tri.c.x) - pad_x;
            let max_x = tri.a.x.max(tri.b.x).max(tri.c.x) + pad_x;
            let i0 = ((min_x * width as f64 - 0.5).floor().max(0.0)) as usize;
            let i1 =
                ((max_x * width as f64 - 0.5).ceil().min(w as f64 - 1.0)).max(0.0) as usize;
            for i in i0..=i1 {
                if mask_row[i] != 0 {
                    continue;
                }
                let p = Vec2::new((i as f64 + 0.5) / width as f64, v);
                let bc = geom::barycentric(p, tri).expect("pre-filtered non-degenerate");
                if bc.is_inside(eps) {
                    let q = transforms[pi as usize].apply(p);
                    let u = q.x.clamp(0.0, 1.0) as f32;
                    let vv = q.y.clamp(0.0, 1.0) as f32;
                    tex_row[i] = match mode {
                        SampleMode::Bilinear => sample_bilinear(src, u, vv),
                        SampleMode::Nearest => sample_nearest(src, u, vv),
                    };
                    mask_row[i] = 1;
                }
            }
        }
    };

    if parallel {
        mask.par_chunks_mut(w)
            .zip(sampled.par_chunks_mut(w))
            .enumerate()
            .for_each(|(j, (m, t))| row_work(j, m, t));
    } else {
        for (j, (m, t)) in mask.chunks_mut(w).zip(sampled.chunks_mut(w)).enumerate() {
            row_work(j, m, t);
        }
    }

    // Composition: same fill rules as the fast path (feathering is a
    // fast-path feature; the baseline exposes hard fill only).
    let channels = src.channels;
    let mut out = Texture::new(width, height, channels);
    for row in 0..h {
        let j = h - 1 - row;
        for x in 0..w {
            let texel = if mask[j * w + x] != 0 {
                sampled[j * w + x]
            } else {
                match &blend.fill {
                    Fill::None => [0.0, 0.0, 0.0, 0.0],
                    Fill::Color(rgb) => [rgb[0], rgb[1], rgb[2], 1.0],
                    Fill::Texture(t) => t.get_f32(x as u32, row as u32),
                }
            };
            out.put_f32(x as u32, row as u32, texel);
        }
    }
    Ok(out)
}
