//! Stage 1: precompute the per-pixel sampling map.
//!
//! Every corresponded target triangle is rasterized in target UV space;
//! each covered pixel stores the source UV coordinate obtained by
//! carrying the pixel's barycentric coordinates over to the paired
//! source triangle.

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::corr::{CorrMode, CorrespondenceMap};
use crate::error::Result;
use crate::geom::{self, BaryCoords, Triangle2D, Vec2};
use crate::mesh::UvMesh;

/// Default inclusive edge tolerance: a pixel is inside when all
/// barycentric components are >= -eps.
pub const DEFAULT_EPS: f64 = 1e-7;

/// A resolved (target triangle, source triangle) pair.
#[derive(Debug, Clone, Copy)]
pub struct TrianglePair {
    pub tgt: Triangle2D,
    pub src: Triangle2D,
    pub tgt_face: u32,
}

#[derive(Debug, Clone, Default)]
pub struct ResolvedPairs {
    /// Ascending by target face index.
    pub pairs: Vec<TrianglePair>,
    /// Target faces skipped because a corner had no correspondence.
    pub skipped_unmapped: usize,
    /// Target faces skipped because their UV triangle is degenerate.
    pub skipped_degenerate: usize,
}

impl ResolvedPairs {
    pub fn skipped_total(&self) -> usize {
        self.skipped_unmapped + self.skipped_degenerate
    }
}

/// Pairs every fully-mapped, non-degenerate target face with its source
/// triangle.
///
/// Vertex mode resolves each corner's source UV from the first source
/// face (lowest index) containing the mapped source position vertex.
/// Face mode aligns corners by order.
pub fn resolve_pairs(
    tgt: &UvMesh,
    src: &UvMesh,
    map: &CorrespondenceMap,
) -> Result<ResolvedPairs> {
    map.validate_against(tgt, src)?;
    let mut out = ResolvedPairs::default();

    // Vertex mode: source position index -> UV of its first-face corner.
    let src_vertex_uv: Vec<Option<Vec2>> = if map.mode == CorrMode::Vertex {
        let mut table = vec![None; src.positions.len()];
        for face in &src.faces {
            for &(pi, ti) in face {
                let slot = &mut table[pi as usize];
                if slot.is_none() {
                    *slot = Some(src.uv_coords[ti as usize]);
                }
            }
        }
        table
    } else {
        Vec::new()
    };

    for (face_idx, face) in tgt.faces.iter().enumerate() {
        let src_tri = match map.mode {
            CorrMode::Vertex => {
                let mut corners = [Vec2::new(0.0, 0.0); 3];
                let mut mapped = true;
                for (slot, &(pi, _)) in corners.iter_mut().zip(face) {
                    match map.pairs.get(&pi).and_then(|&s| src_vertex_uv[s as usize]) {
                        Some(uv) => *slot = uv,
                        None => {
                            mapped = false;
                            break;
                        }
                    }
                }
                if !mapped {
                    out.skipped_unmapped += 1;
                    continue;
                }
                Triangle2D::new(corners[0], corners[1], corners[2])
            }
            CorrMode::Face => match map.pairs.get(&(face_idx as u32)) {
                Some(&sf) => src.uv_triangle(sf as usize),
                None => {
                    out.skipped_unmapped += 1;
                    continue;
                }
            },
        };

        let tgt_tri = tgt.uv_triangle(face_idx);
        if tgt_tri.is_degenerate() {
            out.skipped_degenerate += 1;
            continue;
        }
        out.pairs.push(TrianglePair {
            tgt: tgt_tri,
            src: src_tri,
            tgt_face: face_idx as u32,
        });
    }
    Ok(out)
}

/// The precomputed per-pixel gather table.
///
/// Row-major with row `j` holding pixels at v = (j + 0.5) / height, so
/// row 0 is the bottom of the UV square. The conversion to top-down
/// image rows happens in the transfer module, nowhere else.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingMap {
    pub width: u32,
    pub height: u32,
    /// Source UV per pixel; (-1, -1) sentinel where the mask is clear.
    pub src_uv: Vec<[f32; 2]>,
    /// 1 where covered, 0 elsewhere.
    pub mask: Vec<u8>,
    /// Digest of the inputs that produced this map.
    pub provenance: [u8; 16],
}

impl SamplingMap {
    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn mask_coverage(&self) -> f64 {
        if self.mask.is_empty() {
            return 0.0;
        }
        self.mask.iter().filter(|&&m| m != 0).count() as f64 / self.mask.len() as f64
    }
}

/// Rasterizes `pairs` into a sampling map.
///
/// Pixel centers are ((i+0.5)/W, (j+0.5)/H). When two triangles cover
/// the same pixel the lowest target-face-index wins, so the result is
/// independent of the parallel schedule.
pub fn build_sampling_map(
    pairs: &[TrianglePair],
    width: u32,
    height: u32,
    eps: f64,
    provenance: [u8; 16],
) -> SamplingMap {
    let w = width as usize;
    let h = height as usize;
    let mut src_uv = vec![[-1.0f32, -1.0f32]; w * h];
    let mut mask = vec![0u8; w * h];

    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by_key(|&i| pairs[i].tgt_face);

    // Bin triangles by pixel row; bins keep ascending face order.
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

    src_uv
        .par_chunks_mut(w)
        .zip(mask.par_chunks_mut(w))
        .enumerate()
        .for_each(|(j, (uv_row, mask_row))| {
            rasterize_row(pairs, &row_bins[j], j, width, height, eps, uv_row, mask_row);
        });

    SamplingMap {
        width,
        height,
        src_uv,
        mask,
        provenance,
    }
}

#[allow(clippy::too_many_arguments)]
fn rasterize_row(
    pairs: &[TrianglePair],
    candidates: &[u32],
    j: usize,
    width: u32,
    height: u32,
    eps: f64,
    uv_row: &mut [[f32; 2]],
    mask_row: &mut [u8],
) {
    let w = width as usize;
    let v = (j as f64 + 0.5) / height as f64;
    let pad_x = 1.0 / width as f64;
    for &pi in candidates {
        let pair = &pairs[pi as usize];
        let t = &pair.tgt;
        let min_x = t.a.x.min(t.b.x).min(t.c.x) - pad_x;
        let max_x = t.a.x.max(t.b.x).max(t.c.x) + pad_x;
        let i0 = ((min_x * width as f64 - 0.5).floor().max(0.0)) as usize;
        let i1 = ((max_x * width as f64 - 0.5).ceil().min(w as f64 - 1.0)).max(0.0) as usize;
        for i in i0..=i1 {
            if mask_row[i] != 0 {
                continue;
            }
            let p = Vec2::new((i as f64 + 0.5) / width as f64, v);
            let bc = geom::barycentric(p, t).expect("pairs are pre-filtered non-degenerate");
            if bc.is_inside(eps) {
                uv_row[i] = mapped_texel(bc, &pair.src);
                mask_row[i] = 1;
            }
        }
    }
}

/// Shared by the rasterizer and the brute-force oracle so both paths
/// produce bit-identical values.
pub fn mapped_texel(bc: BaryCoords, src_tri: &Triangle2D) -> [f32; 2] {
    let p = geom::map_source_point(bc, src_tri);
    [p.x.clamp(0.0, 1.0) as f32, p.y.clamp(0.0, 1.0) as f32]
}

/// Parameters that, together with the meshes and map, determine a
/// sampling map's content.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildParams {
    pub width: u32,
    pub height: u32,
    pub eps: f64,
}

/// Content digest over all build inputs; any change alters it.
pub fn fingerprint(
    tgt: &UvMesh,
    src: &UvMesh,
    map: &CorrespondenceMap,
    params: &BuildParams,
) -> [u8; 16] {
    let mut hasher = Sha256::new();
    for (tag, mesh) in [(b"tgt-mesh", tgt), (b"src-mesh", src)] {
        hasher.update(tag);
        hasher.update((mesh.positions.len() as u64).to_le_bytes());
        for p in &mesh.positions {
            for c in p {
                hasher.update(c.to_le_bytes());
            }
        }
        hasher.update((mesh.uv_coords.len() as u64).to_le_bytes());
        for uv in &mesh.uv_coords {
            hasher.update(uv.x.to_le_bytes());
            hasher.update(uv.y.to_le_bytes());
        }
        hasher.update((mesh.faces.len() as u64).to_le_bytes());
        for f in &mesh.faces {
            for &(pi, ti) in f {
                hasher.update(pi.to_le_bytes());
                hasher.update(ti.to_le_bytes());
            }
        }
    }
    hasher.update(b"corr");
    hasher.update([match map.mode {
        CorrMode::Vertex => 0u8,
        CorrMode::Face => 1u8,
    }]);
    hasher.update((map.pairs.len() as u64).to_le_bytes());
    for (&k, &v) in &map.pairs {
        hasher.update(k.to_le_bytes());
        hasher.update(v.to_le_bytes());
    }
    hasher.update(b"params");
    hasher.update(params.width.to_le_bytes());
    hasher.update(params.height.to_le_bytes());
    hasher.update(params.eps.to_le_bytes());

    let digest = hasher.finalize();
    let mut out = [0u8; 16];
    out.copy_from_slice(&digest[..16]);
    out
}

/// Identity-correspondence pairs over a single mesh, mainly for tests
/// and the identity fixtures.
pub fn identity_pairs(mesh: &UvMesh) -> ResolvedPairs {
    let mut out = ResolvedPairs::default();
    for i in 0..mesh.face_count() {
        let tri = mesh.uv_triangle(i);
        if tri.is_degenerate() {
            out.skipped_degenerate += 1;
            continue;
        }
        out.pairs.push(TrianglePair {
            tgt: tri,
            src: tri,
            tgt_face: i as u32,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corr::parse_correspondence;
    use crate::error::Error;
    use crate::fixtures;

    fn two_tri_square() -> UvMesh {
        fixtures::grid_mesh(1)
    }

    #[test]
    fn identity_map_stores_pixel_centers_exactly() {
        let mesh = two_tri_square();
        let resolved = identity_pairs(&mesh);
        let map = build_sampling_map(&resolved.pairs, 64, 64, DEFAULT_EPS, [0; 16]);
        assert!(map.mask.iter().all(|&m| m == 1), "mask fully set");
        for j in 0..64usize {
            for i in 0..64usize {
                let expect = [
                    ((i as f64 + 0.5) / 64.0) as f32,
                    ((j as f64 + 0.5) / 64.0) as f32,
                ];
                assert_eq!(map.src_uv[j * 64 + i], expect, "pixel ({i},{j})");
            }
        }
    }

    #[test]
    fn translated_source_shifts_every_covered_pixel() {
        let shift = Vec2::new(0.25, 0.25);
        let tgt = Triangle2D::new(Vec2::new(0.1, 0.1), Vec2::new(0.6, 0.1), Vec2::new(0.1, 0.6));
        let src = Triangle2D::new(tgt.a + shift, tgt.b + shift, tgt.c + shift);
        let pairs = [TrianglePair {
            tgt,
            src,
            tgt_face: 0,
        }];
        let map = build_sampling_map(&pairs, 64, 64, DEFAULT_EPS, [0; 16]);
        let mut covered = 0usize;
        for j in 0..64usize {
            for i in 0..64usize {
                if map.mask[j * 64 + i] == 0 {
                    continue;
                }
                covered += 1;
                let center = Vec2::new((i as f64 + 0.5) / 64.0, (j as f64 + 0.5) / 64.0);
                let got = map.src_uv[j * 64 + i];
                assert!((got[0] as f64 - (center.x + 0.25)).abs() < 1e-6);
                assert!((got[1] as f64 - (center.y + 0.25)).abs() < 1e-6);
            }
        }
        assert!(covered > 0);
    }

    #[test]
    fn empty_pairs_give_all_clear_mask() {
        let map = build_sampling_map(&[], 16, 16, DEFAULT_EPS, [0; 16]);
        assert!(map.mask.iter().all(|&m| m == 0));
        assert!(map.src_uv.iter().all(|uv| *uv == [-1.0, -1.0]));
        assert_eq!(map.mask_coverage(), 0.0);
    }

    #[test]
    fn resolve_identity_vertex_map_pairs_every_face() {
        let mesh = two_tri_square();
        let corr = parse_correspondence(r#"{"mode":"vertex","pairs":{"0":0,"1":1,"2":2,"3":3}}"#)
            .unwrap();
        let resolved = resolve_pairs(&mesh, &mesh, &corr).unwrap();
        assert_eq!(resolved.pairs.len(), 2);
        assert_eq!(resolved.skipped_total(), 0);
        for p in &resolved.pairs {
            assert_eq!(p.tgt, p.src);
        }
    }

    #[test]
    fn resolve_empty_correspondence_skips_everything() {
        let mesh = two_tri_square();
        let corr = parse_correspondence(r#"{"mode":"vertex","pairs":{}}"#).unwrap();
        let resolved = resolve_pairs(&mesh, &mesh, &corr).unwrap();
        assert!(resolved.pairs.is_empty());
        assert_eq!(resolved.skipped_unmapped, mesh.face_count());
    }

    #[test]
    fn resolve_face_mode_aligns_corners_by_order() {
        let mesh = fixtures::grid_mesh(4); // 32 faces
        let corr = parse_correspondence(r#"{"mode":"face","pairs":{"5":12}}"#).unwrap();
        let resolved = resolve_pairs(&mesh, &mesh, &corr).unwrap();
        assert_eq!(resolved.pairs.len(), 1);
        let p = &resolved.pairs[0];
        assert_eq!(p.tgt_face, 5);
        assert_eq!(p.tgt, mesh.uv_triangle(5));
        assert_eq!(p.src, mesh.uv_triangle(12));
    }

    #[test]
    fn resolve_rejects_out_of_range_source_face() {
        let mesh = two_tri_square();
        let corr = parse_correspondence(r#"{"mode":"face","pairs":{"0":99}}"#).unwrap();
        assert!(matches!(
            resolve_pairs(&mesh, &mesh, &corr),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn fingerprint_is_stable_and_input_sensitive() {
        let mesh = two_tri_square();
        let corr = parse_correspondence(r#"{"mode":"vertex","pairs":{"0":0}}"#).unwrap();
        let params = BuildParams {
            width: 64,
            height: 64,
            eps: DEFAULT_EPS,
        };
        let a = fingerprint(&mesh, &mesh, &corr, &params);
        let b = fingerprint(&mesh, &mesh, &corr, &params);
        assert_eq!(a, b);

        let eps_changed = BuildParams {
            eps: 1e-6,
            ..params
        };
        assert_ne!(a, fingerprint(&mesh, &mesh, &corr, &eps_changed));

        let mut perturbed = mesh.clone();
        perturbed.uv_coords[0].x += 1e-6;
        assert_ne!(a, fingerprint(&perturbed, &mesh, &corr, &params));
    }

    #[test]
    fn coverage_monotonic_under_added_pair() {
        let mesh = fixtures::grid_mesh(2);
        let all = identity_pairs(&mesh);
        let fewer = &all.pairs[..all.pairs.len() - 1];
        let small = build_sampling_map(fewer, 32, 32, DEFAULT_EPS, [0; 16]);
        let big = build_sampling_map(&all.pairs, 32, 32, DEFAULT_EPS, [0; 16]);
        for k in 0..small.mask.len() {
            if small.mask[k] != 0 {
                assert_eq!(big.mask[k], 1);
                assert_eq!(big.src_uv[k], small.src_uv[k]);
            }
        }
    }
}
