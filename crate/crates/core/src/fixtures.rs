//! Deterministic synthetic fixtures.
//!
//! These stand in for licensed body/head model assets: the "head/body"
//! pair maps a sub-region of a large UV layout onto a full small
//! layout, which is the same shape of problem as transferring a face
//! region between a full-body layout and a head-only layout.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corr::{CorrMode, CorrespondenceMap};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mesh::UvMesh;
use crate::texture::{save_png, Texture};

/// A regular n-by-n cell grid over [0,1]^2; each cell is two triangles
/// fanned as (a,b,c),(a,c,d), so the mesh has 2*n^2 faces. Positions
/// and UVs share indices; positions carry the UV point at z = 0.
pub fn grid_mesh(n: u32) -> UvMesh {
    let verts = (n + 1) * (n + 1);
    let mut positions = Vec::with_capacity(verts as usize);
    let mut uv_coords = Vec::with_capacity(verts as usize);
    for gy in 0..=n {
        for gx in 0..=n {
            let x = gx as f64 / n as f64;
            let y = gy as f64 / n as f64;
            positions.push([x, y, 0.0]);
            uv_coords.push(Vec2::new(x, y));
        }
    }
    let vid = |gx: u32, gy: u32| gy * (n + 1) + gx;
    let mut faces = Vec::with_capacity((2 * n * n) as usize);
    for cy in 0..n {
        for cx in 0..n {
            let a = vid(cx, cy);
            let b = vid(cx + 1, cy);
            let c = vid(cx + 1, cy + 1);
            let d = vid(cx, cy + 1);
            faces.push([(a, a), (b, b), (c, c)]);
            faces.push([(a, a), (c, c), (d, d)]);
        }
    }
    UvMesh {
        positions,
        uv_coords,
        faces,
    }
}

/// Identity vertex correspondence over every vertex of `mesh`.
pub fn identity_vertex_corr(mesh: &UvMesh) -> CorrespondenceMap {
    CorrespondenceMap {
        mode: CorrMode::Vertex,
        pairs: (0..mesh.positions.len() as u32).map(|i| (i, i)).collect(),
    }
}

/// The head/body fixture: `body` is a 2n grid whose central n-by-n cell
/// block corresponds face-by-face to the full `head` grid (n cells).
pub struct HeadBodyFixture {
    pub body: UvMesh,
    pub head: UvMesh,
    /// Face mode, target = head, source = body.
    pub head_from_body: CorrespondenceMap,
    /// Face mode, target = body, source = head.
    pub body_from_head: CorrespondenceMap,
}

pub fn head_body_fixture(n: u32) -> HeadBodyFixture {
    let body = grid_mesh(2 * n);
    let head = grid_mesh(n);
    let q = n / 2; // cell offset of the head region inside the body grid
    let mut fwd = BTreeMap::new();
    let mut rev = BTreeMap::new();
    for hy in 0..n {
        for hx in 0..n {
            let head_cell = hy * n + hx;
            let body_cell = (hy + q) * (2 * n) + (hx + q);
            for t in 0..2 {
                let hf = 2 * head_cell + t;
                let bf = 2 * body_cell + t;
                fwd.insert(hf, bf);
                rev.insert(bf, hf);
            }
        }
    }
    HeadBodyFixture {
        body,
        head,
        head_from_body: CorrespondenceMap {
            mode: CorrMode::Face,
            pairs: fwd,
        },
        body_from_head: CorrespondenceMap {
            mode: CorrMode::Face,
            pairs: rev,
        },
    }
}

/// Smooth RGB gradient; the round-trip quality fixture.
pub fn gradient_texture(n: u32) -> Texture {
    let d = (n - 1).max(1) as f32;
    Texture::from_f32(n, n, 3, |x, y| {
        [
            x as f32 / d,
            y as f32 / d,
            0.5 + 0.5 * ((x as f32 - y as f32) / d),
            1.0,
        ]
    })
}

pub fn checkerboard_texture(n: u32, cell: u32) -> Texture {
    Texture::from_f32(n, n, 3, |x, y| {
        if ((x / cell) + (y / cell)) % 2 == 0 {
            [1.0, 1.0, 1.0, 1.0]
        } else {
            [0.0, 0.0, 0.0, 1.0]
        }
    })
}

pub fn noise_texture(n: u32, seed: u64) -> Texture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Texture::new(n, n, 3);
    rng.fill(t.data.as_mut_slice());
    t
}

/// Serializes the mesh as the OBJ subset the loader accepts; grid
/// meshes are written as quads to exercise fan triangulation on reload.
pub fn write_obj(mesh: &UvMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for p in &mesh.positions {
        writeln!(out, "v {} {} {}", p[0], p[1], p[2]).unwrap();
    }
    for uv in &mesh.uv_coords {
        writeln!(out, "vt {} {}", uv.x, uv.y).unwrap();
    }
    // Re-merge triangle pairs that came from one quad: (a,b,c),(a,c,d).
    let mut i = 0;
    while i < mesh.faces.len() {
        let f = &mesh.faces[i];
        if i + 1 < mesh.faces.len() {
            let g = &mesh.faces[i + 1];
            if g[0] == f[0] && g[1] == f[2] {
                writeln!(
                    out,
                    "f {} {} {} {}",
                    corner(f[0]),
                    corner(f[1]),
                    corner(f[2]),
                    corner(g[2])
                )
                .unwrap();
                i += 2;
                continue;
            }
        }
        writeln!(out, "f {} {} {}", corner(f[0]), corner(f[1]), corner(f[2])).unwrap();
        i += 1;
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn corner((pi, ti): (u32, u32)) -> String {
    format!("{}/{}", pi + 1, ti + 1)
}

/// Writes the full fixture set: identity grid pair, head/body pair, and
/// synthetic textures. Everything is a pure function of `grid_n` and
/// `seed`.
pub fn generate_fixture_set(out_dir: impl AsRef<Path>, grid_n: u32, seed: u64) -> Result<()> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let grid = grid_mesh(grid_n);
    write_obj(&grid, dir.join("grid_src.obj"))?;
    write_obj(&grid, dir.join("grid_tgt.obj"))?;
    write_corr(&identity_vertex_corr(&grid), dir.join("corr_identity.json"))?;

    let hb = head_body_fixture(grid_n);
    write_obj(&hb.body, dir.join("body.obj"))?;
    write_obj(&hb.head, dir.join("head.obj"))?;
    write_corr(&hb.head_from_body, dir.join("corr_head_from_body.json"))?;
    write_corr(&hb.body_from_head, dir.join("corr_body_from_head.json"))?;

    for size in [256u32, 1024, 2048] {
        save_png(
            &gradient_texture(size),
            dir.join(format!("gradient_{size}.png")),
        )?;
    }
    for size in [256u32, 1024] {
        save_png(
            &checkerboard_texture(size, 16),
            dir.join(format!("checker_{size}.png")),
        )?;
        save_png(
            &noise_texture(size, seed),
            dir.join(format!("noise_{size}.png")),
        )?;
    }
    Ok(())
}

fn write_corr(map: &CorrespondenceMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, map.to_json()).map_err(|e| Error::io(path, e))
}
