//! Mesh ingestion: triangle meshes with per-corner UV coordinates.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{Triangle2D, Vec2};

/// One face corner: (position index, uv index), zero-based.
pub type Corner = (u32, u32);

/// A triangle mesh with a UV layout. Positions are carried through
/// untouched; the transfer math only reads `uv_coords` and `faces`.
#[derive(Debug, Clone, PartialEq)]
pub struct UvMesh {
    pub positions: Vec<[f64; 3]>,
    pub uv_coords: Vec<Vec2>,
    pub faces: Vec<[Corner; 3]>,
}

impl UvMesh {
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// The UV-space triangle of face `idx`.
    pub fn uv_triangle(&self, idx: usize) -> Triangle2D {
        let f = &self.faces[idx];
        Triangle2D::new(
            self.uv_coords[f[0].1 as usize],
            self.uv_coords[f[1].1 as usize],
            self.uv_coords[f[2].1 as usize],
        )
    }

    pub fn validate(&self) -> Result<()> {
        for f in &self.faces {
            for &(pi, ti) in f {
                if pi as usize >= self.positions.len() {
                    return Err(Error::IndexOutOfRange {
                        what: "position",
                        index: pi,
                        len: self.positions.len(),
                    });
                }
                if ti as usize >= self.uv_coords.len() {
                    return Err(Error::IndexOutOfRange {
                        what: "uv",
                        index: ti,
                        len: self.uv_coords.len(),
                    });
                }
            }
        }
        for uv in &self.uv_coords {
            if !(0.0..=1.0).contains(&uv.x) || !(0.0..=1.0).contains(&uv.y) {
                return Err(Error::Invalid(format!(
                    "uv coordinate ({}, {}) outside [0,1]^2",
                    uv.x, uv.y
                )));
            }
        }
        Ok(())
    }
}

/// Loads the ASCII OBJ subset: `v`, `vt`, `f` with `v/vt` or `v/vt/vn`
/// corners. Faces with more than 3 corners are fan-triangulated as
/// (0, i, i+1) in corner order. UVs outside [0,1]^2 are rejected.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<UvMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text, path)
}

fn parse_obj(text: &str, path: &Path) -> Result<UvMesh> {
    let mut positions = Vec::new();
    let mut uv_coords = Vec::new();
    let mut faces: Vec<[Corner; 3]> = Vec::new();

    for (line_idx, raw) in text.lines().enumerate() {
        let lineno = line_idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap();
        match key {
            "v" => {
                let p = parse_floats::<3>(&mut parts, path, lineno, "v")?;
                positions.push(p);
            }
            "vt" => {
                let t = parse_floats::<2>(&mut parts, path, lineno, "vt")?;
                if !(0.0..=1.0).contains(&t[0]) || !(0.0..=1.0).contains(&t[1]) {
                    return Err(Error::UvOutOfRange {
                        path: path.to_path_buf(),
                        line: lineno,
                        u: t[0],
                        v: t[1],
                    });
                }
                uv_coords.push(Vec2::new(t[0], t[1]));
            }
            "f" => {
                let mut corners: Vec<Corner> = Vec::new();
                for spec in parts {
                    corners.push(parse_corner(
                        spec,
                        positions.len(),
                        uv_coords.len(),
                        path,
                        lineno,
                    )?);
                }
                if corners.len() < 3 {
                    return Err(Error::ObjParse {
                        path: path.to_path_buf(),
                        line: lineno,
                        msg: format!("face with {} corners", corners.len()),
                    });
                }
                // Fan triangulation (0, i, i+1).
                for i in 1..corners.len() - 1 {
                    faces.push([corners[0], corners[i], corners[i + 1]]);
                }
            }
            // Ignore everything else (vn, o, g, s, usemtl, mtllib, ...).
            _ => {}
        }
    }

    let mesh = UvMesh {
        positions,
        uv_coords,
        faces,
    };
    mesh.validate()?;
    Ok(mesh)
}

fn parse_floats<const N: usize>(
    parts: &mut std::str::SplitWhitespace,
    path: &Path,
    lineno: usize,
    key: &str,
) -> Result<[f64; N]> {
    let mut out = [0.0; N];
    for slot in out.iter_mut() {
        let tok = parts.next().ok_or_else(|| Error::ObjParse {
            path: path.to_path_buf(),
            line: lineno,
            msg: format!("`{key}` needs {N} numbers"),
        })?;
        *slot = tok.parse::<f64>().map_err(|_| Error::ObjParse {
            path: path.to_path_buf(),
            line: lineno,
            msg: format!("bad number `{tok}`"),
        })?;
    }
    Ok(out)
}

fn parse_corner(
    spec: &str,
    n_pos: usize,
    n_uv: usize,
    path: &Path,
    lineno: usize,
) -> Result<Corner> {
    let mut it = spec.split('/');
    let v = it.next().unwrap_or("");
    let vt = it.next().unwrap_or("");
    if vt.is_empty() {
        return Err(Error::MissingTexCoord {
            path: path.to_path_buf(),
            line: lineno,
        });
    }
    let vi = parse_obj_index(v, n_pos, path, lineno)?;
    let ti = parse_obj_index(vt, n_uv, path, lineno)?;
    Ok((vi, ti))
}

// OBJ indices are 1-based; negative indices count from the end.
fn parse_obj_index(tok: &str, len: usize, path: &Path, lineno: usize) -> Result<u32> {
    let i: i64 = tok.parse().map_err(|_| Error::ObjParse {
        path: path.to_path_buf(),
        line: lineno,
        msg: format!("bad index `{tok}`"),
    })?;
    let zero_based = if i > 0 {
        i - 1
    } else if i < 0 {
        len as i64 + i
    } else {
        -1
    };
    if zero_based < 0 || zero_based as usize >= len {
        return Err(Error::IndexOutOfRange {
            what: "obj",
            index: i.unsigned_abs().min(u32::MAX as u64) as u32,
            len,
        });
    }
    Ok(zero_based as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT_QUAD: &str = "\
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
vt 0 0
vt 1 0
vt 1 1
vt 0 1
f 1/1 2/2 3/3 4/4
";

    #[test]
    fn unit_quad_fan_triangulates_to_two_faces() {
        let m = parse_obj(UNIT_QUAD, Path::new("quad.obj")).unwrap();
        assert_eq!(m.positions.len(), 4);
        assert_eq!(m.uv_coords.len(), 4);
        assert_eq!(m.faces.len(), 2);
        assert_eq!(m.faces[0], [(0, 0), (1, 1), (2, 2)]);
        assert_eq!(m.faces[1], [(0, 0), (2, 2), (3, 3)]);
    }

    #[test]
    fn face_without_vt_is_rejected() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
        let err = parse_obj(text, Path::new("bad.obj")).unwrap_err();
        assert!(matches!(err, Error::MissingTexCoord { line: 4, .. }));
    }

    #[test]
    fn uv_out_of_range_rejected() {
        let text = "vt 1.5 0\n";
        let err = parse_obj(text, Path::new("bad.obj")).unwrap_err();
        assert!(matches!(err, Error::UvOutOfRange { line: 1, .. }));
    }

    #[test]
    fn v_vt_vn_corner_syntax_accepted() {
        let text = "\
v 0 0 0
v 1 0 0
v 0 1 0
vt 0 0
vt 1 0
vt 0 1
vn 0 0 1
f 1/1/1 2/2/1 3/3/1
";
        let m = parse_obj(text, Path::new("ok.obj")).unwrap();
        assert_eq!(m.faces.len(), 1);
    }

    #[test]
    fn reload_is_identical() {
        let a = parse_obj(UNIT_QUAD, Path::new("q.obj")).unwrap();
        let b = parse_obj(UNIT_QUAD, Path::new("q.obj")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fan_triangulation_areas_sum_to_polygon_area() {
        // Convex pentagon in UV space.
        let text = "\
v 0 0 0
v 1 0 0
v 1 1 0
v 0.5 1.3 0
v 0 1 0
vt 0.5 0.0
vt 1.0 0.35
vt 0.8 0.95
vt 0.2 0.95
vt 0.0 0.35
f 1/1 2/2 3/3 4/4 5/5
";
        let m = parse_obj(text, Path::new("pent.obj")).unwrap();
        assert_eq!(m.faces.len(), 3);
        let sum: f64 = (0..3).map(|i| m.uv_triangle(i).signed_area()).sum();
        // Shoelace over the pentagon's UVs.
        let uvs = &m.uv_coords;
        let mut shoelace = 0.0;
        for i in 0..uvs.len() {
            let j = (i + 1) % uvs.len();
            shoelace += uvs[i].x * uvs[j].y - uvs[j].x * uvs[i].y;
        }
        shoelace *= 0.5;
        assert!((sum - shoelace).abs() < 1e-12);
    }

    #[test]
    fn face_index_out_of_range() {
        let text = "v 0 0 0\nvt 0 0\nf 1/1 2/1 3/1\n";
        assert!(matches!(
            parse_obj(text, Path::new("bad.obj")),
            Err(Error::IndexOutOfRange { .. })
        ));
    }
}
