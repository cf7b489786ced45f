// SPDX-License-Identifier: Apache-2.0

//! Wavefront OBJ subset: `v`, `vn`, `f`, with `o`/`g` starting new meshes.

use super::{norm, widen, GeometryError, Mesh};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObjParse {
    pub meshes: Vec<Mesh>,
    /// Non-blank, non-comment lines that were not understood.
    pub skipped_lines: usize,
}

#[derive(Default)]
struct Group {
    // global vertex index and optional global normal index per corner
    triangles: Vec<[(usize, Option<usize>); 3]>,
}

pub fn parse_obj(text: &str) -> Result<ObjParse, GeometryError> {
    let mut positions: Vec<[f32; 3]> = Vec::new();
    let mut normals: Vec<[f32; 3]> = Vec::new();
    let mut groups = vec![Group::default()];
    let mut skipped_lines = 0;

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let keyword = parts.next().unwrap_or_default();
        match keyword {
            "v" | "vn" => {
                let coords: Vec<f32> = parts
                    .take(3)
                    .map(str::parse)
                    .collect::<Result<_, _>>()
                    .map_err(|e| GeometryError::MalformedRecord {
                        line: line_no,
                        reason: format!("{e}"),
                    })?;
                let [x, y, z] = coords[..] else {
                    return Err(GeometryError::MalformedRecord {
                        line: line_no,
                        reason: format!("`{keyword}` needs 3 coordinates"),
                    });
                };
                if keyword == "v" {
                    positions.push([x, y, z]);
                } else {
                    normals.push([x, y, z]);
                }
            }
            "f" => {
                let corners = parts
                    .map(|tok| face_corner(tok, positions.len(), normals.len(), line_no))
                    .collect::<Result<Vec<_>, _>>()?;
                if corners.len() < 3 {
                    return Err(GeometryError::MalformedFace {
                        line: line_no,
                        reason: format!("{} corners, need at least 3", corners.len()),
                    });
                }
                let group = groups.last_mut().expect("at least one group");
                for k in 1..corners.len() - 1 {
                    group
                        .triangles
                        .push([corners[0], corners[k], corners[k + 1]]);
                }
            }
            "o" | "g" => groups.push(Group::default()),
            _ => skipped_lines += 1,
        }
    }

    let meshes = groups
        .into_iter()
        .filter(|g| !g.triangles.is_empty())
        .map(|g| build_mesh(g, &positions, &normals))
        .collect();
    Ok(ObjParse {
        meshes,
        skipped_lines,
    })
}

fn resolve(index: &str, len: usize, line: usize, what: &str) -> Result<usize, GeometryError> {
    let bad = |reason: String| GeometryError::MalformedFace { line, reason };
    let i: i64 = index
        .parse()
        .map_err(|_| bad(format!("bad {what} index {index:?}")))?;
    let resolved = match i {
        0 => return Err(bad(format!("{what} index 0 (indices are 1-based)"))),
        i if i > 0 => i - 1,
        i => len as i64 + i,
    };
    if resolved < 0 || resolved as usize >= len {
        return Err(bad(format!("{what} index {i} out of range (have {len})")));
    }
    Ok(resolved as usize)
}

fn face_corner(
    tok: &str,
    n_positions: usize,
    n_normals: usize,
    line: usize,
) -> Result<(usize, Option<usize>), GeometryError> {
    let mut fields = tok.split('/');
    let v = resolve(fields.next().unwrap_or_default(), n_positions, line, "vertex")?;
    let _texture = fields.next();
    let vn = match fields.next() {
        Some(s) if !s.is_empty() => Some(resolve(s, n_normals, line, "normal")?),
        _ => None,
    };
    Ok((v, vn))
}

fn build_mesh(group: Group, positions: &[[f32; 3]], normals: &[[f32; 3]]) -> Mesh {
    // local vertices in ascending global order, so export/parse is stable
    let local: BTreeMap<usize, u32> = group
        .triangles
        .iter()
        .flatten()
        .map(|&(v, _)| (v, 0))
        .collect::<BTreeMap<_, _>>()
        .into_keys()
        .enumerate()
        .map(|(i, v)| (v, i as u32))
        .collect();
    let vertices = local.keys().map(|&v| positions[v]).collect::<Vec<_>>();
    let triangles = group
        .triangles
        .iter()
        .map(|t| t.map(|(v, _)| local[&v]))
        .collect();

    let all_have_normals = group.triangles.iter().flatten().all(|(_, n)| n.is_some());
    let mesh_normals = all_have_normals.then(|| {
        let mut out = vec![[0.0f32, 0.0, 1.0]; vertices.len()];
        for &(v, n) in group.triangles.iter().flatten() {
            out[local[&v] as usize] = unit_f32(normals[n.expect("checked above")]);
        }
        out
    });
    Mesh {
        vertices,
        triangles,
        normals: mesh_normals,
        geo: None,
    }
}

fn unit_f32(n: [f32; 3]) -> [f32; 3] {
    let len = norm(widen(n));
    if (len - 1.0).abs() <= 1e-6 || len == 0.0 {
        n
    } else {
        n.map(|c| (c as f64 / len) as f32)
    }
}

/// Writes meshes as OBJ, one `o` block per mesh. Output is re-parseable by
/// [`parse_obj`] into the same meshes (geo anchors are not represented).
pub fn export_obj(meshes: &[Mesh]) -> String {
    let mut out = String::new();
    let mut offset = 1usize;
    for (i, mesh) in meshes.iter().enumerate() {
        let _ = writeln!(out, "o mesh{i}");
        for [x, y, z] in &mesh.vertices {
            let _ = writeln!(out, "v {x} {y} {z}");
        }
        if let Some(normals) = &mesh.normals {
            for [x, y, z] in normals {
                let _ = writeln!(out, "vn {x} {y} {z}");
            }
        }
        for tri in &mesh.triangles {
            let [a, b, c] = tri.map(|k| k as usize + offset);
            if mesh.normals.is_some() {
                let _ = writeln!(out, "f {a}//{a} {b}//{b} {c}//{c}");
            } else {
                let _ = writeln!(out, "f {a} {b} {c}");
            }
        }
        offset += mesh.vertices.len();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUAD: &str = "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3\nf 1 3 4\n";

    #[test]
    fn two_triangle_quad() {
        let p = parse_obj(QUAD).unwrap();
        assert_eq!(p.meshes.len(), 1);
        assert_eq!(p.meshes[0].vertices.len(), 4);
        assert_eq!(p.meshes[0].triangles, vec![[0, 1, 2], [0, 2, 3]]);
        assert_eq!(p.skipped_lines, 0);
    }

    #[test]
    fn polygon_is_fanned_and_crlf_accepted() {
        let text = "v 0 0 0\r\nv 1 0 0\r\nv 1 1 0\r\nv 0 1 0\r\nvt 0 0\r\nf 1/1 2/1 3/1 4/1\r\n";
        let p = parse_obj(text).unwrap();
        assert_eq!(p.meshes[0].triangles.len(), 2);
        assert_eq!(p.skipped_lines, 1);
    }

    #[test]
    fn zero_index_is_malformed() {
        let err = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n").unwrap_err();
        assert!(matches!(err, GeometryError::MalformedFace { line: 4, .. }));
        let err = parse_obj("v 0 0 0\nf 1 2 3\n").unwrap_err();
        assert!(matches!(err, GeometryError::MalformedFace { .. }));
    }

    #[test]
    fn objects_split_meshes_and_negative_indices_resolve() {
        let text = "o a\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\no b\nv 0 0 1\nv 1 0 1\nv 0 1 1\nf 4 5 6\n";
        let p = parse_obj(text).unwrap();
        assert_eq!(p.meshes.len(), 2);
        assert_eq!(p.meshes[1].vertices[0], [0.0, 0.0, 1.0]);
        assert_eq!(p.meshes[1].triangles, vec![[0, 1, 2]]);
    }

    #[test]
    fn export_round_trip_with_normals() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 2\nf 1//1 2//1 3//1\n";
        let p = parse_obj(text).unwrap();
        assert_eq!(p.meshes[0].normals.as_ref().unwrap()[0], [0.0, 0.0, 1.0]);
        let again = parse_obj(&export_obj(&p.meshes)).unwrap();
        assert_eq!(again.meshes, p.meshes);
    }
}
