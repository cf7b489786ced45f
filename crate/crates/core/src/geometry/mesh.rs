// SPDX-License-Identifier: Apache-2.0

use super::{add, cross, dot, narrow, norm, scale, sub, widen, GeometryError, Vec3};
use serde::{Deserialize, Serialize};

/// Where a mesh sits on Earth. Heading is in degrees clockwise from north.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoAnchor {
    pub lat: f64,
    pub lon: f64,
    pub heading: f64,
}

/// Indexed triangle mesh in model units.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f32; 3]>,
    pub triangles: Vec<[u32; 3]>,
    pub normals: Option<Vec<[f32; 3]>>,
    pub geo: Option<GeoAnchor>,
}

impl Mesh {
    pub fn new(vertices: Vec<[f32; 3]>, triangles: Vec<[u32; 3]>) -> Self {
        Mesh {
            vertices,
            triangles,
            normals: None,
            geo: None,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let len = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i as usize >= len) {
                return Err(GeometryError::IndexOutOfRange {
                    triangle: t,
                    index,
                    len,
                });
            }
        }
        if let Some(normals) = &self.normals {
            if normals.len() != len {
                return Err(GeometryError::NormalCount {
                    normals: normals.len(),
                    vertices: len,
                });
            }
            for (i, n) in normals.iter().enumerate() {
                if (norm(widen(*n)) - 1.0).abs() > 1e-6 {
                    return Err(GeometryError::NonUnitNormal(i));
                }
            }
        }
        Ok(())
    }

    /// Axis-aligned bounds as `(min, max)`, or `None` for an empty mesh.
    pub fn bounds(&self) -> Option<([f32; 3], [f32; 3])> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| {
            (
                [lo[0].min(v[0]), lo[1].min(v[1]), lo[2].min(v[2])],
                [hi[0].max(v[0]), hi[1].max(v[1]), hi[2].max(v[2])],
            )
        }))
    }
}

/// Signed volume enclosed by a closed mesh, positive when triangles wind
/// counter-clockwise seen from outside in a right-handed frame.
pub fn signed_volume(mesh: &Mesh) -> f64 {
    mesh.triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| widen(mesh.vertices[i as usize]));
            dot(a, cross(b, c))
        })
        .sum::<f64>()
        / 6.0
}

/// Converts from the right-handed z-up model frame to the left-handed y-up
/// render frame: `(x, y, z) -> (-x, z, y)`, with triangle winding reversed.
///
/// The map is its own inverse.
pub fn to_render_coords(mesh: &Mesh) -> Mesh {
    let flip = |v: &[f32; 3]| [-v[0], v[2], v[1]];
    Mesh {
        vertices: mesh.vertices.iter().map(flip).collect(),
        triangles: mesh.triangles.iter().map(|&[a, b, c]| [a, c, b]).collect(),
        normals: mesh.normals.as_ref().map(|n| n.iter().map(flip).collect()),
        geo: mesh.geo,
    }
}

pub fn from_render_coords(mesh: &Mesh) -> Mesh {
    to_render_coords(mesh)
}

/// Area-weighted per-vertex normals.
///
/// Returns the mesh with normals set and the indices of vertices whose
/// accumulated normal vanished; those get `(0, 0, 1)`.
pub fn compute_normals(mesh: &Mesh) -> (Mesh, Vec<u32>) {
    let mut acc: Vec<Vec3> = vec![[0.0; 3]; mesh.vertices.len()];
    for tri in &mesh.triangles {
        let [a, b, c] = tri.map(|i| widen(mesh.vertices[i as usize]));
        let face = cross(sub(b, a), sub(c, a));
        for &i in tri {
            acc[i as usize] = add(acc[i as usize], face);
        }
    }
    let mut fallback = Vec::new();
    let normals = acc
        .into_iter()
        .enumerate()
        .map(|(i, n)| {
            let len = norm(n);
            if len > f64::EPSILON * 16.0 && len.is_finite() {
                narrow(scale(n, 1.0 / len))
            } else {
                fallback.push(i as u32);
                [0.0, 0.0, 1.0]
            }
        })
        .collect();
    if !fallback.is_empty() {
        log::warn!(
            "{} vertices have no well-defined normal, using +z",
            fallback.len()
        );
    }
    let mut out = mesh.clone();
    out.normals = Some(normals);
    (out, fallback)
}
