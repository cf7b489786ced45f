// SPDX-License-Identifier: Apache-2.0

use super::{add, cross, dot, narrow, norm, scale, sub, GeometryError, Mesh, Vec3};
use std::f64::consts::TAU;

/// Axis-aligned cube of edge `size` centred on `center`.
///
/// Vertex `i` sits at the corner whose x/y/z offsets are given by bits 0/1/2
/// of `i`. Every face is split along the diagonal joining its even-parity
/// corners, so each corner sees the same triangle count from its three faces.
pub fn box_mesh(center: Vec3, size: f64) -> Result<Mesh, GeometryError> {
    if !(size.is_finite() && size > 0.0) {
        return Err(GeometryError::InvalidSize(size));
    }
    if center.iter().any(|c| !c.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let half = size / 2.0;
    let corner = |i: u32| -> Vec3 {
        let mut p = center;
        for (axis, c) in p.iter_mut().enumerate() {
            *c += if i & (1 << axis) != 0 { half } else { -half };
        }
        p
    };
    let vertices: Vec<[f32; 3]> = (0..8).map(|i| narrow(corner(i))).collect();

    let mut triangles = Vec::with_capacity(12);
    for axis in 0..3 {
        for side in 0..2u32 {
            let face: Vec<u32> = (0..8).filter(|i| (i >> axis) & 1 == side).collect();
            let (diag, off): (Vec<u32>, Vec<u32>) =
                face.iter().partition(|i| i.count_ones() % 2 == 0);
            let mut outward = [0.0; 3];
            outward[axis] = if side == 1 { 1.0 } else { -1.0 };
            for &o in &off {
                let mut t = [diag[0], diag[1], o];
                let n = cross(sub(corner(t[1]), corner(t[0])), sub(corner(t[2]), corner(t[0])));
                if dot(n, outward) < 0.0 {
                    t.swap(1, 2);
                }
                triangles.push(t);
            }
        }
    }
    Ok(Mesh::new(vertices, triangles))
}

/// Open tube of `sides`-gon cross-section swept along a polyline.
///
/// Ring frames are parallel-transported from the first segment, so nearly
/// collinear stretches do not twist. No end caps.
pub fn pipe_mesh(curve: &[Vec3], radius: f64, sides: usize) -> Result<Mesh, GeometryError> {
    if sides < 3 {
        return Err(GeometryError::TooFewSides(sides));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(GeometryError::InvalidRadius(radius));
    }
    if curve.len() < 2 {
        return Err(GeometryError::CurveTooShort(curve.len()));
    }
    if curve.iter().flatten().any(|c| !c.is_finite()) {
        return Err(GeometryError::NonFinite);
    }

    let tangents = vertex_tangents(curve);
    let mut normal = initial_normal(tangents[0]);
    let mut frames = Vec::with_capacity(curve.len());
    for (i, &t) in tangents.iter().enumerate() {
        if i > 0 {
            normal = transport(normal, tangents[i - 1], t);
        }
        frames.push((normal, cross(t, normal)));
    }

    let mut vertices = Vec::with_capacity(curve.len() * sides);
    for (p, (n, b)) in curve.iter().zip(&frames) {
        for j in 0..sides {
            let theta = TAU * j as f64 / sides as f64;
            let offset = add(scale(*n, theta.cos()), scale(*b, theta.sin()));
            vertices.push(narrow(add(*p, scale(offset, radius))));
        }
    }

    let sides_u = sides as u32;
    let mut triangles = Vec::with_capacity((curve.len() - 1) * sides * 2);
    for i in 0..(curve.len() as u32 - 1) {
        for j in 0..sides_u {
            let k = (j + 1) % sides_u;
            let a = i * sides_u + j;
            let b = (i + 1) * sides_u + j;
            let c = (i + 1) * sides_u + k;
            let d = i * sides_u + k;
            triangles.push([a, c, b]);
            triangles.push([a, d, c]);
        }
    }
    Ok(Mesh::new(vertices, triangles))
}

fn unit(v: Vec3) -> Option<Vec3> {
    let len = norm(v);
    (len > 1e-12).then(|| scale(v, 1.0 / len))
}

fn vertex_tangents(curve: &[Vec3]) -> Vec<Vec3> {
    // zero-length segments inherit the previous direction
    let mut segments: Vec<Option<Vec3>> = curve.windows(2).map(|w| unit(sub(w[1], w[0]))).collect();
    let first = segments.iter().flatten().next().copied().unwrap_or([0.0, 0.0, 1.0]);
    let mut last = first;
    for s in segments.iter_mut() {
        match s {
            Some(d) => last = *d,
            None => *s = Some(last),
        }
    }
    let segments: Vec<Vec3> = segments.into_iter().flatten().collect();
    (0..curve.len())
        .map(|i| {
            if i == 0 {
                segments[0]
            } else if i == curve.len() - 1 {
                segments[i - 1]
            } else {
                unit(add(segments[i - 1], segments[i])).unwrap_or(segments[i])
            }
        })
        .collect()
}

fn initial_normal(t: Vec3) -> Vec3 {
    let axis = if t[0].abs() <= t[1].abs() && t[0].abs() <= t[2].abs() {
        [1.0, 0.0, 0.0]
    } else if t[1].abs() <= t[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    unit(cross(t, axis)).expect("axis chosen least aligned with tangent")
}

/// Rotates `n` by the minimal rotation taking `from` to `to`, then
/// re-orthogonalises against `to`.
fn transport(n: Vec3, from: Vec3, to: Vec3) -> Vec3 {
    let axis = cross(from, to);
    let sin = norm(axis);
    let cos = dot(from, to).clamp(-1.0, 1.0);
    let rotated = if sin < 1e-12 {
        n
    } else {
        let k = scale(axis, 1.0 / sin);
        // Rodrigues
        add(
            add(scale(n, cos), scale(cross(k, n), sin)),
            scale(k, dot(k, n) * (1.0 - cos)),
        )
    };
    let ortho = sub(rotated, scale(to, dot(rotated, to)));
    unit(ortho).unwrap_or_else(|| initial_normal(to))
}
