// SPDX-License-Identifier: Apache-2.0

//! Indexed triangle meshes and the operations needed to ship them to a
//! renderer: handedness conversion, per-vertex normals, primitive
//! tessellation and Wavefront OBJ interchange.

mod mesh;
mod obj;
mod tessellate;

pub use mesh::{
    compute_normals, from_render_coords, signed_volume, to_render_coords, GeoAnchor, Mesh,
};
pub use obj::{export_obj, parse_obj, ObjParse};
pub use tessellate::{box_mesh, pipe_mesh};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("triangle {triangle} references vertex {index} but mesh has {len} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: u32,
        len: usize,
    },
    #[error("normals length {normals} does not match vertex count {vertices}")]
    NormalCount { normals: usize, vertices: usize },
    #[error("normal {0} is not unit length")]
    NonUnitNormal(usize),
    #[error("box size must be positive and finite, got {0}")]
    InvalidSize(f64),
    #[error("pipe needs at least 3 sides, got {0}")]
    TooFewSides(usize),
    #[error("pipe radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("curve needs at least 2 points, got {0}")]
    CurveTooShort(usize),
    #[error("non-finite coordinate in input")]
    NonFinite,
    #[error("line {line}: malformed face: {reason}")]
    MalformedFace { line: usize, reason: String },
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
}

pub(crate) type Vec3 = [f64; 3];

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn widen(v: [f32; 3]) -> Vec3 {
    [v[0] as f64, v[1] as f64, v[2] as f64]
}

pub(crate) fn narrow(v: Vec3) -> [f32; 3] {
    [v[0] as f32, v[1] as f32, v[2] as f32]
}
