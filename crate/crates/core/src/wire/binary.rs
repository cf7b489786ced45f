// SPDX-License-Identifier: Apache-2.0

use super::{Component, Control, MeshBody, MeshData, Role, WireError, WireMessage, MAGIC, VERSION};
use crate::geometry::GeoAnchor;
use crate::param::{Accuracy, ParameterUpdate, UpdateValue};

const KIND_COMPONENTS: u8 = 1;
const KIND_MESH_DATA: u8 = 2;
const KIND_PARAMETER_UPDATE: u8 = 3;
const KIND_CONTROL: u8 = 4;

const TAG_TOGGLE: u8 = 1;
const TAG_SLIDER: u8 = 2;
const TAG_LIST: u8 = 3;

const ROLE_DESIGNER: u8 = 1;
const ROLE_VIEWER: u8 = 2;

const HEADER_LEN: usize = 6;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn bool(&mut self, v: bool) {
        self.0.push(v as u8);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn i16(&mut self, v: i16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f32(&mut self, v: f32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn len(&mut self, n: usize) {
        self.u32(u32::try_from(n).expect("length fits in u32"));
    }
    fn bytes(&mut self, b: &[u8]) {
        self.len(b.len());
        self.0.extend_from_slice(b);
    }
    fn str(&mut self, s: &str) {
        self.bytes(s.as_bytes());
    }
}

/// Serializes `msg`. Total for every message whose lists and strings fit
/// in a u32 length.
pub fn encode(msg: &WireMessage) -> Vec<u8> {
    let mut w = Writer(Vec::with_capacity(64));
    w.0.extend_from_slice(&MAGIC);
    w.u8(VERSION);
    match msg {
        WireMessage::Components { items } => {
            w.u8(KIND_COMPONENTS);
            w.len(items.len());
            for c in items {
                component(&mut w, c);
            }
        }
        WireMessage::MeshData(m) => {
            w.u8(KIND_MESH_DATA);
            w.str(&m.guid);
            w.len(m.meshes.len());
            for mesh in &m.meshes {
                w.len(mesh.vertices.len());
                for v in &mesh.vertices {
                    v.iter().for_each(|c| w.f32(*c));
                }
                w.len(mesh.triangles.len());
                for t in &mesh.triangles {
                    t.iter().for_each(|i| w.u32(*i));
                }
            }
            w.bool(m.geo.is_some());
            if let Some(g) = &m.geo {
                w.f64(g.lat);
                w.f64(g.lon);
                w.f64(g.heading);
            }
        }
        WireMessage::ParameterUpdate(u) => {
            w.u8(KIND_PARAMETER_UPDATE);
            w.str(&u.guid);
            match u.value {
                UpdateValue::Boolean(b) => {
                    w.u8(TAG_TOGGLE);
                    w.bool(b);
                }
                UpdateValue::Number(n) => {
                    w.u8(TAG_SLIDER);
                    w.f64(n);
                }
                UpdateValue::Index(i) => {
                    w.u8(TAG_LIST);
                    w.u32(i);
                }
            }
        }
        WireMessage::Control(c) => {
            w.u8(KIND_CONTROL);
            control(&mut w, c);
        }
    }
    w.0
}

fn component(w: &mut Writer, c: &Component) {
    match c {
        Component::BooleanToggle { name, guid, value } => {
            w.u8(TAG_TOGGLE);
            w.str(name);
            w.str(guid);
            w.bool(*value);
        }
        Component::NumberSlider {
            name,
            guid,
            value,
            accuracy,
            min,
            max,
            epsilon,
            decimal_places,
        } => {
            w.u8(TAG_SLIDER);
            w.str(name);
            w.str(guid);
            w.f32(*value);
            w.u8(*accuracy as u8);
            w.f32(*min);
            w.f32(*max);
            w.f32(*epsilon);
            w.i16(*decimal_places);
        }
        Component::ListParameter {
            name,
            guid,
            items,
            selected,
        } => {
            w.u8(TAG_LIST);
            w.str(name);
            w.str(guid);
            w.len(items.len());
            items.iter().for_each(|i| w.str(i));
            w.u32(*selected);
        }
    }
}

fn control(w: &mut Writer, c: &Control) {
    match c {
        Control::Hello { role } => {
            w.u8(1);
            w.u8(match role {
                Role::Designer => ROLE_DESIGNER,
                Role::Viewer => ROLE_VIEWER,
            });
        }
        Control::HostAssign { you, address } => {
            w.u8(2);
            w.bool(*you);
            w.str(address);
        }
        Control::HostChanged { address } => {
            w.u8(3);
            w.str(address);
        }
        Control::LockRequest { guid } => {
            w.u8(4);
            w.str(guid);
        }
        Control::LockGrant { guid } => {
            w.u8(5);
            w.str(guid);
        }
        Control::LockDeny { guid, holder } => {
            w.u8(6);
            w.str(guid);
            w.str(holder);
        }
        Control::LockRelease { guid } => {
            w.u8(7);
            w.str(guid);
        }
        Control::Reject { guid, reason } => {
            w.u8(8);
            w.str(guid);
            w.str(reason);
        }
        Control::Presence { data } => {
            w.u8(9);
            w.bytes(data);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.buf.len() < n {
            return Err(WireError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }
    fn array<const N: usize>(&mut self) -> Result<[u8; N], WireError> {
        Ok(self.take(N)?.try_into().expect("exact length"))
    }
    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }
    fn bool(&mut self) -> Result<bool, WireError> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(WireError::InvalidValue("boolean byte must be 0 or 1")),
        }
    }
    fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn i16(&mut self) -> Result<i16, WireError> {
        Ok(i16::from_le_bytes(self.array()?))
    }
    fn f32(&mut self) -> Result<f32, WireError> {
        Ok(f32::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64, WireError> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    /// Reads a count and sizes a buffer no larger than the remaining input
    /// could fill, so a hostile count cannot force a huge allocation.
    fn count<T>(&mut self, min_elem: usize) -> Result<(usize, Vec<T>), WireError> {
        let n = self.u32()? as usize;
        let cap = n.min(self.buf.len() / min_elem.max(1));
        Ok((n, Vec::with_capacity(cap)))
    }
    fn bytes(&mut self) -> Result<Vec<u8>, WireError> {
        let n = self.u32()? as usize;
        Ok(self.take(n)?.to_vec())
    }
    fn string(&mut self) -> Result<String, WireError> {
        let n = self.u32()? as usize;
        std::str::from_utf8(self.take(n)?)
            .map(str::to_string)
            .map_err(|_| WireError::InvalidUtf8)
    }
}

/// Parses one message; the whole input must be consumed.
pub fn decode(bytes: &[u8]) -> Result<WireMessage, WireError> {
    if bytes.len() < HEADER_LEN {
        return Err(WireError::Truncated);
    }
    if bytes[..4] != MAGIC {
        return Err(WireError::BadMagic);
    }
    if bytes[4] != VERSION {
        return Err(WireError::UnsupportedVersion(bytes[4]));
    }
    let mut r = Reader { buf: &bytes[HEADER_LEN..] };
    let msg = match bytes[5] {
        KIND_COMPONENTS => {
            let (n, mut items) = r.count(1)?;
            for _ in 0..n {
                items.push(read_component(&mut r)?);
            }
            WireMessage::Components { items }
        }
        KIND_MESH_DATA => {
            let guid = r.string()?;
            let (n, mut meshes) = r.count(8)?;
            for _ in 0..n {
                let (nv, mut vertices) = r.count(12)?;
                for _ in 0..nv {
                    vertices.push([r.f32()?, r.f32()?, r.f32()?]);
                }
                let (nt, mut triangles) = r.count(12)?;
                for _ in 0..nt {
                    triangles.push([r.u32()?, r.u32()?, r.u32()?]);
                }
                meshes.push(MeshBody { vertices, triangles });
            }
            let geo = if r.bool()? {
                Some(GeoAnchor {
                    lat: r.f64()?,
                    lon: r.f64()?,
                    heading: r.f64()?,
                })
            } else {
                None
            };
            WireMessage::MeshData(MeshData { guid, meshes, geo })
        }
        KIND_PARAMETER_UPDATE => {
            let guid = r.string()?;
            let value = match r.u8()? {
                TAG_TOGGLE => UpdateValue::Boolean(r.bool()?),
                TAG_SLIDER => UpdateValue::Number(r.f64()?),
                TAG_LIST => UpdateValue::Index(r.u32()?),
                t => return Err(WireError::UnknownUnionTag(t)),
            };
            WireMessage::ParameterUpdate(ParameterUpdate { guid, value })
        }
        KIND_CONTROL => WireMessage::Control(read_control(&mut r)?),
        k => return Err(WireError::UnknownKind(k)),
    };
    if !r.buf.is_empty() {
        return Err(WireError::TrailingBytes(r.buf.len()));
    }
    Ok(msg)
}

fn read_component(r: &mut Reader<'_>) -> Result<Component, WireError> {
    let tag = r.u8()?;
    if !(TAG_TOGGLE..=TAG_LIST).contains(&tag) {
        return Err(WireError::UnknownUnionTag(tag));
    }
    let name = r.string()?;
    let guid = r.string()?;
    Ok(match tag {
        TAG_TOGGLE => Component::BooleanToggle {
            name,
            guid,
            value: r.bool()?,
        },
        TAG_SLIDER => Component::NumberSlider {
            name,
            guid,
            value: r.f32()?,
            accuracy: Accuracy::from_byte(r.u8()?).ok_or(WireError::InvalidValue("accuracy must be 0..=3"))?,
            min: r.f32()?,
            max: r.f32()?,
            epsilon: r.f32()?,
            decimal_places: r.i16()?,
        },
        _ => {
            let (n, mut items) = r.count(4)?;
            for _ in 0..n {
                items.push(r.string()?);
            }
            Component::ListParameter {
                name,
                guid,
                items,
                selected: r.u32()?,
            }
        }
    })
}

fn read_control(r: &mut Reader<'_>) -> Result<Control, WireError> {
    Ok(match r.u8()? {
        1 => Control::Hello {
            role: match r.u8()? {
                ROLE_DESIGNER => Role::Designer,
                ROLE_VIEWER => Role::Viewer,
                _ => return Err(WireError::InvalidValue("unknown role")),
            },
        },
        2 => Control::HostAssign {
            you: r.bool()?,
            address: r.string()?,
        },
        3 => Control::HostChanged { address: r.string()? },
        4 => Control::LockRequest { guid: r.string()? },
        5 => Control::LockGrant { guid: r.string()? },
        6 => Control::LockDeny {
            guid: r.string()?,
            holder: r.string()?,
        },
        7 => Control::LockRelease { guid: r.string()? },
        8 => Control::Reject {
            guid: r.string()?,
            reason: r.string()?,
        },
        9 => Control::Presence { data: r.bytes()? },
        t => return Err(WireError::UnknownUnionTag(t)),
    })
}
