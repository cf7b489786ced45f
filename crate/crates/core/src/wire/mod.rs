// SPDX-License-Identifier: Apache-2.0

//! Protocol messages and their binary and JSON encodings.
//!
//! Binary layout (little-endian):
//!
//! ```text
//! "PARA" | version u8 = 1 | kind u8 | payload
//! kind: 1 Components, 2 MeshData, 3 ParameterUpdate, 4 Control
//! string: u32 byte length + UTF-8      list: u32 count + elements
//! ```
//!
//! Streams carry one message per frame, each prefixed by its u32 length.

mod binary;
mod frame;
mod text;

pub use binary::{decode, encode};
pub use frame::{read_frame, write_frame, MAX_FRAME_LEN};
pub use text::{decode_text, encode_text};

use crate::geometry::{GeoAnchor, Mesh};
use crate::param::{Accuracy, ListChoice, ParameterDescriptor, ParameterUpdate, ParameterValue, Slider};
use serde::{Deserialize, Serialize};

pub const MAGIC: [u8; 4] = *b"PARA";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("message ends early")]
    Truncated,
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported protocol version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown message kind {0}")]
    UnknownKind(u8),
    #[error("unknown union tag {0}")]
    UnknownUnionTag(u8),
    #[error("field holds an invalid value: {0}")]
    InvalidValue(&'static str),
    #[error("string is not UTF-8")]
    InvalidUtf8,
    #[error("{0} unread bytes after message")]
    TrailingBytes(usize),
    #[error("malformed text message: {0}")]
    Text(String),
}

/// One protocol message.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum WireMessage {
    Components { items: Vec<Component> },
    MeshData(MeshData),
    ParameterUpdate(ParameterUpdate),
    Control(Control),
}

/// A shared parameter in wire form; slider numbers are 32-bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Component {
    BooleanToggle {
        name: String,
        guid: String,
        value: bool,
    },
    NumberSlider {
        name: String,
        guid: String,
        value: f32,
        accuracy: Accuracy,
        min: f32,
        max: f32,
        epsilon: f32,
        decimal_places: i16,
    },
    ListParameter {
        name: String,
        guid: String,
        items: Vec<String>,
        selected: u32,
    },
}

impl Component {
    pub fn guid(&self) -> &str {
        match self {
            Component::BooleanToggle { guid, .. }
            | Component::NumberSlider { guid, .. }
            | Component::ListParameter { guid, .. } => guid,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Component::BooleanToggle { name, .. }
            | Component::NumberSlider { name, .. }
            | Component::ListParameter { name, .. } => name,
        }
    }
}

impl From<&ParameterDescriptor> for Component {
    fn from(d: &ParameterDescriptor) -> Self {
        let (name, guid) = (d.name.clone(), d.guid.clone());
        match &d.value {
            ParameterValue::Toggle(value) => Component::BooleanToggle { name, guid, value: *value },
            ParameterValue::Slider(s) => Component::NumberSlider {
                name,
                guid,
                value: s.value as f32,
                accuracy: s.accuracy,
                min: s.min as f32,
                max: s.max as f32,
                epsilon: s.epsilon as f32,
                decimal_places: s.decimals,
            },
            ParameterValue::List(l) => Component::ListParameter {
                name,
                guid,
                items: l.items.clone(),
                selected: l.selected as u32,
            },
        }
    }
}

impl From<&Component> for ParameterDescriptor {
    fn from(c: &Component) -> Self {
        let value = match c {
            Component::BooleanToggle { value, .. } => ParameterValue::Toggle(*value),
            Component::NumberSlider {
                value,
                accuracy,
                min,
                max,
                epsilon,
                decimal_places,
                ..
            } => ParameterValue::Slider(Slider {
                value: *value as f64,
                min: *min as f64,
                max: *max as f64,
                accuracy: *accuracy,
                epsilon: *epsilon as f64,
                decimals: *decimal_places,
            }),
            Component::ListParameter { items, selected, .. } => ParameterValue::List(ListChoice {
                items: items.clone(),
                selected: *selected as usize,
            }),
        };
        ParameterDescriptor {
            guid: c.guid().to_string(),
            name: c.name().to_string(),
            value,
        }
    }
}

/// Triangle mesh without normals, model coordinates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeshBody {
    pub vertices: Vec<[f32; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

impl From<&Mesh> for MeshBody {
    fn from(m: &Mesh) -> Self {
        MeshBody {
            vertices: m.vertices.clone(),
            triangles: m.triangles.clone(),
        }
    }
}

impl From<&MeshBody> for Mesh {
    fn from(m: &MeshBody) -> Self {
        Mesh::new(m.vertices.clone(), m.triangles.clone())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeshData {
    /// Identifies the definition the meshes were generated from.
    pub guid: String,
    pub meshes: Vec<MeshBody>,
    pub geo: Option<GeoAnchor>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Designer,
    Viewer,
}

impl std::str::FromStr for Role {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "designer" => Ok(Role::Designer),
            "viewer" => Ok(Role::Viewer),
            _ => Err(format!("unknown role {s:?}")),
        }
    }
}

/// Session control messages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "control")]
pub enum Control {
    Hello { role: Role },
    HostAssign { you: bool, address: String },
    HostChanged { address: String },
    LockRequest { guid: String },
    LockGrant { guid: String },
    LockDeny { guid: String, holder: String },
    LockRelease { guid: String },
    Reject { guid: String, reason: String },
    /// Opaque head/controller pose data, relayed best-effort.
    Presence { data: Vec<u8> },
}

impl WireMessage {
    pub fn components(items: impl IntoIterator<Item = Component>) -> Self {
        WireMessage::Components {
            items: items.into_iter().collect(),
        }
    }

    pub fn is_presence(&self) -> bool {
        matches!(self, WireMessage::Control(Control::Presence { .. }))
    }
}
