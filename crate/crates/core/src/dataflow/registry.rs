// SPDX-License-Identifier: Apache-2.0

//! The fixed set of component kinds an engine knows how to build and run.

use super::components;
use super::value::Value;
use crate::param::{ListChoice, ParameterValue, Slider};
use std::collections::BTreeMap;

/// Type name reserved for opaque primitives (clusters, unknown chunks).
pub const GENERIC_PRIMITIVE: &str = "GenericPrimitive";

pub type Evaluator = fn(&[Option<Value>], &BTreeMap<String, String>) -> Result<Vec<Value>, String>;

#[derive(Debug, Clone, Copy)]
pub struct PortSpec {
    pub name: &'static str,
    /// Fallback used when the port has no incoming link and the owning
    /// component has no setting of the same name.
    pub default: Option<&'static str>,
}

const fn port(name: &'static str) -> PortSpec {
    PortSpec { name, default: None }
}

const fn port_or(name: &'static str, default: &'static str) -> PortSpec {
    PortSpec {
        name,
        default: Some(default),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitiveKind {
    NumberSlider,
    BooleanToggle,
    Panel,
    ListParameter,
}

impl PrimitiveKind {
    /// Payload given to a freshly created primitive of this kind.
    pub fn default_payload(self) -> crate::graph::Payload {
        use crate::graph::Payload;
        match self {
            PrimitiveKind::NumberSlider => Payload::Parameter(ParameterValue::Slider(Slider::new(0.0, 0.0, 10.0))),
            PrimitiveKind::BooleanToggle => Payload::Parameter(ParameterValue::Toggle(false)),
            PrimitiveKind::Panel => Payload::Panel(String::new()),
            PrimitiveKind::ListParameter => Payload::Parameter(ParameterValue::List(ListChoice {
                items: vec!["Item 1".into()],
                selected: 0,
            })),
        }
    }
}

#[derive(Clone, Copy)]
pub enum ComponentClass {
    Primitive(PrimitiveKind),
    Io {
        inputs: &'static [PortSpec],
        outputs: &'static [&'static str],
        eval: Evaluator,
    },
}

#[derive(Clone, Copy)]
pub struct ComponentDescriptor {
    pub name: &'static str,
    pub aliases: &'static [&'static str],
    pub type_guid: &'static str,
    pub class: ComponentClass,
}

impl std::fmt::Debug for ComponentDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ComponentDescriptor")
            .field("name", &self.name)
            .field("type_guid", &self.type_guid)
            .finish_non_exhaustive()
    }
}

impl ComponentDescriptor {
    pub fn inputs(&self) -> &'static [PortSpec] {
        match self.class {
            ComponentClass::Io { inputs, .. } => inputs,
            ComponentClass::Primitive(_) => &[],
        }
    }

    pub fn outputs(&self) -> &'static [&'static str] {
        match self.class {
            ComponentClass::Io { outputs, .. } => outputs,
            ComponentClass::Primitive(_) => &[],
        }
    }

    pub fn is_primitive(&self) -> bool {
        matches!(self.class, ComponentClass::Primitive(_))
    }
}

pub static REGISTRY: &[ComponentDescriptor] = &[
    ComponentDescriptor {
        name: "NumberSlider",
        aliases: &["Slider"],
        type_guid: "2b1c7e0a-5d35-4c8e-9f1e-0c6a1a9d4e01",
        class: ComponentClass::Primitive(PrimitiveKind::NumberSlider),
    },
    ComponentDescriptor {
        name: "BooleanToggle",
        aliases: &["Toggle"],
        type_guid: "2b1c7e0a-5d35-4c8e-9f1e-0c6a1a9d4e02",
        class: ComponentClass::Primitive(PrimitiveKind::BooleanToggle),
    },
    ComponentDescriptor {
        name: "Panel",
        aliases: &[],
        type_guid: "2b1c7e0a-5d35-4c8e-9f1e-0c6a1a9d4e03",
        class: ComponentClass::Primitive(PrimitiveKind::Panel),
    },
    ComponentDescriptor {
        name: "ListParameter",
        aliases: &["ValueList"],
        type_guid: "2b1c7e0a-5d35-4c8e-9f1e-0c6a1a9d4e04",
        class: ComponentClass::Primitive(PrimitiveKind::ListParameter),
    },
    ComponentDescriptor {
        name: "Range",
        aliases: &[],
        type_guid: "2b1c7e0a-5d35-4c8e-9f1e-0c6a1a9d4e10",
        class: ComponentClass::Io {
            inputs: &[port_or("Domain", "0,1"), port_or("Steps", "10")],
            outputs: &["Range"],
            eval: components::range,
        },
    },
    ComponentDescriptor {
        name: "Evaluate",
        aliases: &["Eval"],
        type_guid: "2b1c7e0a-5d35-4c8e-9f1e-0c6a1a9d4e11",
        class: ComponentClass::Io {
            inputs: &[port("Expression"), port("t")],
            outputs: &["Result"],
            eval: components::evaluate,
        },
    },
    ComponentDescriptor {
        name: "ConstructPoint",
        aliases: &["Pt"],
        type_guid: "2b1c7e0a-5d35-4c8e-9f1e-0c6a1a9d4e12",
        class: ComponentClass::Io {
            inputs: &[port_or("X", "0"), port_or("Y", "0"), port_or("Z", "0")],
            outputs: &["Point"],
            eval: components::construct_point,
        },
    },
    ComponentDescriptor {
        name: "Polyline",
        aliases: &["PLine"],
        type_guid: "2b1c7e0a-5d35-4c8e-9f1e-0c6a1a9d4e13",
        class: ComponentClass::Io {
            inputs: &[port("V")],
            outputs: &["Polyline"],
            eval: components::polyline,
        },
    },
    ComponentDescriptor {
        name: "Box",
        aliases: &[],
        type_guid: "2b1c7e0a-5d35-4c8e-9f1e-0c6a1a9d4e14",
        class: ComponentClass::Io {
            inputs: &[port_or("Center", "0,0,0"), port_or("Size", "1")],
            outputs: &["Box"],
            eval: components::box_component,
        },
    },
    ComponentDescriptor {
        name: "Pipe",
        aliases: &[],
        type_guid: "2b1c7e0a-5d35-4c8e-9f1e-0c6a1a9d4e15",
        class: ComponentClass::Io {
            inputs: &[port("Curve"), port_or("Radius", "1"), port_or("Sides", "8")],
            outputs: &["Pipe"],
            eval: components::pipe,
        },
    },
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown component type {0:?}")]
pub struct UnknownComponentType(pub String);

/// Exact lookup by canonical name or alias.
pub fn lookup_component_kind(type_name: &str) -> Result<&'static ComponentDescriptor, UnknownComponentType> {
    REGISTRY
        .iter()
        .find(|d| d.name == type_name || d.aliases.contains(&type_name))
        .ok_or_else(|| UnknownComponentType(type_name.to_string()))
}

/// Case- and space-insensitive lookup, for names typed or spoken by people.
pub fn lookup_loose(name: &str) -> Option<&'static ComponentDescriptor> {
    let key: String = name
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '-' && *c != '_')
        .collect::<String>()
        .to_lowercase();
    REGISTRY.iter().find(|d| {
        d.name.to_lowercase() == key || d.aliases.iter().any(|a| a.to_lowercase() == key)
    })
}
