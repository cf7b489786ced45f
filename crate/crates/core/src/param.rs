// SPDX-License-Identifier: Apache-2.0

//! Adjustable parameters: number sliders, boolean toggles and list pickers.
//!
//! Parameters live as payloads on primitive components in a [`TypedGraph`]
//! and are shared with clients as [`ParameterDescriptor`]s keyed by the
//! owning vertex id.
//!
//! [`TypedGraph`]: crate::graph::TypedGraph

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Value snapping mode of a number slider.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Accuracy {
    Float = 0,
    Integer = 1,
    Even = 2,
    Odd = 3,
}

impl Accuracy {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Accuracy::Float),
            1 => Some(Accuracy::Integer),
            2 => Some(Accuracy::Even),
            3 => Some(Accuracy::Odd),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Accuracy::Float => "Float",
            Accuracy::Integer => "Integer",
            Accuracy::Even => "Even",
            Accuracy::Odd => "Odd",
        }
    }

    /// Snaps `v` to the nearest admissible value. Ties go toward +∞.
    pub fn snap(self, v: f64) -> f64 {
        match self {
            Accuracy::Float => v,
            Accuracy::Integer => (v + 0.5).floor(),
            Accuracy::Even => 2.0 * (v / 2.0 + 0.5).floor(),
            Accuracy::Odd => 2.0 * ((v - 1.0) / 2.0 + 0.5).floor() + 1.0,
        }
    }

    /// Distance between two consecutive admissible values, if discrete.
    fn step(self) -> Option<f64> {
        match self {
            Accuracy::Float => None,
            Accuracy::Integer => Some(1.0),
            Accuracy::Even | Accuracy::Odd => Some(2.0),
        }
    }

    /// Whether `v` is admissible under this mode.
    pub fn admits(self, v: f64) -> bool {
        match self {
            Accuracy::Float => true,
            Accuracy::Integer => v.fract() == 0.0,
            Accuracy::Even => v.fract() == 0.0 && v.rem_euclid(2.0) == 0.0,
            Accuracy::Odd => v.fract() == 0.0 && v.rem_euclid(2.0) == 1.0,
        }
    }
}

impl fmt::Display for Accuracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Accuracy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Float" => Ok(Accuracy::Float),
            "Integer" => Ok(Accuracy::Integer),
            "Even" => Ok(Accuracy::Even),
            "Odd" => Ok(Accuracy::Odd),
            other => Err(format!("unknown accuracy {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slider {
    pub value: f64,
    pub min: f64,
    pub max: f64,
    pub accuracy: Accuracy,
    /// Carried and round-tripped; not used by the engine.
    pub epsilon: f64,
    pub decimals: i16,
}

impl Slider {
    pub fn new(value: f64, min: f64, max: f64) -> Self {
        Slider {
            value,
            min,
            max,
            accuracy: Accuracy::Float,
            epsilon: 0.01,
            decimals: 2,
        }
    }

    pub fn with_accuracy(mut self, accuracy: Accuracy) -> Self {
        self.accuracy = accuracy;
        self
    }

    /// Clamps to `[min, max]` and snaps per accuracy, then steps back inside
    /// the range if snapping pushed the value out of it.
    pub fn fit(&self, v: f64) -> f64 {
        let clamped = v.clamp(self.min, self.max);
        let snapped = self.accuracy.snap(clamped);
        let Some(step) = self.accuracy.step() else {
            return snapped;
        };
        let mut fitted = snapped;
        while fitted > self.max {
            fitted -= step;
        }
        while fitted < self.min {
            fitted += step;
        }
        if fitted > self.max {
            // range too narrow to hold an admissible value
            clamped
        } else {
            fitted
        }
    }

    pub fn set(&mut self, v: f64) -> f64 {
        self.value = self.fit(v);
        self.value
    }

    pub fn is_consistent(&self) -> bool {
        self.value.is_finite()
            && self.min <= self.value
            && self.value <= self.max
            && self.accuracy.admits(self.value)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ListChoice {
    pub items: Vec<String>,
    pub selected: usize,
}

impl ListChoice {
    pub fn selected_item(&self) -> Option<&str> {
        self.items.get(self.selected).map(String::as_str)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParameterKind {
    BooleanToggle,
    NumberSlider,
    ListParameter,
}

impl ParameterKind {
    pub fn type_name(self) -> &'static str {
        match self {
            ParameterKind::BooleanToggle => "BooleanToggle",
            ParameterKind::NumberSlider => "NumberSlider",
            ParameterKind::ListParameter => "ListParameter",
        }
    }
}

/// State of an adjustable input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ParameterValue {
    Toggle(bool),
    Slider(Slider),
    List(ListChoice),
}

impl ParameterValue {
    pub fn kind(&self) -> ParameterKind {
        match self {
            ParameterValue::Toggle(_) => ParameterKind::BooleanToggle,
            ParameterValue::Slider(_) => ParameterKind::NumberSlider,
            ParameterValue::List(_) => ParameterKind::ListParameter,
        }
    }

    pub fn is_consistent(&self) -> bool {
        match self {
            ParameterValue::Toggle(_) => true,
            ParameterValue::Slider(s) => s.is_consistent(),
            ParameterValue::List(l) => l.selected < l.items.len(),
        }
    }

    /// Applies an update, returning the value actually stored.
    pub fn apply(&mut self, update: &UpdateValue) -> Result<UpdateValue, TypeMismatch> {
        match (self, update) {
            (ParameterValue::Toggle(b), UpdateValue::Boolean(v)) => {
                *b = *v;
                Ok(UpdateValue::Boolean(*v))
            }
            (ParameterValue::Slider(s), UpdateValue::Number(v)) if v.is_finite() => {
                Ok(UpdateValue::Number(s.set(*v)))
            }
            (ParameterValue::List(l), UpdateValue::Index(i)) if (*i as usize) < l.items.len() => {
                l.selected = *i as usize;
                Ok(UpdateValue::Index(*i))
            }
            (param, update) => Err(TypeMismatch {
                expected: param.kind(),
                got: update.clone(),
            }),
        }
    }

    /// Reads a textual value the way a user would type it for this kind of
    /// parameter: `true`/`false`, a number, or a list index / item text.
    pub fn parse_update(&self, text: &str) -> Option<UpdateValue> {
        let text = text.trim();
        match self {
            ParameterValue::Toggle(_) => match text.to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" | "on" => Some(UpdateValue::Boolean(true)),
                "false" | "0" | "no" | "off" => Some(UpdateValue::Boolean(false)),
                _ => None,
            },
            ParameterValue::Slider(_) => text.parse().ok().map(UpdateValue::Number),
            ParameterValue::List(l) => text
                .parse::<u32>()
                .ok()
                .or_else(|| l.items.iter().position(|i| i == text).map(|i| i as u32))
                .map(UpdateValue::Index),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("expected a {expected:?} value, got {got:?}")]
pub struct TypeMismatch {
    pub expected: ParameterKind,
    pub got: UpdateValue,
}

/// A parameter as shared with clients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterDescriptor {
    pub guid: String,
    pub name: String,
    pub value: ParameterValue,
}

impl ParameterDescriptor {
    pub fn kind(&self) -> ParameterKind {
        self.value.kind()
    }
}

/// New value carried by a parameter update.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value")]
pub enum UpdateValue {
    Boolean(bool),
    Number(f64),
    Index(u32),
}

impl fmt::Display for UpdateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpdateValue::Boolean(b) => write!(f, "{b}"),
            UpdateValue::Number(n) => write!(f, "{n}"),
            UpdateValue::Index(i) => write!(f, "#{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterUpdate {
    pub guid: String,
    pub value: UpdateValue,
}

impl ParameterUpdate {
    pub fn new(guid: impl Into<String>, value: UpdateValue) -> Self {
        ParameterUpdate {
            guid: guid.into(),
            value,
        }
    }

    pub fn number(guid: impl Into<String>, v: f64) -> Self {
        Self::new(guid, UpdateValue::Number(v))
    }
}
