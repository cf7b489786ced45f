// SPDX-License-Identifier: Apache-2.0

//! Text commands that add components to a graph.
//!
//! ```text
//! add component <name> [with value <number|bool>]
//! add slider with value <number>
//! add boolean toggle with value <true|false>
//! add panel with text <anything>
//! ```
//!
//! Matching is case-insensitive. Numbers are digits or English number
//! words ("three thousand two hundred and five").

use crate::dataflow::lookup_loose;
use crate::dataflow::UnknownComponentType;
use crate::graph::{GraphError, Payload, TypedGraph, VertexId};
use crate::param::{ParameterValue, Slider};
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialValue {
    Number(f64),
    Boolean(bool),
}

impl fmt::Display for InitialValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialValue::Number(n) => write!(f, "{n}"),
            InitialValue::Boolean(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    AddComponent { type_name: String, value: Option<InitialValue> },
    AddSlider { value: f64 },
    AddToggle { value: bool },
    AddPanel { text: String },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpeechError {
    /// `position` is a byte offset into the command text.
    #[error("no parse at position {position}: expected {expected}")]
    NoParse { position: usize, expected: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{type_name} cannot take the value {value}")]
    ValueNotApplicable { type_name: String, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a number: {0}")]
pub struct NumberWordsError(pub String);

fn unit(w: &str) -> Option<u64> {
    Some(match w {
        "one" => 1,
        "two" => 2,
        "three" => 3,
        "four" => 4,
        "five" => 5,
        "six" => 6,
        "seven" => 7,
        "eight" => 8,
        "nine" => 9,
        _ => return None,
    })
}

fn teen(w: &str) -> Option<u64> {
    Some(match w {
        "ten" => 10,
        "eleven" => 11,
        "twelve" => 12,
        "thirteen" => 13,
        "fourteen" => 14,
        "fifteen" => 15,
        "sixteen" => 16,
        "seventeen" => 17,
        "eighteen" => 18,
        "nineteen" => 19,
        _ => return None,
    })
}

fn tens(w: &str) -> Option<u64> {
    Some(match w {
        "twenty" => 20,
        "thirty" => 30,
        "forty" => 40,
        "fifty" => 50,
        "sixty" => 60,
        "seventy" => 70,
        "eighty" => 80,
        "ninety" => 90,
        _ => return None,
    })
}

fn scale(w: &str) -> Option<u64> {
    match w {
        "thousand" | "thousands" => Some(1_000),
        "million" | "millions" => Some(1_000_000),
        _ => None,
    }
}

fn is_small(w: &str) -> bool {
    unit(w).is_some() || teen(w).is_some() || tens(w).is_some()
}

/// Value of a group below one thousand, built up word by word.
#[derive(Default)]
struct Group {
    hundreds: Option<u64>,
    tens: Option<u64>,
    teen: Option<u64>,
    unit: Option<u64>,
}

impl Group {
    fn is_empty(&self) -> bool {
        self.hundreds.is_none() && self.tens.is_none() && self.teen.is_none() && self.unit.is_none()
    }

    fn value(&self) -> u64 {
        self.hundreds.unwrap_or(0) * 100 + self.tens.unwrap_or(0) + self.teen.unwrap_or(0) + self.unit.unwrap_or(0)
    }

    fn push(&mut self, w: &str) -> bool {
        let low_free = self.teen.is_none() && self.unit.is_none();
        if let Some(u) = unit(w) {
            if !low_free {
                return false;
            }
            self.unit = Some(u);
        } else if let Some(t) = teen(w).or_else(|| tens(w)) {
            if !low_free || self.tens.is_some() {
                return false;
            }
            if t < 20 {
                self.teen = Some(t);
            } else {
                self.tens = Some(t);
            }
        } else if matches!(w, "hundred" | "hundreds") {
            match (self.hundreds, self.tens, self.teen, self.unit) {
                (None, None, None, Some(u)) => {
                    self.hundreds = Some(u);
                    self.unit = None;
                }
                _ => return false,
            }
        } else {
            return false;
        }
        true
    }
}

/// Reads an integer written in English words, e.g. "twenty-seven",
/// "three thousands", "minus nine hundred and one".
pub fn parse_number_words(text: &str) -> Result<i64, NumberWordsError> {
    let err = || NumberWordsError(text.to_string());
    if text.split_whitespace().any(|w| w.split('-').any(str::is_empty)) {
        return Err(err());
    }
    let lower = text.to_lowercase().replace('-', " ");
    let mut words: Vec<&str> = lower.split_whitespace().collect();
    let negative = matches!(words.first(), Some(&"minus") | Some(&"negative"));
    if negative {
        words.remove(0);
    }
    if words == ["zero"] {
        return Ok(0);
    }
    if words.is_empty() {
        return Err(err());
    }

    let mut total: u64 = 0;
    let mut last_scale = u64::MAX;
    let mut group = Group::default();
    let mut prev: Option<&str> = None;
    for (i, w) in words.iter().copied().enumerate() {
        if w == "and" {
            let after_big = matches!(prev, Some(p) if matches!(p, "hundred" | "hundreds") || scale(p).is_some());
            let small_next = words.get(i + 1).is_some_and(|n| is_small(n));
            if !after_big || !small_next {
                return Err(err());
            }
        } else if let Some(s) = scale(w) {
            if group.is_empty() || s >= last_scale {
                return Err(err());
            }
            total += group.value() * s;
            last_scale = s;
            group = Group::default();
        } else if !group.push(w) {
            return Err(err());
        }
        prev = Some(w);
    }
    total += group.value();
    if total == 0 {
        return Err(err());
    }
    let v = total as i64;
    Ok(if negative { -v } else { v })
}

/// Digits or number words.
pub fn parse_number(text: &str) -> Option<f64> {
    let t = text.trim();
    if t.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+' || c == '.') {
        return t.parse::<f64>().ok().filter(|v| v.is_finite());
    }
    parse_number_words(t).ok().map(|v| v as f64)
}

fn parse_bool(text: &str) -> Option<bool> {
    match text.trim().to_lowercase().as_str() {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

struct Tokens<'a> {
    text: &'a str,
    words: Vec<(usize, &'a str)>,
    at: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut words = Vec::new();
        let mut start = None;
        for (i, c) in text.char_indices() {
            match (c.is_whitespace(), start) {
                (true, Some(s)) => {
                    words.push((s, &text[s..i]));
                    start = None;
                }
                (false, None) => start = Some(i),
                _ => {}
            }
        }
        if let Some(s) = start {
            words.push((s, &text[s..]));
        }
        Tokens { text, words, at: 0 }
    }

    fn position(&self) -> usize {
        self.words.get(self.at).map_or(self.text.len(), |w| w.0)
    }

    fn fail<T>(&self, expected: &str) -> Result<T, SpeechError> {
        Err(SpeechError::NoParse {
            position: self.position(),
            expected: expected.to_string(),
        })
    }

    fn peek(&self) -> Option<&'a str> {
        self.words.get(self.at).map(|w| w.1)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), SpeechError> {
        match self.peek() {
            Some(w) if w.eq_ignore_ascii_case(kw) => {
                self.at += 1;
                Ok(())
            }
            _ => self.fail(&format!("{kw:?}")),
        }
    }

    /// Everything from the current word on, verbatim.
    fn rest(&mut self) -> &'a str {
        let pos = self.position();
        self.at = self.words.len();
        self.text[pos..].trim_end()
    }
}

/// Parses one command.
pub fn parse_command(text: &str) -> Result<Command, SpeechError> {
    let mut t = Tokens::new(text);
    t.keyword("add")?;
    let Some(head) = t.peek().map(str::to_lowercase) else {
        return t.fail("\"component\", \"slider\", \"boolean\" or \"panel\"");
    };
    match head.as_str() {
        "component" => {
            t.at += 1;
            let start = t.position();
            let mut name_words = Vec::new();
            while let Some(w) = t.peek().filter(|w| !w.eq_ignore_ascii_case("with")) {
                name_words.push(w);
                t.at += 1;
            }
            if name_words.is_empty() {
                t.at = t.words.iter().position(|w| w.0 == start).unwrap_or(t.words.len());
                return t.fail("a component name");
            }
            let type_name = name_words.join(" ");
            let value = if t.peek().is_some() {
                t.keyword("with")?;
                t.keyword("value")?;
                let pos = t.position();
                let raw = t.rest();
                match parse_bool(raw) {
                    Some(b) => Some(InitialValue::Boolean(b)),
                    None => match parse_number(raw) {
                        Some(n) => Some(InitialValue::Number(n)),
                        None => {
                            return Err(SpeechError::NoParse {
                                position: pos,
                                expected: "a number or true/false".into(),
                            })
                        }
                    },
                }
            } else {
                None
            };
            Ok(Command::AddComponent { type_name, value })
        }
        "slider" => {
            t.at += 1;
            t.keyword("with")?;
            t.keyword("value")?;
            let pos = t.position();
            match parse_number(t.rest()) {
                Some(value) => Ok(Command::AddSlider { value }),
                None => Err(SpeechError::NoParse {
                    position: pos,
                    expected: "a number".into(),
                }),
            }
        }
        "boolean" => {
            t.at += 1;
            t.keyword("toggle")?;
            t.keyword("with")?;
            t.keyword("value")?;
            let pos = t.position();
            match parse_bool(t.rest()) {
                Some(value) => Ok(Command::AddToggle { value }),
                None => Err(SpeechError::NoParse {
                    position: pos,
                    expected: "true or false".into(),
                }),
            }
        }
        "panel" => {
            t.at += 1;
            t.keyword("with")?;
            t.keyword("text")?;
            Ok(Command::AddPanel {
                text: t.rest().to_string(),
            })
        }
        _ => t.fail("\"component\", \"slider\", \"boolean\" or \"panel\""),
    }
}

fn default_slider(value: f64) -> Slider {
    Slider::new(value, value.min(0.0), value.max(10.0))
}

/// Applies `command`, returning the new component's id.
pub fn apply_command(graph: &mut TypedGraph, command: &Command) -> Result<VertexId, SpeechError> {
    let placed = graph.vertices().filter(|v| !v.kind.is_port()).count();
    let at = [0.0, 40.0 * placed as f64];
    let (type_name, payload) = match command {
        Command::AddSlider { value } => (
            "NumberSlider",
            Some(Payload::Parameter(ParameterValue::Slider(default_slider(*value)))),
        ),
        Command::AddToggle { value } => ("BooleanToggle", Some(Payload::Parameter(ParameterValue::Toggle(*value)))),
        Command::AddPanel { text } => ("Panel", Some(Payload::Panel(text.clone()))),
        Command::AddComponent { type_name, value } => {
            let desc = lookup_loose(type_name)
                .ok_or_else(|| GraphError::UnknownComponentType(UnknownComponentType(type_name.clone())))?;
            let payload = match value {
                None => None,
                Some(v) => Some(match (desc.name, v) {
                    ("NumberSlider", InitialValue::Number(n)) => {
                        Payload::Parameter(ParameterValue::Slider(default_slider(*n)))
                    }
                    ("BooleanToggle", InitialValue::Boolean(b)) => Payload::Parameter(ParameterValue::Toggle(*b)),
                    ("Panel", v) => Payload::Panel(v.to_string()),
                    _ => {
                        return Err(SpeechError::ValueNotApplicable {
                            type_name: desc.name.to_string(),
                            value: v.to_string(),
                        })
                    }
                }),
            };
            (desc.name, payload)
        }
    };
    let id = graph.add_component(type_name, type_name, at)?;
    if let Some(p) = payload {
        graph.set_payload(id.as_str(), p)?;
    }
    Ok(id)
}
