// SPDX-License-Identifier: Apache-2.0

use crate::geometry::Mesh;

pub type Point = [f64; 3];

/// Runtime value flowing along links.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Boolean(bool),
    Number(f64),
    Text(String),
    NumberList(Vec<f64>),
    PointList(Vec<Point>),
    Curve(Vec<Point>),
    Mesh(Mesh),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Boolean(_) => "Boolean",
            Value::Number(_) => "Number",
            Value::Text(_) => "Text",
            Value::NumberList(_) => "NumberList",
            Value::PointList(_) => "PointList",
            Value::Curve(_) => "Curve",
            Value::Mesh(_) => "Mesh",
        }
    }

    /// Values parsed from free text: a number, a list of numbers, or text.
    pub fn from_text(text: &str) -> Value {
        match parse_numbers(text) {
            Some(v) if v.len() == 1 => Value::Number(v[0]),
            Some(v) if !v.is_empty() => Value::NumberList(v),
            _ => Value::Text(text.to_string()),
        }
    }

    pub fn as_number(&self) -> Result<f64, String> {
        match self {
            Value::Number(n) => Ok(*n),
            Value::Boolean(b) => Ok(if *b { 1.0 } else { 0.0 }),
            Value::NumberList(v) if v.len() == 1 => Ok(v[0]),
            Value::Text(t) => t
                .trim()
                .parse()
                .map_err(|_| format!("text {t:?} is not a number")),
            other => Err(format!("expected a number, got {}", other.type_name())),
        }
    }

    pub fn as_number_list(&self) -> Result<Vec<f64>, String> {
        match self {
            Value::NumberList(v) => Ok(v.clone()),
            Value::Number(_) | Value::Boolean(_) => Ok(vec![self.as_number()?]),
            Value::Text(t) => parse_numbers(t).ok_or_else(|| format!("text {t:?} is not a list of numbers")),
            other => Err(format!("expected numbers, got {}", other.type_name())),
        }
    }

    pub fn as_text(&self) -> Result<String, String> {
        match self {
            Value::Text(t) => Ok(t.clone()),
            Value::Number(n) => Ok(n.to_string()),
            Value::Boolean(b) => Ok(b.to_string()),
            other => Err(format!("expected text, got {}", other.type_name())),
        }
    }

    pub fn as_points(&self) -> Result<Vec<Point>, String> {
        match self {
            Value::PointList(p) | Value::Curve(p) => Ok(p.clone()),
            Value::NumberList(v) if v.len() == 3 => Ok(vec![[v[0], v[1], v[2]]]),
            Value::Text(_) => match self.as_number_list()? {
                v if v.len() == 3 => Ok(vec![[v[0], v[1], v[2]]]),
                _ => Err("text does not describe a point".into()),
            },
            other => Err(format!("expected points, got {}", other.type_name())),
        }
    }

    pub fn as_curve(&self) -> Result<Vec<Point>, String> {
        match self {
            Value::Curve(p) | Value::PointList(p) => Ok(p.clone()),
            other => Err(format!("expected a curve, got {}", other.type_name())),
        }
    }

    /// Joins several incoming values into one, for inputs fed by more than
    /// one link.
    pub fn merge(values: Vec<Value>) -> Result<Value, String> {
        let mut iter = values.into_iter();
        let Some(first) = iter.next() else {
            return Err("nothing to merge".into());
        };
        let rest: Vec<Value> = iter.collect();
        if rest.is_empty() {
            return Ok(first);
        }
        match first {
            Value::Number(_) | Value::NumberList(_) | Value::Boolean(_) => {
                let mut out = first.as_number_list()?;
                for v in rest {
                    out.extend(v.as_number_list()?);
                }
                Ok(Value::NumberList(out))
            }
            Value::PointList(mut out) => {
                for v in rest {
                    out.extend(v.as_points()?);
                }
                Ok(Value::PointList(out))
            }
            other => Err(format!("cannot merge several {} values", other.type_name())),
        }
    }
}

fn parse_numbers(text: &str) -> Option<Vec<f64>> {
    text.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().ok())
        .collect()
}
