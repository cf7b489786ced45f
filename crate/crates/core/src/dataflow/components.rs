// SPDX-License-Identifier: Apache-2.0

//! Evaluators for the IO components in the registry. Each receives its
//! resolved inputs in port order (`None` when unconnected and without a
//! default) and returns one value per output port.

use super::expr::parse_expression;
use super::value::{Point, Value};
use crate::geometry::{box_mesh, pipe_mesh};
use std::collections::BTreeMap;

type Settings = BTreeMap<String, String>;

fn required<'a>(inputs: &'a [Option<Value>], i: usize, name: &str) -> Result<&'a Value, String> {
    inputs
        .get(i)
        .and_then(Option::as_ref)
        .ok_or_else(|| format!("input {name} has no value"))
}

fn count(v: f64, what: &str) -> Result<usize, String> {
    let r = v.round();
    if !r.is_finite() || r < 0.0 || r > u32::MAX as f64 {
        return Err(format!("{what} must be a non-negative integer, got {v}"));
    }
    Ok(r as usize)
}

/// `Domain` (two numbers, or one number `n` meaning `[0, n]`) split into
/// `Steps` equal intervals; yields `Steps + 1` values with exact endpoints.
pub fn range(inputs: &[Option<Value>], _: &Settings) -> Result<Vec<Value>, String> {
    let domain = required(inputs, 0, "Domain")?.as_number_list()?;
    let (a, b) = match domain[..] {
        [end] => (0.0, end),
        [start, end] => (start, end),
        _ => return Err(format!("Domain needs 1 or 2 numbers, got {}", domain.len())),
    };
    let n = count(required(inputs, 1, "Steps")?.as_number()?, "Steps")?;
    if n == 0 {
        return Err("Steps must be at least 1".into());
    }
    let values = (0..=n)
        .map(|i| {
            if i == n {
                b
            } else {
                a + (b - a) * (i as f64) / (n as f64)
            }
        })
        .collect();
    Ok(vec![Value::NumberList(values)])
}

pub fn evaluate(inputs: &[Option<Value>], _: &Settings) -> Result<Vec<Value>, String> {
    let source = required(inputs, 0, "Expression")?.as_text()?;
    let expr = parse_expression(&source).map_err(|e| e.to_string())?;
    let out = match required(inputs, 1, "t")? {
        Value::NumberList(ts) => Value::NumberList(ts.iter().map(|&t| expr.eval(t)).collect()),
        other => Value::Number(expr.eval(other.as_number()?)),
    };
    Ok(vec![out])
}

/// Builds points from X/Y/Z; single numbers are repeated to match lists.
pub fn construct_point(inputs: &[Option<Value>], _: &Settings) -> Result<Vec<Value>, String> {
    let axes = ["X", "Y", "Z"]
        .iter()
        .enumerate()
        .map(|(i, name)| required(inputs, i, name)?.as_number_list())
        .collect::<Result<Vec<_>, _>>()?;
    let len = axes.iter().map(Vec::len).max().unwrap_or(0);
    if axes.iter().any(Vec::is_empty) {
        return Ok(vec![Value::PointList(Vec::new())]);
    }
    if let Some(bad) = axes.iter().find(|a| a.len() != 1 && a.len() != len) {
        return Err(format!("list lengths differ ({} vs {len})", bad.len()));
    }
    let at = |axis: &Vec<f64>, i: usize| if axis.len() == 1 { axis[0] } else { axis[i] };
    let points: Vec<Point> = (0..len)
        .map(|i| [at(&axes[0], i), at(&axes[1], i), at(&axes[2], i)])
        .collect();
    if points.iter().flatten().any(|c| !c.is_finite()) {
        return Err("point coordinates must be finite".into());
    }
    Ok(vec![Value::PointList(points)])
}

pub fn polyline(inputs: &[Option<Value>], _: &Settings) -> Result<Vec<Value>, String> {
    let points = required(inputs, 0, "V")?.as_points()?;
    if points.len() < 2 {
        return Err(format!("polyline needs at least 2 points, got {}", points.len()));
    }
    Ok(vec![Value::Curve(points)])
}

pub fn box_component(inputs: &[Option<Value>], _: &Settings) -> Result<Vec<Value>, String> {
    let centers = required(inputs, 0, "Center")?.as_points()?;
    let [center] = centers[..] else {
        return Err(format!("Center needs exactly 1 point, got {}", centers.len()));
    };
    let size = required(inputs, 1, "Size")?.as_number()?;
    let mesh = box_mesh(center, size).map_err(|e| e.to_string())?;
    Ok(vec![Value::Mesh(mesh)])
}

pub fn pipe(inputs: &[Option<Value>], _: &Settings) -> Result<Vec<Value>, String> {
    let curve = required(inputs, 0, "Curve")?.as_curve()?;
    let radius = required(inputs, 1, "Radius")?.as_number()?;
    let sides = count(required(inputs, 2, "Sides")?.as_number()?, "Sides")?;
    let mesh = pipe_mesh(&curve, radius, sides).map_err(|e| e.to_string())?;
    Ok(vec![Value::Mesh(mesh)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(f: super::super::registry::Evaluator, inputs: Vec<Value>) -> Result<Value, String> {
        let inputs: Vec<_> = inputs.into_iter().map(Some).collect();
        f(&inputs, &Settings::new()).map(|mut v| v.remove(0))
    }

    #[test]
    fn range_endpoints_and_length() {
        let Value::NumberList(v) = run(range, vec![Value::NumberList(vec![0.0, 1.0]), Value::Number(4.0)]).unwrap() else {
            panic!()
        };
        assert_eq!(v, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(run(range, vec![Value::Number(1.0), Value::Number(0.0)]).is_err());
    }

    #[test]
    fn evaluate_maps_lists() {
        let out = run(evaluate, vec![Value::Text("t*2".into()), Value::NumberList(vec![1.0, 2.0])]).unwrap();
        assert_eq!(out, Value::NumberList(vec![2.0, 4.0]));
        let out = run(evaluate, vec![Value::Text("t*2".into()), Value::Number(3.0)]).unwrap();
        assert_eq!(out, Value::Number(6.0));
        assert!(run(evaluate, vec![Value::Text("2*(".into()), Value::Number(3.0)]).is_err());
    }

    #[test]
    fn points_broadcast_scalars() {
        let out = run(
            construct_point,
            vec![Value::NumberList(vec![1.0, 2.0]), Value::Number(0.0), Value::NumberList(vec![5.0, 6.0])],
        )
        .unwrap();
        assert_eq!(out, Value::PointList(vec![[1.0, 0.0, 5.0], [2.0, 0.0, 6.0]]));
        assert!(run(
            construct_point,
            vec![Value::NumberList(vec![1.0, 2.0]), Value::NumberList(vec![1.0, 2.0, 3.0]), Value::Number(0.0)],
        )
        .is_err());
    }

    #[test]
    fn box_requires_single_center() {
        let two = Value::PointList(vec![[0.0; 3], [1.0; 3]]);
        assert!(run(box_component, vec![two, Value::Number(1.0)]).is_err());
    }
}
