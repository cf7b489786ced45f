// SPDX-License-Identifier: Apache-2.0

//! Component registry, expression language and the evaluation engine that
//! turns a typed graph into geometry.

mod components;
mod engine;
mod expr;
pub(crate) mod registry;
mod value;

pub use engine::{
    evaluate, AppliedUpdate, DrainReport, EvaluationEngine, Slot, Solution, UpdateError, UpdateSender, VertexError,
};
pub use expr::{parse_expression, BinOp, Expr, Func, SyntaxError};
pub use registry::{
    lookup_component_kind, lookup_loose, ComponentClass, ComponentDescriptor, Evaluator, PortSpec, PrimitiveKind,
    UnknownComponentType, GENERIC_PRIMITIVE, REGISTRY,
};
pub use value::{Point, Value};
