// SPDX-License-Identifier: Apache-2.0

//! Headless algorithmic-design engine.
//!
//! Definitions are typed dataflow graphs ([`graph`]) read from and written
//! to an XML dialect ([`ghx`]), evaluated into triangle meshes
//! ([`dataflow`], [`geometry`]) and shared with remote clients over a
//! compact binary protocol ([`wire`]) through a relay that arbitrates
//! concurrent parameter edits ([`relay`], [`net`]).

pub mod dataflow;
pub mod fixtures;
pub mod geo;
pub mod ghx;
pub mod geometry;
pub mod graph;
pub mod net;
pub mod param;
pub mod relay;
pub mod speech;
pub mod wire;
