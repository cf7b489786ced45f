// SPDX-License-Identifier: Apache-2.0

//! Serialize the bundled definitions, read them back, and check nothing moved.
//!
//! With a directory argument the XML files are written there as well:
//!
//! ```text
//! cargo run --example ghx_round_trip -- crates/core/fixtures
//! ```

use adflow::fixtures;
use adflow::ghx::{parse_document, serialize_document};
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args().nth(1).map(PathBuf::from);
    for (name, graph) in [("cube", fixtures::cube()), ("spiral", fixtures::spiral())] {
        let xml = serialize_document(&graph);
        let (back, warnings) = parse_document(&xml)?;
        assert!(warnings.is_empty(), "{warnings:?}");
        assert!(back.is_isomorphic(&graph));
        assert_eq!(serialize_document(&back), xml);
        println!("{name}: {} bytes, {} vertices, {} edges, stable", xml.len(), back.vertex_count(), back.edge_count());
        if let Some(dir) = &out_dir {
            let path = dir.join(format!("{name}.xml"));
            std::fs::write(&path, &xml)?;
            println!("  wrote {}", path.display());
        }
    }

    // Sources may point forward; the reader patches them up.
    let forward = r#"<definition version="1"><objects>
  <object typename="Panel" instanceguid="b" name="echo" x="0" y="0"><sources><source idref="a"/></sources></object>
  <object typename="Panel" instanceguid="a" name="origin" x="0" y="0"><state text="hello"/></object>
</objects></definition>"#;
    let (g, _) = parse_document(forward)?;
    println!("forward reference: {} edge(s)", g.edge_count());

    let broken = forward.replace("idref=\"a\"", "idref=\"b\"");
    match parse_document(&broken) {
        Err(e) => println!("self loop rejected: {e}"),
        Ok(_) => println!("self loop accepted?"),
    }
    Ok(())
}
