// SPDX-License-Identifier: Apache-2.0

//! Turn transcribed sentences into components.

use adflow::dataflow::evaluate;
use adflow::ghx::serialize_document;
use adflow::graph::TypedGraph;
use adflow::speech::{apply_command, parse_command, parse_number_words};

fn main() {
    let mut g = TypedGraph::new();
    for sentence in [
        "add component pipe",
        "add slider with value four hundred and twenty",
        "Add Boolean Toggle with value true",
        "add panel with text Hello, World",
        "add component range with value twelve",
        "add component banana",
        "remove everything",
        "add slider with value seven hundred hundred",
    ] {
        match parse_command(sentence).map_err(|e| e.to_string()).and_then(|c| {
            apply_command(&mut g, &c).map(|id| (c, id)).map_err(|e| e.to_string())
        }) {
            Ok((c, id)) => println!("{sentence:?} -> {c:?} as {id}"),
            Err(e) => println!("{sentence:?} -> {e}"),
        }
    }

    for words in ["nineteen", "two thousand and twenty-one", "minus forty two", "one million three hundred thousand"] {
        println!("{words:?} = {:?}", parse_number_words(words).ok());
    }

    let s = evaluate(&g).expect("speech never forms cycles");
    println!("{} components, {} errors", g.vertices().filter(|v| !v.kind.is_port()).count(), s.errors.len());
    println!("{}", serialize_document(&g));
}
