// SPDX-License-Identifier: Apache-2.0

//! Encode a few messages in both codecs and show the bytes.

use adflow::param::{ParameterUpdate, UpdateValue};
use adflow::wire::{decode, decode_text, encode, encode_text, Component, Control, WireMessage};

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect::<Vec<_>>().join(" ")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let messages = [
        WireMessage::components([]),
        WireMessage::components([Component::BooleanToggle {
            name: "open".into(),
            guid: "t1".into(),
            value: true,
        }]),
        WireMessage::ParameterUpdate(ParameterUpdate::new("s1", UpdateValue::Number(2.5))),
        WireMessage::Control(Control::LockRequest { guid: "s1".into() }),
    ];
    for m in &messages {
        let bytes = encode(m);
        assert_eq!(&decode(&bytes)?, m);
        let text = encode_text(m);
        assert_eq!(&decode_text(&text)?, m);
        println!("{text}");
        println!("  {}", hex(&bytes));
    }

    let bytes = encode(&messages[2]);
    for cut in [0, 5, bytes.len() - 1] {
        println!("cut at {cut}: {}", decode(&bytes[..cut]).unwrap_err());
    }
    let mut padded = bytes.clone();
    padded.push(0);
    println!("padded: {}", decode(&padded).unwrap_err());
    Ok(())
}
