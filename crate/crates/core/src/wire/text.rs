// SPDX-License-Identifier: Apache-2.0

use super::{WireError, WireMessage};

/// JSON form of `msg`, using the binary layout's field names.
pub fn encode_text(msg: &WireMessage) -> String {
    serde_json::to_string(msg).expect("wire messages always serialize")
}

pub fn decode_text(text: &str) -> Result<WireMessage, WireError> {
    serde_json::from_str(text).map_err(|e| WireError::Text(e.to_string()))
}
