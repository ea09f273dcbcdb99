//! Versioned JSON envelopes: `{"version": 1, "kind": "...", "body": ...}`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Instance,
    Term,
    Report,
    Trace,
    Synthesis,
    Verification,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed input at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported format version {0}; this build reads version {FORMAT_VERSION}")]
    UnsupportedVersion(u32),
    #[error("expected a {expected:?} document, found {found:?}")]
    WrongKind { expected: Kind, found: Kind },
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub version: u32,
    pub kind: Kind,
    pub body: T,
}

#[derive(Deserialize)]
struct Header {
    version: u32,
    kind: Kind,
}

pub fn to_json<T: Serialize>(kind: Kind, body: &T) -> String {
    let envelope = Envelope {
        version: FORMAT_VERSION,
        kind,
        body,
    };
    let mut text = serde_json::to_string_pretty(&envelope).expect("plain data serializes");
    text.push('\n');
    text
}

/// Reads an envelope, rejecting unknown versions before looking at the body.
pub fn from_json<T: DeserializeOwned>(expected: Kind, text: &str) -> Result<T, FormatError> {
    let header: Header = serde_json::from_str(text)?;
    if header.version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(header.version));
    }
    if header.kind != expected {
        return Err(FormatError::WrongKind {
            expected,
            found: header.kind,
        });
    }
    let envelope: Envelope<T> = serde_json::from_str(text)?;
    Ok(envelope.body)
}
