//! Error type shared by every layer of the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input document is not parseable JSON.
    #[error("JSON parse error at byte {offset} (line {line}, column {column}): {message}")]
    Json {
        message: String,
        line: usize,
        column: usize,
        offset: usize,
    },

    /// Input document is not parseable XML.
    #[error("XML parse error at line {line}, column {column}: {message}")]
    Xml {
        message: String,
        line: u32,
        column: u32,
    },

    /// Document parsed but does not have the expected overall layout.
    #[error("invalid document: {0}")]
    InvalidDocument(String),

    #[error("invalid node id `{namespace}:{local}`: {reason}")]
    InvalidNodeId {
        namespace: String,
        local: String,
        reason: String,
    },

    /// A name canonicalized to the empty string.
    #[error("cannot canonicalize `{raw}`: no alphanumeric characters")]
    EmptyCanonicalName { raw: String },

    #[error("duplicate node id `{id}` across inputs")]
    DuplicateNode { id: String },

    #[error("unknown node `{id}`")]
    UnknownNode { id: String },

    #[error("node `{id}` is in namespace {namespace}, not accepted by {context}")]
    UnsupportedNamespace {
        id: String,
        namespace: String,
        context: String,
    },

    /// A `class#`/`restriction#`/`enum#` token that cannot be turned into a label.
    #[error("malformed label `{token}` at byte {offset}: {reason}")]
    MalformedLabel {
        token: String,
        offset: usize,
        reason: String,
    },

    /// Operation requires a graph whose closure flag is set.
    #[error("closure has not been applied to this graph")]
    ClosureNotApplied,

    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    #[error("graph consistency error: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Builds a [`Error::Json`] from a serde error, recovering the byte offset
    /// of the failure from its line/column position in `input`.
    pub(crate) fn from_json(input: &str, err: &serde_json::Error) -> Error {
        let (line, column) = (err.line(), err.column());
        Error::Json {
            message: err.to_string(),
            line,
            column,
            offset: byte_offset(input, line, column),
        }
    }

    pub(crate) fn from_xml(err: &roxmltree::Error) -> Error {
        let pos = err.pos();
        Error::Xml {
            message: err.to_string(),
            line: pos.row,
            column: pos.col,
        }
    }
}

/// Byte offset of 1-based (line, column) in `input`; saturates at input end.
fn byte_offset(input: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut remaining = line - 1;
    let mut offset = 0usize;
    for (i, b) in input.bytes().enumerate() {
        if remaining == 0 {
            break;
        }
        if b == b'\n' {
            remaining -= 1;
            offset = i + 1;
        }
    }
    (offset + column.saturating_sub(1)).min(input.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_error_carries_byte_offset() {
        let input = "{\n  \"objects\": [oops]\n}";
        let err = serde_json::from_str::<serde_json::Value>(input).unwrap_err();
        let converted = Error::from_json(input, &err);
        match converted {
            Error::Json { offset, line, .. } => {
                assert_eq!(line, 2);
                assert_eq!(&input[offset..offset + 1], "o");
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn byte_offset_saturates() {
        assert_eq!(byte_offset("ab", 5, 10), 2);
        assert_eq!(byte_offset("", 1, 1), 0);
    }
}
