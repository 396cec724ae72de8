use std::fmt;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("truncated stream at bit offset {bit_offset}")]
    Truncated { bit_offset: u64 },

    #[error("corrupt stream at bit offset {bit_offset}: {reason}")]
    Corrupt { bit_offset: u64, reason: String },

    #[error("symbol {0} is not in the Huffman table")]
    UnknownSymbol(u16),

    #[error("unsupported format: {0}")]
    Unsupported(String),

    #[error("frame {frame_no}: {source}")]
    Frame {
        frame_no: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("layer {layer} {name}: {reason}")]
    Arch {
        layer: usize,
        name: String,
        reason: String,
    },

    #[error("no eligible frames: {0}")]
    EmptyStream(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl fmt::Display) -> Self {
        Error::Param(msg.to_string())
    }

    pub(crate) fn corrupt(bit_offset: u64, reason: impl fmt::Display) -> Self {
        Error::Corrupt {
            bit_offset,
            reason: reason.to_string(),
        }
    }

    pub(crate) fn in_frame(self, frame_no: u32) -> Self {
        match self {
            e @ Error::Frame { .. } => e,
            e => Error::Frame {
                frame_no,
                source: Box::new(e),
            },
        }
    }

    /// Frame index attached to this error, if any.
    pub fn frame_no(&self) -> Option<u32> {
        match self {
            Error::Frame { frame_no, .. } => Some(*frame_no),
            _ => None,
        }
    }
}
