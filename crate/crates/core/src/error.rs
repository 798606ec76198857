use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate pole: z = 0 has no damping/frequency")]
    DegeneratePole,

    #[error("segment {index} has {len} samples, needs at least {required} for pencil parameter {pencil}")]
    SegmentTooShort {
        index: usize,
        len: usize,
        required: usize,
        pencil: usize,
    },

    #[error("pencil parameter {pencil} violates {lower} <= p <= {upper} (order {order}, shortest segment {min_len})")]
    PencilBound {
        pencil: usize,
        order: usize,
        min_len: usize,
        lower: usize,
        upper: usize,
    },

    #[error("requested order {order} exceeds numerical rank {rank}; singular values {spectrum:?}")]
    RankDeficient {
        order: usize,
        rank: usize,
        spectrum: Vec<f64>,
    },

    #[error("all singular values are zero")]
    ZeroSignal,

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
