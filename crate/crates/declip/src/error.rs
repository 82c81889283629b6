use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeclipError {
    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),
    #[error("signal must contain at least one sample")]
    EmptySignal,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("clipping threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("SDR undefined: reference signal has zero energy")]
    ZeroReference,
    #[error("nothing was clipped: H and L are both empty")]
    NothingClipped,
    #[error("target SDR {target} dB is not bracketable for this signal")]
    TargetNotBracketable { target: f64 },
    #[error("invalid transform spec: {0}")]
    InvalidSpec(String),
    #[error("synthesis produced non-real output (imaginary residue {residue:.3e})")]
    ImaginaryResidue { residue: f64 },
    #[error("coefficient-domain projection requires a Parseval tight spec")]
    NotTight,
    #[error("sparsity level {k} out of range (max {max})")]
    SparsityOutOfRange { k: usize, max: usize },
    #[error("neighborhood required for {0} shrinkage")]
    MissingNeighborhood(&'static str),
    #[error("block has no reliable samples")]
    NoReliableSamples,
    #[error("block of {len} samples is too short for AR order {order}")]
    BlockTooShort { len: usize, order: usize },
    #[error("degenerate block: {0}")]
    DegenerateBlock(String),
    #[error("wav error: {0}")]
    Wav(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown method: {0}")]
    UnknownMethod(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DeclipError>;
