use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid audio buffer: {0}")]
    InvalidAudio(String),

    #[error("target sample rate must be positive")]
    ZeroSampleRate,

    #[error("invalid frontend configuration: {0}")]
    InvalidConfig(String),

    #[error("signal has {samples} samples, shorter than one {frame_len}-sample frame")]
    SignalTooShort { samples: usize, frame_len: usize },

    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("mel spectrogram must be on the 2.5 ms grid, got {0} ms")]
    NotOversampled(f64),

    #[error("feature matrix is empty")]
    EmptyFeatures,

    #[error("entropy curve is empty")]
    EmptyCurve,

    #[error("embedding for `{0}` has zero norm")]
    ZeroNorm(String),

    #[error("unknown utterance id `{0}`")]
    UnknownId(String),

    #[error("score set has no {0} trials")]
    MissingClass(&'static str),

    #[error("decision sequences differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },

    #[error("no utterances left after filtering")]
    EmptyManifest,

    #[error("invalid augmentation request: {0}")]
    InvalidPlan(String),

    #[error("invalid synthesis parameters: {0}")]
    InvalidSynthesis(String),
}
