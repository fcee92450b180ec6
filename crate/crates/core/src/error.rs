use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("nucleus at |r| = {0:e} m is inside the 0.1 nm exclusion radius")]
    SingularPosition(f64),

    #[error("effective field vanishes; the nuclear quantization axis is undefined")]
    DegenerateField,

    #[error("no inversion solution: {0}")]
    NoSolution(String),

    #[error("{0} nuclei exceed the exact-engine limit of 12")]
    DimensionOverflow(usize),

    #[error("state norm² is {0}, expected 1")]
    NotNormalized(f64),

    #[error("pulse sequence is empty")]
    EmptySequence,

    #[error("invalid pulse sequence: {0}")]
    InvalidSequence(String),

    #[error("laser reset of an entangled pure state; evolve an Ensemble instead")]
    EntangledReset,

    #[error("nucleus index {index} out of range for {count} nuclei")]
    InvalidIndex { index: usize, count: usize },

    #[error("empty bath: {0}")]
    EmptyBath(String),

    #[error("time grid is not uniform (relative spacing error {0:e})")]
    NonUniformGrid(f64),

    #[error("fit did not converge in {iterations} iterations (last iterate {last:?})")]
    NonConvergence { iterations: usize, last: Vec<f64> },

    #[error("fit failed at bias {bias}: {source}")]
    BiasFit {
        bias: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}
