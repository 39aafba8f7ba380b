use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not unitary (‖U†U − I‖ = {residual:.3e})")]
    NonUnitary { residual: f64 },

    #[error("operation not defined for representation kind `{0}`")]
    UnsupportedRep(String),

    #[error("bilinear covariant `{slot}` has imaginary part {imag:.3e}")]
    NonRealCovariant { slot: &'static str, imag: f64 },

    #[error("anchor is Dirac-orthogonal to the state (⟨η̄|ρ|η⟩ = {value:.3e})")]
    DegenerateAnchor { value: f64 },

    #[error("axis must be a unit 3-vector (norm {norm})")]
    BadAxis { norm: f64 },

    #[error("matrix is not a restricted Lorentz transformation: {0}")]
    NotConnected(String),

    #[error("spin lift is singular")]
    Singular,

    #[error("samples do not match the quadrature grid: {0}")]
    GridMismatch(String),

    #[error("negative marginal weight {0:.3e}")]
    NegativeWeight(f64),

    #[error("dataset is missing frame `{0}`")]
    MissingFrame(String),

    #[error("inconsistent covariant input: {0}")]
    InconsistentInput(String),

    #[error("no candidate reproduces the marginals (best residual {best:.3e})")]
    NoValidCandidate { best: f64 },

    #[error("invalid frame label `{0}`")]
    BadLabel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
