use thiserror::Error;

use crate::twolevel::DegeneracyClass;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate spectrum: {0:?}")]
    Degeneracy(DegeneracyClass),

    #[error("mode k = {k} is degenerate: {class:?}")]
    DegenerateMode { k: f64, class: DegeneracyClass },

    #[error("point lies on the Dirac string (|1 + cos theta| = {distance:e})")]
    StringProximity { distance: f64 },

    #[error("evaluation exactly at an exceptional point (r = {r}, eps = {eps})")]
    ExceptionalPoint { r: f64, eps: f64 },

    #[error("tracked level {level} crossed another level at s = {s} (gap {gap:e})")]
    LevelCrossing { level: usize, s: f64, gap: f64 },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("level pair ({n}, {}) is not isolated: level {other} is closer", n + 1)]
    AmbiguousPair { n: usize, other: usize },

    #[error("step size underflow at t = {t} (h = {h:e}); likely near an exceptional point")]
    Stiffness { t: f64, h: f64 },

    #[error("adjoint-pair overlap drifted by {drift:e} (bound {bound:e})")]
    Tolerance { drift: f64, bound: f64 },

    #[error("phase increment {increment} exceeds pi/2 at t = {t}")]
    Unwrap { t: f64, increment: f64 },

    #[error("argument {0} lies on the branch cut")]
    BranchCut(String),

    #[error("singular modulus: k^2 = 1")]
    SingularModulus,

    #[error("singular argument: {0}")]
    SingularArgument(String),

    #[error("(h, delta) = ({h}, {delta}) lies on the exceptional circle")]
    ExceptionalCircle { h: f64, delta: f64 },

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
