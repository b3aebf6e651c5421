use thiserror::Error;

pub type Result<T> = std::result::Result<T, FemError>;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("mesh parse error on line {line}: {msg}")]
    MeshParse { line: usize, msg: String },

    #[error("degenerate triangle {index}{}: signed area {area:e}", line_suffix(*line))]
    DegenerateTriangle {
        index: usize,
        line: Option<usize>,
        area: f64,
    },

    #[error("triangle {index}{} references vertex {vertex} but the mesh has {count} vertices", line_suffix(*line))]
    DanglingVertex {
        index: usize,
        line: Option<usize>,
        vertex: usize,
        count: usize,
    },

    #[error("mesh level {level} exceeds the configured cap {cap}")]
    LevelTooLarge { level: u32, cap: u32 },

    #[error("mesh has no interior vertex")]
    NoInteriorVertices,

    #[error("field belongs to a different mesh")]
    MeshMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("nonlocal root-find failed at t = {t}: {msg}")]
    RootFind { t: f64, msg: String },

    #[error("non-finite value encountered at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },

    #[error("{inequality} violated at step {step}: lhs {lhs:e} > rhs {rhs:e}")]
    StabilityViolation {
        inequality: &'static str,
        step: usize,
        lhs: f64,
        rhs: f64,
    },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("problem `{0}` has no exact solution")]
    NoExactSolution(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn line_suffix(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" (line {l})"),
        None => String::new(),
    }
}
