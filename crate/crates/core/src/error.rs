use thiserror::Error;

/// Failure modes of the pipeline. Variants are grouped by the module that raises them.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    // problem_model
    #[error("jet mismatch in {quantity} derivative {order:?} at {point:?}: analytic {analytic:e}, finite difference {fd:e}")]
    JetMismatch {
        quantity: String,
        order: (usize, usize),
        point: (f64, f64),
        analytic: f64,
        fd: f64,
    },
    #[error("domain box is empty")]
    DomainEmpty,
    #[error("point ({xi}, {eta}) lies outside the domain box")]
    OutOfDomain { xi: f64, eta: f64 },
    #[error("expression error: {0}")]
    Expression(String),

    // char_geometry / blowup_analysis
    #[error("Newton iteration diverged: {context}")]
    NewtonDiverged { context: String },
    #[error("degenerate implicit solve at t={t}, xi={xi}: 1+t*psi_eta = {k:e}")]
    DegenerateImplicit { t: f64, xi: f64, k: f64 },
    #[error("min H = {min_h} is nonnegative: no blowup")]
    NoNegativeMin { min_h: f64 },
    #[error("generic nondegenerate condition violated: {clause}")]
    GncViolated { clause: String },
    #[error("blowup curve Jacobian nearly singular at y={y}: det = {det:e}")]
    JacobianNearSingular { y: f64, det: f64 },
    #[error("coefficient {coeff} = {value} at y={y} has the wrong sign")]
    SignViolation { y: f64, coeff: &'static str, value: f64 },
    #[error("t={t} precedes the blowup time {t_star}")]
    BeforeBlowup { t: f64, t_star: f64 },
    #[error("fold point not found at t={t}, y={y}")]
    FoldNotFound { t: f64, y: f64 },

    // multivalued_inversion
    #[error("found {found} roots in region {region}")]
    RootCountUnexpected { region: String, found: usize },
    #[error("root residual {residual:e} too large")]
    ResidualTooLarge { residual: f64 },
    #[error("{what} = {value} outside the expansion window {limit}")]
    WindowExceeded { what: &'static str, value: f64, limit: f64 },
    #[error("cubic has no real root on the requested branch for c={c}")]
    CubicBranchMissing { c: f64 },
    #[error("expansion denominator {value:e} below guard")]
    DenominatorSmall { value: f64 },
    #[error("point (t={t}, y={y}) outside the analysis window")]
    OutsideWindow { t: f64, y: f64 },

    // shock_front
    #[error("plus/minus branches unavailable at (t={t}, x={x}, y={y})")]
    BranchUnavailable { t: f64, x: f64, y: f64 },
    #[error("cancellation bracket {value:e} exceeds tolerance")]
    CancellationResidual { value: f64 },
    #[error("Picard iteration failed to contract (ratio {ratio})")]
    ContractionFailed { ratio: f64 },
    #[error("|Lambda| = {lambda:e} exceeds M*s = {bound:e} at s={s}")]
    BoundViolated { s: f64, lambda: f64, bound: f64 },
    #[error("dy/dbeta = {dy_dbeta} outside [0.25, 4] at s={s}, beta={beta}")]
    MonotonicityLost { s: f64, beta: f64, dy_dbeta: f64 },
    #[error("jump across the front is degenerate")]
    DegenerateJump,
    #[error("entropy condition violated: margins ({margin_plus:e}, {margin_minus:e})")]
    EntropyViolated { margin_plus: f64, margin_minus: f64 },

    // field_eval
    #[error("point lies on the shock; use front states")]
    OnShock,
    #[error("Jacobian 1+tH = {d:e} vanishes")]
    JacobianVanishing { d: f64 },
    #[error("samples span {decades:.2} decades, need at least 2.5")]
    InsufficientDecades { decades: f64 },
    #[error("ray crosses the shock front")]
    ShockCrossed,

    // reference_fv
    #[error("CFL number {cfl} exceeds 0.45")]
    CflViolation { cfl: f64 },
    #[error("non-finite state at step {step}")]
    NonFiniteState { step: usize },
    #[error("no shock detected")]
    ShockNotDetected,

    // cli_io
    #[error("unknown subcommand {0}")]
    UnknownSubcommand(String),
    #[error("invalid config{}: {key}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    ConfigInvalid {
        line: Option<usize>,
        key: String,
        msg: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit code for the CLI: 2 for violated preconditions of the theory,
    /// 3 for numerical failures, 64/65 for usage and configuration errors.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            UnknownSubcommand(_) => 64,
            ConfigInvalid { .. } | Expression(_) | DomainEmpty => 65,
            JetMismatch { .. }
            | NoNegativeMin { .. }
            | GncViolated { .. }
            | SignViolation { .. }
            | EntropyViolated { .. }
            | MonotonicityLost { .. }
            | CancellationResidual { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
