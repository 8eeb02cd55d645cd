use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("polynomial degree {degree} exceeds the cap of {cap}")]
    DegreeOverflow { degree: usize, cap: usize },
    #[error("unsupported order {0}")]
    InvalidOrder(u32),
    #[error("f and g are linearly dependent (normalized Gram determinant {gram:.3e})")]
    LinearDependence { gram: f64 },
    #[error("q must be real-valued (max imaginary coefficient {max_imag:.3e})")]
    ComplexPotential { max_imag: f64 },
    #[error("no nonzero real scale makes lambda vanish")]
    NoRoot,
    #[error("branch quantity `{name}` is within 10x of its zero threshold (value {value:.3e}, threshold {threshold:.3e})")]
    UnstableClassification {
        name: String,
        value: f64,
        threshold: f64,
    },
    #[error("classification reached the impossible node (exactly one zero mean with lambda = 0)")]
    ImpossibleNode,
    #[error("denominator |a2 - conj(kappa) a1| = {0:.3e} is below its threshold")]
    DegenerateDenominator(f64),
    #[error("sigma_+ has imaginary part {imag:.3e} (scale {scale:.3e})")]
    NonRealSigmaPlus { imag: f64, scale: f64 },
    #[error("branch conditions for {case} do not hold: {detail}")]
    BranchMismatch { case: &'static str, detail: String },
    #[error(
        "self-consistency system is singular (condition number {cond:.3e} at eps^2 E = {energy}); \
         perturb E slightly to avoid an interior Neumann-type eigenvalue"
    )]
    SelfConsistencySingular { cond: f64, energy: Complex64 },
    #[error("ODE tolerance not met (estimated error {estimate:.3e})")]
    OdeToleranceNotMet { estimate: f64 },
    #[error("plane-wave matching system is singular at k = {k}")]
    MatchingSingular { k: f64 },
    #[error("rank-two Neumann problem is unsolvable: {condition} has defect {defect:.3e}")]
    Unsolvable { condition: &'static str, defect: f64 },
    #[error("boundary data violates the coupling conditions (defect {0:.3e})")]
    CouplingViolated(f64),
    #[error("truncation length {length} is too small (need at least {required})")]
    TruncationTooSmall { length: f64, required: f64 },
    #[error("separated interactions have no transfer matrix")]
    SeparatedHasNoTransfer,
    #[error("need at least 3 points with positive error, got {0}")]
    InsufficientPoints(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
