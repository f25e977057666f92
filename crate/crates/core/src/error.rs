use crate::hilbert::Site;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("level list length mismatch: label has {got} {role} levels, layout has {expected}")]
    LabelLengthMismatch {
        role: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("site {site:?} out of range for layout with {controls} controls and {targets} targets")]
    SiteOutOfRange {
        site: Site,
        controls: usize,
        targets: usize,
    },

    #[error("pair embedding requires two distinct sites, got {0:?} twice")]
    SameSiteTwice(Site),

    #[error("site matrix dimension {got} does not match site kind (expected {expected})")]
    SiteMatrixDimension { got: usize, expected: usize },

    #[error("layout must contain at least one control and one target atom")]
    EmptyLayout,

    #[error("atoms {0} and {1} coincide; pairwise distances must be positive")]
    CoincidentAtoms(usize, usize),

    #[error("unknown species `{0}`")]
    UnknownSpecies(String),

    #[error("no interaction coefficients registered for species pair {0}-{1}")]
    UnknownPair(String, String),

    #[error(
        "interatomic distance {r_um} um is at or below the Le Roy radius {le_roy_um} um; \
         the asymptotic C3/C6 expansion is not valid there"
    )]
    BelowLeRoyRadius { r_um: f64, le_roy_um: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time {t} outside pulse window [0, {duration}]")]
    OutsidePulseWindow { t: f64, duration: f64 },

    #[error("integrator produced non-finite amplitudes at t = {t_us} us")]
    IntegratorFailure { t_us: f64 },

    #[error("density matrix is not positive semidefinite: eigenvalue {0} below tolerance")]
    NotPositiveSemidefinite(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
