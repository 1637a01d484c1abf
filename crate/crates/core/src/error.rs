use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeoError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("{what}: argument {value} outside the admissible domain ({domain})")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("metric is degenerate at phi = {phi} (guard band {phi_min})")]
    Degenerate { phi: f64, phi_min: f64 },

    #[error("lambda vanishes at r = {r}; curvature has a pole there")]
    Pole { r: f64 },

    #[error("trajectory entered the boundary guard band at t = {t}")]
    BoundaryApproach { t: f64 },

    #[error("integration step failed at t = {t} (step size {h:e})")]
    StepFailure { t: f64, h: f64 },

    #[error("|dr/dphi| = {slope} exceeded the chart threshold at phi = {phi}")]
    SlopeBlowup { phi: f64, slope: f64 },

    #[error("boundary geodesic from r0 = {r0} never reached r = 0: {reason}")]
    NoCrossing { r0: f64, reason: String },

    #[error(
        "series start at phi_start = {phi_start} has remainder estimate {remainder:e} > {tol:e}"
    )]
    SeriesInvalid {
        phi_start: f64,
        remainder: f64,
        tol: f64,
    },

    #[error("found {found} double-contact roots, wanted {wanted}")]
    BracketExhausted { found: usize, wanted: usize },

    #[error("curvature could not be evaluated along the trajectory at t = {t}: {source}")]
    CurvatureEvaluation {
        t: f64,
        #[source]
        source: Box<GeoError>,
    },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("output failed: {0}")]
    Output(String),
}

impl From<std::io::Error> for GeoError {
    fn from(e: std::io::Error) -> Self {
        GeoError::Output(e.to_string())
    }
}

impl From<csv::Error> for GeoError {
    fn from(e: csv::Error) -> Self {
        GeoError::Output(e.to_string())
    }
}

impl GeoError {
    pub(crate) fn domain(what: &'static str, value: f64, domain: impl Into<String>) -> Self {
        GeoError::Domain {
            what,
            value,
            domain: domain.into(),
        }
    }
}
