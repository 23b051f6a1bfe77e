//! Error type shared across the solver.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("quadrature configuration error: {0}")]
    QuadratureConfig(String),

    #[error("azimuthal integration failed to reach tolerance: requested {requested:e}, achieved {achieved:e}")]
    AzimuthalTolerance { requested: f64, achieved: f64 },

    #[error("material parameter error: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("system singular to working precision (condition estimate {cond:e})")]
    Conditioning { cond: f64 },

    #[error("evaluation point too close to the surface: distance {dist:e} < {min:e}")]
    NearEvaluation { dist: f64, min: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
