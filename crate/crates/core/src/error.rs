use thiserror::Error;

/// Failure modes shared by the model, propagators and classifiers.
///
/// Divergence and non-normalizability are physical outcomes of the dynamics
/// rather than programming errors; they are reported through this type so
/// callers can match on them and decide whether to continue.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A metric eigenvalue (or the phase-space point) left every finite bound.
    #[error("divergence at t = {time}")]
    Divergent { time: f64 },

    /// The uncertainty parameter has Im B <= 0; the state is not in L2.
    #[error("state is not normalizable (Im B = {im_b})")]
    NonNormalizable { im_b: f64 },

    /// The Mobius denominator S_qp B0 + S_qq vanished between `from` and `to`.
    #[error("Mobius pole between t = {from} and t = {to}")]
    Pole { from: f64, to: f64 },

    #[error("metric is singular (det = {det})")]
    SingularMetric { det: f64 },

    /// omega0 + delta x0 vanishes, so the conserved plane is vertical.
    #[error("degenerate conserved plane (omega0 + delta x0 = {denominator})")]
    DegeneratePlane { denominator: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
