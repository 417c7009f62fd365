use core::fmt;

/// Errors reported by the evaluators in this crate.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A series did not reach the requested tolerance. Carries the partial
    /// sum and the number of terms consumed.
    NonConvergence { partial: f64, terms: usize },
    /// A quadrature could not reach the requested tolerance before hitting
    /// its subdivision cap. Carries the best estimate and its error bound.
    QuadLimit { estimate: f64, error: f64 },
    /// Parameters outside the domain of the requested quantity.
    Domain(&'static str),
    /// The requested law for these parameters is stated in no closed form;
    /// the caller should fall back to simulation.
    PaperScope(&'static str),
    /// The evaluator supports the request in principle but not at this size.
    Capability(&'static str),
    /// Rate estimation is impossible on this record.
    Estimation(&'static str),
    /// A conditional simulation accepts too few paths to be useful.
    LowAcceptance { estimated: f64, floor: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonConvergence { partial, terms } => write!(
                f,
                "series failed to converge after {terms} terms (partial sum {partial:e})"
            ),
            Error::QuadLimit { estimate, error } => write!(
                f,
                "quadrature hit its subdivision cap (estimate {estimate:e}, error bound {error:e})"
            ),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::PaperScope(msg) => write!(f, "paper scope: {msg}"),
            Error::Capability(msg) => write!(f, "capability: {msg}"),
            Error::Estimation(msg) => write!(f, "estimation error: {msg}"),
            Error::LowAcceptance { estimated, floor } => write!(
                f,
                "conditioning acceptance {estimated:e} below floor {floor:e}; widen the bin or change parameters"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
