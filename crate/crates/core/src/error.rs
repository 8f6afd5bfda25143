use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cloud sampling failed: could not place {placed} of {requested} atoms in a {diameter:e} m sphere after {attempts} attempts")]
    SamplingExhausted {
        requested: usize,
        placed: usize,
        diameter: f64,
        attempts: u64,
    },

    #[error("coincident atom positions have no defined pair shift")]
    ZeroSeparation,

    #[error("need at least {required} atoms, got {got}")]
    TooFewAtoms { required: usize, got: usize },

    #[error("truncation at double excitations is invalid: |Omega|/min|Delta_jk| = {ratio:.3} exceeds {limit}")]
    TruncationInvalid { ratio: f64, limit: f64 },

    #[error("integrator step size underflow at t = {time:e} s of {duration:e} s (step {step:e} s, {steps} steps, norm {norm:.12})")]
    StepUnderflow {
        time: f64,
        duration: f64,
        step: f64,
        steps: u64,
        norm: f64,
    },

    #[error("norm drifted by {drift:e} (tolerance {tolerance:e}) during evolution")]
    NormDrift { drift: f64, tolerance: f64 },

    #[error("pulses must be applied sequentially; pulse {index} starts at {start:e} s before the previous pulse ends at {previous_end:e} s")]
    OverlappingPulses {
        index: usize,
        start: f64,
        previous_end: f64,
    },

    #[error("state is outside the modeled subspace: {0}")]
    UnsupportedSequence(String),

    #[error("resonant light (zero detuning) is not supported by the dipole potential model")]
    ResonantLight,

    #[error("nonpositive acceleration {0:e} m/s^2: atom is not ejected")]
    NotEjected(f64),

    #[error("no escaped trajectories to analyze")]
    NoEscapedTrajectories,

    #[error("zero phase-matching vector k1 + k2 - k3")]
    DegenerateGeometry,

    #[error("angular grid under-resolved: {points:.1} samples across the central lobe (need >= {required}); refine the grid")]
    UnderResolved { points: f64, required: usize },

    #[error("pattern lobe extends beyond the grid edge; enlarge the angular range")]
    LobeNotContained,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
