//! Distance-to-amplitude gain models.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::TopologyError;

/// Non-increasing map from distance (meters) to amplitude gain `|g|`.
///
/// Only the magnitude matters for every rate expression, so gains are real
/// and nonnegative.
#[derive(Clone)]
pub enum GainFunction {
    /// `g(d) = d^(-alpha/2)`, so the received power decays as `d^(-alpha)`.
    PowerLaw { alpha: f64 },
    /// `g(d) = exp(-gamma * d)`.
    Exponential { gamma: f64 },
    /// `g(d) = 1`.
    Constant,
    /// Arbitrary user-supplied gain. Monotonicity is checked when the power
    /// matrix is built, not here.
    Custom {
        label: String,
        gain: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl GainFunction {
    pub fn power_law(alpha: f64) -> Result<Self, TopologyError> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(TopologyError::InvalidGain(format!(
                "power-law exponent must be finite and >= 0, got {alpha}"
            )));
        }
        Ok(Self::PowerLaw { alpha })
    }

    pub fn exponential(gamma: f64) -> Result<Self, TopologyError> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(TopologyError::InvalidGain(format!(
                "exponential rate must be finite and >= 0, got {gamma}"
            )));
        }
        Ok(Self::Exponential { gamma })
    }

    pub fn custom(label: impl Into<String>, gain: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom {
            label: label.into(),
            gain: Arc::new(gain),
        }
    }

    /// Amplitude gain at distance `d`.
    pub fn amplitude(&self, d: f64) -> f64 {
        match self {
            Self::PowerLaw { alpha } => d.powf(-alpha / 2.0),
            Self::Exponential { gamma } => (-gamma * d).exp(),
            Self::Constant => 1.0,
            Self::Custom { gain, .. } => gain(d),
        }
    }

    /// Power gain `g(d)^2`.
    pub fn power_gain(&self, d: f64) -> f64 {
        let a = self.amplitude(d);
        a * a
    }
}

impl fmt::Debug for GainFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GainFunction({self})")
    }
}

impl fmt::Display for GainFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PowerLaw { alpha } => write!(f, "pl:{alpha}"),
            Self::Exponential { gamma } => write!(f, "exp:{gamma}"),
            Self::Constant => write!(f, "const"),
            Self::Custom { label, .. } => write!(f, "custom:{label}"),
        }
    }
}

impl FromStr for GainFunction {
    type Err = TopologyError;

    /// Parses `pl:<alpha>`, `exp:<gamma>` or `const`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "const" {
            return Ok(Self::Constant);
        }
        let parse = |v: &str| -> Result<f64, TopologyError> {
            v.parse::<f64>()
                .map_err(|_| TopologyError::InvalidGain(format!("bad gain parameter in {s:?}")))
        };
        match s.split_once(':') {
            Some(("pl", v)) => Self::power_law(parse(v)?),
            Some(("exp", v)) => Self::exponential(parse(v)?),
            _ => Err(TopologyError::InvalidGain(format!(
                "unknown gain preset {s:?} (expected pl:<alpha>, exp:<gamma> or const)"
            ))),
        }
    }
}
