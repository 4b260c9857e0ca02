//! Scalar and vector time signals used for source terms `q(t)` and primal forcing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Scalar signal of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum Signal<T> {
    Constant { value: T },
    /// `offset + slope·t`
    Ramp { offset: T, slope: T },
    /// `amplitude·sin(omega·t + phase)`
    Sinusoid {
        amplitude: T,
        omega: T,
        #[serde(default)]
        phase: T,
    },
    /// Piecewise-linear through `(times[i], values[i])`, held constant outside.
    Tabulated { times: Vec<T>, values: Vec<T> },
}

impl<T: Scalar> Signal<T> {
    pub fn constant(value: T) -> Self {
        Signal::Constant { value }
    }

    pub fn ramp(offset: T, slope: T) -> Self {
        Signal::Ramp { offset, slope }
    }

    pub fn sinusoid(amplitude: T, omega: T, phase: T) -> Self {
        Signal::Sinusoid { amplitude, omega, phase }
    }

    pub fn tabulated(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        let s = Signal::Tabulated { times, values };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &T| v.is_finite();
        let ok = match self {
            Signal::Constant { value } => finite(value),
            Signal::Ramp { offset, slope } => finite(offset) && finite(slope),
            Signal::Sinusoid { amplitude, omega, phase } => {
                finite(amplitude) && finite(omega) && finite(phase)
            }
            Signal::Tabulated { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::Configuration(
                        "tabulated signal needs equally many (>0) times and values".into(),
                    ));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Configuration(
                        "tabulated signal times must be strictly increasing".into(),
                    ));
                }
                times.iter().all(finite) && values.iter().all(finite)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::NonFinite("signal parameter".into()))
        }
    }

    pub fn eval(&self, t: T) -> T {
        match self {
            Signal::Constant { value } => *value,
            Signal::Ramp { offset, slope } => *offset + *slope * t,
            Signal::Sinusoid { amplitude, omega, phase } => *amplitude * (*omega * t + *phase).sin(),
            Signal::Tabulated { times, values } => interpolate(times, values, t),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Signal::Constant { .. } => true,
            Signal::Ramp { slope, .. } => *slope == T::zero(),
            Signal::Sinusoid { amplitude, omega, .. } => {
                *amplitude == T::zero() || *omega == T::zero()
            }
            Signal::Tabulated { values, .. } => values.windows(2).all(|w| w[0] == w[1]),
        }
    }
}

fn interpolate<T: Scalar>(times: &[T], values: &[T], t: T) -> T {
    let last = times.len() - 1;
    if t <= times[0] {
        return values[0];
    }
    if t >= times[last] {
        return values[last];
    }
    let hi = times.partition_point(|&s| s <= t);
    let lo = hi - 1;
    let w = (t - times[lo]) / (times[hi] - times[lo]);
    values[lo] + w * (values[hi] - values[lo])
}

/// Vector signal, one scalar signal per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent, bound = "T: Scalar")]
pub struct VectorSignal<T>(pub Vec<Signal<T>>);

impl<T: Scalar> VectorSignal<T> {
    pub fn new(components: Vec<Signal<T>>) -> Self {
        Self(components)
    }

    pub fn constant(values: &[T]) -> Self {
        Self(values.iter().map(|&v| Signal::constant(v)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![Signal::constant(T::zero()); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn eval(&self, t: T) -> Vec<T> {
        self.0.iter().map(|s| s.eval(t)).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(Signal::is_constant)
    }

    pub fn validate(&self) -> Result<()> {
        self.0.iter().try_for_each(Signal::validate)
    }
}
