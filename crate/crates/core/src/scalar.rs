use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar the numerical core is generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold at all.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    /// Absolute tolerance `base`, widened to a small multiple of machine epsilon
    /// when the type cannot resolve `base`.
    fn tolerance(base: f64) -> Self {
        let floor = Self::epsilon().to_f64().unwrap_or(f64::EPSILON) * 64.0;
        Self::lit(base.max(floor))
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
