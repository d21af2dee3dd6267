use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, Signed};

/// Field-like scalar used by the exact oracle: `f32`, `f64` or a rational.
pub trait Scalar: Num + Signed + Clone + PartialOrd + FromPrimitive + Debug + Send + Sync {
    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    fn quarter() -> Self {
        Self::half() * Self::half()
    }

    /// Lossy conversion used for reporting.
    fn to_f64_lossy(&self) -> f64;
}

impl Scalar for f32 {
    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for f64 {
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for num_rational::BigRational {
    fn to_f64_lossy(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Exact rational `num / den`.
pub fn ratio(num: i64, den: i64) -> crate::Exact {
    num_rational::BigRational::new(num.into(), den.into())
}
