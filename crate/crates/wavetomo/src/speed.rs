//! Sound-speed models.
//!
//! The wave solver consumes a nodal speed field; the ray tracer needs the
//! speed and its gradient at arbitrary points. [`SpeedModel`] serves both:
//! the analytic kinds evaluate exactly, the gridded kind interpolates
//! bicubically. The standard variable-speed profile used across the test
//! experiments is [`SpeedModel::sin_cos`], `c = 1 + 0.3 sin(πx) + 0.2 cos(πy)`,
//! which stays within `[0.5, 1.5]` on the unit square.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::float::Float;
use crate::grid::{check_speed_positive, Grid2D, ScalarField};

/// A sound-speed model `c(x, y) > 0`.
#[derive(Clone, Debug)]
pub enum SpeedModel<T> {
    /// Uniform speed.
    Constant(T),
    /// `c = mean + ax·sin(πx) + ay·cos(πy)`.
    Sinusoidal { mean: T, ax: T, ay: T },
    /// Nodal values, evaluated off-grid by bicubic interpolation.
    Gridded(ScalarField<T>),
}

impl<T: Float> SpeedModel<T> {
    /// Uniform speed `c0 > 0`.
    pub fn constant(c0: T) -> Result<Self> {
        if !(c0 > T::zero()) {
            return Err(Error::InvalidParameter(format!("speed must be positive, got {c0}")));
        }
        Ok(Self::Constant(c0))
    }

    /// A sinusoidal profile; requires `mean − |ax| − |ay| > 0` so the speed
    /// stays positive.
    pub fn sinusoidal(mean: T, ax: T, ay: T) -> Result<Self> {
        if !(mean - ax.abs() - ay.abs() > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "sinusoidal speed can reach {} <= 0",
                mean - ax.abs() - ay.abs()
            )));
        }
        Ok(Self::Sinusoidal { mean, ax, ay })
    }

    /// The standard variable-speed profile `1 + 0.3 sin(πx) + 0.2 cos(πy)`.
    pub fn sin_cos() -> Self {
        Self::Sinusoidal { mean: T::one(), ax: T::cast(0.3), ay: T::cast(0.2) }
    }

    /// Wraps a nodal field, validating positivity.
    pub fn gridded(field: ScalarField<T>) -> Result<Self> {
        check_speed_positive(&field)?;
        Ok(Self::Gridded(field))
    }

    /// Speed at a point.
    pub fn value(&self, x: T, y: T) -> T {
        match self {
            Self::Constant(c0) => *c0,
            Self::Sinusoidal { mean, ax, ay } => {
                let pi = T::cast(PI);
                *mean + *ax * (pi * x).sin() + *ay * (pi * y).cos()
            }
            Self::Gridded(f) => f.sample_bicubic_with_grad(x, y).0,
        }
    }

    /// Speed and its gradient at a point.
    pub fn value_and_grad(&self, x: T, y: T) -> (T, (T, T)) {
        match self {
            Self::Constant(c0) => (*c0, (T::zero(), T::zero())),
            Self::Sinusoidal { mean, ax, ay } => {
                let pi = T::cast(PI);
                let c = *mean + *ax * (pi * x).sin() + *ay * (pi * y).cos();
                let dx = *ax * pi * (pi * x).cos();
                let dy = -*ay * pi * (pi * y).sin();
                (c, (dx, dy))
            }
            Self::Gridded(f) => f.sample_bicubic_with_grad(x, y),
        }
    }

    /// Nodal evaluation on a grid, validated positive.
    pub fn to_field(&self, grid: &Grid2D<T>) -> Result<ScalarField<T>> {
        let f = match self {
            Self::Constant(c0) => ScalarField::constant(*grid, *c0),
            Self::Gridded(field) if field.grid() == grid => field.clone(),
            _ => ScalarField::from_fn(*grid, |x, y| self.value(x, y)),
        };
        check_speed_positive(&f)?;
        Ok(f)
    }
}
