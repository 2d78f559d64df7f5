use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, Real};

/// Minimum number of samples accepted on any grid.
pub const MIN_GRID_COUNT: usize = 16;

/// Uniform grid descriptor.
///
/// A non-periodic grid includes both endpoints. A periodic grid covers the
/// half-open interval `[min, max)` and never duplicates the endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "R: Serialize", deserialize = "R: Deserialize<'de>"))]
pub struct UniformGrid<R> {
    pub min: R,
    pub max: R,
    pub count: usize,
    #[serde(default)]
    pub periodic: bool,
}

impl<R: Real> UniformGrid<R> {
    pub fn new(min: R, max: R, count: usize) -> Self {
        Self { min, max, count, periodic: false }
    }

    pub fn periodic(min: R, max: R, count: usize) -> Self {
        Self { min, max, count, periodic: true }
    }

    /// Periodic angle grid on `[0, 2π)`.
    pub fn angle(count: usize) -> Self {
        Self::periodic(R::zero(), R::TAU(), count)
    }

    pub fn spacing(&self) -> R {
        let intervals = if self.periodic { self.count } else { self.count - 1 };
        (self.max - self.min) / from_usize(intervals)
    }

    #[inline]
    pub fn point(&self, i: usize) -> R {
        self.min + from_usize::<R>(i) * self.spacing()
    }

    pub fn points(&self) -> Vec<R> {
        (0..self.count).map(|i| self.point(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Same interval with `factor` times as many intervals.
    pub fn refined(&self, factor: usize) -> Self {
        let count = if self.periodic {
            self.count * factor
        } else {
            (self.count - 1) * factor + 1
        };
        Self { count, ..*self }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.max <= self.min {
            return Err(Error::config(format!("{name}: need finite min < max")));
        }
        if self.count < MIN_GRID_COUNT {
            return Err(Error::config(format!(
                "{name}: count {} below minimum {MIN_GRID_COUNT}",
                self.count
            )));
        }
        Ok(())
    }
}
