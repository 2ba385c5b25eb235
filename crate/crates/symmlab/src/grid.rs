//! Radial sample grids.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Geometric,
}

/// A one-dimensional grid of radii in `[lo, hi]`, endpoints included.
#[derive(Clone, Copy, Debug)]
pub struct RadialGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl RadialGrid {
    pub fn new(lo: f64, hi: f64, count: usize, spacing: Spacing) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || hi < lo {
            return Err(Error::InvalidInput(format!(
                "grid bounds must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
            )));
        }
        if count == 0 || (count == 1 && hi != lo) {
            return Err(Error::InvalidInput(format!(
                "grid count {count} incompatible with bounds [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi, count, spacing })
    }

    pub fn linear(lo: f64, hi: f64, count: usize) -> Result<Self> {
        Self::new(lo, hi, count, Spacing::Linear)
    }

    pub fn geometric(lo: f64, hi: f64, count: usize) -> Result<Self> {
        Self::new(lo, hi, count, Spacing::Geometric)
    }

    pub fn radii(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let m = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / m;
                match self.spacing {
                    Spacing::Linear => self.lo + (self.hi - self.lo) * t,
                    Spacing::Geometric => self.lo * (self.hi / self.lo).powf(t),
                }
            })
            .collect()
    }
}
