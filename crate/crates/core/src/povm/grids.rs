use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square grid of complex amplitudes `β` over `[−radius, radius]²`.
///
/// Nodes are ordered with the real part outer and the imaginary part inner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeGrid {
    pub radius: f64,
    pub points: usize,
}

impl Default for AmplitudeGrid {
    fn default() -> Self {
        Self { radius: 6.0, points: 41 }
    }
}

impl AmplitudeGrid {
    pub fn new(radius: f64, points: usize) -> Result<Self> {
        let g = Self { radius, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) || self.points < 2 {
            return Err(Error::Domain(format!(
                "amplitude grid needs a positive radius and at least 2 points per axis, got {} and {}",
                self.radius, self.points
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / (self.points - 1) as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing().powi(2)
    }

    pub fn axis(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points).map(|i| -self.radius + i as f64 * h).collect()
    }

    pub fn nodes(&self) -> Vec<C64> {
        let axis = self.axis();
        axis.iter().flat_map(|&re| axis.iter().map(move |&im| C64::new(re, im))).collect()
    }
}

/// Uniform grid of real outcomes over `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for RealGrid {
    fn default() -> Self {
        Self { min: -10.0, max: 10.0, points: 201 }
    }
}

impl RealGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        let g = Self { min, max, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max > self.min) || !self.min.is_finite() || !self.max.is_finite() || self.points < 2 {
            return Err(Error::Domain(format!(
                "real grid needs min < max and at least 2 points, got [{}, {}] with {}",
                self.min, self.max, self.points
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points).map(|i| self.min + i as f64 * h).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grids() {
        let a = AmplitudeGrid::default();
        assert_eq!(a.nodes().len(), 41 * 41);
        assert!((a.spacing() - 0.3).abs() < 1e-15);
        assert_eq!(a.nodes()[0], C64::new(-6.0, -6.0));
        assert_eq!(a.nodes()[1], C64::new(-6.0, -5.7));
        let r = RealGrid::default();
        assert!((r.spacing() - 0.1).abs() < 1e-15);
        assert_eq!(r.nodes().len(), 201);
        assert!(RealGrid::new(1.0, 1.0, 5).is_err());
        assert!(AmplitudeGrid::new(2.0, 1).is_err());
    }
}
