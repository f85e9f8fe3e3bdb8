use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid `x_j = x_min + j dx`, `dx = (x_max - x_min) / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl Grid {
    pub fn new(n_points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if !n_points.is_power_of_two() || n_points < 16 {
            return Err(Error::InvalidInput(format!(
                "grid size {n_points} must be a power of two >= 16"
            )));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidInput(format!(
                "grid extent [{x_min:e}, {x_max:e}] is empty"
            )));
        }
        Ok(Self {
            n_points,
            x_min,
            x_max,
        })
    }

    pub fn centered(n_points: usize, center: f64, half_width: f64) -> Result<Self> {
        Self::new(n_points, center - half_width, center + half_width)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn coords(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_points).map(|j| self.x_min + j as f64 * dx).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * PI / (self.x_max - self.x_min);
        (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                m * dk
            })
            .collect()
    }

    /// Same extent with twice the points.
    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points,
            ..*self
        }
    }

    /// Indices of the outer 5% of the grid on each side.
    pub(crate) fn edge_width(&self) -> usize {
        (self.n_points / 20).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_wavenumbers() {
        let g = Grid::new(64, -1.0, 1.0).unwrap();
        assert_eq!(g.dx(), 2.0 / 64.0);
        let k = g.wavenumbers();
        assert_eq!(k[0], 0.0);
        assert!((k[1] - PI).abs() < 1e-12);
        assert!((k[32] + 32.0 * PI).abs() < 1e-9);
        assert!(Grid::new(100, 0.0, 1.0).is_err());
        assert!(Grid::new(64, 1.0, 1.0).is_err());
    }
}
