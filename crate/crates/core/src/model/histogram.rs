use serde::{Deserialize, Serialize};

use super::ModelError;

/// Relative tolerance on bin spacing uniformity.
const UNIFORMITY_TOL: f64 = 1e-9;

/// Uniform grid of time-bin centers, in ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub width: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(start: f64, width: f64, len: usize) -> Result<Self, ModelError> {
        super::check_positive("bin_width", width)?;
        if !start.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "start",
                reason: "must be finite".into(),
            });
        }
        if len == 0 {
            return Err(ModelError::GridTooShort { min: 1, got: 0 });
        }
        Ok(Self { start, width, len })
    }

    /// Grid with bin centers spanning `[lo, hi]` symmetrically filled at `width`.
    pub fn spanning(lo: f64, hi: f64, width: f64) -> Result<Self, ModelError> {
        super::check_positive("bin_width", width)?;
        let len = ((hi - lo) / width).round() as usize + 1;
        Self::new(lo, width, len)
    }

    /// Validates a list of bin centers and returns the grid they describe.
    pub fn from_centers(centers: &[f64]) -> Result<Self, ModelError> {
        if centers.len() < 2 {
            return Err(ModelError::GridTooShort {
                min: 2,
                got: centers.len(),
            });
        }
        let width = centers[1] - centers[0];
        if !(width > 0.0) {
            return Err(ModelError::NonUniformGrid { index: 1 });
        }
        for (i, pair) in centers.windows(2).enumerate() {
            let d = pair[1] - pair[0];
            if (d - width).abs() > UNIFORMITY_TOL * width.max(pair[1].abs()) {
                return Err(ModelError::NonUniformGrid { index: i + 1 });
            }
        }
        Self::new(centers[0], width, centers.len())
    }

    #[inline]
    pub fn center(&self, i: usize) -> f64 {
        self.start + self.width * i as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.center(i)).collect()
    }

    pub fn end(&self) -> f64 {
        self.center(self.len - 1)
    }

    /// Index of the bin containing `t`, if any.
    pub fn bin_of(&self, t: f64) -> Option<usize> {
        let x = ((t - self.start) / self.width).round();
        if x < 0.0 || x >= self.len as f64 {
            None
        } else {
            Some(x as usize)
        }
    }
}

/// Binned coincidence counts versus time delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    grid: TimeGrid,
    counts: Vec<u64>,
}

impl Histogram {
    pub fn new(grid: TimeGrid, counts: Vec<u64>) -> Result<Self, ModelError> {
        if counts.len() != grid.len {
            return Err(ModelError::InvalidParameter {
                name: "counts",
                reason: format!("{} counts for {} bins", counts.len(), grid.len),
            });
        }
        Ok(Self { grid, counts })
    }

    pub fn from_centers(centers: &[f64], counts: Vec<u64>) -> Result<Self, ModelError> {
        Self::new(TimeGrid::from_centers(centers)?, counts)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn bin_width(&self) -> f64 {
        self.grid.width
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.grid.centers()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn counts_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_centers_are_accepted() {
        let g = TimeGrid::from_centers(&[0.0, 0.1, 0.2, 0.3]).unwrap();
        assert_eq!(g.len, 4);
        assert!((g.width - 0.1).abs() < 1e-15);
        assert_eq!(g.bin_of(0.21), Some(2));
        assert_eq!(g.bin_of(-0.2), None);
    }

    #[test]
    fn non_uniform_centers_are_rejected() {
        let err = TimeGrid::from_centers(&[0.0, 0.1, 0.25]).unwrap_err();
        assert_eq!(err, ModelError::NonUniformGrid { index: 2 });
    }

    #[test]
    fn decreasing_centers_are_rejected() {
        assert!(TimeGrid::from_centers(&[0.0, -0.1, -0.2]).is_err());
    }

    #[test]
    fn count_length_must_match() {
        let g = TimeGrid::new(0.0, 0.1, 3).unwrap();
        assert!(Histogram::new(g, vec![1, 2]).is_err());
    }
}
