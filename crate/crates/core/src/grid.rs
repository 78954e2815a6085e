//! Uniform frequency grids.

use std::ops::Range;

use crate::error::{Error, Result};

/// Uniform, strictly increasing frequency grid in GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqGrid {
    start_ghz: f64,
    step_ghz: f64,
    len: usize,
}

impl FreqGrid {
    pub fn new(start_ghz: f64, step_ghz: f64, len: usize) -> Result<Self> {
        if !start_ghz.is_finite() {
            return Err(Error::invalid("grid.start", "must be finite"));
        }
        if !(step_ghz > 0.0 && step_ghz.is_finite()) {
            return Err(Error::invalid("grid.step", "must be positive"));
        }
        if len < 2 {
            return Err(Error::invalid("grid.len", "need at least two points"));
        }
        Ok(Self {
            start_ghz,
            step_ghz,
            len,
        })
    }

    /// Grid covering `[lo, hi]` inclusive with the given step (the last point
    /// may fall short of `hi` by less than one step).
    pub fn span(lo_ghz: f64, hi_ghz: f64, step_ghz: f64) -> Result<Self> {
        if !(hi_ghz > lo_ghz) {
            return Err(Error::invalid("grid.range", "upper bound must exceed lower bound"));
        }
        if !(step_ghz > 0.0) {
            return Err(Error::invalid("grid.step", "must be positive"));
        }
        let n = ((hi_ghz - lo_ghz) / step_ghz + 1e-9).floor() as usize + 1;
        Self::new(lo_ghz, step_ghz, n)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn step_ghz(&self) -> f64 {
        self.step_ghz
    }

    pub fn lo_ghz(&self) -> f64 {
        self.start_ghz
    }

    pub fn hi_ghz(&self) -> f64 {
        self.freq_ghz(self.len - 1)
    }

    #[inline]
    pub fn freq_ghz(&self, i: usize) -> f64 {
        self.start_ghz + i as f64 * self.step_ghz
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.freq_ghz(i))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.iter().collect()
    }

    /// Whether two grids sample the same frequencies.
    pub fn matches(&self, other: &FreqGrid) -> bool {
        let tol = 1e-9 * self.step_ghz;
        self.len == other.len
            && (self.start_ghz - other.start_ghz).abs() <= tol.max(1e-12 * self.start_ghz.abs())
            && (self.step_ghz - other.step_ghz).abs() <= 1e-12 * self.step_ghz
    }

    /// Indices of the grid points inside `[lo, hi]`.
    pub fn band_indices(&self, lo_ghz: f64, hi_ghz: f64) -> Range<usize> {
        let tol = 1e-9 * self.step_ghz;
        let first = ((lo_ghz - self.start_ghz - tol) / self.step_ghz).ceil().max(0.0) as usize;
        let last = ((hi_ghz - self.start_ghz + tol) / self.step_ghz).floor();
        if last < 0.0 {
            return 0..0;
        }
        let end = (last as usize + 1).min(self.len);
        first.min(end)..end
    }

    /// Fractional index of a frequency; `None` outside the grid.
    pub fn locate(&self, f_ghz: f64) -> Option<(usize, f64)> {
        let x = (f_ghz - self.start_ghz) / self.step_ghz;
        let tol = 1e-9;
        if x < -tol || x > (self.len - 1) as f64 + tol {
            return None;
        }
        let x = x.clamp(0.0, (self.len - 1) as f64);
        let i = (x.floor() as usize).min(self.len - 2);
        Some((i, x - i as f64))
    }

    pub fn contains_range(&self, lo_ghz: f64, hi_ghz: f64) -> bool {
        let tol = 1e-9 * self.step_ghz;
        lo_ghz >= self.lo_ghz() - tol && hi_ghz <= self.hi_ghz() + tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_includes_both_ends() {
        let g = FreqGrid::span(100.0, 101.0, 0.01).unwrap();
        assert_eq!(g.len(), 101);
        assert!((g.hi_ghz() - 101.0).abs() < 1e-9);
    }

    #[test]
    fn band_indices_are_inclusive() {
        let g = FreqGrid::span(0.0, 10.0, 1.0).unwrap();
        assert_eq!(g.band_indices(2.0, 5.0), 2..6);
        assert_eq!(g.band_indices(-3.0, 0.5), 0..1);
        assert_eq!(g.band_indices(9.5, 20.0), 10..11);
        assert_eq!(g.band_indices(20.0, 30.0), 11..11);
    }

    #[test]
    fn locate_interpolation_weights() {
        let g = FreqGrid::span(0.0, 10.0, 0.5).unwrap();
        let (i, t) = g.locate(1.25).unwrap();
        assert_eq!(i, 2);
        assert!((t - 0.5).abs() < 1e-12);
        assert!(g.locate(10.0).is_some());
        assert!(g.locate(10.1).is_none());
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(FreqGrid::new(0.0, 0.0, 10).is_err());
        assert!(FreqGrid::new(0.0, 1.0, 1).is_err());
        assert!(FreqGrid::span(5.0, 5.0, 1.0).is_err());
    }
}
