//! Complex transfer functions sampled on a uniform frequency grid.

use num_complex::Complex64;

use crate::analysis::unwrap_phase;
use crate::error::{Error, Result};
use crate::grid::FreqGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelResponse {
    grid: FreqGrid,
    h: Vec<Complex64>,
    distance_m: f64,
    label: String,
}

impl ChannelResponse {
    pub fn new(grid: FreqGrid, h: Vec<Complex64>, distance_m: f64, label: impl Into<String>) -> Result<Self> {
        if h.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} transfer values for {} grid points",
                h.len(),
                grid.len()
            )));
        }
        if let Some(i) = h.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid(
                "h",
                format!("non-finite value at {:.3} GHz", grid.freq_ghz(i)),
            ));
        }
        if !(distance_m >= 0.0) {
            return Err(Error::invalid("distance", "must be non-negative"));
        }
        Ok(Self {
            grid,
            h,
            distance_m,
            label: label.into(),
        })
    }

    pub fn identity(grid: FreqGrid) -> Self {
        Self {
            grid,
            h: vec![Complex64::new(1.0, 0.0); grid.len()],
            distance_m: 0.0,
            label: "identity".into(),
        }
    }

    /// Samples `f(freq_ghz)` on the grid.
    pub fn from_fn(grid: FreqGrid, label: impl Into<String>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let h = grid.iter().map(f).collect();
        Self::new(grid, h, 0.0, label)
    }

    /// Pure delay `exp(-jωτ)`.
    pub fn pure_delay(grid: FreqGrid, delay_ps: f64) -> Self {
        let h = grid
            .iter()
            .map(|f| Complex64::from_polar(1.0, -omega_rad_per_ps(f) * delay_ps))
            .collect();
        Self {
            grid,
            h,
            distance_m: 0.0,
            label: format!("delay({delay_ps} ps)"),
        }
    }

    /// Quadratic phase `exp(-j·½·D·(ω-ω0)²)`: constant group delay
    /// dispersion `D` (ps²) about `center_ghz`.
    pub fn quadratic_phase(grid: FreqGrid, gdd_ps2: f64, center_ghz: f64) -> Self {
        let w0 = omega_rad_per_ps(center_ghz);
        let h = grid
            .iter()
            .map(|f| {
                let dw = omega_rad_per_ps(f) - w0;
                Complex64::from_polar(1.0, -0.5 * gdd_ps2 * dw * dw)
            })
            .collect();
        Self {
            grid,
            h,
            distance_m: 0.0,
            label: format!("gdd({gdd_ps2} ps2)"),
        }
    }

    pub fn grid(&self) -> &FreqGrid {
        &self.grid
    }

    pub fn h(&self) -> &[Complex64] {
        &self.h
    }

    pub fn distance_m(&self) -> f64 {
        self.distance_m
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The grid points inside `[lo, hi]` as a channel of their own.
    pub fn subband(&self, lo_ghz: f64, hi_ghz: f64) -> Result<Self> {
        let idx = self.grid.band_indices(lo_ghz, hi_ghz);
        if idx.len() < 2 {
            return Err(Error::EmptyBand {
                lo_ghz,
                hi_ghz,
                needed: 2,
            });
        }
        let grid = FreqGrid::new(self.grid.freq_ghz(idx.start), self.grid.step_ghz(), idx.len())?;
        Self::new(grid, self.h[idx].to_vec(), self.distance_m, self.label.clone())
    }

    pub fn conjugate(&self) -> Self {
        Self {
            grid: self.grid,
            h: self.h.iter().map(|v| v.conj()).collect(),
            distance_m: self.distance_m,
            label: format!("conj({})", self.label),
        }
    }

    pub fn is_phase_only(&self, tol: f64) -> bool {
        self.h.iter().all(|v| (v.norm() - 1.0).abs() <= tol)
    }

    /// Interpolator over magnitude and unwrapped phase.
    pub fn sampler(&self) -> ChannelSampler<'_> {
        let phase = unwrap_phase(&self.h.iter().map(|v| v.arg()).collect::<Vec<_>>());
        ChannelSampler {
            grid: &self.grid,
            mag: self.h.iter().map(|v| v.norm()).collect(),
            phase,
        }
    }
}

/// Linear interpolation of a [`ChannelResponse`] between grid points, done on
/// magnitude and unwrapped phase so that rapidly rotating responses are not
/// attenuated by chord averaging.
pub struct ChannelSampler<'a> {
    grid: &'a FreqGrid,
    mag: Vec<f64>,
    phase: Vec<f64>,
}

impl ChannelSampler<'_> {
    pub fn at(&self, f_ghz: f64) -> Option<Complex64> {
        let (i, t) = self.grid.locate(f_ghz)?;
        let m = self.mag[i] * (1.0 - t) + self.mag[i + 1] * t;
        let p = self.phase[i] * (1.0 - t) + self.phase[i + 1] * t;
        Some(Complex64::from_polar(m, p))
    }
}

/// Angular frequency in rad/ps for a frequency in GHz.
#[inline]
pub fn omega_rad_per_ps(f_ghz: f64) -> f64 {
    2.0 * std::f64::consts::PI * f_ghz * 1e-3
}
