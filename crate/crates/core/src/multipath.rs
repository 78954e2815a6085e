//! Discrete multipath channels, rough-surface scatterer clusters and
//! cascading of channel responses.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::atmosphere::C_M_PER_S;
use crate::channel::{omega_rad_per_ps, ChannelResponse};
use crate::error::{Error, Result};
use crate::grid::FreqGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub delay_ps: f64,
    pub gain: Complex64,
    pub label: String,
}

impl Path {
    pub fn new(delay_ps: f64, gain: Complex64) -> Self {
        Self {
            delay_ps,
            gain,
            label: String::new(),
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    paths: Vec<Path>,
}

impl PathSet {
    pub fn new(paths: Vec<Path>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::invalid("paths", "at least one path is required"));
        }
        for p in &paths {
            if !(p.delay_ps >= 0.0 && p.delay_ps.is_finite()) {
                return Err(Error::invalid("delay", format!("{} ps must be finite and >= 0", p.delay_ps)));
            }
            if !(p.gain.re.is_finite() && p.gain.im.is_finite()) {
                return Err(Error::invalid("gain", "must be finite"));
            }
        }
        Ok(Self { paths })
    }

    /// Direct path plus one echo of gain `a` delayed by `delay_ps`.
    pub fn two_path(delay_ps: f64, a: f64) -> Result<Self> {
        Self::new(vec![
            Path::new(0.0, Complex64::new(1.0, 0.0)).labeled("direct"),
            Path::new(delay_ps, Complex64::new(a, 0.0)).labeled("echo"),
        ])
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// `h(f) = Σ gain_k · exp(-j·2π·f·delay_k)`.
pub fn multipath_transfer(paths: &PathSet, grid: &FreqGrid) -> Result<ChannelResponse> {
    let h = grid
        .iter()
        .map(|f| {
            let w = omega_rad_per_ps(f);
            paths
                .paths
                .iter()
                .map(|p| p.gain * Complex64::from_polar(1.0, -w * p.delay_ps))
                .sum()
        })
        .collect();
    ChannelResponse::new(*grid, h, 0.0, format!("multipath({} paths)", paths.len()))
}

/// Height statistics of a rough reflecting surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceStats {
    pub mean_height_um: f64,
    pub height_range_um: (f64, f64),
    /// Free-form description of the surface correlation; carried along for
    /// reporting only.
    pub correlation_note: String,
    /// Incidence angle from the surface normal, degrees.
    pub incidence_angle_deg: f64,
    pub n_scatterers: usize,
}

impl SurfaceStats {
    pub fn new(mean_um: f64, min_um: f64, max_um: f64, angle_deg: f64, n_scatterers: usize) -> Result<Self> {
        let s = Self {
            mean_height_um: mean_um,
            height_range_um: (min_um, max_um),
            correlation_note: String::new(),
            incidence_angle_deg: angle_deg,
            n_scatterers,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.height_range_um;
        if !(lo >= 0.0 && self.mean_height_um >= 0.0 && hi.is_finite()) {
            return Err(Error::invalid("surface.height", "heights must be finite and >= 0"));
        }
        if !(lo <= self.mean_height_um && self.mean_height_um <= hi) {
            return Err(Error::invalid(
                "surface.height",
                format!("need min <= mean <= max, got {lo} <= {} <= {hi}", self.mean_height_um),
            ));
        }
        if !(0.0..90.0).contains(&self.incidence_angle_deg) {
            return Err(Error::invalid("surface.angle", "must be in [0, 90) degrees"));
        }
        if self.n_scatterers == 0 {
            return Err(Error::invalid("surface.n_scatterers", "must be >= 1"));
        }
        Ok(())
    }
}

/// Draws a cluster of equal-amplitude scatterers whose heights follow a
/// Gaussian of std `range/4` about the mean, truncated to the range. Each
/// height becomes an excess delay `2·h·cos θ / c`. Paths come back sorted by
/// delay.
pub fn rough_surface_paths(stats: &SurfaceStats, seed: u64) -> Result<PathSet> {
    stats.validate()?;
    let (lo, hi) = stats.height_range_um;
    let n = stats.n_scatterers;
    let mut heights = Vec::with_capacity(n);
    if hi - lo <= 0.0 {
        heights.resize(n, stats.mean_height_um);
    } else {
        let normal = Normal::new(stats.mean_height_um, (hi - lo) / 4.0)
            .map_err(|e| Error::invalid("surface.height", e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while heights.len() < n {
            let h = normal.sample(&mut rng);
            if (lo..=hi).contains(&h) {
                heights.push(h);
            }
        }
    }
    let cos = stats.incidence_angle_deg.to_radians().cos();
    let mut delays: Vec<f64> = heights
        .iter()
        .map(|h| 2.0 * h * 1e-6 * cos / C_M_PER_S * 1e12)
        .collect();
    delays.sort_by(f64::total_cmp);
    let gain = Complex64::new(1.0 / n as f64, 0.0);
    PathSet::new(
        delays
            .into_iter()
            .enumerate()
            .map(|(i, d)| Path::new(d, gain).labeled(format!("scatterer {i}")))
            .collect(),
    )
}

/// Pointwise product of channels on a common grid.
pub fn cascade(channels: &[ChannelResponse]) -> Result<ChannelResponse> {
    let first = channels
        .first()
        .ok_or_else(|| Error::invalid("channels", "cascade needs at least one channel"))?;
    let grid = *first.grid();
    let mut h = first.h().to_vec();
    let mut distance = first.distance_m();
    let mut labels = vec![first.label().to_string()];
    for ch in &channels[1..] {
        if !ch.grid().matches(&grid) {
            return Err(Error::GridMismatch(format!(
                "cannot cascade `{}` onto `{}`: grids differ",
                ch.label(),
                first.label()
            )));
        }
        for (a, b) in h.iter_mut().zip(ch.h()) {
            *a *= b;
        }
        distance += ch.distance_m();
        labels.push(ch.label().to_string());
    }
    ChannelResponse::new(grid, h, distance, labels.join(" * "))
}
