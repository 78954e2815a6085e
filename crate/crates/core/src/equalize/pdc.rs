use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::analysis::{band_phase, metric_from_mean_gdd};
use crate::channel::{omega_rad_per_ps, ChannelResponse};
use crate::error::{Error, Result};
use crate::grid::FreqGrid;

/// Phase-only compensator: removes the in-band phase curvature of `channel`
/// and leaves its affine part (bulk delay and carrier phase). `|G| = 1`
/// everywhere and `G = 1` outside the band.
pub fn pdc_filter(channel: &ChannelResponse, band: (f64, f64)) -> Result<ChannelResponse> {
    let bp = band_phase(channel, band)?;
    let grid = *channel.grid();
    let mut g = vec![Complex64::new(1.0, 0.0); grid.len()];
    for (k, i) in bp.indices.clone().enumerate() {
        let residual = bp.unwrapped[k] - bp.fit.at(grid.freq_ghz(i));
        g[i] = Complex64::from_polar(1.0, -residual);
    }
    ChannelResponse::new(grid, g, 0.0, format!("pdc({})", channel.label()))
}

/// Natural cubic spline through equally spaced knots on `[0, 1]`.
struct NaturalSpline {
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
    h: f64,
}

impl NaturalSpline {
    fn new(y: Vec<f64>) -> Self {
        let n = y.len() - 1;
        let h = 1.0 / n as f64;
        let mut m = vec![0.0; n + 1];
        if n >= 2 {
            // Thomas algorithm on the interior equations m[i-1] + 4m[i] + m[i+1] = 6Δ²y/h²
            let k = n - 1;
            let mut c = vec![0.0; k];
            let mut d = vec![0.0; k];
            for i in 0..k {
                let rhs = 6.0 * (y[i] - 2.0 * y[i + 1] + y[i + 2]) / (h * h);
                let (cp, dp) = if i == 0 { (0.0, 0.0) } else { (c[i - 1], d[i - 1]) };
                let den = 4.0 - cp;
                c[i] = 1.0 / den;
                d[i] = (rhs - dp) / den;
            }
            for i in (0..k).rev() {
                let next = if i + 1 < k { m[i + 2] } else { 0.0 };
                m[i + 1] = d[i] - c[i] * next;
            }
        }
        Self { y, m, h }
    }

    fn segment(&self, x: f64) -> (usize, f64) {
        let n = self.y.len() - 1;
        let i = ((x / self.h).floor() as i64).clamp(0, n as i64 - 1) as usize;
        (i, x - i as f64 * self.h)
    }

    /// Value and second derivative, extended linearly outside `[0, 1]`.
    fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.y.len() - 1;
        if x < 0.0 {
            return (self.eval(0.0).0 + x * self.slope(0, 0.0), 0.0);
        }
        if x > 1.0 {
            return (self.eval(1.0).0 + (x - 1.0) * self.slope(n - 1, self.h), 0.0);
        }
        let (i, t) = self.segment(x);
        let h = self.h;
        let (a, b) = (self.m[i], self.m[i + 1]);
        let s = h - t;
        let v = a * s.powi(3) / (6.0 * h)
            + b * t.powi(3) / (6.0 * h)
            + (self.y[i] - a * h * h / 6.0) * s / h
            + (self.y[i + 1] - b * h * h / 6.0) * t / h;
        (v, a * s / h + b * t / h)
    }

    fn slope(&self, i: usize, t: f64) -> f64 {
        let h = self.h;
        let (a, b) = (self.m[i], self.m[i + 1]);
        let s = h - t;
        -a * s * s / (2.0 * h) + b * t * t / (2.0 * h) + (self.y[i + 1] - self.y[i]) / h - (b - a) * h / 6.0
    }
}

/// Keyed pseudo-random phase-only profile over `band`, scaled so that its
/// integrated GDD metric equals `target_metric_ps`. The profile is a natural
/// cubic spline through `n_segments + 1` Gaussian knots with its affine part
/// removed; conjugating it undoes it exactly.
pub fn scramble_profile(
    key: u64,
    grid: &FreqGrid,
    band: (f64, f64),
    target_metric_ps: f64,
    n_segments: usize,
) -> Result<ChannelResponse> {
    if !(target_metric_ps > 0.0 && target_metric_ps.is_finite()) {
        return Err(Error::invalid("target_metric", "must be positive"));
    }
    if n_segments == 0 {
        return Err(Error::invalid("n_segments", "must be >= 1"));
    }
    let (lo, hi) = band;
    let idx = grid.band_indices(lo, hi);
    if !(hi > lo) || idx.len() < 3 {
        return Err(Error::EmptyBand {
            lo_ghz: lo,
            hi_ghz: hi,
            needed: 3,
        });
    }
    let bw = hi - lo;
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    let knots: Vec<f64> = (0..=n_segments).map(|_| StandardNormal.sample(&mut rng)).collect();
    let spline = NaturalSpline::new(knots);

    let xs: Vec<f64> = grid.iter().map(|f| (f - lo) / bw).collect();
    let raw: Vec<(f64, f64)> = xs.iter().map(|&x| spline.eval(x)).collect();

    // least-squares line over the band, in x
    let band_x = &xs[idx.clone()];
    let band_y: Vec<f64> = raw[idx.clone()].iter().map(|v| v.0).collect();
    let n = band_x.len() as f64;
    let mx = band_x.iter().sum::<f64>() / n;
    let my = band_y.iter().sum::<f64>() / n;
    let sxy: f64 = band_x.iter().zip(&band_y).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = band_x.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;

    // d²φ/dω² = φ''(x) / (dω/dx)²
    let dw_dx = omega_rad_per_ps(bw);
    let mean_abs_gdd = raw[idx].iter().map(|v| v.1.abs()).sum::<f64>() / n / (dw_dx * dw_dx);
    if !(mean_abs_gdd > 0.0) {
        return Err(Error::invalid("n_segments", "profile has no curvature over the band"));
    }
    let scale = target_metric_ps / metric_from_mean_gdd(bw, mean_abs_gdd);

    let h = xs
        .iter()
        .zip(&raw)
        .map(|(&x, v)| Complex64::from_polar(1.0, scale * (v.0 - my - slope * (x - mx))))
        .collect();
    ChannelResponse::new(*grid, h, 0.0, format!("scramble({key})"))
}
