//! Line-by-line complex refractivity of humid air and the line-of-sight
//! transfer function it implies.
//!
//! Each line contributes `S(T)·N·c²/(4π²f0) · χ(f)` to `n - 1`, where `S` is
//! the catalog intensity scaled to the ambient temperature, `N` the number
//! density of the absorber, and `χ` a normalized complex line shape (GHz⁻¹)
//! whose imaginary part integrates to π over the line. The imaginary part of
//! `n - 1` is non-negative and encodes absorption.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::catalog::{water_vapor_partial_pressure, AtmosphereState, LineCatalog, LineRecord, Molecule, T_REF_K};
use crate::channel::ChannelResponse;
use crate::error::{Error, Result};
use crate::grid::FreqGrid;

/// Speed of light, m/s.
pub const C_M_PER_S: f64 = 299_792_458.0;
/// Speed of light in GHz·cm, converts GHz to cm⁻¹.
const C_GHZ_CM: f64 = 29.979_245_8;
/// Second radiation constant hc/k, cm·K.
const C2_CM_K: f64 = 1.438_776_9;
const K_BOLTZMANN: f64 = 1.380_649e-23;
const PA_PER_ATM: f64 = 101_325.0;
/// Volume mixing ratio of O2 in dry air.
const O2_FRACTION: f64 = 0.2095;

/// Complex collision-broadened line shape, GHz⁻¹.
pub trait LineShape: Sync {
    fn response(&self, f_ghz: f64, f0_ghz: f64, gamma_ghz: f64) -> Complex64;
}

/// Van Vleck–Weisskopf shape
/// `χ = (f/f0)·[1/(f0-f-jγ) - 1/(f0+f+jγ)] + 2/f0`.
/// The constant term makes `χ → 0` far above the line, so the real part is
/// the Kramers–Kronig partner of the absorptive part.
#[derive(Debug, Clone, Copy, Default)]
pub struct VanVleckWeisskopf;

impl LineShape for VanVleckWeisskopf {
    #[inline]
    fn response(&self, f: f64, f0: f64, gamma: f64) -> Complex64 {
        let below = Complex64::new(f0 - f, -gamma).inv();
        let above = Complex64::new(f0 + f, gamma).inv();
        (below - above) * (f / f0) + 2.0 / f0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefractivitySpectrum {
    grid: FreqGrid,
    refractivity: Vec<Complex64>,
    atmos: AtmosphereState,
}

impl RefractivitySpectrum {
    pub fn grid(&self) -> &FreqGrid {
        &self.grid
    }

    /// `n - 1` at each grid point.
    pub fn refractivity(&self) -> &[Complex64] {
        &self.refractivity
    }

    pub fn atmos(&self) -> &AtmosphereState {
        &self.atmos
    }

    /// Power attenuation in dB/m: `(4πf/c)·Im(n)·10/ln 10`.
    pub fn attenuation_db_per_m(&self) -> Vec<f64> {
        self.grid
            .iter()
            .zip(&self.refractivity)
            .map(|(f, n)| 4.0 * PI * f * 1e9 / C_M_PER_S * n.im * 10.0 / std::f64::consts::LN_10)
            .collect()
    }
}

/// Per-line parameters evaluated at one atmospheric state.
struct LineTerm {
    f0: f64,
    gamma: f64,
    amplitude: f64,
}

fn line_term(line: &LineRecord, atmos: &AtmosphereState) -> LineTerm {
    let t = atmos.temperature_k();
    let p_h2o = water_vapor_partial_pressure(atmos);
    let p_dry = atmos.dry_pressure_atm();
    let partial = match line.molecule {
        Molecule::H2O => p_h2o,
        Molecule::O2 => O2_FRACTION * p_dry,
    };
    // molecules per cm³
    let density = partial * PA_PER_ATM / (K_BOLTZMANN * t) * 1e-6;

    let nu0 = line.f0 / C_GHZ_CM;
    let stimulated = |temp: f64| 1.0 - (-C2_CM_K * nu0 / temp).exp();
    let strength = line.strength
        * (T_REF_K / t).powf(line.molecule.partition_exponent())
        * (-C2_CM_K * line.e_lower * (1.0 / t - 1.0 / T_REF_K)).exp()
        * stimulated(t)
        / stimulated(T_REF_K);

    let gamma = (line.gamma_air * p_dry + line.gamma_self * p_h2o) * (T_REF_K / t).powf(line.n_temp);
    let amplitude = strength * density * C_GHZ_CM * C_GHZ_CM / (4.0 * PI * PI * line.f0);
    LineTerm {
        f0: line.f0,
        gamma,
        amplitude,
    }
}

/// Complex refractivity with the default Van Vleck–Weisskopf shape.
pub fn complex_refractivity(
    catalog: &LineCatalog,
    atmos: &AtmosphereState,
    grid: &FreqGrid,
) -> Result<RefractivitySpectrum> {
    complex_refractivity_with(&VanVleckWeisskopf, catalog, atmos, grid)
}

pub fn complex_refractivity_with(
    shape: &dyn LineShape,
    catalog: &LineCatalog,
    atmos: &AtmosphereState,
    grid: &FreqGrid,
) -> Result<RefractivitySpectrum> {
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let (cov_lo, cov_hi) = catalog.coverage();
    if grid.lo_ghz() < cov_lo || grid.hi_ghz() > cov_hi {
        return Err(Error::Coverage {
            lo_ghz: grid.lo_ghz(),
            hi_ghz: grid.hi_ghz(),
            cov_lo_ghz: cov_lo,
            cov_hi_ghz: cov_hi,
        });
    }
    let terms: Vec<LineTerm> = catalog
        .lines()
        .iter()
        .map(|l| line_term(l, atmos))
        .filter(|t| t.amplitude > 0.0)
        .collect();

    // points are independent; each sums its lines in catalog order
    let refractivity = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let f = grid.freq_ghz(i);
            terms
                .iter()
                .fold(Complex64::new(0.0, 0.0), |acc, t| acc + shape.response(f, t.f0, t.gamma) * t.amplitude)
        })
        .collect();

    Ok(RefractivitySpectrum {
        grid: *grid,
        refractivity,
        atmos: *atmos,
    })
}

/// Line-of-sight transfer over `distance_m`.
///
/// `h = exp(-j·k·d·Re(n-1)) · exp(-k·d·Im(n-1))` with `k = 2πf/c`: the phase
/// and log-amplitude of the excess refractivity, without the vacuum delay.
pub fn los_transfer(spec: &RefractivitySpectrum, distance_m: f64) -> Result<ChannelResponse> {
    if !(distance_m >= 0.0 && distance_m.is_finite()) {
        return Err(Error::invalid("distance", format!("{distance_m} m must be non-negative")));
    }
    let h = spec
        .grid
        .iter()
        .zip(&spec.refractivity)
        .map(|(f, n)| {
            let kd = 2.0 * PI * f * 1e9 * distance_m / C_M_PER_S;
            Complex64::from_polar((-kd * n.im).exp(), -kd * n.re)
        })
        .collect();
    ChannelResponse::new(
        spec.grid,
        h,
        distance_m,
        format!(
            "atmosphere({distance_m} m, {:.2} C, RH {})",
            spec.atmos.temperature_k() - 273.15,
            spec.atmos.relative_humidity()
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::parse_catalog;

    fn fig3_atmos() -> AtmosphereState {
        AtmosphereState::from_celsius(29.0, 0.45, 1.0).unwrap()
    }

    #[test]
    fn dry_air_water_lines_vanish() {
        let cat = LineCatalog::builtin().only(Molecule::H2O).unwrap();
        let dry = AtmosphereState::from_celsius(20.0, 0.0, 1.0).unwrap();
        let grid = FreqGrid::span(100.0, 200.0, 1.0).unwrap();
        let spec = complex_refractivity(&cat, &dry, &grid).unwrap();
        assert!(spec.refractivity().iter().all(|n| n.norm() == 0.0));
    }

    #[test]
    fn coverage_is_checked() {
        let cat = LineCatalog::builtin();
        let grid = FreqGrid::span(900.0, 1100.0, 1.0).unwrap();
        assert!(matches!(
            complex_refractivity(&cat, &fig3_atmos(), &grid),
            Err(Error::Coverage { .. })
        ));
    }

    #[test]
    fn passive_medium() {
        let cat = LineCatalog::builtin();
        let grid = FreqGrid::span(1.0, 999.0, 0.5).unwrap();
        let spec = complex_refractivity(&cat, &fig3_atmos(), &grid).unwrap();
        assert!(spec.refractivity().iter().all(|n| n.im >= 0.0));
        let ch = los_transfer(&spec, 250.0).unwrap();
        assert!(ch.h().iter().all(|v| v.norm() <= 1.0));
    }

    #[test]
    fn attenuation_peaks_at_water_lines() {
        let cat = LineCatalog::builtin();
        let grid = FreqGrid::span(100.0, 600.0, 0.01).unwrap();
        let att = complex_refractivity(&cat, &fig3_atmos(), &grid)
            .unwrap()
            .attenuation_db_per_m();
        for centre in [183.31, 325.15, 380.20, 448.0, 556.94] {
            let r = grid.band_indices(centre - 1.5, centre + 1.5);
            let (imax, _) = att[r.clone()]
                .iter()
                .enumerate()
                .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
            let fpk = grid.freq_ghz(r.start + imax);
            assert!((fpk - centre).abs() < 0.1, "peak near {centre} at {fpk}");
            // local maximum: higher than 1.5 GHz either side
            let lo = att[grid.band_indices(centre - 1.5, centre - 1.5).start];
            let hi = att[grid.band_indices(centre + 1.5, centre + 1.5).start];
            assert!(att[r.start + imax] > lo && att[r.start + imax] > hi);
        }
    }

    #[test]
    fn isolated_line_dispersion_changes_sign() {
        let text = "#units,GHz,cat296,GHz_per_atm,GHz_per_atm,unitless,cm-1\n#coverage,300,460\n\
                    molecule,f0,strength,gamma_air,gamma_self,n_temp,e_lower\n\
                    H2O,380.197353,8.227151e-22,2.868966,14.593978,0.540,218.5189\n";
        let cat = parse_catalog(text).unwrap();
        let grid = FreqGrid::span(360.0, 400.0, 0.01).unwrap();
        let spec = complex_refractivity(&cat, &fig3_atmos(), &grid).unwrap();
        let n = spec.refractivity();
        let i0 = grid.band_indices(380.197, 380.21).start;
        let gamma = 3.0;
        let below = grid.band_indices(380.197 - gamma, 400.0).start;
        let above = grid.band_indices(380.197 + gamma, 400.0).start;
        assert!(n[below].re > 0.0 && n[above].re < 0.0);
        let imax = (0..n.len()).max_by(|&a, &b| n[a].im.total_cmp(&n[b].im)).unwrap();
        assert!((imax as i64 - i0 as i64).abs() <= 2, "imag peak at {}", grid.freq_ghz(imax));
    }

    #[test]
    fn zero_distance_is_identity() {
        let cat = LineCatalog::builtin();
        let grid = FreqGrid::span(370.0, 390.0, 0.1).unwrap();
        let spec = complex_refractivity(&cat, &fig3_atmos(), &grid).unwrap();
        let ch = los_transfer(&spec, 0.0).unwrap();
        assert!(ch.h().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        assert!(los_transfer(&spec, -1.0).is_err());
    }

    #[test]
    fn phase_scales_with_distance() {
        let cat = LineCatalog::builtin();
        let grid = FreqGrid::span(370.0, 390.0, 0.1).unwrap();
        let spec = complex_refractivity(&cat, &fig3_atmos(), &grid).unwrap();
        let one = los_transfer(&spec, 3.0).unwrap();
        let two = los_transfer(&spec, 6.0).unwrap();
        for ((a, b), n) in one.h().iter().zip(two.h()).zip(spec.refractivity()) {
            // compare the exponents rather than wrapped angles
            let ratio = b.ln() - a.ln() * 2.0;
            let wrapped = (ratio.im / (2.0 * PI)).round() * 2.0 * PI;
            assert!(ratio.re.abs() < 1e-12 && (ratio.im - wrapped).abs() < 1e-9, "{n}");
        }
    }
}
