//! Spectroscopic line catalog and atmospheric state.
//!
//! The catalog file is UTF-8 CSV:
//!
//! ```text
//! #units,GHz,cat296,GHz_per_atm,GHz_per_atm,unitless,cm-1
//! #coverage,0,1000
//! molecule,f0,strength,gamma_air,gamma_self,n_temp,e_lower
//! H2O,183.310087,7.767415e-23,2.975096,14.956984,0.770,139.2850
//! ```
//!
//! `cat296` is the integrated line intensity at 296 K in
//! cm⁻¹/(molecule·cm⁻²), the HITRAN convention, so rows taken from a HITRAN
//! export can be appended after converting widths from cm⁻¹/atm to GHz/atm.
//! `gamma_self` is the broadening coefficient per atm of water vapour for
//! every molecule. Other lines beginning with `#` are comments, except the
//! optional `#coverage,<f_min>,<f_max>` directive which fixes the frequency
//! range the catalog claims to describe. Without it the coverage is the span
//! of the line centres.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};

pub const UNITS_ROW: &str = "#units,GHz,cat296,GHz_per_atm,GHz_per_atm,unitless,cm-1";
pub const HEADER_ROW: &str = "molecule,f0,strength,gamma_air,gamma_self,n_temp,e_lower";
const COVERAGE_PREFIX: &str = "#coverage,";

/// Reference temperature of catalog intensities and widths, K.
pub const T_REF_K: f64 = 296.0;

/// Catalog shipped with the crate: ~34 water vapour lines up to 1 THz, the
/// 60 GHz oxygen complex, the 118.75 GHz line and the sub-mm oxygen lines.
pub const BUILTIN_CATALOG: &str = include_str!("../data/lines.csv");

const ATM_HPA: f64 = 1013.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Molecule {
    H2O,
    O2,
}

impl Molecule {
    /// Temperature exponent of the rotational partition function.
    pub fn partition_exponent(self) -> f64 {
        match self {
            Molecule::H2O => 1.5,
            Molecule::O2 => 1.0,
        }
    }
}

impl fmt::Display for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Molecule::H2O => "H2O",
            Molecule::O2 => "O2",
        })
    }
}

impl FromStr for Molecule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "H2O" => Ok(Molecule::H2O),
            "O2" => Ok(Molecule::O2),
            other => Err(format!("unknown molecule `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineRecord {
    pub molecule: Molecule,
    /// Line centre, GHz.
    pub f0: f64,
    /// Intensity at 296 K, cm⁻¹/(molecule·cm⁻²).
    pub strength: f64,
    /// Air-broadened half width at 296 K, GHz/atm.
    pub gamma_air: f64,
    /// Water-vapour-broadened half width at 296 K, GHz/atm.
    pub gamma_self: f64,
    pub n_temp: f64,
    /// Lower-state energy, cm⁻¹.
    pub e_lower: f64,
}

impl LineRecord {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must be positive and finite, got {v}")))
            }
        };
        positive("f0", self.f0)?;
        positive("strength", self.strength)?;
        positive("gamma_air", self.gamma_air)?;
        positive("gamma_self", self.gamma_self)?;
        if !self.n_temp.is_finite() {
            return Err(Error::invalid("n_temp", "must be finite"));
        }
        if !(self.e_lower.is_finite() && self.e_lower >= 0.0) {
            return Err(Error::invalid("e_lower", "must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineCatalog {
    lines: Vec<LineRecord>,
    f_min: f64,
    f_max: f64,
}

impl LineCatalog {
    /// Builds a catalog, sorting lines by centre frequency. Coverage defaults
    /// to the span of the line centres.
    pub fn new(mut lines: Vec<LineRecord>, coverage: Option<(f64, f64)>) -> Result<Self> {
        if lines.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        for l in &lines {
            l.validate()?;
        }
        lines.sort_by(|a, b| a.f0.total_cmp(&b.f0));
        let (lo, hi) = (lines[0].f0, lines[lines.len() - 1].f0);
        let (f_min, f_max) = coverage.unwrap_or((lo, hi));
        if !(f_min >= 0.0 && f_min <= lo && f_max >= hi) {
            return Err(Error::invalid(
                "coverage",
                format!("{f_min}..{f_max} GHz does not contain all line centres ({lo}..{hi} GHz)"),
            ));
        }
        Ok(Self { lines, f_min, f_max })
    }

    pub fn builtin() -> Self {
        parse_catalog(BUILTIN_CATALOG).expect("builtin catalog is well formed")
    }

    pub fn lines(&self) -> &[LineRecord] {
        &self.lines
    }

    pub fn coverage(&self) -> (f64, f64) {
        (self.f_min, self.f_max)
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Sub-catalog with only the given molecule. Keeps the coverage.
    pub fn only(&self, molecule: Molecule) -> Result<Self> {
        let lines = self.lines.iter().filter(|l| l.molecule == molecule).copied().collect();
        Self::new(lines, Some((self.f_min, self.f_max)))
    }

    /// Serializes in the catalog file format; parsing the output yields an
    /// identical catalog.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(UNITS_ROW);
        out.push('\n');
        let _ = writeln!(out, "{COVERAGE_PREFIX}{},{}", self.f_min, self.f_max);
        out.push_str(HEADER_ROW);
        out.push('\n');
        for l in &self.lines {
            let _ = writeln!(
                out,
                "{},{},{:e},{},{},{},{}",
                l.molecule, l.f0, l.strength, l.gamma_air, l.gamma_self, l.n_temp, l.e_lower
            );
        }
        out
    }
}

/// Parses catalog-file contents.
pub fn parse_catalog(text: &str) -> Result<LineCatalog> {
    let mut lines = Vec::new();
    let mut coverage = None;
    let mut seen_units = false;
    let mut seen_header = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        if !seen_units {
            if row != UNITS_ROW {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected units row `{UNITS_ROW}`"),
                });
            }
            seen_units = true;
            continue;
        }
        if let Some(rest) = row.strip_prefix(COVERAGE_PREFIX) {
            coverage = Some(parse_coverage(rest, lineno)?);
            continue;
        }
        if row.starts_with('#') {
            continue;
        }
        if !seen_header {
            if row.replace(' ', "") != HEADER_ROW {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected header `{HEADER_ROW}`"),
                });
            }
            seen_header = true;
            continue;
        }
        let record = parse_row(row, lineno)?;
        record.validate().map_err(|e| match e {
            Error::Validation { field, message } => Error::Validation {
                field,
                message: format!("line {lineno}: {message}"),
            },
            other => other,
        })?;
        lines.push(record);
    }

    if !seen_units && !seen_header {
        return Err(Error::EmptyCatalog);
    }
    if lines.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    LineCatalog::new(lines, coverage)
}

fn parse_coverage(rest: &str, line: usize) -> Result<(f64, f64)> {
    let parts: Vec<_> = rest.split(',').map(str::trim).collect();
    let bad = || Error::Parse {
        line,
        message: "coverage directive must be `#coverage,<f_min>,<f_max>`".into(),
    };
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    if !(hi > lo) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn parse_row(row: &str, line: usize) -> Result<LineRecord> {
    let fields: Vec<&str> = row.split(',').map(str::trim).collect();
    if fields.len() != 7 {
        return Err(Error::Parse {
            line,
            message: format!("expected 7 fields, found {}", fields.len()),
        });
    }
    let molecule = fields[0]
        .parse::<Molecule>()
        .map_err(|message| Error::Parse { line, message })?;
    let num = |i: usize, name: &str| -> Result<f64> {
        fields[i].parse::<f64>().map_err(|_| Error::Parse {
            line,
            message: format!("field `{name}`: `{}` is not a number", fields[i]),
        })
    };
    Ok(LineRecord {
        molecule,
        f0: num(1, "f0")?,
        strength: num(2, "strength")?,
        gamma_air: num(3, "gamma_air")?,
        gamma_self: num(4, "gamma_self")?,
        n_temp: num(5, "n_temp")?,
        e_lower: num(6, "e_lower")?,
    })
}

/// Temperature, humidity and pressure of the propagation medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphereState {
    temperature_k: f64,
    relative_humidity: f64,
    pressure_atm: f64,
}

impl AtmosphereState {
    pub fn new(temperature_k: f64, relative_humidity: f64, pressure_atm: f64) -> Result<Self> {
        if !(200.0..=350.0).contains(&temperature_k) {
            return Err(Error::invalid("temperature", format!("{temperature_k} K outside [200, 350]")));
        }
        if !(0.0..=1.0).contains(&relative_humidity) {
            return Err(Error::invalid(
                "relative_humidity",
                format!("{relative_humidity} outside [0, 1]"),
            ));
        }
        if !(pressure_atm > 0.0 && pressure_atm <= 2.0) {
            return Err(Error::invalid("pressure_total", format!("{pressure_atm} atm outside (0, 2]")));
        }
        Ok(Self {
            temperature_k,
            relative_humidity,
            pressure_atm,
        })
    }

    pub fn from_celsius(t_c: f64, relative_humidity: f64, pressure_atm: f64) -> Result<Self> {
        Self::new(t_c + 273.15, relative_humidity, pressure_atm)
    }

    pub fn temperature_k(&self) -> f64 {
        self.temperature_k
    }

    pub fn relative_humidity(&self) -> f64 {
        self.relative_humidity
    }

    pub fn pressure_atm(&self) -> f64 {
        self.pressure_atm
    }

    /// Partial pressure of the dry constituents, atm.
    pub fn dry_pressure_atm(&self) -> f64 {
        (self.pressure_atm - water_vapor_partial_pressure(self)).max(0.0)
    }
}

/// Saturation vapour pressure over water (Buck), atm.
pub fn saturation_vapor_pressure(temperature_k: f64) -> f64 {
    let t = temperature_k - 273.15;
    let hpa = 6.1121 * ((18.678 - t / 234.5) * (t / (257.14 + t))).exp();
    hpa / ATM_HPA
}

/// Water vapour partial pressure, atm: RH × saturation pressure.
pub fn water_vapor_partial_pressure(atmos: &AtmosphereState) -> f64 {
    atmos.relative_humidity * saturation_vapor_pressure(atmos.temperature_k)
}
