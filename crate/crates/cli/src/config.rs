//! Flat `section.key = value` scenario configuration.

use std::collections::BTreeMap;
use std::fmt;

use thz_core::scenario::Preset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Bool,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // `{:?}` prints the shortest string that parses back to the same f64
            Value::Float(v) => write!(f, "{v:?}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Text(v) => f.write_str(v),
        }
    }
}

struct KeySpec {
    key: &'static str,
    kind: Kind,
    default: &'static str,
}

const fn key(key: &'static str, kind: Kind, default: &'static str) -> KeySpec {
    KeySpec { key, kind, default }
}

const KEYS: &[KeySpec] = &[
    key("atmosphere.t_c", Kind::Float, "29"),
    key("atmosphere.rh", Kind::Float, "0.45"),
    key("atmosphere.p_atm", Kind::Float, "1"),
    key("atmosphere.catalog", Kind::Text, "builtin"),
    key("grid.fmin_ghz", Kind::Float, "100"),
    key("grid.fmax_ghz", Kind::Float, "600"),
    key("grid.step_ghz", Kind::Float, "0.01"),
    key("channel.distance_m", Kind::Float, "30"),
    key("channel.paths", Kind::Text, ""),
    key("channel.surface", Kind::Text, ""),
    key("channel.gdd_ps2", Kind::Float, "0"),
    key("channel.gdd_center_ghz", Kind::Float, "380"),
    key("link.scheme", Kind::Text, "qpsk"),
    key("link.symbol_rate_gbaud", Kind::Float, "10"),
    key("link.carrier_ghz", Kind::Float, "380"),
    key("link.rolloff", Kind::Float, "0.35"),
    key("link.span_symbols", Kind::Int, "16"),
    key("link.frame_bits", Kind::Int, "4096"),
    key("link.samples_per_symbol", Kind::Int, "2"),
    key("link.ebn0_db", Kind::Float, "10"),
    key("equalizer.eq", Kind::Text, "none"),
    key("equalizer.pdc", Kind::Text, "off"),
    key("equalizer.scramble", Kind::Text, ""),
    key("sweep.ebn0_db", Kind::Text, "0,2,4,6,8,10"),
    key("sweep.min_errors", Kind::Int, "100"),
    key("sweep.max_bits", Kind::Int, "100000000"),
    key("sweep.snapshot_db", Kind::Text, ""),
    key("metric.band_hz", Kind::Float, "9e9"),
    key("metric.gdd_ps2", Kind::Float, "2533"),
    key("metric.from_channel", Kind::Bool, "false"),
    key("pulse.fwhm_ps", Kind::Float, "100"),
    key("pulse.carrier_ghz", Kind::Float, "130"),
    key("pulse.gdd_ps2", Kind::Float, "5000"),
    key("pulse.delay_ps", Kind::Float, "50.5"),
    key("pulse.sample_rate_gsps", Kind::Float, "200"),
    key("pulse.samples", Kind::Int, "2048"),
    key("run.seed", Kind::Int, "1"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn parse_value(kind: Kind, key: &str, raw: &str) -> Result<Value, ConfigError> {
    let bad = |what: &str| ConfigError(format!("`{key}` expects {what}, got `{raw}`"));
    match kind {
        Kind::Float => raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Value::Float)
            .ok_or_else(|| bad("a finite number")),
        Kind::Int => raw.parse::<u64>().map(Value::Int).map_err(|_| bad("a non-negative integer")),
        Kind::Bool => raw.parse::<bool>().map(Value::Bool).map_err(|_| bad("true or false")),
        Kind::Text => Ok(Value::Text(raw.to_string())),
    }
}

/// Fully expanded scenario: every known key has a value.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub preset: Option<Preset>,
    values: BTreeMap<&'static str, Value>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let values = KEYS
            .iter()
            .map(|k| (k.key, parse_value(k.kind, k.key, k.default).expect("defaults parse")))
            .collect();
        Self { preset: None, values }
    }
}

impl ScenarioConfig {
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        let spec = KEYS
            .iter()
            .find(|k| k.key == key)
            .ok_or_else(|| ConfigError(format!("unknown configuration key `{key}`")))?;
        let value = parse_value(spec.kind, key, raw.trim())?;
        self.values.insert(spec.key, value);
        Ok(())
    }

    /// Replaces every value with the preset's scenario.
    pub fn apply_preset(&mut self, preset: Preset) {
        *self = Self::default();
        self.preset = Some(preset);
        for (k, v) in preset_overrides(preset) {
            self.set(k, v).expect("preset values are valid");
        }
    }

    /// Parses `key = value` lines. A `preset` line expands before the other
    /// keys regardless of its position.
    #[cfg(test)]
    pub fn parse_text(text: &str) -> Result<Self, ConfigError> {
        let (preset, entries) = parse_entries(text)?;
        Self::assemble(preset, &entries)
    }

    /// Starts from `preset` (or the defaults) and applies `entries` in order.
    pub fn assemble(preset: Option<Preset>, entries: &[Entry]) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        if let Some(p) = preset {
            cfg.apply_preset(p);
        }
        for e in entries {
            cfg.set(&e.key, &e.value)
                .map_err(|err| ConfigError(format!("line {}: {err}", e.line)))?;
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(p) = self.preset {
            out.push_str(&format!("preset = {p}\n"));
        }
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    fn get(&self, key: &str) -> &Value {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("configuration key `{key}` is not declared"))
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(v) => *v,
            other => panic!("`{key}` holds {other:?}, not a number"),
        }
    }

    pub fn int(&self, key: &str) -> u64 {
        match self.get(key) {
            Value::Int(v) => *v,
            other => panic!("`{key}` holds {other:?}, not an integer"),
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        match self.get(key) {
            Value::Bool(v) => *v,
            other => panic!("`{key}` holds {other:?}, not a boolean"),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Text(v) => v,
            other => panic!("`{key}` holds {other:?}, not text"),
        }
    }
}

/// One `key = value` line of a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits a configuration file into its optional preset and its other entries.
pub fn parse_entries(text: &str) -> Result<(Option<Preset>, Vec<Entry>), ConfigError> {
    let mut entries = Vec::new();
    let mut preset = None;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k == "preset" {
            preset = Some(v.parse::<Preset>().map_err(|e| ConfigError(format!("line {}: {e}", n + 1)))?);
        } else {
            entries.push(Entry {
                line: n + 1,
                key: k.to_string(),
                value: v.to_string(),
            });
        }
    }
    Ok((preset, entries))
}

fn preset_overrides(preset: Preset) -> &'static [(&'static str, &'static str)] {
    match preset {
        Preset::Fig2Pulse => &[
            ("pulse.fwhm_ps", "100"),
            ("pulse.carrier_ghz", "130"),
            ("pulse.delay_ps", "50.5"),
            ("pulse.gdd_ps2", "5000"),
        ],
        Preset::Fig3Atmosphere => &[
            ("atmosphere.t_c", "29"),
            ("atmosphere.rh", "0.45"),
            ("grid.fmin_ghz", "100"),
            ("grid.fmax_ghz", "600"),
            ("grid.step_ghz", "0.01"),
        ],
        Preset::Fig4Qpsk380 => &[
            ("channel.distance_m", "30"),
            ("link.scheme", "qpsk"),
            ("link.symbol_rate_gbaud", "10"),
            ("link.carrier_ghz", "380"),
            ("link.rolloff", "0.35"),
            ("link.span_symbols", "16"),
            ("link.frame_bits", "4096"),
            ("link.ebn0_db", "21.4"),
            ("sweep.ebn0_db", "10,12,14,16,18,20,22"),
            ("sweep.snapshot_db", "21.4"),
        ],
        Preset::Fig5Pdc => &[
            ("channel.distance_m", "100"),
            ("link.scheme", "bpsk"),
            ("link.symbol_rate_gbaud", "200"),
            ("link.carrier_ghz", "380"),
            ("link.rolloff", "0.6"),
            ("link.span_symbols", "16"),
            ("link.frame_bits", "16384"),
            ("link.ebn0_db", "14"),
            ("equalizer.eq", "dfe:7"),
            ("equalizer.pdc", "on"),
            ("sweep.ebn0_db", "10,12,14,16"),
        ],
    }
}
