//! Subcommand pipelines. Each reads a fully expanded [`ScenarioConfig`],
//! writes its CSV and prints a one-line summary.

use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use thz_core::analysis::{metric_from_mean_gdd, phase_profile, PhaseProfile};
use thz_core::equalize::{estimate_fir_synced, scramble_profile};
use thz_core::link::{PdcPlacement, SweepResult};
use thz_core::phy::{apply_channel, Sync};
use thz_core::scenario::link_grid;
use thz_core::{
    cascade, complex_refractivity, integrated_gdd_metric, los_transfer, multipath_transfer, parse_catalog,
    rough_surface_paths, run_ber_sweep, AtmosphereState, ChannelResponse, EqualizerSpec, Error, FreqGrid,
    LineCatalog, LinkConfig, Path as PropPath, PathSet, Scheme, StopRule, SurfaceStats, SweepOptions, Waveform,
};

use crate::config::ScenarioConfig;
use crate::output::{companion_path, num, write_atomic};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Atmosphere,
    Gdd,
    Metric,
    PulseDemo,
    Link,
    Sweep,
    ScrambleDemo,
}

#[derive(Debug)]
pub enum CommandError {
    /// A configuration value that parses as text but not as what it names.
    Usage(String),
    Core(Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl CommandError {
    pub fn category(&self) -> &'static str {
        match self {
            CommandError::Usage(_) => "usage",
            CommandError::Core(e) => e.category(),
            CommandError::Io { .. } => "io",
        }
    }
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommandError::Usage(m) => f.write_str(m),
            CommandError::Core(e) => write!(f, "{e}"),
            CommandError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        CommandError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CommandError>;

fn usage(msg: impl Into<String>) -> CommandError {
    CommandError::Usage(msg.into())
}

fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    write_atomic(path, content).map_err(|source| CommandError::Io {
        path: path.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("<stdout>")),
        source,
    })
}

/// Summary goes to stdout when the CSV went to a file, otherwise to stderr.
fn summary(out: Option<&Path>, line: &str) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

pub fn execute(action: Action, cfg: &ScenarioConfig, out: Option<&Path>) -> Result<()> {
    match action {
        Action::Atmosphere => atmosphere(cfg, out),
        Action::Gdd => gdd(cfg, out),
        Action::Metric => metric(cfg, out),
        Action::PulseDemo => pulse_demo(cfg, out),
        Action::Link => link(cfg, out),
        Action::Sweep => sweep(cfg, out),
        Action::ScrambleDemo => scramble_demo(cfg, out),
    }
}

fn atmos_state(cfg: &ScenarioConfig) -> Result<AtmosphereState> {
    Ok(AtmosphereState::from_celsius(
        cfg.float("atmosphere.t_c"),
        cfg.float("atmosphere.rh"),
        cfg.float("atmosphere.p_atm"),
    )?)
}

fn catalog(cfg: &ScenarioConfig) -> Result<LineCatalog> {
    match cfg.text("atmosphere.catalog") {
        "builtin" => Ok(LineCatalog::builtin()),
        path => {
            let text = std::fs::read_to_string(path).map_err(|source| CommandError::Io {
                path: path.into(),
                source,
            })?;
            Ok(parse_catalog(&text)?)
        }
    }
}

fn user_grid(cfg: &ScenarioConfig) -> Result<FreqGrid> {
    Ok(FreqGrid::span(
        cfg.float("grid.fmin_ghz"),
        cfg.float("grid.fmax_ghz"),
        cfg.float("grid.step_ghz"),
    )?)
}

fn fields<const N: usize>(spec: &str, what: &str, layout: &str) -> Result<[f64; N]> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let bad = || usage(format!("{what} `{spec}` must be {layout}"));
    if parts.len() != N {
        return Err(bad());
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| bad())?;
    }
    Ok(out)
}

fn whole(v: f64, what: &str) -> Result<u64> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(usage(format!("{what} must be a non-negative integer, got {v}")))
    }
}

pub fn parse_paths(spec: &str) -> Result<Option<PathSet>> {
    let items: Vec<&str> = spec.split(';').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Ok(None);
    }
    let paths = items
        .iter()
        .map(|p| {
            let [d, re, im] = fields::<3>(p, "path", "delay_ps:gain_re:gain_im")?;
            Ok(PropPath::new(d, Complex64::new(re, im)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(PathSet::new(paths)?))
}

fn parse_surface(spec: &str) -> Result<Option<PathSet>> {
    if spec.trim().is_empty() {
        return Ok(None);
    }
    let [mean, lo, hi, angle, n, seed] = fields::<6>(spec, "surface", "mean_um:min_um:max_um:angle_deg:n:seed")?;
    let stats = SurfaceStats::new(mean, lo, hi, angle, whole(n, "surface scatterer count")? as usize)?;
    Ok(Some(rough_surface_paths(&stats, whole(seed, "surface seed")?)?))
}

/// Cascade of every configured channel component on `grid`.
fn build_channel(cfg: &ScenarioConfig, grid: &FreqGrid) -> Result<ChannelResponse> {
    let mut parts = Vec::new();
    let distance = cfg.float("channel.distance_m");
    if distance > 0.0 {
        let spec = complex_refractivity(&catalog(cfg)?, &atmos_state(cfg)?, grid)?;
        parts.push(los_transfer(&spec, distance)?);
    }
    if let Some(paths) = parse_paths(cfg.text("channel.paths"))? {
        parts.push(multipath_transfer(&paths, grid)?);
    }
    if let Some(paths) = parse_surface(cfg.text("channel.surface"))? {
        parts.push(multipath_transfer(&paths, grid)?.with_label("rough surface"));
    }
    let gdd = cfg.float("channel.gdd_ps2");
    if gdd != 0.0 {
        parts.push(ChannelResponse::quadratic_phase(*grid, gdd, cfg.float("channel.gdd_center_ghz")));
    }
    Ok(match parts.len() {
        0 => ChannelResponse::identity(*grid),
        1 => parts.pop().expect("one part"),
        _ => {
            let label = parts.iter().map(|p| p.label()).collect::<Vec<_>>().join(" + ");
            cascade(&parts)?.with_label(label)
        }
    })
}

fn link_config(cfg: &ScenarioConfig) -> Result<LinkConfig> {
    let scheme: Scheme = cfg
        .text("link.scheme")
        .parse()
        .map_err(|e: Error| usage(e.to_string()))?;
    let config = LinkConfig {
        scheme,
        symbol_rate_gbaud: cfg.float("link.symbol_rate_gbaud"),
        carrier_ghz: cfg.float("link.carrier_ghz"),
        rolloff: cfg.float("link.rolloff"),
        span_symbols: cfg.int("link.span_symbols") as usize,
        frame_bits: cfg.int("link.frame_bits") as usize,
        samples_per_symbol: cfg.int("link.samples_per_symbol") as usize,
    };
    config.validate()?;
    Ok(config)
}

fn equalizer(cfg: &ScenarioConfig) -> Result<Option<EqualizerSpec>> {
    match cfg.text("equalizer.eq").trim() {
        "" | "none" => Ok(None),
        s => s.parse().map(Some).map_err(|e: Error| usage(e.to_string())),
    }
}

fn pdc(cfg: &ScenarioConfig) -> Result<PdcPlacement> {
    cfg.text("equalizer.pdc").parse().map_err(|e: Error| usage(e.to_string()))
}

struct ScrambleSpec {
    key: u64,
    metric_ps: f64,
    segments: usize,
}

fn scramble_spec(cfg: &ScenarioConfig, config: &LinkConfig) -> Result<Option<ScrambleSpec>> {
    let spec = cfg.text("equalizer.scramble").trim();
    match spec {
        "" => Ok(None),
        // key from the master seed, spread over 300 symbols
        "default" => Ok(Some(ScrambleSpec {
            key: cfg.int("run.seed"),
            metric_ps: 300.0 * config.symbol_duration_ps(),
            segments: 16,
        })),
        s => {
            let [key, metric_ps, segments] = fields::<3>(s, "scramble", "key:metric_ps:segments")?;
            Ok(Some(ScrambleSpec {
                key: whole(key, "scramble key")?,
                metric_ps,
                segments: whole(segments, "scramble segments")? as usize,
            }))
        }
    }
}

fn scramble_filter(spec: &ScrambleSpec, grid: &FreqGrid, config: &LinkConfig) -> Result<ChannelResponse> {
    Ok(scramble_profile(spec.key, grid, config.occupied_band(), spec.metric_ps, spec.segments)?)
}

fn snr_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| usage(format!("Eb/N0 list entry `{s}` is not a number")))
        })
        .collect()
}

fn stop_rule(cfg: &ScenarioConfig) -> StopRule {
    StopRule {
        min_errors: cfg.int("sweep.min_errors"),
        max_bits: cfg.int("sweep.max_bits"),
    }
}

fn profile_csv(p: &PhaseProfile) -> String {
    let mut s = String::from("freq_GHz,amp_dB,phase_rad,group_delay_ps,gdd_ps2\n");
    let amp = p.amplitude_db();
    for i in 0..p.grid.len() {
        let masked = p.amplitude_floor_mask[i];
        let pick = |v: f64| if masked { f64::NAN } else { v };
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            p.grid.freq_ghz(i),
            num(amp[i]),
            num(pick(p.phase_unwrapped[i])),
            num(pick(p.group_delay_ps[i])),
            num(pick(p.gdd_ps2[i]))
        ));
    }
    s
}

fn atmosphere(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<()> {
    let grid = user_grid(cfg)?;
    let atmos = atmos_state(cfg)?;
    let spec = complex_refractivity(&catalog(cfg)?, &atmos, &grid)?;
    let atten = spec.attenuation_db_per_m();
    let p = phase_profile(&los_transfer(&spec, 1.0)?)?;
    let mut csv = String::from("freq_GHz,atten_dB_per_m,group_delay_ps_per_m,gdd_ps2_per_m\n");
    for i in 0..grid.len() {
        let masked = p.amplitude_floor_mask[i];
        csv.push_str(&format!(
            "{},{},{},{}\n",
            grid.freq_ghz(i),
            num(atten[i]),
            num(if masked { f64::NAN } else { p.group_delay_ps[i] }),
            num(if masked { f64::NAN } else { p.gdd_ps2[i] })
        ));
    }
    emit(out, &csv)?;
    let (fa, a) = atten
        .iter()
        .enumerate()
        .map(|(i, &a)| (grid.freq_ghz(i), a))
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .expect("grid is non-empty");
    let peak = p.peak_abs_gdd(grid.lo_ghz(), grid.hi_ghz());
    summary(
        out,
        &format!(
            "atmosphere: {} points, {:.1} C, RH {}; max attenuation {a:.3} dB/m at {fa:.2} GHz; max |GDD| {}",
            grid.len(),
            cfg.float("atmosphere.t_c"),
            cfg.float("atmosphere.rh"),
            peak.map(|(f, g)| format!("{g:.1} ps2/m at {f:.2} GHz")).unwrap_or_else(|| "n/a".into())
        ),
    );
    Ok(())
}

fn gdd(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<()> {
    let grid = user_grid(cfg)?;
    let ch = build_channel(cfg, &grid)?;
    let p = phase_profile(&ch)?;
    emit(out, &profile_csv(&p))?;
    let peak = p.peak_abs_gdd(grid.lo_ghz(), grid.hi_ghz());
    summary(
        out,
        &format!(
            "gdd: {}; {} points; max |GDD| {}",
            ch.label(),
            grid.len(),
            peak.map(|(f, g)| format!("{g:.1} ps2 at {f:.2} GHz")).unwrap_or_else(|| "n/a".into())
        ),
    );
    Ok(())
}

fn metric(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<()> {
    let (band_ghz, value) = if cfg.flag("metric.from_channel") {
        let config = link_config(cfg)?;
        let band = config.occupied_band();
        let ch = build_channel(cfg, &link_grid(&config)?)?;
        let p = phase_profile(&ch.subband(band.0, band.1)?)?;
        (band.1 - band.0, integrated_gdd_metric(&p, band)?)
    } else {
        let band_ghz = cfg.float("metric.band_hz") * 1e-9;
        if !(band_ghz > 0.0) {
            return Err(Error::EmptyBand {
                lo_ghz: 0.0,
                hi_ghz: band_ghz,
                needed: 2,
            }
            .into());
        }
        (band_ghz, metric_from_mean_gdd(band_ghz, cfg.float("metric.gdd_ps2").abs()))
    };
    let symbol_ps = 1e3 / band_ghz;
    println!("{value:.1} ps");
    println!(
        "symbol duration at {band_ghz} GHz: {symbol_ps:.1} ps; metric spans {:.2} symbols",
        value / symbol_ps
    );
    if out.is_some() {
        emit(
            out,
            &format!("band_GHz,metric_ps,symbol_duration_ps\n{band_ghz},{value},{symbol_ps}\n"),
        )?;
    }
    Ok(())
}

/// Width of the region where `|x|²` exceeds half its peak, with linear
/// interpolation at both edges.
fn fwhm_ps(samples: &[Complex64], dt_ps: f64) -> f64 {
    let p: Vec<f64> = samples.iter().map(|v| v.norm_sqr()).collect();
    let half = p.iter().copied().fold(0.0, f64::max) / 2.0;
    let first = p.iter().position(|&v| v >= half).unwrap_or(0);
    let last = p.iter().rposition(|&v| v >= half).unwrap_or(0);
    let edge = |inside: usize, outside: usize| {
        let (a, b) = (p[outside], p[inside]);
        let t = if b > a { (half - a) / (b - a) } else { 1.0 };
        outside as f64 + t * (inside as f64 - outside as f64)
    };
    let lo = if first > 0 { edge(first, first - 1) } else { 0.0 };
    let hi = if last + 1 < p.len() { edge(last, last + 1) } else { (p.len() - 1) as f64 };
    (hi - lo) * dt_ps
}

fn pulse_demo(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<()> {
    let fwhm = cfg.float("pulse.fwhm_ps");
    let fc = cfg.float("pulse.carrier_ghz");
    let fs = cfg.float("pulse.sample_rate_gsps");
    let n = cfg.int("pulse.samples") as usize;
    let gdd = cfg.float("pulse.gdd_ps2");
    let delay = cfg.float("pulse.delay_ps");
    let wave = Waveform::gaussian_pulse(fwhm, fc, fs, n)?;
    // one grid point per DFT bin
    let grid = FreqGrid::new(fc - fs / 2.0, fs / n as f64, n + 1)?;
    let dispersive = ChannelResponse::quadratic_phase(grid, gdd, fc);
    let two_path = multipath_transfer(&PathSet::two_path(delay, 1.0)?, &grid)?;
    let delayed = ChannelResponse::pure_delay(grid, delay);

    let stretched = apply_channel(&wave, &dispersive)?;
    let late = apply_channel(&wave, &delayed)?;
    let summed = apply_channel(&wave, &two_path)?;
    let dt = wave.sample_period_ps();
    let centre = (n / 2) as f64;
    let mut csv = String::from("time_ps,input_abs,gdd_abs,delayed_abs,two_path_abs\n");
    for i in 0..n {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            (i as f64 - centre) * dt,
            wave.samples()[i].norm(),
            stretched.samples()[i].norm(),
            late.samples()[i].norm(),
            summed.samples()[i].norm()
        ));
    }
    emit(out, &csv)?;

    let mut spectrum_note = String::new();
    if let Some(path) = out {
        let pg = phase_profile(&dispersive)?;
        let pt = phase_profile(&two_path)?;
        let sigma = fwhm / (2.0 * 2f64.ln().sqrt());
        let mut s = String::from(
            "freq_GHz,input_amp_dB,gdd_amp_dB,two_path_amp_dB,gdd_phase_rad,two_path_phase_rad,gdd_gdd_ps2,two_path_gdd_ps2\n",
        );
        for i in 0..grid.len() {
            let w = 2.0 * std::f64::consts::PI * (grid.freq_ghz(i) - fc) * 1e-3;
            // spectrum of exp(-t²/2σ²), 0 dB at the carrier
            let input_db = -10.0 * (w * sigma).powi(2) / std::f64::consts::LN_10;
            let masked = |p: &PhaseProfile, v: f64| if p.amplitude_floor_mask[i] { f64::NAN } else { v };
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                grid.freq_ghz(i),
                num(input_db),
                num(input_db + pg.amplitude_db()[i]),
                num(input_db + pt.amplitude_db()[i]),
                num(masked(&pg, pg.phase_unwrapped[i])),
                num(masked(&pt, pt.phase_unwrapped[i])),
                num(masked(&pg, pg.gdd_ps2[i])),
                num(masked(&pt, pt.gdd_ps2[i]))
            ));
        }
        let spath = companion_path(path, "spectrum");
        emit(Some(&spath), &s)?;
        spectrum_note = format!("; spectrum in {}", spath.display());
    }
    summary(
        out,
        &format!(
            "pulse-demo: {:.1} ps pulse at {fc} GHz -> {:.1} ps after {gdd} ps2; two-path nulls every {:.2} GHz{spectrum_note}",
            fwhm_ps(wave.samples(), dt),
            fwhm_ps(stretched.samples(), dt),
            1e3 / delay
        ),
    );
    Ok(())
}

struct Prepared {
    config: LinkConfig,
    channel: ChannelResponse,
    eq: Option<EqualizerSpec>,
    options: SweepOptions,
}

fn prepare(cfg: &ScenarioConfig) -> Result<Prepared> {
    let config = link_config(cfg)?;
    let grid = link_grid(&config)?;
    let channel = build_channel(cfg, &grid)?;
    let mut options = SweepOptions {
        master_seed: cfg.int("run.seed"),
        stop: stop_rule(cfg),
        pdc: pdc(cfg)?,
        ..Default::default()
    };
    if let Some(s) = scramble_spec(cfg, &config)? {
        let f = scramble_filter(&s, &grid, &config)?;
        options.rx_filters = vec![f.conjugate()];
        options.tx_filters = vec![f];
    }
    Ok(Prepared {
        config,
        eq: equalizer(cfg)?,
        channel,
        options,
    })
}

fn es_n0_db(ebn0_db: f64, scheme: Scheme) -> f64 {
    ebn0_db + 10.0 * (scheme.bits_per_symbol() as f64).log10()
}

fn link(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<()> {
    let mut run = prepare(cfg)?;
    let ebn0 = cfg.float("link.ebn0_db");
    run.options.snapshot_ebn0_db = Some(ebn0);
    let res = run_ber_sweep(&run.config, &run.channel, run.eq, &[ebn0], &run.options)?;
    let snap = res.snapshot.as_ref().expect("snapshot requested at the only point");
    emit(out, &snap.to_csv())?;
    let p = &res.points[0];
    summary(
        out,
        &format!(
            "link: {}; Eb/N0 {ebn0} dB (Es/N0 {:.2} dB); BER {:.3e} ({} errors / {} bits); CML {}; cluster spread {:.4}; eq {}; pdc {}",
            res.labels.channel,
            es_n0_db(ebn0, run.config.scheme),
            p.ber,
            p.errors,
            p.bits,
            res.cml,
            snap.cluster_spread(),
            res.labels.eq,
            res.labels.pdc
        ),
    );
    Ok(())
}

fn sweep(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<()> {
    let mut run = prepare(cfg)?;
    let grid = snr_list(cfg.text("sweep.ebn0_db"))?;
    let snap_at = snr_list(cfg.text("sweep.snapshot_db"))?;
    run.options.snapshot_ebn0_db = snap_at.first().copied();
    let res = run_ber_sweep(&run.config, &run.channel, run.eq, &grid, &run.options)?;
    emit(out, &res.to_csv())?;
    let mut note = String::new();
    if let (Some(path), Some(snap)) = (out, &res.snapshot) {
        let spath = companion_path(path, "constellation");
        emit(Some(&spath), &snap.to_csv())?;
        note = format!("; constellation in {}", spath.display());
    }
    let bers: Vec<String> = res.points.iter().map(|p| format!("{}:{:.2e}", p.ebn0_db, p.ber)).collect();
    summary(
        out,
        &format!(
            "sweep: {}; eq {} pdc {}; CML {}; BER {}{note}",
            res.labels.channel,
            res.labels.eq,
            res.labels.pdc,
            res.cml,
            bers.join(" ")
        ),
    );
    Ok(())
}

fn scramble_demo(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<()> {
    let config = link_config(cfg)?;
    let grid = link_grid(&config)?;
    let band = config.occupied_band();
    let spec = match scramble_spec(cfg, &config)? {
        Some(s) => s,
        None => scramble_spec(&with_default_scramble(cfg), &config)?.expect("default scramble"),
    };
    let scr = scramble_filter(&spec, &grid, &config)?;
    let measured = integrated_gdd_metric(&phase_profile(&scr.subband(band.0, band.1)?)?, band)?;
    let cml = estimate_fir_synced(&scr, &config, &Sync::from_channel(&scr, &config)?)?.cml();
    let ebn0 = cfg.float("link.ebn0_db");
    let base = SweepOptions {
        master_seed: cfg.int("run.seed"),
        stop: stop_rule(cfg),
        ..Default::default()
    };
    let plain = ChannelResponse::identity(grid);
    let cases: [(&str, Vec<ChannelResponse>, Vec<ChannelResponse>); 3] = [
        ("plain", vec![], vec![]),
        ("scrambled+descrambled", vec![scr.clone()], vec![scr.conjugate()]),
        ("scrambled without key", vec![scr.clone()], vec![]),
    ];
    let mut csv = String::new();
    let mut bers = Vec::new();
    for (label, tx, rx) in cases {
        let options = SweepOptions {
            tx_filters: tx,
            rx_filters: rx,
            ..base.clone()
        };
        let res: SweepResult =
            run_ber_sweep(&config, &plain.clone().with_label(label), None, &[ebn0], &options)?;
        let body = res.to_csv();
        if csv.is_empty() {
            csv.push_str(&body);
        } else {
            csv.extend(body.lines().skip(1).map(|l| format!("{l}\n")));
        }
        bers.push(format!("{label} {:.3e}", res.points[0].ber));
    }
    emit(out, &csv)?;
    summary(
        out,
        &format!(
            "scramble-demo: key {} target {:.0} ps measured {measured:.0} ps over {} segments; CML {cml}; Eb/N0 {ebn0} dB BER: {}",
            spec.key,
            spec.metric_ps,
            spec.segments,
            bers.join(", ")
        ),
    );
    Ok(())
}

fn with_default_scramble(cfg: &ScenarioConfig) -> ScenarioConfig {
    let mut c = cfg.clone();
    c.set("equalizer.scramble", "default").expect("declared key");
    c
}
