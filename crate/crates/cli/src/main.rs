mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thz_core::scenario::Preset;

use crate::config::{ConfigError, ScenarioConfig};

#[derive(Parser, Debug)]
#[command(name = "thz", version, about = "Terahertz channel and link simulator")]
struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output CSV path (standard output when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Start from a named scenario.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the fully expanded configuration and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    /// Override any configuration key, e.g. `--set link.rolloff=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Attenuation, group delay and GDD per metre of air.
    Atmosphere {
        #[command(flatten)]
        atmos: AtmosArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Amplitude, phase, group delay and GDD of a channel.
    Gdd {
        #[command(flatten)]
        atmos: AtmosArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        channel: ChannelArgs,
    },
    /// Bandwidth-integrated GDD metric.
    Metric {
        /// Bandwidth in Hz.
        #[arg(long)]
        band: Option<f64>,
        /// Constant GDD in ps².
        #[arg(long = "gdd-ps2")]
        gdd_ps2: Option<f64>,
        /// Measure the configured channel over the link band instead.
        #[arg(long)]
        from_channel: bool,
    },
    /// Gaussian pulse through pure GDD and through a two-path channel.
    PulseDemo {
        #[arg(long)]
        fwhm_ps: Option<f64>,
        #[arg(long)]
        carrier_ghz: Option<f64>,
        #[arg(long = "gdd-ps2")]
        gdd_ps2: Option<f64>,
        #[arg(long)]
        delay_ps: Option<f64>,
    },
    /// One Eb/N0 point; writes the constellation snapshot.
    Link {
        #[command(flatten)]
        atmos: AtmosArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        link: LinkArgs,
        #[command(flatten)]
        eq: EqArgs,
        #[command(flatten)]
        stop: StopArgs,
        /// Eb/N0 in dB.
        #[arg(long)]
        ebn0: Option<f64>,
    },
    /// BER curve over an Eb/N0 grid.
    Sweep {
        #[command(flatten)]
        atmos: AtmosArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        link: LinkArgs,
        #[command(flatten)]
        eq: EqArgs,
        #[command(flatten)]
        stop: StopArgs,
        /// Comma-separated Eb/N0 values in dB.
        #[arg(long)]
        ebn0: Option<String>,
    },
    /// Keyed GDD scrambling: BER for the keyed receiver and for one without the key.
    ScrambleDemo {
        #[command(flatten)]
        link: LinkArgs,
        #[command(flatten)]
        stop: StopArgs,
        /// `key:metric_ps:segments`
        #[arg(long)]
        scramble: Option<String>,
        #[arg(long)]
        ebn0: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct AtmosArgs {
    /// Air temperature, °C.
    #[arg(long = "t-c")]
    t_c: Option<f64>,
    /// Relative humidity in [0, 1].
    #[arg(long)]
    rh: Option<f64>,
    /// Total pressure, atm.
    #[arg(long = "p-atm")]
    p_atm: Option<f64>,
    /// Line catalog CSV (`builtin` for the bundled table).
    #[arg(long)]
    catalog: Option<String>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long)]
    fmin: Option<f64>,
    #[arg(long)]
    fmax: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Args, Debug)]
struct ChannelArgs {
    /// Atmospheric path length in metres (0 for none).
    #[arg(long)]
    distance: Option<f64>,
    /// Extra propagation path `delay_ps:gain_re:gain_im`.
    #[arg(long = "path")]
    paths: Vec<String>,
    /// Rough surface `mean_um:min_um:max_um:angle_deg:n:seed`.
    #[arg(long)]
    surface: Option<String>,
    /// Additional constant GDD, ps².
    #[arg(long = "channel-gdd-ps2")]
    gdd_ps2: Option<f64>,
}

#[derive(Args, Debug)]
struct LinkArgs {
    /// bpsk or qpsk.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    baud: Option<f64>,
    #[arg(long)]
    carrier: Option<f64>,
    #[arg(long)]
    rolloff: Option<f64>,
    #[arg(long)]
    frame_bits: Option<u64>,
}

#[derive(Args, Debug)]
struct EqArgs {
    /// none, zf, mmse:N, dfe:N or mlse.
    #[arg(long)]
    eq: Option<String>,
    /// Phase-only dispersion compensation: on, tx or off.
    #[arg(long)]
    pdc: Option<String>,
    /// Scramble at the transmitter and descramble at the receiver, `key:metric_ps:segments`.
    #[arg(long)]
    scramble: Option<String>,
}

#[derive(Args, Debug)]
struct StopArgs {
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    max_bits: Option<u64>,
}

/// Collects `(key, value)` overrides from whatever flags were given.
#[derive(Default)]
struct Overrides(Vec<(&'static str, String)>);

impl Overrides {
    fn put<T: ToString>(&mut self, key: &'static str, v: Option<T>) {
        if let Some(v) = v {
            self.0.push((key, v.to_string()));
        }
    }

    fn atmos(&mut self, a: AtmosArgs) {
        self.put("atmosphere.t_c", a.t_c);
        self.put("atmosphere.rh", a.rh);
        self.put("atmosphere.p_atm", a.p_atm);
        self.put("atmosphere.catalog", a.catalog);
    }

    fn grid(&mut self, g: GridArgs) {
        self.put("grid.fmin_ghz", g.fmin);
        self.put("grid.fmax_ghz", g.fmax);
        self.put("grid.step_ghz", g.step);
    }

    fn channel(&mut self, c: ChannelArgs) {
        self.put("channel.distance_m", c.distance);
        if !c.paths.is_empty() {
            self.put("channel.paths", Some(c.paths.join(";")));
        }
        self.put("channel.surface", c.surface);
        self.put("channel.gdd_ps2", c.gdd_ps2);
    }

    fn link(&mut self, l: LinkArgs) {
        self.put("link.scheme", l.scheme);
        self.put("link.symbol_rate_gbaud", l.baud);
        self.put("link.carrier_ghz", l.carrier);
        self.put("link.rolloff", l.rolloff);
        self.put("link.frame_bits", l.frame_bits);
    }

    fn eq(&mut self, e: EqArgs) {
        self.put("equalizer.eq", e.eq);
        self.put("equalizer.pdc", e.pdc);
        self.put("equalizer.scramble", e.scramble);
    }

    fn stop(&mut self, s: StopArgs) {
        self.put("sweep.min_errors", s.min_errors);
        self.put("sweep.max_bits", s.max_bits);
    }
}

fn default_command(preset: Option<Preset>) -> Option<commands::Action> {
    use commands::Action;
    Some(match preset? {
        Preset::Fig2Pulse => Action::PulseDemo,
        Preset::Fig3Atmosphere => Action::Atmosphere,
        Preset::Fig4Qpsk380 => Action::Link,
        Preset::Fig5Pdc => Action::Sweep,
    })
}

enum Failure {
    Usage(String),
    Domain(commands::CommandError),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.0)
    }
}

fn resolve(cli: Cli) -> Result<(ScenarioConfig, Option<commands::Action>, bool, Option<PathBuf>), Failure> {
    use commands::Action;
    let (file_preset, entries) = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            config::parse_entries(&text)?
        }
        None => (None, Vec::new()),
    };
    let flag_preset = match &cli.preset {
        Some(name) => Some(name.parse::<Preset>().map_err(|e| Failure::Usage(e.to_string()))?),
        None => None,
    };
    let mut cfg = ScenarioConfig::assemble(flag_preset.or(file_preset), &entries)?;

    let mut ov = Overrides::default();
    ov.put("run.seed", cli.seed);
    let action = match cli.command {
        Some(Command::Atmosphere { atmos, grid }) => {
            ov.atmos(atmos);
            ov.grid(grid);
            Some(Action::Atmosphere)
        }
        Some(Command::Gdd { atmos, grid, channel }) => {
            ov.atmos(atmos);
            ov.grid(grid);
            ov.channel(channel);
            Some(Action::Gdd)
        }
        Some(Command::Metric {
            band,
            gdd_ps2,
            from_channel,
        }) => {
            ov.put("metric.band_hz", band);
            ov.put("metric.gdd_ps2", gdd_ps2);
            if from_channel {
                ov.put("metric.from_channel", Some(true));
            }
            Some(Action::Metric)
        }
        Some(Command::PulseDemo {
            fwhm_ps,
            carrier_ghz,
            gdd_ps2,
            delay_ps,
        }) => {
            ov.put("pulse.fwhm_ps", fwhm_ps);
            ov.put("pulse.carrier_ghz", carrier_ghz);
            ov.put("pulse.gdd_ps2", gdd_ps2);
            ov.put("pulse.delay_ps", delay_ps);
            Some(Action::PulseDemo)
        }
        Some(Command::Link {
            atmos,
            channel,
            link,
            eq,
            stop,
            ebn0,
        }) => {
            ov.atmos(atmos);
            ov.channel(channel);
            ov.link(link);
            ov.eq(eq);
            ov.stop(stop);
            ov.put("link.ebn0_db", ebn0);
            Some(Action::Link)
        }
        Some(Command::Sweep {
            atmos,
            channel,
            link,
            eq,
            stop,
            ebn0,
        }) => {
            ov.atmos(atmos);
            ov.channel(channel);
            ov.link(link);
            ov.eq(eq);
            ov.stop(stop);
            ov.put("sweep.ebn0_db", ebn0);
            Some(Action::Sweep)
        }
        Some(Command::ScrambleDemo {
            link,
            stop,
            scramble,
            ebn0,
        }) => {
            ov.link(link);
            ov.stop(stop);
            ov.put("equalizer.scramble", scramble);
            ov.put("link.ebn0_db", ebn0);
            Some(Action::ScrambleDemo)
        }
        None => default_command(cfg.preset),
    };
    for (k, v) in ov.0 {
        cfg.set(k, &v)?;
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v)?;
    }
    Ok((cfg, action, cli.dump_config, cli.out))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (cfg, action, dump, out) = resolve(cli)?;
    if dump {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    let action = action.ok_or_else(|| Failure::Usage("no subcommand given and no preset to run".into()))?;
    commands::execute(action, &cfg, out.as_deref()).map_err(|e| match e {
        commands::CommandError::Usage(m) => Failure::Usage(m),
        other => Failure::Domain(other),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error[usage]: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(1)
        }
    }
}
