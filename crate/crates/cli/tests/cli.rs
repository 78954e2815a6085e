use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn thz(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thz"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn metric_prints_the_integrated_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = thz(&["metric", "--band", "9e9", "--gdd-ps2", "2533"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().next(), Some("143.2 ps"));
    assert!(stdout(&o).contains("symbol duration"));
}

#[test]
fn atmosphere_csv_peaks_at_line_centres() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["atmosphere", "--t-c", "29", "--rh", "0.45", "--fmin", "100", "--fmax", "600", "--out", "a.csv"];
    let o = thz(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&dir.path().join("a.csv"));
    assert_eq!(table[0], ["freq_GHz", "atten_dB_per_m", "group_delay_ps_per_m", "gdd_ps2_per_m"]);
    let data: Vec<(f64, f64)> = table[1..]
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    assert_eq!(data.len(), 50_001);
    // water lines at 183.31, 380.20 and 556.94 GHz
    for centre in [183.31, 380.197, 556.936] {
        let (f, _) = data
            .iter()
            .filter(|(f, _)| (f - centre).abs() < 3.0)
            .copied()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        // the sloping background moves the maximum slightly off a 3 GHz wide line
        assert!((f - centre).abs() <= 0.1, "attenuation maximum at {f} GHz, line at {centre}");
    }
}

#[test]
fn fig5_sweep_writes_the_curve_schema() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep", "--preset", "fig5_pdc", "--eq", "dfe:7", "--pdc", "on", "--ebn0", "10,12", "--max-bits", "100000",
        "--out", "r.csv",
    ];
    let o = thz(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&dir.path().join("r.csv"));
    assert_eq!(
        table[0],
        ["ebn0_db", "ber", "bits", "errors", "eq", "taps", "pdc", "channel_label", "fingerprint"]
    );
    assert_eq!(table.len(), 3);
    for r in &table[1..] {
        assert_eq!((r[4].as_str(), r[5].as_str(), r[6].as_str()), ("dfe", "7", "on"));
        assert!(r[7].starts_with("atmosphere(100 m"));
        assert_eq!(r[8].len(), 16);
    }
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn every_preset_runs_without_extra_flags() {
    for preset in ["fig2_pulse", "fig3_atmosphere", "fig4_qpsk380", "fig5_pdc"] {
        let dir = tempfile::tempdir().unwrap();
        let o = thz(&["--preset", preset, "--out", "o.csv"], dir.path());
        assert!(o.status.success(), "{preset}: {}", stderr(&o));
        let text = fs::read_to_string(dir.path().join("o.csv")).unwrap();
        assert!(text.lines().count() > 1, "{preset} wrote no data rows");
    }
}

#[test]
fn dumped_config_reparses_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = thz(&["--preset", "fig4_qpsk380", "--seed", "9", "--dump-config"], dir.path());
    assert!(first.status.success());
    fs::write(dir.path().join("s.cfg"), stdout(&first)).unwrap();
    let second = thz(&["--config", "s.cfg", "--dump-config"], dir.path());
    assert_eq!(stdout(&first), stdout(&second));
    assert!(stdout(&first).contains("run.seed = 9\n"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.cfg"), "preset = fig5_pdc\nchannel.distance_m = 50\n").unwrap();
    let o = thz(&["--config", "c.cfg", "--set", "link.rolloff=0.5", "--dump-config"], dir.path());
    let text = stdout(&o);
    assert!(text.contains("channel.distance_m = 50.0\n"));
    assert!(text.contains("link.rolloff = 0.5\n"));
    assert!(text.contains("equalizer.eq = dfe:7\n"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(thz(&["--no-such-flag"], dir.path()).status.code(), Some(2));
    assert_eq!(thz(&["frobnicate"], dir.path()).status.code(), Some(2));
    fs::write(dir.path().join("bad.cfg"), "atmosphere.humidity = 0.4\n").unwrap();
    let o = thz(&["--config", "bad.cfg", "metric"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error[usage]"));
    assert_eq!(thz(&["link", "--eq", "bogus:3"], dir.path()).status.code(), Some(2));
    assert_eq!(thz(&[], dir.path()).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_1_with_category() {
    let dir = tempfile::tempdir().unwrap();
    let o = thz(&["atmosphere", "--fmin", "900", "--fmax", "1100", "--out", "x.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[coverage]"), "{}", stderr(&o));
    assert!(!dir.path().join("x.csv").exists());

    let o = thz(&["sweep", "--preset", "fig5_pdc", "--eq", "mlse", "--ebn0", "10"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[state-budget]"), "{}", stderr(&o));
}

#[test]
fn seed_controls_the_noise() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let o = thz(&["link", "--seed", seed, "--ebn0", "8", "--distance", "0", "--out", name], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read_to_string(dir.path().join(name)).unwrap()
    };
    assert_eq!(run("3", "a.csv"), run("3", "b.csv"));
    assert_ne!(run("3", "a.csv"), run("4", "c.csv"));
    let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 3, "temporary files left behind: {names:?}");
}

#[test]
fn pulse_demo_writes_time_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let o = thz(&["pulse-demo", "--out", "p.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("two-path nulls every 19.80 GHz"));
    let time = rows(&dir.path().join("p.csv"));
    assert_eq!(time[0], ["time_ps", "input_abs", "gdd_abs", "delayed_abs", "two_path_abs"]);
    let spec = rows(&dir.path().join("p.spectrum.csv"));
    // pure GDD leaves the spectral amplitude alone
    for r in &spec[1..] {
        let (a, b): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn scramble_demo_reports_three_receivers() {
    let dir = tempfile::tempdir().unwrap();
    let o = thz(&["scramble-demo", "--max-bits", "200000", "--ebn0", "6", "--out", "s.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&dir.path().join("s.csv"));
    let labels: Vec<&str> = table[1..].iter().map(|r| r[7].as_str()).collect();
    assert_eq!(labels, ["plain", "scrambled+descrambled", "scrambled without key"]);
    let ber = |i: usize| table[i][1].parse::<f64>().unwrap();
    assert!(ber(3) > 0.1 && ber(2) < 0.01);
}
