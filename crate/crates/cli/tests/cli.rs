//! End-to-end checks of the `sim` binary: subcommands, exit codes and
//! the output-directory rules.

use std::fs;
use std::process::Command;

fn sim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sim"))
}

#[test]
fn preset_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = sim()
        .args(["preset", "fig7", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "config.toml",
        "manifest.toml",
        "spectrum_on.csv",
        "spectrum_off.csv",
        "peaks_on.csv",
        "peaks_off.csv",
    ] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }

    // without cancellation: leakage at 120 kHz, interference at 80 and
    // 170 kHz, echoes at 200/230/290 kHz
    let peaks = fs::read_to_string(dir.path().join("peaks_off.csv")).unwrap();
    let freqs: Vec<f64> = peaks
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    for expect in [120e3, 80e3, 170e3, 200e3, 230e3, 290e3] {
        assert!(
            freqs.iter().any(|&f| (f - expect).abs() <= 10e3),
            "no peak near {expect} Hz in {freqs:?}"
        );
    }
    // with cancellation the interference tones drop out of the peak list
    let peaks_on = fs::read_to_string(dir.path().join("peaks_on.csv")).unwrap();
    let strong_on: Vec<f64> = peaks_on
        .lines()
        .skip(1)
        .filter_map(|l| {
            let mut cells = l.split(',');
            let f: f64 = cells.next().unwrap().parse().unwrap();
            let p: f64 = cells.next().unwrap().parse().unwrap();
            (p > -75.0).then_some(f)
        })
        .collect();
    assert!(
        !strong_on.iter().any(|&f| (f - 170e3).abs() <= 5e3),
        "interference still strong with cancellation on: {strong_on:?}"
    );
}

#[test]
fn run_accepts_an_emitted_config() {
    let dir = tempfile::tempdir().unwrap();
    assert!(sim()
        .args(["preset", "fig4", "--out"])
        .arg(dir.path().join("a"))
        .status()
        .unwrap()
        .success());
    let status = sim()
        .args(["run"])
        .arg(dir.path().join("a").join("config.toml"))
        .args(["--out"])
        .arg(dir.path().join("b"))
        .status()
        .unwrap();
    assert!(status.success());
    let a = fs::read(dir.path().join("a/depth.csv")).unwrap();
    let b = fs::read(dir.path().join("b/depth.csv")).unwrap();
    assert_eq!(a, b, "run from emitted config must reproduce the preset");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // bad TOML key
    let path = dir.path().join("bad.toml");
    fs::write(&path, "[scenario]\nnot_a_key = 1\n").unwrap();
    let out = sim().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // unknown preset
    let out = sim().args(["preset", "fig99"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // bad engine name
    let out = sim()
        .args(["preset", "fig4", "--engine", "warp"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // bad sweep axis
    assert!(sim()
        .args(["preset", "fig4", "--out"])
        .arg(dir.path().join("cfg"))
        .status()
        .unwrap()
        .success());
    let cfg = dir.path().join("cfg/config.toml");
    let out = sim()
        .args(["sweep"])
        .arg(&cfg)
        .args(["--axis", "phase"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_exits_2() {
    let out = sim().args(["run", "/nonexistent/config.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_and_match_emit_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert!(sim()
        .args(["preset", "fig4", "--out"])
        .arg(dir.path().join("cfg"))
        .status()
        .unwrap()
        .success());
    let cfg = dir.path().join("cfg/config.toml");

    let out_dir = dir.path().join("sweep");
    assert!(sim()
        .args(["sweep"])
        .arg(&cfg)
        .args(["--axis", "amplitude", "--out"])
        .arg(&out_dir)
        .status()
        .unwrap()
        .success());
    let table = fs::read_to_string(out_dir.join("sweep_amplitude.csv")).unwrap();
    assert!(table.starts_with("mismatch_value,depth_db\n"));
    assert_eq!(table.lines().count(), 7, "6 grid points + header");

    let match_dir = dir.path().join("match");
    assert!(sim()
        .args(["match"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&match_dir)
        .status()
        .unwrap()
        .success());
    let table = fs::read_to_string(match_dir.join("match.csv")).unwrap();
    let row = table.lines().nth(1).unwrap();
    let depth: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
    assert!(depth >= 40.0, "matched depth {depth} dB: {row}");
}

#[test]
fn empty_preset_yields_flat_floor() {
    let dir = tempfile::tempdir().unwrap();
    assert!(sim()
        .args(["preset", "empty", "--out"])
        .arg(dir.path())
        .status()
        .unwrap()
        .success());
    let text = fs::read_to_string(dir.path().join("spectrum_on.csv")).unwrap();
    for line in text.lines().skip(1) {
        let power: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(power, -300.0, "non-floor bin: {line}");
    }
}

#[test]
fn both_engines_emit_matching_spectra() {
    // scaled-down link so the exact chain runs in milliseconds
    let dir = tempfile::tempdir().unwrap();
    assert!(sim()
        .args(["preset", "fig4", "--out"])
        .arg(dir.path().join("seed"))
        .status()
        .unwrap()
        .success());
    let text = fs::read_to_string(dir.path().join("seed/config.toml")).unwrap();
    let text = text
        .replace("engine = \"fast\"", "engine = \"both\"")
        .replace("f_start_hz = 10500000000.0", "f_start_hz = 50000000.0")
        .replace("chirp_rate_hz_per_s = 20000000000000.0", "chirp_rate_hz_per_s = 100000000000.0")
        .replace("leakage_delay_s = 0.000000006", "leakage_delay_s = 0.0000006")
        .replace("sample_rate_hz = 64000000000.0", "sample_rate_hz = 256000000.0");
    let cfg = dir.path().join("toy.toml");
    fs::write(&cfg, text).unwrap();
    let out_dir = dir.path().join("both");
    let out = sim()
        .args(["run"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // 60 kHz leakage beat visible through both engines
    for engine in ["fast", "physical"] {
        let peaks = fs::read_to_string(out_dir.join(format!("peaks_off_{engine}.csv"))).unwrap();
        let best = peaks
            .lines()
            .skip(1)
            .map(|l| {
                let mut cells = l.split(',');
                let f: f64 = cells.next().unwrap().parse().unwrap();
                let p: f64 = cells.next().unwrap().parse().unwrap();
                (f, p)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!(
            (best.0 - 60e3).abs() <= 10e3,
            "{engine}: strongest peak at {} Hz",
            best.0
        );
    }
}

#[test]
fn env_var_provides_default_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = sim()
        .args(["preset", "empty"])
        .env("SIM_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("empty").join("manifest.toml").exists());
}

#[test]
fn seed_changes_noisy_outputs() {
    let dir = tempfile::tempdir().unwrap();
    for (sub, seed) in [("s0", "0"), ("s1", "1")] {
        assert!(sim()
            .args(["preset", "fig7", "--seed", seed, "--out"])
            .arg(dir.path().join(sub))
            .status()
            .unwrap()
            .success());
    }
    let a = fs::read(dir.path().join("s0/spectrum_on.csv")).unwrap();
    let b = fs::read(dir.path().join("s1/spectrum_on.csv")).unwrap();
    assert_ne!(a, b, "different seeds must change the noisy spectrum");
}

#[test]
fn manifest_lists_every_output_with_checksums(){
    let dir = tempfile::tempdir().unwrap();
    assert!(sim()
        .args(["preset", "fig4", "--out"])
        .arg(dir.path())
        .status()
        .unwrap()
        .success());
    let manifest = fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
    let listed: Vec<&str> = manifest
        .lines()
        .filter_map(|l| l.strip_prefix("path = \""))
        .map(|l| l.trim_end_matches('"'))
        .collect();
    let on_disk: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.toml")
        .collect();
    for name in &on_disk {
        assert!(listed.contains(&name.as_str()), "{name} not in manifest");
    }
    assert!(manifest.contains("sha256 = \""));
    assert!(manifest.contains("wall_clock_ms"));
}
