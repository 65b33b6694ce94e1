use std::path::Path;
use std::process::{Command, Output};

use refsig::analysis::SourceKind;
use refsig::io::{read_time_error_csv, write_frame, StreamFrame};

fn refsig(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_refsig"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = refsig(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn sine_chain_recovers_constant_offset() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth",
            "sine",
            "--duration",
            "0.01",
            "--snr",
            "60",
            "--seed",
            "1",
            "--phase-error",
            "const:0.3",
            "--bits",
            "14",
            "--out",
            "a.rsg",
        ],
    );
    ok(
        d,
        &[
            "synth",
            "sine",
            "--duration",
            "0.01",
            "--snr",
            "60",
            "--seed",
            "2",
            "--bits",
            "14",
            "--out",
            "b.rsg",
        ],
    );
    ok(d, &["ddc", "--in", "a.rsg", "--out", "a.csv"]);
    ok(
        d,
        &[
            "ddc",
            "--in",
            "b.rsg",
            "--stages",
            "10,10,10",
            "--atten-db",
            "120",
            "--out",
            "b.csv",
        ],
    );
    ok(
        d,
        &[
            "analyze",
            "sine",
            "--in-a",
            "a.csv",
            "--in-b",
            "b.csv",
            "--out-prefix",
            "run",
        ],
    );
    let series = read_time_error_csv(std::fs::File::open(d.join("run_dt.csv")).unwrap(), SourceKind::Sine).unwrap();
    let mean = series.values_s.iter().sum::<f64>() / series.len() as f64;
    let truth = 0.3 / (std::f64::consts::TAU * 10e6);
    assert!((mean - truth).abs() < 1e-12, "{mean} vs {truth}");
    assert!(d.join("run_summary.csv").exists());

    let adev = ok(d, &["adev", "--in", "run_dt.csv", "--taus", "4e-5,8e-5"]);
    assert!(adev.starts_with("tau_s,adev,n_terms\n"));
    assert_eq!(adev.lines().count(), 3);
    let drift = ok(d, &["drift", "--in", "run_dt.csv"]);
    assert!(drift.starts_with("slope,intercept_s,residual_rms_s\n"));
    let sg = ok(
        d,
        &[
            "savgol",
            "--window",
            "11",
            "--order",
            "2",
            "--deriv",
            "1",
            "--in",
            "run_dt.csv",
        ],
    );
    assert_eq!(sg.lines().count(), series.len() - 10 + 1);
}

#[test]
fn pulse_chain_pairs_edges() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("te.txt"), "# per-pulse errors\n0\n80e-9\n0\n-40e-9\n0\n").unwrap();
    let common = [
        "--duration",
        "20e-6",
        "--period",
        "4e-6",
        "--thigh",
        "2e-6",
        "--omega0",
        "31415926.5",
        "--zeta",
        "0.6",
    ];
    let mut a = vec!["synth", "pulse"];
    a.extend(common);
    a.extend(["--te-file", "te.txt", "--out", "a.rsg"]);
    ok(d, &a);
    let mut b = vec!["synth", "pulse"];
    b.extend(common);
    b.extend(["--out", "b.rsg"]);
    ok(d, &b);
    ok(
        d,
        &[
            "edges", "--in", "a.rsg", "--low", "0.3", "--high", "0.7", "--interp", "20", "--window", "8", "--out",
            "ea.csv",
        ],
    );
    ok(
        d,
        &[
            "edges", "--in", "b.rsg", "--low", "0.3", "--high", "0.7", "--out", "eb.csv",
        ],
    );
    ok(
        d,
        &[
            "analyze",
            "pulse",
            "--in-a",
            "ea.csv",
            "--in-b",
            "eb.csv",
            "--max-offset",
            "1e-7",
            "--out-prefix",
            "p",
        ],
    );
    let s = read_time_error_csv(std::fs::File::open(d.join("p_dt.csv")).unwrap(), SourceKind::Pulse).unwrap();
    // The first edge sits at the record start and is dropped; pulses 1..4 remain.
    assert_eq!(s.len(), 4);
    // Whole-sample shifts leave the sub-sample phase, and so the
    // interpolation error, identical in both channels.
    let want = [80e-9, 0.0, -40e-9, 0.0];
    for (got, want) in s.values_s.iter().zip(want) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn dmtd_and_compare_produce_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth",
            "sine",
            "--duration",
            "0.002",
            "--phase-error",
            "const:0.3",
            "--out",
            "a.rsg",
        ],
    );
    ok(d, &["synth", "sine", "--duration", "0.002", "--out", "b.rsg"]);
    let out = ok(
        d,
        &[
            "dmtd", "--ft", "9.99e6", "--ftic", "250e6", "--in-a", "a.rsg", "--in-b", "b.rsg",
        ],
    );
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("t_s,dt_s"));
    let first: f64 = lines.next().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((first - 4.7746e-9).abs() < 0.05e-9, "{first}");

    let cmp = ok(d, &["compare", "cic-fir", "--decims", "20"]);
    assert!(cmp.starts_with("decimation,snr_fir_db,snr_cic_db,delta_db\n20,"));
}

#[test]
fn ingest_repairs_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut bytes = Vec::new();
    for seq in [0u64, 1, 4, 5] {
        write_frame(&StreamFrame::new(seq, 2, vec![7; 40]).unwrap(), &mut bytes).unwrap();
    }
    std::fs::write(d.join("cap.bin"), bytes).unwrap();
    let out = refsig(
        d,
        &[
            "ingest",
            "--channels",
            "2",
            "--fs",
            "1e6",
            "--in",
            "cap.bin",
            "--out",
            "s.rsg",
        ],
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("2 frame(s) from sequence 2"));
    let s = refsig::io::read_sample_file(d.join("s.rsg")).unwrap();
    // Six frames of 20 samples per channel; frames 2 and 3 are padding.
    assert_eq!(s.len(), 120);
    let ch = s.channel(1).unwrap();
    assert!(ch[40..80].iter().all(|v| *v == 0.0));
    assert!(ch[..40].iter().chain(&ch[80..]).all(|v| *v == 7.0));
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(refsig(d, &["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        refsig(
            d,
            &[
                "synth",
                "sine",
                "--duration",
                "1e-4",
                "--phase-error",
                "bogus",
                "--out",
                "x.rsg"
            ]
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(refsig(d, &["ddc", "--in", "missing.rsg"]).status.code(), Some(2));
    std::fs::write(d.join("junk.rsg"), b"NOPE and some more bytes to fill a header....").unwrap();
    let junk = refsig(d, &["ddc", "--in", "junk.rsg"]);
    assert_eq!(junk.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&junk.stderr).contains("byte 0"));
    ok(d, &["synth", "sine", "--duration", "1e-3", "--out", "s.rsg"]);
    assert_eq!(
        refsig(d, &["ddc", "--in", "s.rsg", "--fr", "20e6"]).status.code(),
        Some(3)
    );
    assert!(refsig(d, &["--help"]).status.success());
}
