use std::path::Path;
use std::process::{Command, Output};

fn bhts(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bhts"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn inventory_prints_48_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = bhts(&["inventory"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 48);
    assert!(lines.iter().any(|l| l.starts_with("O ") && l.contains("rounded")));
    // The voiced palatal plosive is not part of the inventory.
    assert!(lines.iter().all(|l| !l.contains("palatal plosive")));
}

#[test]
fn usage_errors_exit_1_without_output_files() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["--definitely-not-a-flag"][..],
        &["frobnicate"][..],
        &["synth", "model.bin", "-o", "out.wav"][..],
        &["compare-f0"][..],
    ] {
        let out = bhts(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "args {args:?}");
    }
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    let help = bhts(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("compare-f0"));
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = bhts(&["analyze", "missing.wav", "-o", "out.feat"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    std::fs::write(dir.path().join("bad.csv"), "system,listener,score\nA,L1,9.0\n").unwrap();
    let out = bhts(&["mos", "bad.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mos_reports_published_table_means() {
    let dir = tempfile::tempdir().unwrap();
    let csv = "\
system,listener,score
Original,L1,4.9
Original,L2,4.3
Original,L3,4.7
Original,L4,4.9
Original,L5,4.5
ESNOLA,L1,2.5
ESNOLA,L2,2.1
ESNOLA,L3,2.3
ESNOLA,L4,2.6
ESNOLA,L5,2.2
HTS,L1,3.7
HTS,L2,3.2
HTS,L3,3.9
HTS,L4,3.8
HTS,L5,3.4
";
    std::fs::write(dir.path().join("scores.csv"), csv).unwrap();
    let out = bhts(&["mos", "scores.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("Original: 4.66"), "{text}");
    assert!(text.contains("ESNOLA: 2.34"), "{text}");
    assert!(text.contains("HTS: 3.60"), "{text}");
}

#[test]
fn labels_emits_one_line_per_phone_in_label_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = bhts(
        &["labels", "type=simple-affirmative-verb রাম/NNP ভাত/NN খায়/VF"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.lines().count() > 8);
    for line in text.lines() {
        assert!(line.starts_with("p1=") && line.contains("/p3="), "{line}");
    }
    assert!(text.lines().next().unwrap().contains("p3=sil"));
    assert!(text.lines().last().unwrap().contains("p3=sil"));
}

#[test]
fn corpus_analyze_compare_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = bhts(&["gen-corpus", "corpus", "--count", "2", "--seed", "7"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let wavs: Vec<_> = std::fs::read_dir(dir.path().join("corpus/wav"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(wavs.len(), 2);
    let wav = wavs[0].to_str().unwrap();

    let out = bhts(&["analyze", wav, "-o", "a.feat"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let out = bhts(
        &["compare-f0", "a.feat", "a.feat", "--csv", "f0.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("F0 RMSE: 0.00 Hz"), "{text}");
    assert!(text.contains("voicing agreement: 1.0000"), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("f0.csv")).unwrap();
    assert!(csv.starts_with("frame,f0_nat,f0_syn,voiced_nat,voiced_syn\n"));

    let out = bhts(
        &["compare-spec", "a.feat", "a.feat", "--csv", "spec.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("mean MCD: 0.0000 dB"));
    let csv = std::fs::read_to_string(dir.path().join("spec.csv")).unwrap();
    assert!(csv.starts_with("frame,mcd_db\n"));
}

#[test]
fn train_and_synth_produce_audio_and_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let out = bhts(&["gen-corpus", "corpus", "--count", "6", "--seed", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    std::fs::write(
        dir.path().join("train.cfg"),
        "monophone_iters = 2\nfullcontext_iters = 1\ntied_iters = 1\n",
    )
    .unwrap();
    let out = bhts(
        &["train", "corpus", "-o", "model.bhtsm", "--config", "train.cfg"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("model.bhtsm").exists());
    assert!(dir.path().join("stats.csv").exists());

    let utts: Vec<_> = std::fs::read_dir(dir.path().join("corpus/utt"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    let utt = utts[0].to_str().unwrap();
    let out = bhts(
        &[
            "synth",
            "model.bhtsm",
            "--utt",
            utt,
            "-o",
            "out.wav",
            "--dump-traj",
            "traj.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out.wav").metadata().unwrap().len() > 44);

    let traj = std::fs::read_to_string(dir.path().join("traj.csv")).unwrap();
    let header = traj.lines().next().unwrap();
    assert!(header.starts_with("frame,c0,"));
    assert!(header.ends_with(",f0_hz,voiced"));
    assert_eq!(header.matches(",c").count(), 25);
}
