use std::path::Path;
use std::process::{Command, Output};

use vfr_core::toybench::{synth_utterance, StyleSpec, SyntheticSpeaker};
use vfr_kit::vfrf::read_features;
use vfr_kit::wav::write_wav;

fn vfrkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vfrkit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn speech(dir: &Path, name: &str, seed: u64) -> std::path::PathBuf {
    let audio = synth_utterance(&SyntheticSpeaker::random(seed), &StyleSpec::neutral(), 1.0, seed).unwrap();
    let path = dir.join(name);
    write_wav(&path, &audio).unwrap();
    path
}

#[test]
fn version_and_help() {
    let v = vfrkit(&["--version"]);
    assert!(v.status.success());
    assert!(stdout(&v).contains("VFRF v1"));
    let h = vfrkit(&["--help"]);
    assert!(h.status.success());
    assert!(stdout(&h).contains("trials"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(vfrkit(&[]).status.code(), Some(1));
    assert_eq!(vfrkit(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(vfrkit(&["eer", "/nonexistent/scores.tsv"]).status.code(), Some(1));
}

#[test]
fn extract_and_vfr_frame_counts() {
    let dir = tempfile::tempdir().unwrap();
    let wav = speech(dir.path(), "utt.wav", 3);
    let fixed = dir.path().join("fixed.vfrf");
    let vfr = dir.path().join("vfr.vfrf");
    let entropy = dir.path().join("entropy.csv");
    let csv = dir.path().join("vfr.csv");
    assert!(vfrkit(&["extract", p(&wav), p(&fixed)]).status.success());
    let o = vfrkit(&["vfr", p(&wav), p(&vfr), "--dump-entropy", p(&entropy), "--csv", p(&csv)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let (f, v) = (read_features(&fixed).unwrap(), read_features(&vfr).unwrap());
    let (nf, nv) = (f.num_rows() as f64, v.num_rows() as f64);
    assert!(nv <= 2.0 * nf && nv >= 0.8 * nf, "{nv} vfr rows vs {nf} fixed");
    assert!(v.meta.vfr_applied && !f.meta.vfr_applied);

    let dump = std::fs::read_to_string(&entropy).unwrap();
    let mut lines = dump.lines();
    assert!(lines.next().unwrap().starts_with("# T1="));
    assert_eq!(lines.next(), Some("segment_index,start_ms,entropy_nats"));
    assert!(lines.next().unwrap().starts_with("0,0.0,"));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), v.num_rows() + 1);

    let log = dir.path().join("log.vfrf");
    assert!(vfrkit(&["vfr", p(&wav), p(&log), "--entropy-domain", "log"]).status.success());
}

#[test]
fn invalid_flags_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let wav = speech(dir.path(), "utt.wav", 1);
    let out = dir.path().join("out.vfrf");
    assert_eq!(vfrkit(&["extract", p(&wav), p(&out), "--shift-ms", "5"]).status.code(), Some(1));
    assert_eq!(vfrkit(&["vfr", p(&wav), p(&out), "--entropy-domain", "cubic"]).status.code(), Some(1));
    assert_eq!(vfrkit(&["--sample-rate", "0", "extract", p(&wav), p(&out)]).status.code(), Some(1));
    assert!(!out.exists());
    // No named output and no --output-dir.
    assert_eq!(vfrkit(&["extract", p(&wav)]).status.code(), Some(1));
    let od = dir.path().join("od");
    assert!(vfrkit(&["--output-dir", p(&od), "extract", p(&wav)]).status.success());
    assert!(od.join("utt.vfrf").exists());
}

#[test]
fn eer_hand_case_and_det() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.tsv");
    std::fs::write(
        &scores,
        "e1\tt1\ttarget\t0.900000\ne1\tt2\ttarget\t0.700000\ne1\tt3\ttarget\t0.400000\n\
         e2\tt1\tnontarget\t0.800000\ne2\tt2\tnontarget\t0.300000\ne2\tt3\tnontarget\t0.100000\n",
    )
    .unwrap();
    let det = dir.path().join("det.csv");
    let o = vfrkit(&["eer", p(&scores), "--det", p(&det)]);
    assert!(o.status.success());
    let line = stdout(&o);
    assert!(line.starts_with("EER=33.33 THRESH="), "{line}");
    assert!(std::fs::read_to_string(&det).unwrap().starts_with("threshold,far,frr\n"));
}

#[test]
fn mcnemar_ten_versus_two() {
    let dir = tempfile::tempdir().unwrap();
    // 40 targets then 40 nontargets. Scores are 1 (accept) or 0 (reject), so
    // each system's EER threshold is 0.5 when its false accepts equal its
    // false rejects.
    let a_wrong = |i: usize| (0..5).contains(&i) || (40..45).contains(&i);
    let b_wrong = |i: usize| i == 10 || i == 50;
    let write = |name: &str, wrong: &dyn Fn(usize) -> bool| {
        let mut text = String::new();
        for i in 0..80 {
            let target = i < 40;
            let accept = target != wrong(i);
            let label = if target { "target" } else { "nontarget" };
            text.push_str(&format!("e{}\tt{i}\t{label}\t{}.000000\n", i % 7, u8::from(accept)));
        }
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path
    };
    let (a, b) = (write("a.tsv", &a_wrong), write("b.tsv", &b_wrong));
    let o = vfrkit(&["mcnemar", "--scores-a", p(&a), "--scores-b", p(&b)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("b=10 c=2 p=0.038574 method=exact"), "{out}");
    assert!(out.contains("significant@0.05=true"));
    assert!(out.contains("significant@0.005=false"));
    assert!(out.contains("# b = A wrong and B right"));

    let short = dir.path().join("short.tsv");
    std::fs::write(&short, "e\tt\ttarget\t1.0\n").unwrap();
    assert_eq!(vfrkit(&["mcnemar", "--scores-a", p(&a), "--scores-b", p(&short)]).status.code(), Some(1));
}

#[test]
fn embed_score_eer_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let feats = dir.path().join("feats");
    for (name, seed) in [("spk1a", 1), ("spk1b", 1), ("spk2a", 2)] {
        let wav = speech(dir.path(), &format!("{name}.wav"), seed);
        let out = feats.join(format!("{name}.vfrf"));
        assert!(vfrkit(&["extract", p(&wav), p(&out)]).status.success());
    }
    let emb = dir.path().join("spk1a.emb");
    let o = vfrkit(&["embed", p(&feats.join("spk1a.vfrf")), "-o", p(&emb)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&emb).unwrap();
    assert_eq!(text.split_whitespace().count(), 1 + 46);

    let trials = dir.path().join("trials.tsv");
    std::fs::write(&trials, "spk1a\tspk1b\ttarget\nspk1a\tspk2a\tnontarget\n").unwrap();
    let o = vfrkit(&["score", "--trials", p(&trials), "--embeddings", p(&feats)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let scores = stdout(&o);
    let rows: Vec<Vec<&str>> = scores.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][..3], ["spk1a", "spk1b", "target"]);
    assert_eq!(rows[0][3].split('.').nth(1).unwrap().len(), 6);

    std::fs::write(&trials, "spk1a\tghost\ttarget\n").unwrap();
    assert_eq!(vfrkit(&["score", "--trials", p(&trials), "--embeddings", p(&feats)]).status.code(), Some(1));
}

#[test]
fn synth_then_augment_with_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let o = vfrkit(&[
        "--output-dir", p(&corpus), "--seed", "3", "synth", "--speakers", "3", "--styles", "read,pet-directed",
        "--per-style", "1", "--duration", "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = corpus.join("manifest.csv");
    assert_eq!(std::fs::read_to_string(&manifest).unwrap().lines().count(), 1 + 6);

    let feats = dir.path().join("feats");
    let run = |args: &[&str]| {
        let mut all = vec!["--output-dir", p(&feats), "augment", "--manifest", p(&manifest)];
        all.extend_from_slice(args);
        vfrkit(&all)
    };
    assert!(run(&["--config", "vfr-norm-aug", "--style", "read"]).status.success());
    assert_eq!(std::fs::read_to_string(feats.join("index.csv")).unwrap().lines().count(), 1 + 6);

    // Validation failures.
    assert_eq!(run(&["--config", "extrinsic", "--style", "read"]).status.code(), Some(1));
    assert_eq!(run(&["--config", "multi-style", "--style", "read"]).status.code(), Some(1));
    assert_eq!(run(&["--config", "baseline"]).status.code(), Some(1));
    assert_eq!(run(&["--config", "vfr-norm", "--style", "read", "--set", "test"]).status.code(), Some(1));
    assert!(run(&["--config", "vfr-norm", "--style", "read", "--set", "test", "--allow-vfr-on-eval"]).status.success());

    std::fs::remove_file(corpus.join("audio/spk001-pet-directed-0.wav")).unwrap();
    let o = run(&["--config", "multi-style"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("spk001-pet-directed-0"));
    assert_eq!(std::fs::read_to_string(feats.join("index.csv")).unwrap().lines().count(), 1 + 5);
}

#[test]
fn bench_reports_json() {
    let o = vfrkit(&[
        "--seed", "4", "bench", "--speakers", "10", "--seeds", "2", "--duration", "1", "--tests-per-speaker", "1",
        "--config", "vfr-norm-aug",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"], "vfr-norm-aug");
    assert_eq!(v["enroll_style"], "synthetic-1");
    assert_eq!(v["test_style"], "synthetic-1.5");
    assert_eq!(v["runs"].as_array().unwrap().len(), 2);
    assert_eq!(v["runs"][0]["seed"], 4);
    assert_eq!(v["runs"][0]["n_target"], 10);
    assert_eq!(v["runs"][0]["n_nontarget"], 90);
    assert!(v["median_eer_percent"].as_f64().unwrap() >= 0.0);
    assert_eq!(vfrkit(&["bench", "--speakers", "5"]).status.code(), Some(1));
}
