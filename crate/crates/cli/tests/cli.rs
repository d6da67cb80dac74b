use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use ted_core::{label_set, load_volume, save_volume, variation_of_information, Format, LabelVolume};
use tempfile::TempDir;

fn ted(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ted")).args(args).current_dir(dir).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, vol: &LabelVolume) -> PathBuf {
    let p = dir.join(name);
    save_volume(vol, &p, Format::Segv1).unwrap();
    p
}

fn shifted_pair(dir: &Path, shift: &str) {
    ok(&ted(
        &["synth", "boundary-shift", "--n", "200", "--resolution", "0.005,1,1", "--shift", shift]
            .into_iter()
            .chain(["--out-gt", "gt.seg", "--out-proposal", "prop.seg"])
            .collect::<Vec<_>>(),
        dir,
    ));
}

fn report(dir: &Path, extra: &[&str]) -> Value {
    let mut args = vec!["compare", "--gt", "gt.seg", "--proposal", "prop.seg"];
    args.extend_from_slice(extra);
    serde_json::from_str(&ok(&ted(&args, dir))).unwrap()
}

#[test]
fn self_comparison_is_free() {
    let dir = TempDir::new().unwrap();
    let v = ted_core::synth::voronoi_labeling([20, 20, 1], [6.0, 6.0, 30.0], 6, 3).unwrap();
    write(dir.path(), "gt.seg", &v);
    write(dir.path(), "prop.seg", &v);
    let r = report(dir.path(), &["--threshold-nm", "100"]);
    assert_eq!(r["schema"], "ted-report/1");
    assert_eq!(r["ted_value"], 0.0);
    assert_eq!(r["solver"]["optimal"], true);
    assert_eq!(r["config"]["resolution"], serde_json::json!([6.0, 6.0, 30.0]));
}

#[test]
fn shift_above_threshold_is_one_split_one_merge() {
    let dir = TempDir::new().unwrap();
    shifted_pair(dir.path(), "0.05");
    let r = report(dir.path(), &["--threshold-nm", "0.025"]);
    assert_eq!((r["splits"].as_u64(), r["merges"].as_u64()), (Some(1), Some(1)));
    assert_eq!(r["split_pairs"][0]["partners"], serde_json::json!([1, 2]));
    let r = report(dir.path(), &["--threshold-nm", "0.05"]);
    assert_eq!(r["ted_value"], 0.0);
}

#[test]
fn outputs_relabeled_and_error_volumes() {
    let dir = TempDir::new().unwrap();
    shifted_pair(dir.path(), "0.05");
    report(dir.path(), &["--threshold-nm", "0.01", "--relabeled-out", "rel.seg", "--errors-out", "err.seg"]);
    let prop = load_volume(dir.path().join("prop.seg"), Format::Segv1).unwrap();
    let rel = load_volume(dir.path().join("rel.seg"), Format::Segv1).unwrap();
    assert_eq!(rel, prop);
    let err = load_volume(dir.path().join("err.seg"), Format::Segv1).unwrap();
    // every location sits in a region whose pair is split or merged
    assert!(err.labels().iter().all(|c| (1..=3).contains(c)));
    assert!(err.labels().contains(&3));

    report(dir.path(), &["--threshold-nm", "1", "--relabeled-out", "rel.seg", "--errors-out", "err.seg"]);
    let gt = load_volume(dir.path().join("gt.seg"), Format::Segv1).unwrap();
    assert_eq!(load_volume(dir.path().join("rel.seg"), Format::Segv1).unwrap(), gt);
    let err = load_volume(dir.path().join("err.seg"), Format::Segv1).unwrap();
    assert!(err.labels().iter().all(|&c| c == 0));
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = ted(&["compare", "--gt", "missing.seg", "--proposal", "missing.seg", "--threshold-nm", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.seg"));

    write(dir.path(), "gt.seg", &LabelVolume::from_1d(vec![1, 2]).unwrap());
    write(dir.path(), "prop.seg", &LabelVolume::from_1d(vec![1, 2, 3]).unwrap());
    let out = ted(&["compare", "--gt", "gt.seg", "--proposal", "prop.seg", "--threshold-nm", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    write(dir.path(), "prop.seg", &LabelVolume::from_1d(vec![1, 2]).unwrap());
    let out = ted(&["compare", "--gt", "gt.seg", "--proposal", "prop.seg", "--threshold-nm", "-1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = ted(
        &["compare", "--gt", "gt.seg", "--proposal", "prop.seg", "--threshold-nm", "1", "--format", "png"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let out = ted(&["sweep", "--gt", "gt.seg", "--proposal", "prop.seg", "--sweep", "1,-2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn text_grid_inputs() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("gt.txt"), "1 1 2 2\n1 1 2 2\n").unwrap();
    std::fs::write(dir.path().join("prop.txt"), "1 1 1 2\n1 1 1 2\n").unwrap();
    let base = ["compare", "--gt", "gt.txt", "--proposal", "prop.txt", "--format", "text"];
    let strict: Value =
        serde_json::from_str(&ok(&ted(&[&base[..], &["--threshold-nm", "0"]].concat(), dir.path()))).unwrap();
    assert_eq!((strict["splits"].as_u64(), strict["merges"].as_u64()), (Some(1), Some(1)));
    let loose: Value = serde_json::from_str(&ok(&ted(
        &[&base[..], &["--threshold-nm", "5", "--resolution", "4,4,1"]].concat(),
        dir.path(),
    )))
    .unwrap();
    assert_eq!(loose["ted_value"], 0.0);
    assert_eq!(loose["config"]["resolution"], serde_json::json!([4.0, 4.0, 1.0]));
}

#[test]
fn solver_limit_exits_3_with_report() {
    let dir = TempDir::new().unwrap();
    ok(&ted(
        &["synth", "shift", "--shift", "3", "--seed", "1", "--objects", "12", "--dims", "24,24"]
            .into_iter()
            .chain(["--out-gt", "gt.seg", "--out-proposal", "prop.seg"])
            .collect::<Vec<_>>(),
        dir.path(),
    ));
    let args = ["compare", "--gt", "gt.seg", "--proposal", "prop.seg", "--threshold-nm", "1.5", "--max-nodes", "1"];
    let out = ted(&[&args[..], &["--report", "r.json"]].concat(), dir.path());
    assert_eq!(out.status.code(), Some(3));
    let r: Value = serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["solver"]["optimal"], false);
    assert!(r["solver"]["gap"].as_f64().unwrap() >= 0.0);
}

fn without_timing(bytes: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(bytes).unwrap();
    v.as_object_mut().unwrap().remove("timing").expect("timing field");
    v
}

#[test]
fn report_is_reproducible() {
    let dir = TempDir::new().unwrap();
    ok(&ted(
        &["synth", "splits", "--count", "4", "--seed", "2", "--objects", "6", "--dims", "32,32"]
            .into_iter()
            .chain(["--out-gt", "gt.seg", "--out-proposal", "prop.seg"])
            .collect::<Vec<_>>(),
        dir.path(),
    ));
    let run = || ted(&["compare", "--gt", "gt.seg", "--proposal", "prop.seg", "--threshold-nm", "3"], dir.path());
    let (a, b) = (run(), run());
    ok(&a);
    ok(&b);
    assert_eq!(without_timing(&a.stdout), without_timing(&b.stdout));
    // textual identity outside the timing block
    let strip = |o: &Output| {
        let s = String::from_utf8(o.stdout.clone()).unwrap();
        s[..s.find("\"timing\"").unwrap()].to_string()
    };
    assert_eq!(strip(&a), strip(&b));
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn sweep_rows_sorted_and_monotone() {
    let dir = TempDir::new().unwrap();
    ok(&ted(
        &["synth", "shift", "--shift", "12", "--seed", "5", "--objects", "8", "--dims", "40,40"]
            .into_iter()
            .chain(["--resolution", "6,6,30", "--out-gt", "gt.seg", "--out-proposal", "prop.seg"])
            .collect::<Vec<_>>(),
        dir.path(),
    ));
    ok(&ted(
        &["sweep", "--gt", "gt.seg", "--proposal", "prop.seg", "--sweep", "12,0,6,50,3", "--csv", "s.csv"],
        dir.path(),
    ));
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(csv.starts_with("threshold_nm,splits,merges,ted_value,voi_relabeled,ri_relabeled,status\n"));
    let rows = rows(&csv);
    let thresholds: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(thresholds, vec![0.0, 3.0, 6.0, 12.0, 50.0]);
    let values: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] >= w[1]), "{values:?}");
    assert!(rows.iter().all(|r| r[6] == "optimal"));

    // zero tolerance reproduces the raw counts
    let gt = load_volume(dir.path().join("gt.seg"), Format::Segv1).unwrap();
    let prop = load_volume(dir.path().join("prop.seg"), Format::Segv1).unwrap();
    let (s, m) = ted_core::raw_split_merge_counts(&gt, &prop).unwrap();
    assert_eq!((rows[0][1].parse::<u64>().unwrap(), rows[0][2].parse::<u64>().unwrap()), (s, m));

    // all shifts are below 50 nm: free at 50 nm although the proposal differs
    assert_eq!(values[4], 0.0);
    assert_eq!(rows[4][4], "0");
    assert!(variation_of_information(&gt, &prop).unwrap().total > 0.0);
}

#[test]
fn synth_boundary_shift_zero_gives_identical_files() {
    let dir = TempDir::new().unwrap();
    shifted_pair(dir.path(), "0");
    let a = std::fs::read(dir.path().join("gt.seg")).unwrap();
    let b = std::fs::read(dir.path().join("prop.seg")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn synth_is_deterministic_and_echoes_seed() {
    let dir = TempDir::new().unwrap();
    let run = |tag: &str| {
        let (g, p) = (format!("g{tag}.seg"), format!("p{tag}.seg"));
        let out = ok(&ted(
            &["synth", "splits", "--count", "10", "--seed", "7", "--out-gt", &g, "--out-proposal", &p],
            dir.path(),
        ));
        assert!(out.contains("seed 7"));
        (std::fs::read(dir.path().join(g)).unwrap(), std::fs::read(dir.path().join(p)).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn synth_merge_of_two_labels_leaves_one() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "base.seg", &LabelVolume::from_1d(vec![1, 1, 1, 2, 2, 2]).unwrap());
    ok(&ted(
        &["synth", "merges", "--count", "1", "--base", "base.seg", "--out-gt", "g.seg", "--out-proposal", "p.seg"],
        dir.path(),
    ));
    let p = load_volume(dir.path().join("p.seg"), Format::Segv1).unwrap();
    assert_eq!(label_set(&p).len(), 1);
    let out = ted(
        &["synth", "merges", "--count", "2", "--base", "base.seg", "--out-gt", "g.seg", "--out-proposal", "p.seg"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}
