use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bincue::behavior::{parse_trial_log, quadrant_error_rate};
use bincue::cli::{cmd_behavior, cmd_report, BehaviorInput, RunConfig};
use bincue::Condition;

fn bincue(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bincue"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn stimulus_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = bincue(dir.path(), &["--seed", "3", "--out", out, "--quiet", "stimulus"]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
    let a = fs::read(dir.path().join("a/stimulus.wav")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b/stimulus.wav")).unwrap());
    let reader = hound::WavReader::open(dir.path().join("a/stimulus.wav")).unwrap();
    assert_eq!(reader.duration(), 76_800);
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("a/stimulus.json")).unwrap()).unwrap();
    assert_eq!(meta["placeholder_core"], true);
}

#[test]
fn unreadable_core_fails_with_input_status() {
    let dir = tempfile::tempdir().unwrap();
    let o = bincue(dir.path(), &["--out", "o", "stimulus", "--core", "missing.wav"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("o/stimulus.wav").exists());
}

#[test]
fn coarse_sweep_rows_and_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let o = bincue(dir.path(), &["--out", "o", "sweep", "--azimuth-step", "45"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cues = fs::read_to_string(dir.path().join("o/cues.csv")).unwrap();
    assert_eq!(cues.lines().count(), 1 + 8 * 4 * 2);
    let table = bincue::cues::CueTable::read_csv(cues.as_bytes(), "cues.csv").unwrap();
    assert!(table.mean_iacc(Condition::Anechoic).unwrap() > table.mean_iacc(Condition::Reverberant).unwrap());
    assert!(dir.path().join("o/cues_normalized.csv").exists());
    assert!(dir.path().join("o/normalization.csv").exists());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "[sweep]\nazimuth_step_deg = 90.0\ndistances_m = [1.0]\nconditions = [\"anechoic\"]\n",
    )
    .unwrap();
    let o = bincue(dir.path(), &["--config", "run.toml", "--out", "o", "sweep"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = fs::read_to_string(dir.path().join("o/cues.csv")).unwrap().lines().count() - 1;
    assert_eq!(rows, 4);
    let o = bincue(dir.path(), &["--config", "run.toml", "--out", "p", "sweep", "--azimuth-step", "180"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = fs::read_to_string(dir.path().join("p/cues.csv")).unwrap().lines().count() - 1;
    assert_eq!(rows, 2);
}

#[test]
fn unknown_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "[sweep]\nazimuth = 5.0\n").unwrap();
    let o = bincue(dir.path(), &["--config", "run.toml", "sweep"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("azimuth"), "{}", stderr(&o));
}

#[test]
fn empty_trials_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("trials.csv"),
        "trial_id,subject_id,condition,target_azimuth_deg,target_elevation_deg,target_distance_m,response_yaw_deg,response_pitch_deg\n",
    )
    .unwrap();
    let o = bincue(dir.path(), &["--out", "o", "behavior", "--trials", "trials.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no trials"), "{}", stderr(&o));
    assert!(dir.path().join("o/rejects.csv").exists());
    assert!(!dir.path().join("o/localisation.csv").exists());
}

#[test]
fn malformed_rows_go_to_the_reject_report() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("trials.csv"),
        "trial_id,subject_id,condition,target_azimuth_deg,target_elevation_deg,target_distance_m,response_yaw_deg,response_pitch_deg\n\
         a,s1,anechoic,0,0,0.8,5,0\n\
         b,s1,reverb,0,0,0.8,5,0\n\
         c,s1,anechoic,30,0,0.8,25,0\n",
    )
    .unwrap();
    let o = bincue(dir.path(), &["--out", "o", "behavior", "--trials", "trials.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rejects = fs::read_to_string(dir.path().join("o/rejects.csv")).unwrap();
    assert_eq!(rejects.lines().count(), 2);
    assert!(rejects.contains(",3,") && rejects.contains("reverberant"), "{rejects}");
    assert!(!dir.path().join("o/onsets.csv").exists());
}

#[test]
fn fixture_gives_three_distance_groups_per_condition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { out_dir: dir.path().to_path_buf(), ..RunConfig::default() };
    let out = cmd_behavior(&cfg, &BehaviorInput::Fixture).unwrap();
    assert_eq!(out.n_trials, 360);
    for c in Condition::ALL {
        let groups: Vec<f64> = out.localisation.iter().filter(|s| s.condition == c).map(|s| s.distance_m).collect();
        assert_eq!(groups, vec![0.8, 1.4, 2.0]);
    }
    // the written logs parse back to the analysed trials
    let log = parse_trial_log(&dir.path().join("trials.csv"), Some(&dir.path().join("poses.csv"))).unwrap();
    assert!(log.rejects.is_empty());
    assert_eq!(log.trials.len(), 360);
    let an: Vec<_> = log.trials.iter().filter(|t| t.condition == Condition::Anechoic).cloned().collect();
    let from_summary = out.subjects.iter().find(|s| s.condition == Condition::Anechoic).unwrap();
    assert_eq!(from_summary.quadrant_error_rate_pct, Some(quadrant_error_rate(&an).unwrap()));
}

#[test]
fn report_sections_follow_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        out_dir: dir.path().to_path_buf(),
        fixture: bincue::cli::FixtureConfig { subjects: 16, repeats: 5 },
        ..RunConfig::default()
    };
    cmd_behavior(&cfg, &BehaviorInput::Fixture).unwrap();
    let metrics = dir.path().join("subject_metrics.csv");
    let report = cmd_report(&cfg, None, Some(&metrics)).unwrap();
    assert!(!report.contains("Acoustic cues"));
    assert!(report.contains("rank-sum"));
    let coef = |term: &str| -> f64 {
        let line = report.lines().find(|l| l.trim_start().starts_with(term)).unwrap();
        line.split_whitespace().nth(1).unwrap().parse().unwrap()
    };
    assert!(coef("rom ") < 0.0, "{report}");
    assert!(coef("rom:condition") < 0.0, "{report}");
    assert_eq!(report, cmd_report(&cfg, None, Some(&metrics)).unwrap());

    let cues_dir = tempfile::tempdir().unwrap();
    let o = bincue(cues_dir.path(), &["--out", ".", "sweep", "--azimuth-step", "90"]);
    assert!(o.status.success());
    let o = bincue(cues_dir.path(), &["--out", ".", "report", "--cues", "cues.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("Acoustic cues") && !text.contains("Behaviour"));
}

#[test]
fn report_names_a_wrong_column() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.csv"), "subject_id,cond\n").unwrap();
    let cfg = RunConfig { out_dir: dir.path().to_path_buf(), ..RunConfig::default() };
    let err = cmd_report(&cfg, None, Some(&dir.path().join("m.csv"))).unwrap_err().to_string();
    assert!(err.contains("\"condition\"") && err.contains("\"cond\""), "{err}");
}
