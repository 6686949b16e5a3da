use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_campaignminer"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &str = r#"{
  "synth": {
    "days": 4,
    "n_organic": 200,
    "bots_per_farm": 8,
    "bot_volume": 110.0,
    "organic_retweet_prob": 0.004
  }
}"#;

/// Writes a small synthetic campaign into `dir` and returns the tweet file.
fn small_campaign(dir: &Path, seed: u64) -> PathBuf {
    let cfg = dir.join("small.json");
    fs::write(&cfg, SMALL).unwrap();
    let out = dir.join("campaign");
    let o = run(&["synth", "--config", path(&cfg), "--seed", &seed.to_string(), "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("tweets.ndjson")
}

fn csv_rows(p: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(p).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect()
}

#[test]
fn synth_writes_corpus_truth_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let tweets = small_campaign(dir.path(), 3);
    let out = tweets.parent().unwrap();
    assert!(fs::metadata(&tweets).unwrap().len() > 0);
    let truth: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("ground_truth.json")).unwrap()).unwrap();
    assert_eq!(truth["influencer_ids"].as_array().unwrap().len(), 8);
    let echoed: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(echoed["synth"]["seed"], 3);
    assert_eq!(echoed["synth"]["n_organic"], 200);
    assert_eq!(echoed["beta"], 0.85);
}

#[test]
fn synth_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ta = small_campaign(a.path(), 11);
    let tb = small_campaign(b.path(), 11);
    assert_eq!(fs::read(ta).unwrap(), fs::read(tb).unwrap());
}

#[test]
fn invalid_synth_config_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"synth": {"n_influencers": 2, "n_bot_amplified_influencers": 3}}"#).unwrap();
    let o = run(&["synth", "--config", path(&cfg), "--out", path(&dir.path().join("o"))]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid synth config"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.json");
    fs::write(&cfg, r#"{"betta": 0.5}"#).unwrap();
    let o = run(&["ingest", "--config", path(&cfg), "--out", path(&dir.path().join("o"))]);
    assert!(!o.status.success());
}

#[test]
fn empty_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.ndjson");
    fs::write(&empty, "").unwrap();
    for cmd in ["topics", "influence", "report"] {
        let o = run(&[cmd, "--input", path(&empty), "--out", path(&dir.path().join("o"))]);
        assert!(!o.status.success());
        assert!(String::from_utf8_lossy(&o.stderr).contains("empty corpus"), "{cmd}");
    }
}

#[test]
fn ingest_reports_stats() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("t.ndjson");
    fs::write(
        &input,
        concat!(
            r#"{"id":"1","user_id":"a","screen_name":"a","created_at":1502236800,"hashtags":["X"]}"#,
            "\n",
            "garbage\n",
            r#"{"id":"2","user_id":"a","screen_name":"a","created_at":1502236900,"hashtags":[],"retweet_of_user_id":"a"}"#,
            "\n"
        ),
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = run(&["ingest", "--input", path(&input), "--out", path(&out)]);
    assert!(o.status.success());
    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("ingest_stats.json")).unwrap()).unwrap();
    assert_eq!(stats["accepted"], 1);
    assert_eq!(stats["malformed"], 1);
    assert_eq!(stats["self_retweets"], 1);
}

#[test]
fn topics_match_planted_count_without_noise() {
    let dir = tempfile::tempdir().unwrap();
    let tweets = small_campaign(dir.path(), 5);
    let out = dir.path().join("topics");
    let o = run(&["topics", "--input", path(&tweets), "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&out.join("topics.csv")).len(), 5);
    let svg = fs::read_to_string(out.join("strategic_diagram.svg")).unwrap();
    assert!(svg.starts_with("<svg") && !svg.contains("href"));
}

#[test]
fn influence_modes_are_labelled() {
    let dir = tempfile::tempdir().unwrap();
    let tweets = small_campaign(dir.path(), 6);
    for mode in ["stochastic", "paper-verbatim"] {
        let out = dir.path().join(mode);
        let o = run(&["influence", "--input", path(&tweets), "--out", path(&out), "--mode", mode]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let rows = csv_rows(&out.join("influence.csv"));
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r[5] == mode));
        assert_eq!(rows[0][0], "1");
        let npr = csv_rows(&out.join("npr_daily.csv"));
        assert!(npr.iter().all(|r| r[3] == mode));
    }
}

#[test]
fn influence_without_retweets_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("t.ndjson");
    fs::write(&input, r#"{"id":"1","user_id":"a","screen_name":"a","created_at":1502236800,"hashtags":["x","y"]}"#).unwrap();
    let out = dir.path().join("o");
    let o = run(&["influence", "--input", path(&input), "--out", path(&out), "--verbose"]);
    assert!(o.status.success());
    assert!(csv_rows(&out.join("influence.csv")).is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no retweets"));
}

#[test]
fn botscan_with_explicit_influencers() {
    let dir = tempfile::tempdir().unwrap();
    let tweets = small_campaign(dir.path(), 7);
    let truth: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tweets.parent().unwrap().join("ground_truth.json")).unwrap()).unwrap();
    let mut list: Vec<String> =
        truth["influencer_ids"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_owned()).collect();
    list.push("nobody".into());
    let out = dir.path().join("scan");
    let o = run(&["botscan", "--input", path(&tweets), "--out", path(&out), "--influencers", &list.join(",")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nobody"));

    let ur = csv_rows(&out.join("ur.csv"));
    assert_eq!(ur.len(), 8);
    let amplified: Vec<&str> = truth["bot_amplified_ids"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    let lowest: Vec<&str> = ur.iter().take(3).map(|r| r[0].as_str()).collect();
    for a in &amplified {
        assert!(lowest.contains(a), "{a} not among the lowest UR");
    }

    let jac = csv_rows(&out.join("jaccard.csv"));
    assert_eq!(jac.len(), 9);
    for i in 0..8 {
        assert_eq!(jac[i][i + 1], "1");
        for j in 0..8 {
            assert_eq!(jac[i][j + 1], jac[j][i + 1]);
        }
    }
    assert_eq!(jac[8][0], "RJ");
    for u in &list[..8] {
        assert!(out.join(format!("scatter_{u}.svg")).exists());
    }
    assert!(!out.join("scatter_nobody.svg").exists());
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "config.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn report_runs_every_stage_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let tweets = small_campaign(dir.path(), 8);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = run(&["report", "--input", path(&tweets), "--out", path(out), "-j", "2"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let names: Vec<String> = snapshot(&a).into_iter().map(|(n, _)| n).collect();
    for f in [
        "ingest_stats.json",
        "topics.csv",
        "strategic_diagram.svg",
        "interests.csv",
        "entropy_volume.svg",
        "influence.csv",
        "npr_daily.csv",
        "ur.csv",
        "botsig.csv",
        "jaccard.csv",
        "te_summary.csv",
    ] {
        assert!(names.iter().any(|n| n == f), "missing {f}");
    }
    assert_eq!(snapshot(&a), snapshot(&b));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"seed": 1, "mode": "paper-verbatim", "top_k": 7}"#).unwrap();
    let tweets = small_campaign(dir.path(), 9);
    let out = dir.path().join("o");
    let o = run(&["influence", "--config", path(&cfg), "--input", path(&tweets), "--out", path(&out), "--seed", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let echoed: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(echoed["seed"], 4);
    assert_eq!(echoed["mode"], "paper-verbatim");
    assert_eq!(echoed["top_k"], 7);
}

#[test]
fn period_flag_slices_input() {
    let dir = tempfile::tempdir().unwrap();
    let tweets = small_campaign(dir.path(), 10);
    let out = dir.path().join("o");
    let o = run(&["ingest", "--input", path(&tweets), "--out", path(&out), "--period", "2017-08-25..2017-08-26"]);
    assert!(o.status.success());
    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("ingest_stats.json")).unwrap()).unwrap();
    assert!(stats["accepted"].as_u64().unwrap() > 0);
    assert!(stats["out_of_period"].as_u64().unwrap() > 0);
    let bad = run(&["ingest", "--input", path(&tweets), "--out", path(&out), "--period", "2017-08-26..2017-08-25"]);
    assert!(!bad.status.success());
}
