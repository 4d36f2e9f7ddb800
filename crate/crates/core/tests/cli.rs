use std::process::{Command, Output};

fn flagf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flagf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_exit_codes() {
    let ok = flagf(&["verify", "--n", "5", "--k", "4"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let six = flagf(&["verify", "--n", "5", "--k", "6"]);
    assert_eq!(six.status.code(), Some(0));
    assert!(stdout(&six).contains("4 f-structures up to sign"));
    let bad = flagf(&["verify", "--n", "4", "--k", "3"]);
    assert_eq!(bad.status.code(), Some(2));
    let bad_grid = flagf(&["verify", "--n", "5", "--k", "4", "--grid-step", "0"]);
    assert_eq!(bad_grid.status.code(), Some(2));
}

#[test]
fn classify_reports_memberships() {
    let kill = flagf(&["classify", "--n", "5", "--k", "4", "--f", "f0", "--s", "1", "--t", "4/3"]);
    assert!(stdout(&kill).contains("KILL: member"), "{}", stdout(&kill));
    let f4 = flagf(&["classify", "--n", "6", "--k", "6", "--f", "f4", "--s", "1", "--t", "1"]);
    let text = stdout(&f4);
    assert!(text.contains("G1: member") && text.contains("NK: non-member"), "{text}");
    let unknown = flagf(&["classify", "--n", "5", "--k", "6", "--f", "f9", "--s", "1", "--t", "1"]);
    assert_ne!(unknown.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("unknown structure"));
}

#[test]
fn classify_json_round_trips() {
    let out = flagf(&["classify", "--n", "5", "--k", "6", "--f", "f2", "--s", "2", "--t", "0.5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["structure_id"], "f2");
    assert_eq!(v["nk"]["member"], true);
    assert_eq!(v["kill"]["member"], false);
}

#[test]
fn sweep_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = flagf(&["sweep", "--n", "5", "--k", "6", "--format", "json", "--out", d.to_str().unwrap(), "--seed", "7"]);
        assert_eq!(o.status.code(), Some(0));
    }
    for id in ["f1", "f2", "f3", "f4"] {
        let name = format!("sweep_n5_k6_{id}.json");
        let x = std::fs::read(a.join(&name)).unwrap();
        let y = std::fs::read(b.join(&name)).unwrap();
        assert_eq!(x, y, "{name}");
        let v: serde_json::Value = serde_json::from_slice(&x).unwrap();
        for key in ["config", "space", "structures", "sweep", "summary"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["sweep"].as_array().unwrap().len(), 145);
    }
    let f2 = std::fs::read_to_string(a.join("sweep_n5_k6_f2.json")).unwrap();
    assert!(f2.contains("\"text\": \"KILL: empty; NK: all; G1: all\""));
}

#[test]
fn sweep_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let o = flagf(&["sweep", "--n", "5", "--k", "4", "--format", "csv", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("sweep_n5_k4_f0.csv")).unwrap();
    assert!(csv.contains("# summary: KILL: {(1.000, 1.333)}; NK: line s=1; G1: all"));
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "s,t,kill_residual,nk_residual,g1_residual,kill,nk,g1");
    assert_eq!(rows.len(), 146);
}
