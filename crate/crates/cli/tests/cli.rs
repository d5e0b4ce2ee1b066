use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spinchaos(analysis: &str, config: &str, dir: &Path, out: &str) -> Output {
    let cfg = dir.join(format!("{out}.json"));
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_spinchaos"))
        .arg(analysis)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join(out))
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path, out: &str) -> Value {
    let text = fs::read_to_string(dir.join(out).join("summary.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn lsi_on_chain_13() {
    let tmp = tempfile::tempdir().unwrap();
    let o = spinchaos("lsi", r#"{"model":"chain","N":13}"#, tmp.path(), "lsi");
    assert!(o.status.success(), "{}", stderr(&o));
    let s = summary(tmp.path(), "lsi");
    let eta = s["lsi"].as_f64().unwrap();
    assert!((eta - 0.52).abs() <= 0.10, "lsi {eta}");
    assert_eq!(s["dimension"], 868);
    assert_eq!(s["parity"], "symmetric");
    assert_eq!(s["sz"], 1);

    let spectrum = fs::read_to_string(tmp.path().join("lsi/spectrum.csv")).unwrap();
    assert_eq!(spectrum.lines().next(), Some("index,E,E_tilde,Omega"));
    assert_eq!(spectrum.lines().count(), 869);
}

#[test]
fn goe_reference_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"dim":1000,"seed":1}"#;
    for out in ["a", "b"] {
        let o = spinchaos("goe_reference", cfg, tmp.path(), out);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let mut names: Vec<_> = fs::read_dir(tmp.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    names.sort();
    assert!(names.contains(&"spectrum.csv".to_string()));
    for n in &names {
        let a = fs::read(tmp.path().join("a").join(n)).unwrap();
        let b = fs::read(tmp.path().join("b").join(n)).unwrap();
        assert!(a == b, "{n} differs between runs");
    }

    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("a/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["analysis"], "goe_reference");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    let listed = manifest["files"].as_array().unwrap();
    assert_eq!(listed.len(), names.len());
}

#[test]
fn seed_flag_changes_goe_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, r#"{"dim":400}"#).unwrap();
    for (out, seed) in [("s1", "1"), ("s2", "2")] {
        let o = Command::new(env!("CARGO_BIN_EXE_spinchaos"))
            .args(["goe_reference", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(tmp.path().join(out))
            .args(["--seed", seed])
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = fs::read(tmp.path().join("s1/spectrum.csv")).unwrap();
    let b = fs::read(tmp.path().join("s2/spectrum.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn site_out_of_range_is_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = spinchaos(
        "observables",
        r#"{"model":"chain","N":15,"sites":[4,16]}"#,
        tmp.path(),
        "x",
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("site 16 out of range"), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = spinchaos("lsi", r#"{"model":"chain","N":9,"bandwith":1}"#, tmp.path(), "x");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bandwith"), "{}", stderr(&o));
}

#[test]
fn missing_config_file_is_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_spinchaos"))
        .args(["lsi", "--config"])
        .arg(tmp.path().join("absent.json"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_normalized_psi0_is_contract_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = spinchaos(
        "evolve",
        r#"{"model":"chain","N":4,"initial_state":[1,1,0,0]}"#,
        tmp.path(),
        "x",
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("dynamics"), "{}", stderr(&o));
}

#[test]
fn memory_cap_refuses_large_sector() {
    let tmp = tempfile::tempdir().unwrap();
    let o = spinchaos(
        "spectrum",
        r#"{"model":"chain","N":15,"max_memory_gib":0.01}"#,
        tmp.path(),
        "x",
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("resource cap"), "{}", stderr(&o));
}

#[test]
fn default_cap_refuses_n19_full_block() {
    let tmp = tempfile::tempdir().unwrap();
    let o = spinchaos(
        "evolve",
        r#"{"model":"chain","N":19,"initial_state":"0000000000111111111"}"#,
        tmp.path(),
        "x",
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn evolve_two_site_exchange() {
    // N=2, sz=0, start |01>: <sigma_z_1>(t) = cos(2 J t) with J = 2|c_12| = 1
    let tmp = tempfile::tempdir().unwrap();
    let o = spinchaos(
        "evolve",
        r#"{"model":"chain","N":2,"sz":0,"initial_state":"01","sites":[1],"end_time":3,"steps":31}"#,
        tmp.path(),
        "ev",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(tmp.path().join("ev/evolve_sigma_z_1.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["t", "value"]);
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let t: f64 = rec[0].parse().unwrap();
        let v: f64 = rec[1].parse().unwrap();
        assert!((v - (2.0 * t).cos()).abs() < 1e-10, "t={t} v={v}");
        rows += 1;
    }
    assert_eq!(rows, 31);
}

#[test]
fn observables_emit_named_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let o = spinchaos(
        "observables",
        r#"{"model":"chain","N":11,"sites":[3],"pairs":[[4,5]]}"#,
        tmp.path(),
        "obs",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["observable_sigma_z_3.csv", "observable_H_4_5.csv"] {
        let text = fs::read_to_string(tmp.path().join("obs").join(name)).unwrap();
        assert_eq!(
            text.lines().next(),
            Some("alpha,E,value,trend,residual,rescaled,sampled_flag"),
            "{name}"
        );
    }
}
