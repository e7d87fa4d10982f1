use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("xyconv-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn xyconv(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xyconv"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("XYCONV_WORKERS", "1")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn scan_writes_one_row_per_field() {
    let dir = scratch("scan");
    let o = xyconv(
        &[
            "scan", "--L", "6", "--gamma", "1.0", "--h-min", "0", "--h-max", "1.5", "--h-step",
            "0.01",
        ],
        &dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let grid = std::fs::read_to_string(dir.join("grid.csv")).unwrap();
    let lines: Vec<&str> = grid.lines().collect();
    assert!(lines[0].starts_with("# run_id="));
    assert_eq!(
        lines[1],
        "gamma,h,locc,elocc,degenerate,gap,S1,lambda1,lambda2,lambda3,lambda4"
    );
    assert_eq!(lines.len() - 2, 151);
    assert!(lines[2..].iter().all(|l| l.split(',').count() == 11));
    let manifest = xyconv_cli::read_manifest(&dir.join("manifest.json")).unwrap();
    assert_eq!(lines[0], format!("# run_id={}", manifest.run_id));
    assert_eq!(manifest.cells, 151);
}

#[test]
fn invalid_chain_length_exits_with_validation_code() {
    let dir = scratch("invalid");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "L = 1\ngamma = 1.0\n").unwrap();
    let o = xyconv(&["scan", "--config", cfg.to_str().unwrap()], &dir);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("2 <= L"), "{}", stderr(&o));
}

#[test]
fn flags_override_config_file() {
    let dir = scratch("override");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "L = 1\ngamma = 1.0\nh_max = 0.1\nh_step = 0.05\n").unwrap();
    let o = xyconv(
        &["scan", "--config", cfg.to_str().unwrap(), "--L", "4"],
        &dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = xyconv_cli::read_manifest(&dir.join("manifest.json")).unwrap();
    assert_eq!(manifest.config.chain_len, 4);
    assert_eq!(manifest.cells, 3);
}

#[test]
fn renyi_curves_tag_the_limits() {
    let dir = scratch("renyi");
    let o = xyconv(
        &[
            "renyi",
            "--L",
            "8",
            "--gamma",
            "sqrt(3)/2",
            "--h",
            "0.5",
            "--policy",
            "min_entanglement",
        ],
        &dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.join("renyi_000.csv")).unwrap();
    let rows: Vec<(&str, f64)> = text
        .lines()
        .skip(2)
        .map(|l| {
            let (a, s) = l.split_once(',').unwrap();
            (a, s.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 63);
    assert_eq!(rows[0].0, "0+");
    assert_eq!(rows[62].0, "inf");
    assert!(rows.iter().any(|r| r.0 == "1"));
    // Product state: every entropy vanishes.
    assert!(rows.iter().all(|r| r.1.abs() < 1e-6), "{rows:?}");
}

fn curve(dir: &Path, file: &str) -> Vec<f64> {
    std::fs::read_to_string(dir.join(file))
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split_once(',').unwrap().1.parse().unwrap())
        .collect()
}

#[test]
fn ising_curves_cross_below_the_critical_field_only() {
    let dir = scratch("cross");
    let o = xyconv(
        &[
            "renyi",
            "--L",
            "15",
            "--gamma",
            "1",
            "--h",
            "0.90,0.92,1.3,1.32",
        ],
        &dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let c: Vec<Vec<f64>> = (0..4)
        .map(|k| curve(&dir, &format!("renyi_{k:03}.csv")))
        .collect();
    let signs = |a: &[f64], b: &[f64]| {
        let d: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(x, y)| x - y)
            .filter(|d| d.abs() > 1e-10)
            .collect();
        (d.iter().any(|x| *x > 0.0), d.iter().any(|x| *x < 0.0))
    };
    assert_eq!(signs(&c[0], &c[1]), (true, true));
    let (pos, neg) = signs(&c[2], &c[3]);
    assert!(pos != neg);
}

#[test]
fn majorization_pairs_are_written() {
    let dir = scratch("major");
    let o = xyconv(
        &[
            "majorization",
            "--L",
            "8",
            "--gamma",
            "1",
            "--h",
            "0.5,1.3",
            "--delta",
            "0.001",
        ],
        &dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("majorization.json")).unwrap())
            .unwrap();
    let pairs = v["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 2);
    let sums = pairs[0]["partial_sums_h"].as_array().unwrap();
    assert_eq!(sums.len(), 4);
    assert!((sums[3].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn missing_field_values_is_a_validation_error() {
    let dir = scratch("noh");
    let o = xyconv(&["renyi", "--L", "6"], &dir);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scaling_needs_four_lengths() {
    let dir = scratch("short");
    let o = xyconv(&["scaling", "--gamma", "1", "--lengths", "6,7,8"], &dir);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("at least 4"), "{}", stderr(&o));
}

#[test]
fn first_order_scaling_is_flat() {
    let dir = scratch("flat");
    let o = xyconv(
        &[
            "scaling",
            "--gamma",
            "sqrt(3)/2",
            "--lengths",
            "6,7,8,9",
            "--kind",
            "first",
            "--h-min",
            "0.3",
            "--h-max",
            "1.2",
        ],
        &dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("scaling.json")).unwrap()).unwrap();
    for s in v["samples"].as_array().unwrap() {
        let h = s["h_c"].as_f64().unwrap();
        assert!((h - 0.5).abs() <= 0.005, "{s}");
    }
    let h_inf = v["fit"]["h_infinity"].as_f64().unwrap();
    assert!((h_inf - 0.5).abs() <= 0.005, "{h_inf}");
}

#[test]
fn manifest_from_other_command_is_rejected() {
    let dir = scratch("wrongcmd");
    let o = xyconv(
        &["scan", "--L", "4", "--h-max", "0.1", "--h-step", "0.05"],
        &dir,
    );
    assert!(o.status.success());
    let m = dir.join("manifest.json");
    let o = xyconv(&["renyi", "--from-manifest", m.to_str().unwrap()], &dir);
    assert_eq!(o.status.code(), Some(2));
}
