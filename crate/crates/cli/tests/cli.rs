use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

const SMALL: &str = r#"
samples = 2
h_list = [0.1, 0.05, 0.02, 0.01]

[resolution]
influx_s = 48
influx_phi = 24
domain_rho = 8
domain_theta = 16
sphere_nodes = 16
chart_nodes = 25
gauge_s = 16
gauge_phi = 8
green_nodes = 65
boundary_points = 3
"#;

fn scratch(tag: &str) -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let k = COUNTER.fetch_add(1, Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!("admissible-cli-{}-{tag}-{k}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str, out: &Path) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, format!("output_dir = {:?}\n{body}", out.display().to_string())).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_admissible"))
        .args(args)
        .env_remove("ADMISSIBLE_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn tables(dir: &Path, ext: &str) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn kernel_study_passes_on_defaults() {
    let dir = scratch("kernel");
    let out = dir.join("out");
    let cfg = write_config(&dir, "", &out);
    let o = run(&["--config", cfg.to_str().unwrap(), "kernel"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("PASS kernel.ratio"));
    assert!(out.join("kernel_ratios.csv").exists());
    assert!(out.join("kernel_summary.csv").exists());
    let report = fs::read_to_string(out.join("kernel_report.toml")).unwrap();
    assert!(report.contains("config_hash"));
}

#[test]
fn empty_h_list_is_a_usage_error() {
    let dir = scratch("empty-h");
    let out = dir.join("out");
    let cfg = write_config(&dir, "h_list = []\n", &out);
    let o = run(&["--config", cfg.to_str().unwrap(), "carleman"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("h_list"));
    assert!(!out.exists(), "no output before validation passes");
}

#[test]
fn unknown_metric_is_a_usage_error() {
    let dir = scratch("metric");
    let cfg = write_config(&dir, "metric_name = \"flat_torus\"\n", &dir.join("out"));
    let o = run(&["--config", cfg.to_str().unwrap(), "boundary"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_key_is_a_usage_error() {
    let dir = scratch("key");
    let cfg = write_config(&dir, "lambdas = [0.1]\n", &dir.join("out"));
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "boundary"]).status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(&["tomography"]).status.code(), Some(2));
}

#[test]
fn boundary_order_below_two_is_a_usage_error() {
    let dir = scratch("order");
    let cfg = write_config(&dir, "m = 1\n", &dir.join("out"));
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "boundary"]).status.code(), Some(2));
}

#[test]
fn tsv_tables_use_tabs() {
    let dir = scratch("tsv");
    let out = dir.join("out");
    let cfg = write_config(&dir, SMALL, &out);
    let o = run(&["--config", cfg.to_str().unwrap(), "--format", "tsv", "boundary"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out.join("boundary_recovery.tsv")).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header.split('\t').count(), 8);
    assert!(tables(&out, "csv").is_empty());
}

#[test]
fn output_dir_follows_the_environment() {
    let dir = scratch("env");
    let cfg = write_config(&dir, SMALL, &dir.join("ignored"));
    let target = dir.join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_admissible"))
        .args(["--config", cfg.to_str().unwrap(), "cgo"])
        .env("ADMISSIBLE_OUTPUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(target.join("cgo_scaling.csv").exists());
    assert!(!dir.join("ignored").exists());
}

#[test]
fn same_seed_gives_identical_tables() {
    let dir = scratch("repeat");
    let (a, b) = (dir.join("a"), dir.join("b"));
    for (out, sub) in [(&a, "ca"), (&b, "cb")] {
        let cdir = dir.join(sub);
        fs::create_dir_all(&cdir).unwrap();
        let cfg = write_config(&cdir, SMALL, out);
        // coarse resolution: some checks may fail, the tables must still agree
        let o = run(&["--config", cfg.to_str().unwrap(), "--threads", "2", "all"]);
        assert!(matches!(o.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (tables(&a, "csv"), tables(&b, "csv"));
    assert!(ta.len() >= 10);
    assert_eq!(ta, tb);
}

#[test]
fn help_lists_the_config_defaults() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("metric_name"));
    assert!(text.contains("carleman"));
}
