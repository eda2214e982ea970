use std::path::Path;
use std::process::{Command, Output};

use magnon_sim::config::RunConfig;
use sha2::{Digest, Sha256};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_magnon-sim"));
    c.env("MAGNON_SIM_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value_after(text: &str, key: &str) -> f64 {
    let rest = &text[text.find(key).unwrap_or_else(|| panic!("`{key}` in {text}")) + key.len()..];
    rest.split_whitespace()
        .next()
        .unwrap()
        .trim_end_matches(',')
        .parse()
        .unwrap()
}

#[test]
fn config_round_trips_and_defaults_match_reference() {
    let cfg = RunConfig::default();
    assert_eq!(RunConfig::parse(&cfg.render()).unwrap(), cfg);
    assert_eq!(cfg.system.gamma_over_2pi_hz, 1e6);
    assert_eq!(cfg.system.drive_over_gamma, 0.1);
    assert_eq!(cfg.system.magnons[0].kerr_over_gamma.abs(), 4e-3);
    assert_eq!(cfg.system.cavity_decay_over_gamma, 1.0);
    assert_eq!(cfg.system.magnons[0].decay_over_gamma, 1.0);
    let spec = cfg.spec();
    assert_eq!(spec.magnons[0].detuning, spec.cavity_detuning);

    let empty = RunConfig::parse("").unwrap();
    assert_eq!(empty, cfg);

    let two = RunConfig::parse(
        "solver = \"both\"\n[system]\ndrive_over_gamma = 0.2\n\
         [[system.magnons]]\ncoupling_over_gamma = 63.0\nkerr_over_gamma = 0.004\n\
         [[system.magnons]]\ncoupling_over_gamma = 63.0\nkerr_over_gamma = -0.004\n\
         [[axes]]\nparam = \"delta\"\nfrom = -1.0\nto = 1.0\npoints = 5\n",
    )
    .unwrap();
    assert_eq!(RunConfig::parse(&two.render()).unwrap(), two);
    assert_eq!(two.spec().magnons.len(), 2);
}

#[test]
fn negative_decay_is_a_field_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "[system]\ncavity_decay_over_gamma = -1.0\n").unwrap();
    let o = run(&["--config", p.to_str().unwrap(), "g2"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("system.cavity_decay_over_gamma"), "{err}");
}

#[test]
fn unknown_field_is_reported_with_its_name() {
    let err = RunConfig::parse("[system]\ndetla_over_gamma = 1.0\n")
        .unwrap_err()
        .to_string();
    assert!(err.contains("detla_over_gamma"), "{err}");
}

#[test]
fn g2_at_defaults_is_blockaded() {
    let o = run(&["g2", "--g", "9.88", "--delta", "0.287"]);
    assert!(o.status.success());
    let v = value_after(&stdout(&o), "g2 [weakdrive] = ");
    assert!(v < 1e-3, "{v}");
}

#[test]
fn g2_without_coupling_is_coherent() {
    let o = run(&["g2", "--g", "0", "--both-solvers"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let lb = value_after(&s, "g2 [lindblad(cutoff=4)] = ");
    assert!((lb - 1.0).abs() < 1e-2, "{s}");
    let wd = value_after(&s, "g2 [weakdrive] = ");
    assert!((wd - 1.0).abs() < 3e-2, "{s}");
    assert!(s.contains("relative difference"));
}

#[test]
fn sweep_50_by_50_emits_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&[
        "--out",
        out,
        "--format",
        "csv",
        "sweep",
        "--axis",
        "delta:-1:1:50",
        "--axis",
        "g:0:20:50",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["delta", "g", "g2_weakdrive"]);
    assert_eq!(r.records().count(), 2500);
    assert!(dir.path().join("sweep.meta.json").exists());
}

fn hash(p: &Path) -> Vec<u8> {
    Sha256::digest(std::fs::read(p).unwrap()).to_vec()
}

#[test]
fn repeated_sweep_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "--out",
        out,
        "sweep",
        "--observable",
        "contrast",
        "--axis",
        "delta:-1:1:41",
        "--axis",
        "k:0.001:0.02:7",
    ];
    assert!(run(&args).status.success());
    let first = hash(&dir.path().join("sweep.csv"));
    assert!(run(&args).status.success());
    assert_eq!(first, hash(&dir.path().join("sweep.csv")));
}

#[test]
fn csv_values_re_parse_exactly() {
    use magnon_blockade::nonreciprocity::{sweep, Axis, Observable, Solver};
    use magnon_blockade::{SweepParam, SystemSpec};
    let spec = SystemSpec::single(0.0, 9.88, 4e-3, 0.1);
    let r = sweep(
        &spec,
        &[Axis::linspace(SweepParam::Delta, -1.0, 1.0, 33)],
        Observable::Contrast,
        Solver::WeakDrive,
    )
    .unwrap();
    let bytes = magnon_sim::output::sweep_csv(&[("contrast".into(), r.clone())]).unwrap();
    let mut rd = csv::Reader::from_reader(bytes.as_slice());
    assert_eq!(
        rd.headers().unwrap().iter().collect::<Vec<_>>(),
        ["delta", "contrast", "contrast_g2_forward", "contrast_g2_backward"]
    );
    let (fwd, bwd) = r.branches.unwrap();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec.unwrap();
        let f = |i: usize| rec[i].parse::<f64>().unwrap();
        assert_eq!(f(0), r.axes[0].values[k]);
        assert_eq!(f(1).to_bits(), r.values[k].to_bits());
        assert_eq!(f(2).to_bits(), fwd[k].to_bits());
        assert_eq!(f(3).to_bits(), bwd[k].to_bits());
    }
}

#[test]
fn contrast_sweep_follows_coupling_symmetry() {
    // identical spheres: the two Kerr patterns are mirror images, contrast 0
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("two.toml");
    std::fs::write(
        &p,
        "observable = \"contrast\"\n\
         [[system.magnons]]\ncoupling_over_gamma = 9.88\nkerr_over_gamma = 0.004\n\
         [[system.magnons]]\ncoupling_over_gamma = 9.88\nkerr_over_gamma = -0.004\n\
         [[axes]]\nparam = \"delta\"\nfrom = -1.0\nto = 1.0\npoints = 21\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "--config",
        p.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "sweep",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    let max = r
        .records()
        .map(|x| x.unwrap()[1].parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!(max < 1e-9, "{max}");

    let o = run(&[
        "--config",
        p.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "sweep",
        "--g",
        "9.88",
        "--axis",
        "zeta_g:1.2:1.3:2",
    ]);
    assert!(o.status.success());
    let mut r = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    assert!(r.records().all(|x| x.unwrap()[1].parse::<f64>().unwrap() > 1e-3));
}

#[test]
fn figure_writes_csv_svg_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["--out", out, "--format", "csv,svg", "figure", "5b"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("5b.meta.json")).unwrap()).unwrap();
    let assumptions = meta["assumptions"].as_array().unwrap();
    assert!(assumptions
        .iter()
        .any(|a| a.as_str().unwrap().contains("g1 = 12")));
    assert_eq!(meta["config"]["system"]["gamma_over_2pi_hz"], 1e6);
    let svg = std::fs::read_to_string(dir.path().join("5b.svg")).unwrap();
    assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
    let mut r = csv::Reader::from_path(dir.path().join("5b.csv")).unwrap();
    assert_eq!(r.headers().unwrap().len(), 3);
    assert_eq!(r.records().count(), 401);
}

#[test]
fn figure_2a_minima_sit_at_the_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["--out", out, "figure", "2a"]);
    assert!(o.status.success());
    let mut r = csv::Reader::from_path(dir.path().join("2a.csv")).unwrap();
    let rows: Vec<[f64; 3]> = r
        .records()
        .map(|x| {
            let x = x.unwrap();
            [
                x[0].parse().unwrap(),
                x[1].parse().unwrap(),
                x[2].parse().unwrap(),
            ]
        })
        .collect();
    let argmin = |c: usize| rows.iter().min_by(|a, b| a[c].total_cmp(&b[c])).unwrap()[0];
    assert!((argmin(1) - 0.287).abs() < 0.01);
    assert!((argmin(2) + 0.287).abs() < 0.01);
}

#[test]
fn unknown_figure_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--out", dir.path().to_str().unwrap(), "figure", "9z"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_axis_is_a_usage_error() {
    let o = run(&["sweep", "--axis", "bogus:0:1:3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_quick_passes() {
    let o = run(&["verify", "--quick"]);
    let s = stdout(&o);
    assert!(o.status.success(), "{s}");
    assert_eq!(s.lines().filter(|l| l.starts_with("[PASS]")).count(), 6);
}

#[test]
fn verify_catches_flipped_kerr_sign() {
    let o = run(&["verify", "--only", "1", "--mutate", "flip-kerr-sign"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stdout(&o).contains("[FAIL]"));
}
