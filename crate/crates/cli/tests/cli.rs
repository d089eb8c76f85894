use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mfm_cli::commands::{parse_k_range, prior_report, reproduce, verify};
use mfm_cli::config::{layered, read_table};
use mfm_cli::output::OutputSet;
use mfm_cli::{load_data, parse_csv, CliError, RunConfig, Scale};
use mfm_core::experiments::GridConfig;
use mfm_core::KPrior;

fn mfm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfm")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn bundled_galaxy_data() {
    let d = load_data("galaxy").unwrap();
    assert_eq!((d.len(), d.dim()), (82, 1));
}

#[test]
fn header_row_is_skipped() {
    let d = parse_csv("a,b,c\n1,2,3\n4, 5 ,6\n", "t").unwrap();
    assert_eq!((d.len(), d.dim()), (2, 3));
    assert_eq!(d.row(1), &[4.0, 5.0, 6.0]);
}

#[test]
fn malformed_cells_are_located() {
    let err = parse_csv("1,2\n3,abc\n", "t").unwrap_err();
    match err {
        CliError::Data { row, column, .. } => assert_eq!((row, column), (2, 2)),
        e => panic!("unexpected {e}"),
    }
    assert!(matches!(parse_csv("1,2\n3\n", "t"), Err(CliError::Data { row: 2, .. })));
    assert!(matches!(parse_csv("1\nNaN\n", "t"), Err(CliError::Data { row: 2, column: 1, .. })));
    assert!(matches!(parse_csv("1\ninf\n", "t"), Err(CliError::Data { row: 2, column: 1, .. })));
    assert!(parse_csv("", "t").is_err());
    assert!(parse_csv("x,y\n", "t").is_err());
}

#[test]
fn prior_tables() {
    let (text, svg) = prior_report("lossbased-default", parse_k_range("1..5").unwrap()).unwrap();
    let values: Vec<&str> = text.lines().skip(2).take(5).map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(values, ["0.5", "0.1667", "0.0833", "0.05", "0.0333"]);
    assert!(text.contains("mean\tundefined") && text.contains("variance\tundefined"));
    assert!(text.contains("P(k > 5)\t0.1667"));
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));

    let (text, _) = prior_report("lossbased(3,1)", (1, 10)).unwrap();
    assert!(text.contains("mean\t1.5\n") && text.contains("variance\t2.25\n"));

    let (text, _) = prior_report("uniform(50)", parse_k_range("1..2").unwrap()).unwrap();
    assert!(text.contains("1\t0.02\n2\t0.02\n"));

    let err = prior_report("lossbased(3", (1, 5)).unwrap_err().to_string();
    assert!(err.contains("position") && err.contains("uniform(K)"), "{err}");
    assert!(parse_k_range("5..2").is_err());
    assert_eq!(parse_k_range("7").unwrap(), (1, 7));
    assert_eq!(parse_k_range("2..=4").unwrap(), (2, 4));
}

#[test]
fn verify_single_point_is_exact() {
    let priors = vec!["lossbased-default".to_string(), "poisson(1)".to_string()];
    let (lines, _) = verify(1, 3, &priors, 1_000, 0.02).unwrap();
    for l in lines {
        assert_eq!((l.tv_t, l.tv_k), (0.0, 0.0));
        assert!(l.pass);
    }
    assert!(matches!(verify(11, 3, &priors, 1_000, 0.02), Err(CliError::Usage(_))));
}

#[test]
fn verify_command_passes_at_six_points() {
    let o = mfm(&["verify", "--n", "6", "--seed", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.matches("PASS").count(), 3, "{text}");
    let o = mfm(&["verify", "--n", "11"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("n <= 10"));
}

fn read_pmf(dir: &Path) -> Vec<f64> {
    fs::read_to_string(dir.join("posterior.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .filter_map(|l| l.split_once(','))
        .filter(|(k, _)| k.parse::<u64>().is_ok())
        .map(|(_, p)| p.parse().unwrap())
        .collect()
}

fn mode_of(pmf: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in pmf.iter().enumerate() {
        if p > pmf[best] {
            best = i;
        }
    }
    best + 1
}

#[test]
fn fit_galaxy() {
    let tmp = tempfile::tempdir().unwrap();
    for (prior, seed, modes) in [("lossbased-default", "1", 3..=5), ("poisson(1)", "1", 3..=3)] {
        let out = tmp.path().join(prior);
        let o = mfm(&[
            "fit", "--data", "galaxy", "--prior", prior, "--model", "richardson-green", "--seed", seed, "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        for f in ["posterior.csv", "trace.csv", "diagnostics.json", "posterior.svg", "config.toml"] {
            assert!(out.join(f).exists(), "{f}");
        }
        let pmf = read_pmf(&out);
        assert!(modes.contains(&mode_of(&pmf)), "{prior}: {pmf:?}");
        let diag: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap();
        assert_eq!(diag["n"], 82);
        assert_eq!(diag["model"]["kind"], "richardson-green");
    }
}

#[test]
fn fit_single_row_gives_the_prior() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("one.csv");
    fs::write(&data, "value\n2.5\n").unwrap();
    let out = tmp.path().join("fit");
    let o = mfm(&["fit", "--data", data.to_str().unwrap(), "--iters", "2000", "--burnin", "1000", "--thin", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    // with one observation t = 1 and p(k | t = 1) is the prior itself
    let pmf = read_pmf(&out);
    let prior = KPrior::loss_based_default();
    for (k, p) in pmf.iter().enumerate() {
        assert!((p - prior.pmf(k as u64 + 1).unwrap()).abs() < 1e-12);
    }
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.lines().skip(1).all(|l| l.split(',').nth(1) == Some("1")));
}

#[test]
fn snapshot_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let o = mfm(&["fit", "--prior", "uniform(50)", "--iters", "3000", "--burnin", "1000", "--seed", "9", "--out", first.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let again = mfm(&["fit", "--config", first.join("config.toml").to_str().unwrap()]);
    assert!(again.status.success(), "{}", stderr(&again));
    let before: Vec<Vec<u8>> = ["posterior.csv", "trace.csv", "diagnostics.json", "posterior.svg", "config.toml"]
        .iter()
        .map(|f| fs::read(first.join(f)).unwrap())
        .collect();
    let second = tmp.path().join("second");
    let o = mfm(&["fit", "--config", first.join("config.toml").to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success());
    for (i, f) in ["posterior.csv", "trace.csv", "diagnostics.json", "posterior.svg"].iter().enumerate() {
        assert_eq!(fs::read(first.join(f)).unwrap(), before[i], "{f} changed on rerun");
        assert_eq!(fs::read(second.join(f)).unwrap(), before[i], "{f} differs in a new directory");
    }
}

#[test]
fn failures_leave_no_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "1\n2\nabc\n").unwrap();
    let out = tmp.path().join("never");
    let o = mfm(&["fit", "--data", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("row 3, column 1"), "{}", stderr(&o));
    assert!(!out.exists());

    let o = mfm(&["fit", "--prior", "lossbased(0,1)", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(!out.exists());

    let dir = tmp.path().join("partial");
    {
        let mut set = OutputSet::create(&dir).unwrap();
        set.write("a.csv", "x").unwrap();
        set.write("nested/b.csv", "y").unwrap();
    }
    assert!(!dir.exists());
    fs::create_dir(&dir).unwrap();
    fs::write(dir.join("keep.txt"), "mine").unwrap();
    {
        let mut set = OutputSet::create(&dir).unwrap();
        set.write("a.csv", "x").unwrap();
    }
    assert!(dir.join("keep.txt").exists() && !dir.join("a.csv").exists());
}

#[test]
fn flags_win_over_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("run.toml");
    let out = tmp.path().join("out");
    fs::write(
        &file,
        format!(
            "prior = \"poisson(1)\"\nout = \"{}\"\n[sampler]\niterations = 1500\nburn_in = 500\nseed = 4\n",
            out.display()
        ),
    )
    .unwrap();
    let o = mfm(&["fit", "--config", file.to_str().unwrap(), "--seed", "8", "--iters", "1200"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let snap: RunConfig = toml::from_str(&fs::read_to_string(out.join("config.toml")).unwrap()).unwrap();
    assert_eq!(snap.prior, "poisson(1)");
    assert_eq!((snap.sampler.iterations, snap.sampler.burn_in, snap.sampler.seed), (1200, 500, 8));

    fs::write(&file, "prior = \"poisson(1)\"\nunknown_key = 3\n").unwrap();
    let o = mfm(&["fit", "--config", file.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown_key"), "{}", stderr(&o));
}

#[test]
fn grid_file_layers_over_scale_preset() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("grid.toml");
    fs::write(&file, "sample_sizes = [30]\nreplicates = 7\n[sampler]\niterations = 500\n").unwrap();
    let defaults = GridConfig {
        replicates: Scale::Desk.replicates(),
        sampler: Scale::Desk.sampler(),
        ..GridConfig::default()
    };
    let g: GridConfig = layered(&defaults, Some(read_table(&file).unwrap())).unwrap();
    assert_eq!((g.sample_sizes.clone(), g.replicates, g.sampler.iterations), (vec![30], 7, 500));
    assert_eq!(g.sampler.burn_in, Scale::Desk.sampler().burn_in);
}

#[test]
fn reproduce_small_table_and_unknown_target() {
    let err = reproduce("nonsense", Scale::Desk, None, None, None, Path::new("unused")).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("galaxy") && msg.contains("M_2a") && msg.contains("MV_d12"), "{msg}");
    let o = mfm(&["reproduce", "nonsense"]);
    assert!(!o.status.success());

    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("grid.toml");
    fs::write(
        &file,
        "sample_sizes = [50]\nmaster_seed = 99\n[sampler]\niterations = 400\nburn_in = 200\nthin = 1\n",
    )
    .unwrap();
    let out = tmp.path().join("m2a");
    let table = file.as_path();
    let report = reproduce("m2a", Scale::Desk, Some(3), Some(2), Some(read_table(table).unwrap()), &out).unwrap();
    assert!(report.contains("this run") && report.contains("reference"), "{report}");
    assert!(report.contains("2 replicates per cell, 400 iterations"), "{report}");
    let index = fs::read_to_string(out.join("M_2a/50/lossbased-default/replicates.csv")).unwrap();
    assert_eq!(index.lines().count(), 3);
    assert!(out.join("summary.csv").exists());
}
