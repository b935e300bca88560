use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rel_toa::output::{verify_manifest, MANIFEST};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rel-toa"))
}

fn run(args: &[&str], out: &Path, threads: Option<&str>) -> Output {
    let mut c = bin();
    c.args(args).arg("--out").arg(out);
    if let Some(t) = threads {
        c.env("REL_TOA_THREADS", t);
    }
    c.output().expect("binary runs")
}

fn listing(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

#[test]
fn dist_fig7_writes_both_distributions_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fig7");
    let o = run(&["dist", "--preset", "fig7"], &out, None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files = listing(&out);
    for f in [
        "toadist_coarse.csv",
        "toadist_analytic.csv",
        MANIFEST,
        "plot.gp",
        "config.toml",
    ] {
        assert!(files.iter().any(|x| x == f), "{f} missing from {files:?}");
    }
    let checked = verify_manifest(&out).unwrap();
    assert_eq!(checked.len(), files.len() - 1);
    assert!(checked.iter().all(|(_, ok)| *ok));

    let csv = fs::read_to_string(out.join("toadist_analytic.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "tau,density_raw,density_normalized");
    assert!(csv.contains("# source=analytic_nonnodal\n"));
    assert!(!csv.contains('\r'));

    // tampering is detected
    fs::write(out.join("toadist_coarse.csv"), "x\n").unwrap();
    let checked = verify_manifest(&out).unwrap();
    assert!(checked.iter().any(|(name, ok)| name == "toadist_coarse.csv" && !ok));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    for (cmd, preset) in [("dist", "fig8"), ("expectation", "fig4")] {
        let a = tmp.path().join(format!("{preset}-1"));
        let b = tmp.path().join(format!("{preset}-5"));
        assert!(run(&[cmd, "--preset", preset], &a, Some("1")).status.success());
        assert!(run(&[cmd, "--preset", preset], &b, Some("5")).status.success());
        let files = listing(&a);
        assert_eq!(files, listing(&b));
        for f in files {
            assert_eq!(
                fs::read(a.join(&f)).unwrap(),
                fs::read(b.join(&f)).unwrap(),
                "{preset}: {f}"
            );
        }
    }
}

#[test]
fn invalid_config_exits_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[packet]\nsigma = -1\n").unwrap();
    let out = tmp.path().join("out");
    let o = run(&["dist", "--config", cfg.to_str().unwrap()], &out, None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma"));
    assert!(!out.exists());

    fs::write(&cfg, "[packet]\nsigma = 0.5\nsigma = 0.6\n").unwrap();
    let o = run(&["dist", "--config", cfg.to_str().unwrap()], &out, None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn unknown_subcommand_exits_2_with_usage() {
    let o = bin().arg("bogus").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn nonconvergence_exits_3_and_leaves_existing_outputs_alone() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("keep.txt"), "old").unwrap();
    // the damped oracle cannot resolve so small an offset at the default cutoff
    let cfg = tmp.path().join("nc.toml");
    fs::write(&cfg, "[kernel]\noracle_offsets = [0.01]\n").unwrap();
    let o = run(&["kernel", "--config", cfg.to_str().unwrap()], &out, None);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(listing(&out), ["keep.txt"]);
}

#[test]
fn numerical_domain_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("grid.toml");
    // too few momentum points for the τ window
    fs::write(&cfg, "[momentum]\np_max = 40.0\npoints = 201\n[dist]\ncoarse = false\n").unwrap();
    let out = tmp.path().join("out");
    let o = run(&["dist", "--config", cfg.to_str().unwrap()], &out, None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("momentum"));
}

#[test]
fn preset_and_config_conflict() {
    let o = bin()
        .args(["dist", "--preset", "fig7", "--config", "x.toml"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["dist", "--preset", "fig42"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
