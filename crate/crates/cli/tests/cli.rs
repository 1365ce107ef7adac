use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const PM_PLATES: &str = r#"
[geometry]
kind = "plates"
separation = 1.0
material_1 = "perfect_metal"
material_2 = "perfect_metal"
"#;

fn workdir(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir")).args(args).output().unwrap()
}

fn casimir_in(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir")).args(args).env("CASIMIR_THREADS", threads).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Value after "<quantity>: " in a summary.
fn reported(summary: &str, quantity: &str) -> f64 {
    let line = summary.lines().find(|l| l.starts_with(&format!("{quantity}: "))).unwrap();
    line.split_whitespace().nth(1).unwrap().parse().unwrap()
}

/// (series, weight * integrand) rows of a samples CSV.
fn contributions(csv_text: &str) -> Vec<(String, f64, f64)> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].to_string(), rec[3].parse().unwrap(), rec[4].parse().unwrap())
        })
        .collect()
}

#[test]
fn minimal_plates_run_writes_report() {
    let dir = workdir("minimal");
    let cfg = write(&dir, "pm.toml", PM_PLATES);
    let o = casimir(&["run", p(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let value = reported(&out, "pressure");
    let exact = std::f64::consts::PI.powi(2) / 240.0;
    assert!(((value - exact) / exact).abs() < 1e-6);
    assert!(out.contains("error estimate:") && out.contains(" Pa"));
    for f in ["pm_summary.txt", "pm_scenario.toml", "pm_samples.csv", "pm_samples.svg"] {
        assert!(dir.join("out").join(f).exists(), "{f}");
    }
    // stored samples re-integrate to the reported value
    let rows = contributions(&fs::read_to_string(dir.join("out/pm_samples.csv")).unwrap());
    let sum: f64 = rows.iter().map(|r| r.1 * r.2).sum();
    assert!(((sum - value) / value).abs() < 1e-12);
}

#[test]
fn csv_output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = workdir("determinism");
    let cfg = write(
        &dir,
        "gold.toml",
        r#"
[materials.gold]
kind = "drude"
omega_p = 45.7
gamma = 0.177

[geometry]
kind = "plates"
separation = 0.3
material_1 = "gold"
material_2 = "gold"

[frequency]
temperature = 300.0

[output]
svg = false
"#,
    );
    let csv = dir.join("out/gold_samples.csv");
    assert_eq!(code(&casimir_in(&["run", p(&cfg)], "1")), 0);
    let first = fs::read(&csv).unwrap();
    assert_eq!(code(&casimir_in(&["run", p(&cfg)], "3")), 0);
    assert_eq!(first, fs::read(&csv).unwrap());
    assert!(!dir.join("out/gold_samples.svg").exists());
    // the echoed scenario reproduces the run from another working directory
    let echo = dir.join("out/gold_scenario.toml");
    let o = Command::new(env!("CARGO_BIN_EXE_casimir")).args(["run", p(&echo)]).current_dir("/").output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(first, fs::read(&csv).unwrap());
}

#[test]
fn undefined_material_is_a_config_error_naming_the_id() {
    let dir = workdir("undefined");
    let cfg = write(&dir, "bad.toml", &PM_PLATES.replace("material_2 = \"perfect_metal\"", "material_2 = \"unobtainium\""));
    for sub in ["run", "validate"] {
        let o = casimir(&[sub, p(&cfg)]);
        assert_eq!(code(&o), 2);
        assert!(stderr(&o).contains("'unobtainium'"), "{}", stderr(&o));
    }
}

#[test]
fn parse_errors_carry_location() {
    let dir = workdir("parse");
    let cfg = write(&dir, "bad.toml", &format!("{PM_PLATES}spacing = 3\n"));
    let o = casimir(&["validate", p(&cfg)]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("spacing") && err.contains("line"), "{err}");
    let o = casimir(&["run", p(&dir.join("missing.toml"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn numerical_failure_exits_3() {
    let dir = workdir("numerical");
    let cfg = write(&dir, "hot.toml", &format!("{PM_PLATES}[frequency]\ntemperature = 300.0\nmatsubara_terms = 2\n"));
    let o = casimir(&["run", p(&cfg)]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("plates"));
}

#[test]
fn zero_threads_is_rejected() {
    let dir = workdir("threads");
    let cfg = write(&dir, "pm.toml", PM_PLATES);
    assert_eq!(code(&casimir_in(&["validate", p(&cfg)], "0")), 2);
    assert_eq!(code(&casimir_in(&["validate", p(&cfg)], "two")), 2);
}

#[test]
fn integrand_map_writes_csv_and_two_heatmaps() {
    let dir = workdir("map");
    let cfg = write(
        &dir,
        "map.toml",
        "[geometry]\nkind = \"integrand_map\"\nseparation = 1.0\n[method]\nn_re = 21\nn_im = 11\n",
    );
    let o = casimir(&["run", p(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv_text = fs::read_to_string(dir.join("out/map_map.csv")).unwrap();
    assert_eq!(csv_text.lines().count(), 1 + 21 * 11);
    assert!(csv_text.starts_with("re_omega,im_omega,f_re,f_im,abs,arg"));
    for f in ["map_magnitude.svg", "map_phase.svg"] {
        let svg = fs::read_to_string(dir.join("out").join(f)).unwrap();
        assert!(svg.starts_with("<svg") && svg.matches("<rect").count() > 21 * 11, "{f}");
    }
}

#[test]
fn compare_identical_configs_differ_by_exactly_zero() {
    let dir = workdir("identical");
    let a = write(&dir, "a.toml", PM_PLATES);
    let b = write(&dir, "b.toml", PM_PLATES);
    let table = dir.join("cmp.csv");
    let o = casimir(&["compare", p(&a), p(&b), "--tolerance", "0", "--csv", p(&table)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = fs::read_to_string(&table).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.ends_with(",0e0,0e0,PASS"), "{row}");
}

#[test]
fn compare_two_perfect_metal_paths() {
    let dir = workdir("pm_paths");
    let a = write(&dir, "lifshitz.toml", PM_PLATES);
    let b = write(&dir, "closed.toml", &format!("{PM_PLATES}[method]\npressure = \"perfect_metal\"\n"));
    let o = casimir(&["compare", p(&a), p(&b), "--tolerance", "1e-6"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn compare_reports_fail_with_exit_4() {
    let dir = workdir("fail");
    let a = write(&dir, "a.toml", PM_PLATES);
    let b = write(&dir, "b.toml", &PM_PLATES.replace("separation = 1.0", "separation = 1.1"));
    let o = casimir(&["compare", p(&a), p(&b), "--tolerance", "0.1"]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn compare_mismatched_observables_is_config_error() {
    let dir = workdir("mismatch");
    let a = write(&dir, "plates.toml", PM_PLATES);
    let b = write(&dir, "spheres.toml", "[geometry]\nkind = \"spheres3d\"\nr1 = 1.0\nr2 = 1.0\nd = 3.0\n");
    let o = casimir(&["compare", p(&a), p(&b)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("pressure") && stderr(&o).contains("energy"));
}

#[test]
fn compare_fd_and_spectral_cylinders() {
    let dir = workdir("cylinders");
    let rule = "[frequency]\nrule = \"gauss_laguerre\"\npoints = 16\nscale = 0.5\n";
    let fd = write(
        &dir,
        "fd.toml",
        &format!(
            "[geometry]\nkind = \"cylinders2d\"\nr1 = 1.0\nr2 = 1.0\nd = 3.0\n\
             [method]\ndx = 0.125\nlevels = 2\nmargin = 0.5\nstretch_cells = 16\nclearance = 0.25\n{rule}"
        ),
    );
    let spectral = write(
        &dir,
        "spectral.toml",
        &format!("[geometry]\nkind = \"cylinders2d_spectral\"\nr1 = 1.0\nr2 = 1.0\nd = 3.0\n[method]\nl_max = 15\n{rule}"),
    );
    let o = casimir(&["compare", p(&fd), p(&spectral), "--tolerance", "0.02"]);
    assert_eq!(code(&o), 0, "{}\n{}", stdout(&o), stderr(&o));
}

#[test]
fn mirrors_match_the_ideal_energy() {
    let dir = workdir("mirrors");
    let cfg = write(
        &dir,
        "m.toml",
        "[geometry]\nkind = \"mirrors1d\"\nbodies = [{ shape = \"point\", x = 0.0, material = \"perfect_metal\" }, \
         { shape = \"point\", x = 1.0, material = \"perfect_metal\" }]\n",
    );
    let o = casimir(&["run", p(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let e = reported(&stdout(&o), "energy");
    let exact = -std::f64::consts::PI / 24.0;
    assert!(((e - exact) / exact).abs() < 1e-3, "{e}");
    // two levels, each with its own samples
    let rows = contributions(&fs::read_to_string(dir.join("out/m_samples.csv")).unwrap());
    assert_eq!(rows.iter().filter(|r| r.0 == "dx=0.025").count(), rows.len() / 2);
    assert!(dir.join("out/m_convergence.csv").exists());
}

#[test]
fn sweep_separation_scales_as_inverse_fourth_power() {
    let dir = workdir("sweep_a");
    let cfg = write(&dir, "pm.toml", PM_PLATES);
    let o = casimir(&["sweep", p(&cfg), "--param", "a", "--values", "0.5,1,2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.join("out/pm_sweep_a.csv")).unwrap();
    let v: Vec<f64> = csv::Reader::from_reader(text.as_bytes()).records().map(|r| r.unwrap()[3].parse().unwrap()).collect();
    assert!((v[0] / v[1] - 16.0).abs() < 1e-8 && (v[1] / v[2] - 16.0).abs() < 1e-8, "{v:?}");
    assert!(dir.join("out/pm_sweep_a.svg").exists());
}

#[test]
fn sweep_cutoff_on_spheres() {
    let dir = workdir("sweep_l");
    let cfg = write(&dir, "s.toml", "[geometry]\nkind = \"spheres3d\"\nr1 = 1.0\nr2 = 1.0\nd = 3.0\n");
    let o = casimir(&["sweep", p(&cfg), "--param", "l_max", "--values", "1,2,4,8"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.join("out/s_sweep_l_max.csv")).unwrap();
    let v: Vec<f64> = csv::Reader::from_reader(text.as_bytes()).records().map(|r| r.unwrap()[3].parse().unwrap()).collect();
    let best = v[3];
    let errs: Vec<f64> = v[..3].iter().map(|x| ((x - best) / best).abs()).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn sweep_rejects_unknown_and_inapplicable_parameters() {
    let dir = workdir("sweep_bad");
    let cfg = write(&dir, "pm.toml", PM_PLATES);
    let o = casimir(&["sweep", p(&cfg), "--param", "radius", "--values", "1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("'radius'"));
    let o = casimir(&["sweep", p(&cfg), "--param", "l_max", "--values", "4"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("'l_max'"));
}

#[test]
fn shipped_scenarios_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let o = casimir(&["validate", p(&path)]);
            assert_eq!(code(&o), 0, "{}: {}", path.display(), stderr(&o));
            n += 1;
        }
    }
    assert!(n >= 6);
}
