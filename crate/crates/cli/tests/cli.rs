use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use resonance_cli::config::ScanConfig;
use resonance_cli::report::analyse;
use resonance_cli::{run_scan, ResolvedScan};
use resonance_core::{
    AtomPair, BranchLabel, DielectricResponse, GeometryConfig, PolarizabilityModel,
};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn resonance(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resonance"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Header row and numeric rows of a table, skipping `#` lines.
fn parse_table(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .expect("header row")
        .split('\t')
        .map(String::from)
        .collect();
    let rows = lines
        .map(|l| l.split('\t').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

fn write_config(dir: &tempfile::TempDir, body: &str) -> PathBuf {
    let path = dir.path().join("scan.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn resolve_file(path: &Path) -> ResolvedScan {
    let text = std::fs::read_to_string(path).unwrap();
    let name = path.display().to_string();
    ScanConfig::parse(&text, &name)
        .unwrap()
        .resolve(path.parent().unwrap(), &name, &text)
        .unwrap()
}

#[test]
fn fig3_table_shape() {
    let cfg = data("fig3.toml");
    let text = stdout(&resonance(&["scan", "--config", cfg.to_str().unwrap()]));
    let (header, rows) = parse_table(&text);
    // rho plus three quantities on four branches
    assert_eq!(header.len(), 13);
    assert_eq!(header[0], "rho");
    assert_eq!(header[1], "resonance_x");
    assert_eq!(header[12], "zero_frequency_isotropic");
    assert_eq!(rows.len(), 60);
    for r in &rows {
        assert_eq!(r.len(), 13);
        assert!(r.iter().all(|v| v.is_finite()));
    }
    assert_eq!(rows[0][0], 4.0);
    assert_eq!(rows[59][0], 1000.0);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    assert!(text.contains("#   preset = \"fig3\""));
    assert!(text.contains("phospholipid-like"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let cfg = data("fig4.toml");
    let cfg = cfg.to_str().unwrap();
    let a = resonance(&["scan", "--config", cfg, "--workers", "1"]);
    let b = resonance(&["scan", "--config", cfg, "--workers", "4"]);
    let c = resonance(&["scan", "--config", cfg, "--workers", "4"]);
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(b.stdout, c.stdout);
}

#[test]
fn free_preset_without_dielectric_is_vacuum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "[scan]\nrho_min = 10.0\nrho_max = 500.0\ncount = 8\nbranches = [\"x\", \"z\"]\n\
         quantities = [\"resonance\", \"casimir_polder\"]\n",
    );
    let text = stdout(&resonance(&[
        "scan",
        "--config",
        cfg.to_str().unwrap(),
        "--preset",
        "free",
    ]));
    assert!(text.contains("model = \"vacuum\""));
    let (_, rows) = parse_table(&text);
    let atom = PolarizabilityModel::helium_like();
    let tol = Default::default();
    let tol = resonance_core::Tolerances {
        abs_tol: 0.0,
        ..tol
    };
    for r in rows {
        let pair = AtomPair::new(
            GeometryConfig::side_by_side(2.0, r[0]).unwrap(),
            atom,
            &DielectricResponse::Vacuum,
        );
        let free = pair.resonance_energies(300.0, &tol).unwrap();
        assert_eq!(r[1], free.get(BranchLabel::X).energy);
        assert_eq!(r[2], free.get(BranchLabel::Z).energy);
        let cp = pair.casimir_polder_energy(300.0, &tol).unwrap().energy;
        assert_eq!(r[3], cp);
        assert_eq!(r[4], cp);
    }
}

#[test]
fn malformed_config_exits_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "[scan]\ncount = 10\n\nrho_min = \"four\"\n");
    let out = resonance(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("scan.toml:4:"), "{err}");

    let cfg = write_config(&dir, "[scan]\nrho_min = 10.0\nrho_max = 5.0\n");
    let out = resonance(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scan.toml:3:"));
}

#[test]
fn missing_files_exit_2() {
    let out = resonance(&["scan", "--config", "/nonexistent/scan.toml"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "[dielectric]\nspectrum = \"missing_eps.dat\"\n");
    let out = resonance(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing_eps.dat"));
}

#[test]
fn empty_quantity_set_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "[scan]\nquantities = []\n");
    let out = resonance(&["report", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("quantities"));
}

#[test]
fn strong_coupling_exits_3_naming_rho_and_n() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "[scan]\npreset = \"free_space\"\nrho_min = 1.0\nrho_max = 2.0\ncount = 3\n\
         quantities = [\"resonance\"]\nbranches = [\"x\"]\n\n[atom]\nalpha_static = 1000.0\n",
    );
    let out = resonance(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("rho = 1 A") && err.contains("n = 0"), "{err}");
}

#[test]
fn tabulated_spectrum_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = String::from("# synthetic loss peak\nomega_eV eps_imag\n");
    for i in 1..=2000 {
        let w = i as f64 * 0.01;
        let loss = 0.5 * w * 100.0 / ((w * w - 100.0).powi(2) + w * w);
        body.push_str(&format!("{w} {loss}\n"));
    }
    // header line without a `#` is a parse error with its line number
    std::fs::write(dir.path().join("eps.dat"), &body).unwrap();
    let cfg = write_config(
        &dir,
        "[scan]\nrho_min = 10.0\nrho_max = 100.0\ncount = 4\nquantities = [\"resonance\"]\n\n\
         [dielectric]\nspectrum = \"eps.dat\"\n",
    );
    let out = resonance(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    std::fs::write(
        dir.path().join("eps.dat"),
        body.replace("omega_eV", "# omega_eV"),
    )
    .unwrap();
    let text = stdout(&resonance(&["scan", "--config", cfg.to_str().unwrap()]));
    assert!(text.contains("model = \"tabulated\""));
    assert_eq!(parse_table(&text).1.len(), 4);
}

#[test]
fn object_format_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("scan.json");
    let cfg = data("fig4.toml");
    let out = resonance(&[
        "scan",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "object",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 60);
    assert_eq!(v["columns"].as_array().unwrap().len(), 8);
    assert_eq!(v["config"]["scan"]["preset"], "fig4");
    assert_eq!(v["columns"][0]["name"], "resonance_x");
}

#[test]
fn constants_command() {
    let text = stdout(&resonance(&["constants"]));
    assert!(text.contains("hbar_c\t1.973269804e3\teV*A"));
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&resonance(&["constants", "--format", "object"]))).unwrap();
    assert_eq!(v["k_b"]["value"], 8.617333262e-5);
}

#[test]
fn free_space_zero_temperature_report_has_minus_four_tail() {
    let cfg = data("free_space_zero_temperature.toml");
    let text = stdout(&resonance(&[
        "report",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "object",
    ]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let fits = v["report"]["fits"].as_array().unwrap();
    for name in ["resonance_x", "resonance_y"] {
        let f = fits.iter().find(|f| f["column"] == name).unwrap();
        let e = f["exponent"].as_f64().unwrap();
        assert!((e + 4.0).abs() < 0.01, "{name}: {e}");
    }
    let rates = fits.iter().find(|f| f["column"] == "rates_x").unwrap();
    assert!((rates["exponent"].as_f64().unwrap() + 8.0).abs() < 0.01);
}

#[test]
fn fig4_report_crossings_match_table_signs() {
    let dir = tempfile::tempdir().unwrap();
    let body = std::fs::read_to_string(data("fig4.toml"))
        .unwrap()
        .replace("rho_min = 20.0", "rho_min = 4.0")
        .replace(
            "quantities = [\"resonance\", \"casimir_polder\"]",
            "quantities = [\"resonance\", \"zero_frequency\"]",
        )
        .replace(
            "helium_like_atom.toml",
            data("helium_like_atom.toml").to_str().unwrap(),
        )
        .replace(
            "phospholipid_like_dielectric.toml",
            data("phospholipid_like_dielectric.toml").to_str().unwrap(),
        );
    let cfg = write_config(&dir, &body);
    let scan = resolve_file(&cfg);
    let table = run_scan(&scan, 2).unwrap();
    let report = analyse(&scan, &table).unwrap();

    let mut expected = 0;
    for i in 0..table.columns.len() {
        let v = table.column_values(i);
        expected += v.windows(2).filter(|w| w[0].1 * w[1].1 < 0.0).count();
    }
    assert_eq!(report.crossings.len(), expected);
    assert!(expected > 0);
    for c in &report.crossings {
        assert!(c.direction == "attract->repel" || c.direction == "repel->attract");
        assert!(c.bracket.0 < c.rho_star && c.rho_star < c.bracket.1);
    }

    let text = stdout(&resonance(&["report", "--config", cfg.to_str().unwrap()]));
    assert!(text.contains("sign crossovers"));
    assert!(text.contains("rho* = "));
    assert!(text.contains("worst truncation"));
}
