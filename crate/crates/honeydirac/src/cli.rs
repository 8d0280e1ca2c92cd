//! Batch front end: flat key-value config parsing, pipeline orchestration
//! (spectrum → integrals → bifurcation → verification) and deterministic CSV
//! and JSON outputs.
//!
//! Config grammar: one `key = value` per line, `#` comments and blank lines
//! ignored. Keys:
//!
//! ```text
//! potential    = standard | table:PATH   (PATH relative to the config file)
//! epsilon_v    = 0.5                     lattice potential amplitude
//! nonlinearity = kerr | saturable
//! k0           = 1.0                     nonlinearity strength
//! cutoff       = 6                       Fourier truncation (>= 2)
//! epsilons     = 0.02,0.04,0.08          mode amplitudes, ascending
//! beta_samples = 64                      equator scan resolution
//! inner_tol    = 1e-9
//! outer_tol    = 1e-9
//! pseudo_tol   = 1e-3
//! seed         = 42                      uniqueness-probe perturbations
//! output_dir   = out                     (relative to the working directory)
//! ```
//!
//! All floats in CSV files are written in exponent form and round-trip
//! exactly; identical config + seed produces byte-identical output trees.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::bootstrap::{
    bootstrap_equator, find_bifurcation_modes, uniqueness_probe_at, BootstrapConfig, ModeResult,
    ScanStatus,
};
use crate::error::{Error, Result};
use crate::fields::BlochField;
use crate::lattice::{FourierIndex, IndexSet, LatticeBasis};
use crate::linear_spectrum::{
    apply_matrix, build_hamiltonian_at, classified_spectrum, select_dirac, solve_spectrum,
    SpectralBasis, DEGENERACY_TOL_FACTOR,
};
use crate::nonlinearity::{HoneycombPotential, NonlinearityKind};
use crate::perturbation::necessary_condition_landscape;
use crate::system::System;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Standard,
    Table(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonlinearitySpec {
    Kerr { k0: f64 },
    Saturable { k0: f64 },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub epsilon_v: f64,
    pub nonlinearity: NonlinearitySpec,
    pub cutoff: u32,
    pub epsilons: Vec<f64>,
    pub beta_samples: usize,
    pub inner_tol: f64,
    pub outer_tol: f64,
    pub pseudo_tol: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub quiet: bool,
    /// Optional Dirac-cone sanity sweep near K (CLI flag, not a config key).
    pub sweep: bool,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn parse_file(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse_str(&text, base)
    }

    pub fn parse_str(text: &str, base_dir: &Path) -> Result<RunConfig> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().to_string();
            if map.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(config_err(format!("duplicate key '{key}'")));
            }
        }

        let known = [
            "potential",
            "epsilon_v",
            "nonlinearity",
            "k0",
            "cutoff",
            "epsilons",
            "beta_samples",
            "inner_tol",
            "outer_tol",
            "pseudo_tol",
            "seed",
            "output_dir",
        ];
        for key in map.keys() {
            if !known.contains(&key.as_str()) {
                return Err(config_err(format!("unknown key '{key}'")));
            }
        }

        let get = |key: &str| map.get(key).map(|s| s.as_str());
        let parse_f64 = |key: &str, default: f64| -> Result<f64> {
            match get(key) {
                None => Ok(default),
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|_| config_err(format!("{key}: bad float '{v}'"))),
            }
        };

        let potential = match get("potential").unwrap_or("standard") {
            "standard" => PotentialSpec::Standard,
            other if other.starts_with("table:") => {
                PotentialSpec::Table(base_dir.join(other.trim_start_matches("table:").trim()))
            }
            other => return Err(config_err(format!("potential: unknown form '{other}'"))),
        };
        let epsilon_v = parse_f64("epsilon_v", 0.5)?;
        let k0 = parse_f64("k0", 1.0)?;
        let nonlinearity = match get("nonlinearity").unwrap_or("kerr") {
            "kerr" => NonlinearitySpec::Kerr { k0 },
            "saturable" => NonlinearitySpec::Saturable { k0 },
            other => return Err(config_err(format!("nonlinearity: unknown model '{other}'"))),
        };
        let cutoff: u32 = get("cutoff")
            .unwrap_or("6")
            .parse()
            .map_err(|_| config_err("cutoff: bad integer"))?;
        let epsilons: Vec<f64> = get("epsilons")
            .unwrap_or("0.02,0.04,0.08")
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| config_err(format!("epsilons: bad float '{s}'")))
            })
            .collect::<Result<_>>()?;
        let beta_samples: usize = get("beta_samples")
            .unwrap_or("64")
            .parse()
            .map_err(|_| config_err("beta_samples: bad integer"))?;
        let inner_tol = parse_f64("inner_tol", 1e-9)?;
        let outer_tol = parse_f64("outer_tol", 1e-9)?;
        let pseudo_tol = parse_f64("pseudo_tol", 1e-3)?;
        let seed: u64 = get("seed")
            .unwrap_or("0")
            .parse()
            .map_err(|_| config_err("seed: bad integer"))?;
        let output_dir = PathBuf::from(get("output_dir").unwrap_or("out"));

        let cfg = RunConfig {
            potential,
            epsilon_v,
            nonlinearity,
            cutoff,
            epsilons,
            beta_samples,
            inner_tol,
            outer_tol,
            pseudo_tol,
            output_dir,
            seed,
            quiet: false,
            sweep: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff < 2 {
            return Err(config_err("cutoff must be at least 2"));
        }
        if self.epsilons.is_empty() {
            return Err(config_err("epsilons must not be empty"));
        }
        for w in self.epsilons.windows(2) {
            if w[1] <= w[0] {
                return Err(config_err("epsilons must be strictly ascending"));
            }
        }
        for (name, tol) in [
            ("inner_tol", self.inner_tol),
            ("outer_tol", self.outer_tol),
            ("pseudo_tol", self.pseudo_tol),
        ] {
            if tol.is_nan() || tol <= 0.0 {
                return Err(config_err(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn build_potential(&self) -> Result<HoneycombPotential> {
        let pot = match &self.potential {
            PotentialSpec::Standard => HoneycombPotential::standard(),
            PotentialSpec::Table(path) => load_potential_table(path)?,
        };
        pot.with_amplitude(self.epsilon_v).validated()
    }

    pub fn nonlinearity_kind(&self) -> NonlinearityKind {
        match self.nonlinearity {
            NonlinearitySpec::Kerr { k0 } => NonlinearityKind::Kerr { k0 },
            NonlinearitySpec::Saturable { k0 } => NonlinearityKind::Saturable { k0 },
        }
    }

    pub fn bootstrap_config(&self, epsilon: f64) -> BootstrapConfig {
        let mut b = BootstrapConfig::new(epsilon);
        b.inner_tol = self.inner_tol;
        b.outer_tol = self.outer_tol;
        b.pseudo_tol = self.pseudo_tol;
        b.beta_scan_samples = self.beta_samples;
        b
    }

    pub fn assemble(&self) -> Result<System> {
        System::assemble(self.build_potential()?, self.nonlinearity_kind(), self.cutoff)
    }

    fn say(&self, msg: &str) {
        if !self.quiet {
            println!("{msg}");
        }
    }
}

/// Potential table: lines `m1 m2 value`, `#` comments.
fn load_potential_table(path: &Path) -> Result<HoneycombPotential> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read potential table {}: {e}", path.display())))?;
    let mut coeffs = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(config_err(format!(
                "potential table line {}: expected 'm1 m2 value'",
                lineno + 1
            )));
        }
        let m1: i32 = parts[0]
            .parse()
            .map_err(|_| config_err(format!("potential table line {}: bad m1", lineno + 1)))?;
        let m2: i32 = parts[1]
            .parse()
            .map_err(|_| config_err(format!("potential table line {}: bad m2", lineno + 1)))?;
        let v: f64 = parts[2]
            .parse()
            .map_err(|_| config_err(format!("potential table line {}: bad value", lineno + 1)))?;
        coeffs.insert(FourierIndex::new(m1, m2), v);
    }
    Ok(HoneycombPotential::from_coeffs(coeffs, 1.0))
}

fn fe(x: f64) -> String {
    format!("{x:e}")
}

/// RFC-4180 quoting; plain numerics pass through untouched.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_csv(
    path: &Path,
    meta: &[(&str, String)],
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# honeydirac {}\n", env!("CARGO_PKG_VERSION")));
    for (k, v) in meta {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let quoted: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        out.push_str(&quoted.join(","));
        out.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// JSON with sorted keys: route every payload through `serde_json::Value`,
/// whose object map is a BTreeMap.
fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut file = fs::File::create(path)?;
    let text = serde_json::to_string_pretty(value)?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn meta_pairs(cfg: &RunConfig) -> Vec<(&'static str, String)> {
    let nl = match cfg.nonlinearity {
        NonlinearitySpec::Kerr { k0 } => format!("kerr k0={k0}"),
        NonlinearitySpec::Saturable { k0 } => format!("saturable k0={k0}"),
    };
    vec![
        ("cutoff", cfg.cutoff.to_string()),
        ("epsilon_v", fe(cfg.epsilon_v)),
        ("nonlinearity", nl),
        ("inner_tol", fe(cfg.inner_tol)),
        ("outer_tol", fe(cfg.outer_tol)),
        ("pseudo_tol", fe(cfg.pseudo_tol)),
        ("seed", cfg.seed.to_string()),
    ]
}

fn meta_json(cfg: &RunConfig, gauge: Option<&crate::linear_spectrum::GaugeRecord>) -> Value {
    let mut v = json!({
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "cutoff": cfg.cutoff,
        "epsilon_v": cfg.epsilon_v,
        "nonlinearity": match cfg.nonlinearity {
            NonlinearitySpec::Kerr { k0 } => json!({"model": "kerr", "k0": k0}),
            NonlinearitySpec::Saturable { k0 } => json!({"model": "saturable", "k0": k0}),
        },
        "inner_tol": cfg.inner_tol,
        "outer_tol": cfg.outer_tol,
        "pseudo_tol": cfg.pseudo_tol,
        "seed": cfg.seed,
    });
    if let Some(g) = gauge {
        v["gauge"] = serde_json::to_value(g).expect("gauge record serializes");
    }
    v
}

fn write_field_csv(path: &Path, meta: &[(&str, String)], field: &BlochField) -> Result<()> {
    let rows: Vec<Vec<String>> = field
        .index_set()
        .indices()
        .iter()
        .zip(field.coeffs())
        .map(|(idx, c)| {
            vec![
                idx.m1.to_string(),
                idx.m2.to_string(),
                fe(c.re),
                fe(c.im),
            ]
        })
        .collect();
    write_csv(path, meta, &["m1", "m2", "re", "im"], &rows)
}

fn read_field_csv(path: &Path, set: &std::sync::Arc<IndexSet>) -> Result<BlochField> {
    let text = fs::read_to_string(path)?;
    let mut field = BlochField::zeros(set.clone());
    let mut seen = 0usize;
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("m1") {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(config_err(format!("bad field row in {}", path.display())));
        }
        let m1: i32 = parts[0].parse().map_err(|_| config_err("bad m1"))?;
        let m2: i32 = parts[1].parse().map_err(|_| config_err("bad m2"))?;
        let re: f64 = parts[2].parse().map_err(|_| config_err("bad re"))?;
        let im: f64 = parts[3].parse().map_err(|_| config_err("bad im"))?;
        let pos = set.position(FourierIndex::new(m1, m2)).ok_or_else(|| {
            config_err(format!(
                "field index ({m1},{m2}) not in the cutoff-{} set",
                set.cutoff()
            ))
        })?;
        field.coeffs_mut()[pos] = Complex64::new(re, im);
        seen += 1;
    }
    if seen != set.len() {
        return Err(config_err(format!(
            "field file {} has {seen} rows, expected {}",
            path.display(),
            set.len()
        )));
    }
    Ok(field)
}

/// Linear spectrum, Dirac pair and symmetry report.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir)?;
    let lattice = LatticeBasis::honeycomb();
    let set = IndexSet::build(cfg.cutoff)?;
    let potential = cfg.build_potential()?;
    let pot_report = potential.validate();
    cfg.say(&format!(
        "spectrum: cutoff {} ({} plane waves), epsilon_v = {}",
        cfg.cutoff,
        set.len(),
        cfg.epsilon_v
    ));
    let (h, classified) = classified_spectrum(&lattice, &set, &potential, potential.amplitude)?;

    let scale = classified
        .eigenvalues
        .iter()
        .fold(0.0_f64, |a, &v| a.max(v.abs()))
        .max(1.0);
    let rows: Vec<Vec<String>> = classified
        .eigenvalues
        .iter()
        .zip(&classified.fields)
        .zip(&classified.classes)
        .enumerate()
        .map(|(i, ((&val, field), class))| {
            let mut r = apply_matrix(&h, field);
            r.axpy(Complex64::new(-val, 0.0), field);
            vec![i.to_string(), fe(val), class.name().to_string(), fe(r.norm())]
        })
        .collect();
    let meta = meta_pairs(cfg);
    write_csv(
        &cfg.output_dir.join("spectrum.csv"),
        &meta,
        &["index", "eigenvalue", "class", "residual"],
        &rows,
    )?;

    let tol = DEGENERACY_TOL_FACTOR * scale;
    let dirac: Result<SpectralBasis> = select_dirac(&set, &h, classified.clone(), tol);
    match dirac {
        Ok(basis) => {
            write_field_csv(&cfg.output_dir.join("dirac_a.csv"), &meta, basis.phi_a())?;
            write_field_csv(&cfg.output_dir.join("dirac_b.csv"), &meta, basis.phi_b())?;
            let conj_defect = basis.phi_a().conj_inverted().distance(basis.phi_b());
            let report = json!({
                "meta": meta_json(cfg, Some(&basis.gauge)),
                "dirac_found": true,
                "e0": basis.e0,
                "degeneracy_gap": basis.degeneracy_gap,
                "dirac_classes": ["omega", "omega_bar"],
                "conj_invert_defect": conj_defect,
                "potential_checks": serde_json::to_value(pot_report)?,
            });
            write_json(&cfg.output_dir.join("symmetry_report.json"), &report)?;
            cfg.say(&format!(
                "spectrum: E0 = {:.12}, gap = {:.6}",
                basis.e0, basis.degeneracy_gap
            ));
        }
        Err(Error::Degeneracy { found }) if cfg.epsilon_v == 0.0 => {
            // Free particle: the ground shell is three-fold; report, no pair.
            let report = json!({
                "meta": meta_json(cfg, None),
                "dirac_found": false,
                "lowest_cluster_size": found,
                "e0": classified.eigenvalues[0],
                "potential_checks": serde_json::to_value(pot_report)?,
            });
            write_json(&cfg.output_dir.join("symmetry_report.json"), &report)?;
            cfg.say("spectrum: free particle (no Dirac pair selected)");
        }
        Err(e) => return Err(e),
    }

    if cfg.sweep {
        // Dirac-cone sanity sweep: lowest three eigenvalues along k = K + (t, 0).
        let mut rows = Vec::new();
        for i in 0..21 {
            let t = -0.1 + 0.01 * i as f64;
            let hk = build_hamiltonian_at(&lattice, &set, &potential, potential.amplitude, [t, 0.0]);
            let (vals, _) = solve_spectrum(&hk)?;
            rows.push(vec![fe(t), fe(vals[0]), fe(vals[1]), fe(vals[2])]);
        }
        write_csv(
            &cfg.output_dir.join("dispersion.csv"),
            &meta,
            &["t", "e0", "e1", "e2"],
            &rows,
        )?;
        cfg.say("spectrum: dispersion sweep written");
    }
    Ok(())
}

/// Perturbation report and the necessary-condition landscape.
pub fn cmd_integrals(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir)?;
    let sys = cfg.assemble()?;
    cfg.say(&format!(
        "integrals: I_one = {:.9}, I_int = {:.9}, |I_c_int| = {:.3e}",
        sys.report.i_one,
        sys.report.i_int,
        sys.report.i_c_int.norm()
    ));
    let report = json!({
        "meta": meta_json(cfg, Some(&sys.basis.gauge)),
        "i_one": sys.report.i_one,
        "i_int": sys.report.i_int,
        "i_a_minus_i_b": sys.report.i_a_minus_i_b,
        "t2": complex_json(sys.report.t2),
        "t2_unrestricted": complex_json(sys.report.t2_unrestricted),
        "m_integral": complex_json(sys.report.m_integral),
        "i_c_int": complex_json(sys.report.i_c_int),
        "theta_pred": sys.report.theta_pred,
        "nondegeneracy": sys.report.nondegeneracy,
        "n_terms_t2": sys.report.n_terms_t2,
        "warn_degenerate": sys.report.warn_degenerate,
        "warn_interaction": sys.report.warn_interaction,
        "n_excited_states": sys.basis.n_excited(),
    });
    write_json(&cfg.output_dir.join("perturbation_report.json"), &report)?;

    let rows: Vec<Vec<String>> = necessary_condition_landscape(&sys.report, 33, 24)
        .iter()
        .map(|r| vec![fe(r.theta), fe(r.phase), fe(r.value)])
        .collect();
    write_csv(
        &cfg.output_dir.join("landscape.csv"),
        &meta_pairs(cfg),
        &["theta", "phase", "value"],
        &rows,
    )?;
    Ok(())
}

fn mode_kind(index: usize) -> &'static str {
    match index {
        0 => "polar_a",
        1 => "polar_b",
        _ => "equator",
    }
}

fn mode_json(
    cfg: &RunConfig,
    sys: &System,
    mode: &ModeResult,
    index: usize,
    field_file: &str,
) -> Value {
    json!({
        "meta": meta_json(cfg, Some(&sys.basis.gauge)),
        "kind": mode_kind(index),
        "beta": mode.beta,
        "pair_a": complex_json(mode.pair.a),
        "pair_b": complex_json(mode.pair.b),
        "epsilon": mode.epsilon,
        "e_shift": complex_json(mode.e_shift),
        "im_energy": mode.im_energy,
        "residual": mode.residual,
        "consistency_residual": mode.consistency_residual,
        "correction_norm": mode.correction_norm,
        "iterations": { "inner": mode.inner_iterations, "outer": mode.outer_iterations },
        "converged": mode.converged,
        "true_eigenpair": mode.is_true_eigenpair,
        "field_file": field_file,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in points {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Bifurcation scan over the ε list, with scaling-law regression summary.
pub fn cmd_bifurcate(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir)?;
    let sys = cfg.assemble()?;
    let meta = meta_pairs(cfg);

    let mut summary_rows: Vec<Vec<String>> = Vec::new();
    let mut corr_points: Vec<(f64, f64)> = Vec::new();
    let mut energy_points: Vec<(f64, f64)> = Vec::new();
    let mut im_points: Vec<(f64, f64)> = Vec::new();
    let mut contraction: Vec<Value> = Vec::new();
    // generic angle: a maximum of |sin(3β + arg I_c-int)|
    let beta_generic = -sys.report.theta_pred + std::f64::consts::FRAC_PI_6;

    for (i, &eps) in cfg.epsilons.iter().enumerate() {
        let bcfg = cfg.bootstrap_config(eps);
        let label = format!("eps{i}_{eps:.4}");
        cfg.say(&format!("bifurcate: epsilon = {eps}"));
        let scan = find_bifurcation_modes(&sys, &bcfg)?;

        let mut emeta = meta.clone();
        emeta.push(("epsilon", fe(eps)));
        let curve_rows: Vec<Vec<String>> = scan
            .curve
            .iter()
            .map(|p| vec![fe(p.beta), fe(p.im_e), fe(p.re_e)])
            .collect();
        write_csv(
            &cfg.output_dir.join(format!("curve_{label}.csv")),
            &emeta,
            &["beta", "im_e", "re_e"],
            &curve_rows,
        )?;

        match scan.status {
            ScanStatus::CountMismatch { found } => {
                return Err(Error::BifurcationCount { found });
            }
            ScanStatus::PredictionVoid => {
                summary_rows.push(vec![
                    fe(eps),
                    "-".into(),
                    "prediction_void".into(),
                    "".into(),
                    "".into(),
                    "".into(),
                    "".into(),
                    "".into(),
                ]);
                continue;
            }
            ScanStatus::EightModes => {}
        }

        for (k, mode) in scan.modes.iter().enumerate() {
            let field_file = format!("mode_{label}_{k}_field.csv");
            write_field_csv(&cfg.output_dir.join(&field_file), &emeta, &mode.phi)?;
            write_json(
                &cfg.output_dir.join(format!("mode_{label}_{k}.json")),
                &mode_json(cfg, &sys, mode, k, &field_file),
            )?;
            summary_rows.push(vec![
                fe(eps),
                k.to_string(),
                mode_kind(k).to_string(),
                mode.beta.map(fe).unwrap_or_default(),
                fe(mode.e_shift.re),
                fe(mode.e_shift.im),
                fe(mode.residual),
                mode.is_true_eigenpair.to_string(),
            ]);
        }

        let polar = &scan.modes[0];
        corr_points.push((eps.ln(), polar.correction_norm.ln()));
        energy_points.push((eps.ln(), polar.e_shift.re.abs().ln()));
        let generic = bootstrap_equator(&sys, beta_generic, &bcfg)?;
        im_points.push((eps.ln(), generic.e_shift.im.abs().ln()));
        let max_ratio = polar
            .outer_contraction
            .iter()
            .fold(0.0_f64, |a, &r| a.max(r));
        contraction.push(json!({
            "epsilon": eps,
            "max_outer_ratio": max_ratio,
            "fitted_c": max_ratio / (eps * eps),
            "root_deviation": scan.root_deviation,
        }));
    }

    write_csv(
        &cfg.output_dir.join("summary.csv"),
        &meta,
        &[
            "epsilon",
            "mode",
            "kind",
            "beta",
            "re_eshift",
            "im_eshift",
            "residual",
            "true_eigenpair",
        ],
        &summary_rows,
    )?;

    let fit = |pts: &[(f64, f64)]| -> Value {
        if pts.len() >= 2 {
            json!(least_squares_slope(pts))
        } else {
            Value::Null
        }
    };
    let scaling = json!({
        "meta": meta_json(cfg, Some(&sys.basis.gauge)),
        "correction_norm_exponent": fit(&corr_points),
        "energy_shift_exponent": fit(&energy_points),
        "imaginary_energy_exponent": fit(&im_points),
        "beta_generic": beta_generic,
        "outer_contraction": contraction,
    });
    write_json(&cfg.output_dir.join("scaling.json"), &scaling)?;
    cfg.say("bifurcate: done");
    Ok(())
}

/// Re-certify stored modes: residuals, uniqueness probes, rotation generation.
pub fn cmd_verify(cfg: &RunConfig) -> Result<()> {
    let sys = cfg.assemble()?;
    let dir = &cfg.output_dir;
    let mut mode_files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("mode_") && n.ends_with(".json"))
                .unwrap_or(false)
        })
        .collect();
    mode_files.sort();
    if mode_files.is_empty() {
        return Err(config_err(format!(
            "no mode files found in {}",
            dir.display()
        )));
    }

    let mut checks: Vec<Value> = Vec::new();
    let mut all_pass = true;
    for (i, path) in mode_files.iter().enumerate() {
        let doc: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
        let epsilon = doc["epsilon"]
            .as_f64()
            .ok_or_else(|| config_err("mode file missing epsilon"))?;
        let e_re = doc["e_shift"]["re"]
            .as_f64()
            .ok_or_else(|| config_err("mode file missing e_shift"))?;
        let field_file = doc["field_file"]
            .as_str()
            .ok_or_else(|| config_err("mode file missing field_file"))?;
        let kind = doc["kind"].as_str().unwrap_or("unknown").to_string();
        let field = read_field_csv(&dir.join(field_file), &sys.index_set)?;
        let bcfg = cfg.bootstrap_config(epsilon);

        let energy = sys.basis.e0 + e_re;
        let residual = sys.nonlinear_residual(&field, energy)?;
        let residual_ok = residual <= 10.0 * bcfg.outer_tol;

        let (pair, eps_measured) = sys.measure_pair(&field)?;
        let unique =
            uniqueness_probe_at(&sys, pair, &field, 5, 0.5, cfg.seed + i as u64, &bcfg)?;

        // rotation generation: a rotated equator mode is again a mode, with
        // β shifted by 2π/3 and the same eigenvalue
        let rotation_check = if kind == "equator" {
            let rotated = field.rotated();
            let rot_residual = sys.nonlinear_residual(&rotated, energy)?;
            let (rot_pair, _) = sys.measure_pair(&rotated)?;
            let beta = doc["beta"].as_f64().unwrap_or(0.0);
            let expected = beta + 2.0 * std::f64::consts::PI / 3.0;
            let mut shift = (rot_pair.beta() - expected).rem_euclid(2.0 * std::f64::consts::PI);
            if shift > std::f64::consts::PI {
                shift -= 2.0 * std::f64::consts::PI;
            }
            let ok = rot_residual <= 10.0 * bcfg.outer_tol && shift.abs() < 1e-9;
            Some(json!({
                "residual": rot_residual,
                "beta_shift_defect": shift.abs(),
                "pass": ok,
            }))
        } else {
            None
        };
        let rotation_ok = rotation_check
            .as_ref()
            .map(|r| r["pass"].as_bool().unwrap_or(false))
            .unwrap_or(true);

        let pass = residual_ok && unique.all_returned && rotation_ok;
        all_pass &= pass;
        let mut entry = json!({
            "file": path.file_name().and_then(|n| n.to_str()).unwrap_or(""),
            "kind": kind,
            "epsilon": epsilon,
            "epsilon_measured": eps_measured,
            "residual": residual,
            "residual_ok": residual_ok,
            "uniqueness": serde_json::to_value(&unique)?,
            "pass": pass,
        });
        if let Some(rc) = rotation_check {
            entry["rotation"] = rc;
        }
        checks.push(entry);
        cfg.say(&format!(
            "verify: {} {} residual {:.3e} [{}]",
            path.file_name().and_then(|n| n.to_str()).unwrap_or(""),
            kind,
            residual,
            if pass { "pass" } else { "FAIL" }
        ));
    }

    let report = json!({
        "meta": meta_json(cfg, Some(&sys.basis.gauge)),
        "checks": checks,
        "pass": all_pass,
    });
    write_json(&dir.join("verify_report.json"), &report)?;
    if !all_pass {
        return Err(Error::Certification(
            "one or more stored modes failed re-certification".into(),
        ));
    }
    cfg.say("verify: all modes pass");
    Ok(())
}
