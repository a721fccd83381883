//! Scenario runner: executes the requested checks and writes reports.

use std::fmt::Debug;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{exhaustive_family, run_family, FiniteCommAlgebra};
use crate::continuity::{kernel_family_bound, sweep, MapFamily};
use crate::decomposition::{apply_fk, assemble_remainder, build_plan, reconstruct, DecompositionPlan};
use crate::extension::{build_extension_with, detect_exceptional, interpolation_error, CurveFunction, ExtensionOptions, FredholmSolver};
use crate::geometry::validate_admissible;
use crate::scenario::{bundled, list_scenarios, resolve, Check, Scenario, ScenarioError};

/// Inward offset of the points where decomposition residuals are measured.
pub const RESIDUAL_OFFSET: f64 = 1e-3;
/// Largest interpolation error accepted for an extension.
pub const EXTENSION_TOL: f64 = 1e-6;
/// Interior samples for the interpolation error.
pub const EXTENSION_SAMPLES: usize = 100;
/// Largest `(max - min) / max` of the continuity ratios.
pub const CONTINUITY_SPREAD: f64 = 0.3;
/// Largest ratio between the `F_k` norm estimates of two family members.
pub const FK_NORM_RATIO: f64 = 1.5;
/// Largest algebra dimension of the exhaustive family.
pub const FAMILY_DIM: usize = 6;
const ADMISSIBILITY_GRID: usize = 64;

#[derive(Debug, Parser)]
#[command(name = "sepsing", version, about = "Separation of singularities and polydisk extensions on domains with corners")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a bundled scenario or a scenario JSON file.
    Run {
        /// Bundled scenario name or path to a JSON file.
        scenario: String,
        /// Directory for the artifacts.
        #[arg(long)]
        out: PathBuf,
        /// Approximate quadrature node budget before grading.
        #[arg(long)]
        nodes: Option<usize>,
        /// Corner grading depth.
        #[arg(long)]
        grading: Option<usize>,
        /// Singular value cutoff of the Fredholm solve.
        #[arg(long)]
        tau: Option<f64>,
        /// Seed for random densities and samples.
        #[arg(long)]
        seed: Option<u64>,
        /// Skip the jet correction at exceptional points.
        #[arg(long)]
        no_jet_correction: bool,
    },
    /// Names of the bundled scenarios.
    List,
    /// Print a bundled scenario as parsed.
    Describe { name: String },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("cannot write {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub nodes: Option<usize>,
    pub grading: Option<usize>,
    pub tau: Option<f64>,
    pub seed: Option<u64>,
    pub no_jet_correction: bool,
}

impl Overrides {
    pub fn apply(&self, s: &mut Scenario) {
        if let Some(n) = self.nodes {
            s.solver.nodes = n;
        }
        if let Some(d) = self.grading {
            s.solver.grading = d;
        }
        if let Some(t) = self.tau {
            s.solver.tau = t;
        }
        if let Some(seed) = self.seed {
            s.solver.seed = seed;
        }
        if self.no_jet_correction {
            s.solver.jet_correction = false;
        }
    }
}

/// Failure of one check or of the run itself.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct FailureRecord {
    pub kind: String,
    pub message: String,
}

impl FailureRecord {
    pub fn from_error<E: Debug + std::fmt::Display>(e: &E) -> Self {
        FailureRecord { kind: error_kind(e), message: e.to_string() }
    }
}

/// Innermost variant name of a nested error, read off its `Debug` form.
pub fn error_kind<E: Debug>(e: &E) -> String {
    let s = format!("{e:?}");
    let mut rest = s.as_str();
    let mut kind = "";
    loop {
        let end = rest.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(rest.len());
        if end == 0 {
            break;
        }
        kind = &rest[..end];
        let tail = &rest[end..];
        match tail.strip_prefix('(') {
            Some(inner) if inner.starts_with(|c: char| c.is_ascii_uppercase()) => rest = inner,
            _ => break,
        }
    }
    kind.to_string()
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub passed: bool,
    pub metrics: Value,
    pub failures: Vec<FailureRecord>,
}

impl CheckRecord {
    fn new(check: &str) -> Self {
        CheckRecord { check: check.into(), passed: true, metrics: json!({}), failures: Vec::new() }
    }

    fn fail<E: Debug + std::fmt::Display>(&mut self, e: &E) {
        self.passed = false;
        self.failures.push(FailureRecord::from_error(e));
    }

    fn fail_with(&mut self, kind: &str, message: String) {
        self.passed = false;
        self.failures.push(FailureRecord { kind: kind.into(), message });
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub passed: bool,
    pub nodes: usize,
    pub grading: usize,
    pub tau: f64,
    pub seed: u64,
    pub jet_correction: bool,
    pub checks: Vec<CheckRecord>,
    pub error: Option<FailureRecord>,
}

/// Files written by a run, by name.
#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
}

impl Artifacts {
    fn put(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_str())
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let io = |p: &Path, e: std::io::Error| CliError::Io { path: p.display().to_string(), msg: e.to_string() };
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        for (name, body) in &self.files {
            let p = dir.join(name);
            fs::write(&p, body).map_err(|e| io(&p, e))?;
        }
        Ok(())
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}")) + "\n"
}

/// Base panel count for a node budget of 16-point panels.
pub fn base_panels(nodes: usize) -> usize {
    (nodes / 16).max(2)
}

fn sup(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Run every requested check of a scenario; never fails, errors become records.
pub fn run_scenario(s: &Scenario) -> (RunSummary, Artifacts) {
    let mut art = Artifacts::default();
    let mut checks = Vec::new();
    let wants_plan = s.wants(Check::Decomposition) || s.wants(Check::Extension);
    let mut plan = None;
    if wants_plan || s.wants(Check::Continuity) {
        let mut rec = CheckRecord::new("admissibility");
        admissibility(s, &mut rec, &mut art, &mut plan);
        checks.push(rec);
    }
    let solver = match (&plan, wants_plan) {
        (Some(p), true) => Some(assemble_remainder(p).map_err(|e| e.to_string()).and_then(|k| FredholmSolver::new(&k.matrix, s.solver.tau).map_err(|e| e.to_string()))),
        _ => None,
    };
    if let (Some(p), Some(Ok(solver))) = (&plan, &solver) {
        art.put("sigma.csv", sigma_csv(&solver.sigma()));
        if s.wants(Check::Decomposition) {
            let mut rec = CheckRecord::new("decomposition");
            decomposition(s, p, solver, &mut rec, &mut art);
            checks.push(rec);
        }
        if s.wants(Check::Extension) {
            let mut rec = CheckRecord::new("extension");
            extension(s, p, solver, &mut rec, &mut art);
            checks.push(rec);
        }
    } else if wants_plan {
        for (c, name) in [(Check::Decomposition, "decomposition"), (Check::Extension, "extension")] {
            if s.wants(c) {
                let mut rec = CheckRecord::new(name);
                match &solver {
                    Some(Err(msg)) => rec.fail_with("Solver", msg.clone()),
                    _ => rec.fail_with("NoPlan", "decomposition plan could not be built".into()),
                }
                checks.push(rec);
            }
        }
    }
    if s.wants(Check::Continuity) && (s.family.is_some() || !s.checks.contains(&Check::All)) {
        let mut rec = CheckRecord::new("continuity");
        continuity(s, &mut rec, &mut art);
        checks.push(rec);
    }
    if s.wants(Check::Algebra) && (!s.algebras.is_empty() || !s.checks.contains(&Check::All)) {
        let mut rec = CheckRecord::new("algebra");
        algebra(s, &mut rec, &mut art);
        checks.push(rec);
    }
    let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
    let summary = RunSummary {
        scenario: s.name.clone(),
        passed,
        nodes: s.solver.nodes,
        grading: s.solver.grading,
        tau: s.solver.tau,
        seed: s.solver.seed,
        jet_correction: s.solver.jet_correction,
        checks,
        error: None,
    };
    art.put("summary.json", pretty(&summary));
    (summary, art)
}

fn admissibility(s: &Scenario, rec: &mut CheckRecord, art: &mut Artifacts, plan: &mut Option<DecompositionPlan>) {
    let system = match s.system() {
        Ok(sys) => sys,
        Err(e) => return rec.fail(&e),
    };
    let built = build_plan(&system, s.solver.corner_fraction, base_panels(s.solver.nodes), s.solver.grading);
    let report = match &built {
        Ok(p) => validate_admissible(&p.system, ADMISSIBILITY_GRID),
        Err(_) => validate_admissible(&system, ADMISSIBILITY_GRID),
    };
    art.put("admissibility.json", pretty(&report));
    for c in report.failures() {
        rec.fail_with("Inadmissible", format!("condition ({}): {}", c.name, c.detail));
    }
    match built {
        Ok(p) => {
            rec.metrics = json!({ "conditions": report.checks.len(), "plan": p.summary() });
            *plan = Some(p);
        }
        Err(e) => rec.fail(&e),
    }
}

fn sigma_csv(sigma: &[f64]) -> String {
    let mut out = String::from("index,sigma\n");
    for (i, v) in sigma.iter().enumerate() {
        out.push_str(&format!("{i},{v:.16e}\n"));
    }
    out
}

fn decomposition(s: &Scenario, plan: &DecompositionPlan, solver: &FredholmSolver, rec: &mut CheckRecord, art: &mut Artifacts) {
    let exprs = match s.function_exprs() {
        Ok(e) => e,
        Err(e) => return rec.fail(&e),
    };
    let points = plan.inward_points(RESIDUAL_OFFSET, 1);
    let mut csv = String::from("function,x,y,residual\n");
    let mut rows = Vec::new();
    for (src, f) in s.functions.iter().zip(&exprs) {
        let values = plan.sample(|z| f.eval(z));
        let scale = sup(&values).max(1.0);
        let outcome = solver.solve(&values).map_err(|e| FailureRecord::from_error(&e)).and_then(|sol| {
            let fk = (0..plan.n()).map(|k| apply_fk(plan, &sol.g, k)).collect::<Result<Vec<_>, _>>().map_err(|e| FailureRecord::from_error(&e))?;
            let mut worst = 0.0f64;
            for z in &points {
                let r = (reconstruct(plan, &fk, *z).map_err(|e| FailureRecord::from_error(&e))? - f.eval(*z)).norm();
                worst = worst.max(r);
                csv.push_str(&format!("{src:?},{:.16e},{:.16e},{r:.16e}\n", z.re, z.im));
            }
            Ok((sol, worst))
        });
        match outcome {
            Ok((sol, worst)) => {
                let ok = worst <= s.solver.tolerance * scale;
                if !ok {
                    rec.fail_with("ResidualTooLarge", format!("{src}: residual {worst:.3e} exceeds {:.1e}", s.solver.tolerance * scale));
                }
                rows.push(json!({ "function": src, "residual": worst, "boundary_residual": sol.full_residual,
                    "obstruction": sol.obstruction, "cokernel_dim": sol.cokernel_dim, "passed": ok }));
            }
            Err(f) => {
                rows.push(json!({ "function": src, "error": f }));
                rec.passed = false;
                rec.failures.push(f);
            }
        }
    }
    rec.metrics = json!({ "nodes": plan.len(), "points": points.len(), "cokernel_dim": solver.cokernel_dim(), "functions": rows });
    art.put("residuals.csv", csv);
}

fn extension(s: &Scenario, plan: &DecompositionPlan, solver: &FredholmSolver, rec: &mut CheckRecord, art: &mut Artifacts) {
    let opts = ExtensionOptions { tau: s.solver.tau, tolerance: s.solver.tolerance, jet_correction: s.solver.jet_correction, ..ExtensionOptions::default() };
    let exceptional = match detect_exceptional(&plan.system, opts.grid) {
        Ok(x) => x,
        Err(e) => return rec.fail(&e),
    };
    let mut rows = Vec::new();
    let mut exports = Vec::new();
    for src in &s.curve_functions {
        let target = match CurveFunction::parse(src) {
            Ok(t) => t,
            Err(e) => {
                rec.fail(&e);
                continue;
            }
        };
        let built = build_extension_with(plan, solver, &target, &opts, &exceptional)
            .and_then(|ext| interpolation_error(&ext, &plan.system, &target, EXTENSION_SAMPLES).map(|err| (ext, err)));
        match built {
            Ok((ext, (err, size))) => {
                let ok = err < EXTENSION_TOL && ext.norm_bound.is_finite();
                if !ok {
                    rec.fail_with("InterpolationError", format!("{src}: interpolation error {err:.3e}"));
                }
                rows.push(json!({ "function": src, "interpolation_error": err, "max_value": size, "norm_bound": ext.norm_bound,
                    "order": ext.diagnostics.order, "residual": ext.diagnostics.residual, "passed": ok }));
                exports.push(json!({ "function": src, "extension": ext.export() }));
            }
            Err(e) => {
                let f = FailureRecord::from_error(&e);
                rows.push(json!({ "function": src, "error": f }));
                exports.push(json!({ "function": src, "error": f }));
                rec.fail(&e);
            }
        }
    }
    rec.metrics = json!({ "exceptional_points": exceptional.len(), "exceptional_warning": exceptional.warning, "functions": rows });
    art.put("extension.json", pretty(&exports));
}

fn continuity(s: &Scenario, rec: &mut CheckRecord, art: &mut Artifacts) {
    let fam = match MapFamily::from_scenario(s, base_panels(s.solver.nodes), s.solver.grading) {
        Ok(f) => f,
        Err(e) => return rec.fail(&e),
    };
    let report = match sweep(&fam, s.solver.seed) {
        Ok(r) => r,
        Err(e) => return rec.fail(&e),
    };
    let pairs = s.family.as_ref().map_or(10_000, |f| f.kernel_pairs);
    let kernel = kernel_family_bound(&fam, pairs, s.solver.seed);
    art.put("continuity.csv", report.to_csv());
    if !report.ratios_finite() {
        rec.fail_with("NonFiniteRatio", "an opdist/cdist ratio is not finite".into());
    }
    if report.spread >= CONTINUITY_SPREAD {
        rec.fail_with("RatioSpread", format!("ratio spread {:.3} is not below {CONTINUITY_SPREAD}", report.spread));
    }
    if report.fk_norm_ratio > FK_NORM_RATIO {
        rec.fail_with("NormDrift", format!("F_k norm estimates differ by a factor {:.3}", report.fk_norm_ratio));
    }
    let kernel_c = match kernel {
        Ok(c) if c.is_finite() => Some(c),
        Ok(c) => {
            rec.fail_with("NonFiniteKernelBound", format!("kernel constant {c}"));
            None
        }
        Err(e) => {
            rec.fail(&e);
            None
        }
    };
    rec.metrics = json!({ "c_fit": report.c_fit, "spread": report.spread, "fk_norms": report.fk_norms,
        "fk_norm_ratio": report.fk_norm_ratio, "kernel_constant": kernel_c, "kernel_pairs": pairs, "nodes": report.nodes });
}

fn algebra(s: &Scenario, rec: &mut CheckRecord, art: &mut Artifacts) {
    let mut algebras = Vec::new();
    for v in &s.algebras {
        match FiniteCommAlgebra::from_json(v) {
            Ok(a) => algebras.push(a),
            Err(e) => rec.fail(&e),
        }
    }
    let listed = run_family(&algebras, s.solver.seed);
    let family = exhaustive_family(FAMILY_DIM).and_then(|f| run_family(&f, s.solver.seed));
    let mut body = json!({});
    for (name, r) in [("listed", listed), ("family", family)] {
        match r {
            Ok(report) => {
                if report.failures > 0 {
                    rec.fail_with("GluingFailed", format!("{name}: {} of {} gluings failed", report.failures, report.gluings));
                }
                rec.metrics[name] = json!({ "algebras": report.algebras, "gluings": report.gluings, "failures": report.failures,
                    "worst_interpolation": report.worst_interpolation, "worst_roundtrip": report.worst_roundtrip });
                body[name] = serde_json::to_value(&report).unwrap_or(Value::Null);
            }
            Err(e) => rec.fail(&e),
        }
    }
    art.put("algebra.json", pretty(&body));
}

fn thread_cap() {
    if let Some(n) = std::env::var("SEPSING_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|n| *n > 0) {
        // a second initialization in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn error_summary(name: &str, err: FailureRecord) -> RunSummary {
    RunSummary {
        scenario: name.to_string(),
        passed: false,
        nodes: 0,
        grading: 0,
        tau: 0.0,
        seed: 0,
        jet_correction: false,
        checks: Vec::new(),
        error: Some(err),
    }
}

/// Execute a command; returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    thread_cap();
    match cli.command {
        Command::List => {
            for n in list_scenarios() {
                println!("{n}");
            }
            0
        }
        Command::Describe { name } => match bundled(&name) {
            Ok(s) => {
                print!("{}", pretty(&s));
                0
            }
            Err(e) => {
                eprint!("{}", pretty(&json!({ "error": FailureRecord::from_error(&e) })));
                2
            }
        },
        Command::Run { scenario, out, nodes, grading, tau, seed, no_jet_correction } => {
            let overrides = Overrides { nodes, grading, tau, seed, no_jet_correction };
            let mut s = match resolve(&scenario) {
                Ok(s) => s,
                Err(e) => {
                    let summary = error_summary(&scenario, FailureRecord::from_error(&e));
                    let body = pretty(&summary);
                    eprint!("{body}");
                    let mut art = Artifacts::default();
                    art.put("summary.json", body);
                    let _ = art.write(&out);
                    return 2;
                }
            };
            overrides.apply(&mut s);
            let (summary, art) = run_scenario(&s);
            if let Err(e) = art.write(&out) {
                eprint!("{}", pretty(&json!({ "error": FailureRecord::from_error(&e) })));
                return 2;
            }
            for c in &summary.checks {
                println!("{:<14} {}", c.check, if c.passed { "pass" } else { "FAIL" });
                for f in &c.failures {
                    println!("  {}: {}", f.kind, f.message);
                }
            }
            if summary.passed {
                0
            } else {
                1
            }
        }
    }
}
