//! Batch commands behind the `precs` binary: `evolve`, `grid` and `verify`.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::config::{ConfigError, RunConfig};
use crate::dynamics::{
    analytic_trajectory, branch_overlap, default_step, integrate_eom, orbit_center,
    reduced_density_matrix,
};
use crate::error::Error;
use crate::fock::FockOracle;
use crate::precs::{
    self, chi_squared, differential_entropy, disjoint_with_gap, eps_supports, evaluate_field,
    readout, rho_from_precs, shannon_entropy, write_field_csv, write_supports_csv,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_TRUNCATION: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(Error::TruncationLeak { .. }) => EXIT_TRUNCATION,
            _ => EXIT_CONFIG,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `name` under `dir` through a temporary file and a rename.
fn write_atomic(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(io_err(&tmp))?;
    w.into_inner()
        .map_err(|e| e.into_error())
        .and_then(|f| f.sync_all())
        .map_err(io_err(&tmp))?;
    fs::rename(&tmp, &target).map_err(io_err(&target))?;
    Ok(target)
}

fn num(x: f64) -> String {
    precs::io_fmt(x)
}

/// Off-diagonal index pairs `(i, j)` with `i < j`.
fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Time series of the reduced state and the apparatus distribution,
/// written to `evolve.csv`.
pub fn cmd_evolve(config: &RunConfig) -> Result<PathBuf, CliError> {
    let params = &config.params;
    let c = &config.amplitudes;
    let n = params.levels();
    let grid = config.grid_for(config.t_max())?;
    let oracle = if config.oracle {
        Some(FockOracle::new(params, config.n_max)?)
    } else {
        None
    };

    let mut header = vec!["t".to_string()];
    for (i, j) in pairs(n) {
        header.push(format!("rho_{i}_{j}_re"));
        header.push(format!("rho_{i}_{j}_im"));
    }
    for (i, j) in pairs(n) {
        header.push(format!("overlap_{i}_{j}"));
    }
    header.extend(["purity".into(), "entropy".into(), "disjoint".into()]);
    header.extend((0..n).map(|g| format!("p_{g}")));
    if oracle.is_some() {
        header.push("oracle_trace_distance".into());
    }

    let mut rows = Vec::with_capacity(config.times.len());
    for &t in &config.times {
        let rho = reduced_density_matrix(params, c, t)?;
        let field = evaluate_field(params, c, t, &grid)?;
        let supports = eps_supports(&field, config.eps)?;
        let separated = disjoint_with_gap(&grid, &supports, config.gap_cells);

        let mut row = vec![num(t)];
        for (i, j) in pairs(n) {
            row.push(num(rho.get(i, j).re));
            row.push(num(rho.get(i, j).im));
        }
        for (i, j) in pairs(n) {
            row.push(num(branch_overlap(params, i, j, t).norm()));
        }
        row.push(num(rho.purity()));
        row.push(num(differential_entropy(&field)));
        row.push(if separated { "1" } else { "0" }.into());
        if separated {
            let r = readout(params, c, &field, &supports)?;
            row.extend(r.probabilities.iter().map(|&p| num(p)));
        } else {
            row.extend(std::iter::repeat_n(String::new(), n));
        }
        if let Some(o) = &oracle {
            row.push(num(o.exact_rho_gamma(c, t)?.trace_distance(&rho)));
        }
        rows.push(row.join(","));
    }

    write_atomic(&config.out, "evolve.csv", |w| {
        writeln!(w, "{}", header.join(","))?;
        for r in &rows {
            writeln!(w, "{r}")?;
        }
        Ok(())
    })
}

/// File stem for a time value, e.g. `0.628319`.
pub fn time_label(t: f64) -> String {
    format!("{t:.6}")
}

/// Grid CSV `grid_t<t>.csv` and support map `supports_t<t>.csv`.
pub fn cmd_grid(config: &RunConfig, t: f64) -> Result<(PathBuf, PathBuf), CliError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(ConfigError {
            line: None,
            message: format!("--time must be a non-negative number, got {t}"),
        }
        .into());
    }
    let grid = config.grid_for(t.max(config.t_max()))?;
    let field = evaluate_field(&config.params, &config.amplitudes, t, &grid)?;
    let supports = eps_supports(&field, config.eps)?;
    let label = time_label(t);
    let grid_path = write_atomic(&config.out, &format!("grid_t{label}.csv"), |w| {
        write_field_csv(&field, w)
    })?;
    let support_path = write_atomic(&config.out, &format!("supports_t{label}.csv"), |w| {
        write_supports_csv(&field, &supports, w)
    })?;
    Ok((grid_path, support_path))
}

/// One oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

impl Check {
    fn below(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            passed: measured < tolerance,
            note: String::new(),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            EXIT_OK
        } else {
            EXIT_VERIFY_FAILED
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = write!(
                s,
                "{} {:<28} measured {:.3e}  tolerance {:.1e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.tolerance
            );
            if !c.note.is_empty() {
                let _ = write!(s, "  ({})", c.note);
            }
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("check,measured,tolerance,status,note\n");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                c.name,
                num(c.measured),
                num(c.tolerance),
                if c.passed { "PASS" } else { "FAIL" },
                c.note.replace(',', ";")
            );
        }
        s
    }
}

/// Deterministic probe points: a golden-angle spiral filling the disk of
/// radius `radius`.
pub fn probe_points(count: usize, radius: f64) -> Vec<Complex64> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let r = radius * ((k as f64 + 0.5) / count as f64).sqrt();
            Complex64::from_polar(r, golden * k as f64)
        })
        .collect()
}

/// Runs the analytic-versus-oracle checks over the configured times.
pub fn run_verification(config: &RunConfig) -> Result<VerifyReport, CliError> {
    let params = &config.params;
    let c = &config.amplitudes;
    let n = params.levels();
    let oracle = FockOracle::new(params, config.n_max)?;
    let grid = config.grid_for(config.t_max())?;
    let mut checks = Vec::new();

    // Orbits: RK4 against the closed form on a grid starting at 0.
    let mut rk_times = config.times.clone();
    if rk_times[0] != 0.0 {
        rk_times.insert(0, 0.0);
    }
    let step = config.step.unwrap_or_else(|| default_step(params));
    let mut rk_err = 0.0f64;
    let mut circle_err = 0.0f64;
    for g in 0..n {
        let traj = integrate_eom(params, g, &rk_times, step)?;
        for (k, &t) in rk_times.iter().enumerate() {
            let exact = analytic_trajectory(params, g, t);
            rk_err = rk_err.max((traj.points[k] - exact).norm());
            if let Some(centre) = orbit_center(params, g) {
                let radius = (params.coupling(g) / params.nu()).abs();
                circle_err = circle_err.max(((exact - centre).norm() - radius).abs());
            }
        }
    }
    checks.push(Check::below("trajectory_rk4", rk_err, 1e-8).with_note(format!("step {step:.3e}")));
    checks.push(Check::below("orbit_circle", circle_err, 1e-9));

    let mut infidelity = 0.0f64;
    let mut phase_res = 0.0f64;
    let mut overlap_err = 0.0f64;
    let mut rho_err = 0.0f64;
    let mut husimi_err = 0.0f64;
    let mut norm_err = 0.0f64;
    let mut precs_err = 0.0f64;
    let mut invariant_failures = Vec::new();
    let mut plateau_err: Option<f64> = None;
    let mut bound_ratio: Option<f64> = None;
    let plateau = 1.0 + shannon_entropy(&c.weights());
    // Keep probes where the truncation rule still holds.
    let probe_radius = probe_radius(params.hbar(), config.n_max);
    let probes = probe_points(100, probe_radius);

    for (idx, &t) in config.times.iter().enumerate() {
        let branches: Vec<_> = (0..n)
            .map(|g| oracle.propagate_branch(g, t))
            .collect::<Result<_, _>>()?;
        for g in 0..n {
            let (fid, res) = oracle.fidelity_phase_check(g, t)?;
            infidelity = infidelity.max(1.0 - fid);
            phase_res = phase_res.max(res.abs());
        }
        for (i, j) in pairs(n) {
            let fock = branches[j].inner(&branches[i]);
            overlap_err = overlap_err.max((fock - branch_overlap(params, j, i, t)).norm());
        }
        let rho = reduced_density_matrix(params, c, t)?;
        rho_err = rho_err.max(rho.trace_distance(&oracle.exact_rho_gamma(c, t)?));
        if let Err(msg) = rho.validate() {
            invariant_failures.push(format!("t={t}: {msg}"));
        }
        // Husimi identity on a subset of times keeps the run short.
        if idx % 8 == 0 || idx + 1 == config.times.len() {
            for &w in &probes {
                let q = oracle.husimi(c, t, w)?;
                husimi_err = husimi_err.max((q - chi_squared(params, c, t, w)).abs());
            }
        }
        let field = evaluate_field(params, c, t, &grid)?;
        norm_err = norm_err.max((field.norm() - 1.0).abs());
        let rebuilt = rho_from_precs(params, c, &field)?;
        precs_err = precs_err.max(rebuilt.trace_distance(&rho));

        let supports = eps_supports(&field, config.eps)?;
        if disjoint_with_gap(&grid, &supports, 3) {
            let e = (differential_entropy(&field) - plateau).abs();
            plateau_err = Some(plateau_err.map_or(e, |p| p.max(e)));
        }
        if disjoint_with_gap(&grid, &supports, config.gap_cells) {
            for (i, j) in pairs(n) {
                let bound = (c[i] * c[j]).norm() * config.eps * config.eps;
                if bound > 0.0 {
                    let ratio = rho.get(i, j).norm() / bound;
                    bound_ratio = Some(bound_ratio.map_or(ratio, |b| b.max(ratio)));
                }
            }
        }
    }

    checks.push(Check::below("branch_fidelity", infidelity, 1e-8).with_note("1 - fidelity"));
    checks.push(Check::below("phase_residual", phase_res, 1e-6));
    checks.push(Check::below("overlap_equivalence", overlap_err, 1e-8));
    checks.push(Check::below("rho_equivalence", rho_err, 1e-6).with_note("trace distance"));
    checks.push(
        Check::below("husimi_identity", husimi_err, 1e-6)
            .with_note(format!("100 nodes, |Omega| <= {probe_radius:.2}")),
    );
    checks.push(Check::below("normalization", norm_err, 1e-4));
    checks.push(Check::below("precs_reconstruction", precs_err, 1e-5).with_note("trace distance"));
    checks.push(Check {
        name: "density_invariants".into(),
        measured: invariant_failures.len() as f64,
        tolerance: 1.0,
        passed: invariant_failures.is_empty(),
        note: invariant_failures.first().cloned().unwrap_or_default(),
    });
    checks.push(match plateau_err {
        Some(e) => Check::below("entropy_plateau", e, 1e-2).with_note(format!("target {plateau:.4}")),
        None => Check {
            name: "entropy_plateau".into(),
            measured: 0.0,
            tolerance: 1e-2,
            passed: true,
            note: "supports never separate by more than 3 cells".into(),
        },
    });
    checks.push(match bound_ratio {
        Some(r) => Check {
            name: "decoherence_bound".into(),
            measured: r,
            tolerance: 1.0,
            passed: r <= 1.0,
            note: "max |rho_ij| / (|c_i c_j| eps^2) over disjoint times".into(),
        },
        None => Check {
            name: "decoherence_bound".into(),
            measured: 0.0,
            tolerance: 1.0,
            passed: true,
            note: "supports never disjoint".into(),
        },
    });
    Ok(VerifyReport { checks })
}

/// Largest probe radius whose coherent vector satisfies the truncation rule
/// at `n_max`, capped at 6√ħ.
fn probe_radius(hbar: f64, n_max: usize) -> f64 {
    let n = n_max as f64;
    // Solve m + 8√m + 16 = n for √m.
    let root = (-8.0 + (64.0 + 4.0 * (n - 16.0)).max(0.0).sqrt()) / 2.0;
    (root.max(0.0) * hbar.sqrt()).min(6.0 * hbar.sqrt())
}

/// Runs the verification, prints the report and writes `verify.csv`.
pub fn cmd_verify(config: &RunConfig) -> Result<VerifyReport, CliError> {
    let report = run_verification(config)?;
    let csv = report.to_csv();
    write_atomic(&config.out, "verify.csv", |w| w.write_all(csv.as_bytes()))?;
    Ok(report)
}
