//! Configuration-driven experiment runner: refinement ladder, operator
//! backend, preconditioner variants and condition numbers per level,
//! written as CSV plus an aligned text table.

mod config;

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

pub use config::{
    parse_config, parse_config_str, parse_space, BetaValue, ConfigFile, ConfigOverrides, ExperimentConfig,
    PrecondChoice, Refinement, DEFAULTS_HELP,
};

use crate::discretization::{dof_layout, SpaceKind};
use crate::io::fmt_f64;
use crate::linalg::{dense_matvec, LinearOperator};
use crate::mesh::{corner_cells, make_structured, nvb_refine, uniform_refine, MeshCombinatorics, SimplicialMesh};
use crate::operators::{assemble_pair, BackendOptions};
use crate::precond::{build, PrecondFactors, PrecondSpec, Variant};
use crate::spectral::{dense_kappa, lanczos_kappa, Method, SpectrumReport};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "level,dofs,h_min,variant,method,kappa,lambda_min,lambda_max,setup_s,apply_s";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub level: usize,
    pub dofs: usize,
    pub h_min: f64,
    /// Variant name, with `@β` appended when β is swept.
    pub variant: String,
    pub method: Method,
    pub kappa: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub setup_s: Option<f64>,
    pub apply_s: Option<f64>,
}

impl ResultRow {
    pub fn csv(&self) -> String {
        let t = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.level,
            self.dofs,
            fmt_f64(self.h_min),
            self.variant,
            self.method,
            fmt_f64(self.kappa),
            fmt_f64(self.lambda_min),
            fmt_f64(self.lambda_max),
            t(self.setup_s),
            t(self.apply_s)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaChoice {
    pub variant: Variant,
    pub beta: f64,
    /// Largest κ over the levels for this β.
    pub worst_kappa: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub rows: Vec<ResultRow>,
    /// `(level, message)` for every skipped level.
    pub failures: Vec<(usize, String)>,
    /// β minimizing the worst κ, per swept variant.
    pub best_beta: Vec<BetaChoice>,
    /// Fine-oracle change per level for the order −2 backend.
    pub oracle_changes: Vec<(usize, f64)>,
    pub csv: String,
    pub table: String,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            1
        }
    }
}

/// Three significant digits in the style of printed κ tables.
pub fn sig3(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    if a >= 100.0 {
        format!("{x:.0}")
    } else if a >= 10.0 {
        format!("{x:.1}")
    } else if a >= 1.0 {
        format!("{x:.2}")
    } else {
        format!("{x:.3e}")
    }
}

/// Concrete preconditioners for the requested choices.
pub fn resolve_variants(cfg: &ExperimentConfig) -> Result<Vec<Variant>> {
    let high = cfg.degree > usize::from(cfg.space_kind != SpaceKind::DiscPoly);
    let mut out = Vec::new();
    for c in &cfg.variants {
        let v = match (c, cfg.space_kind, high) {
            (PrecondChoice::Jacobi, ..) => Variant::Jacobi,
            (PrecondChoice::New, SpaceKind::DiscPoly, false) => Variant::Disc0,
            (PrecondChoice::New, _, false) => Variant::Cont1,
            (PrecondChoice::New | PrecondChoice::Opp, SpaceKind::DiscPoly, true) => Variant::DiscHighOpp,
            (PrecondChoice::New | PrecondChoice::Opp, _, true) => Variant::ContHighOpp,
            (PrecondChoice::Ssc, SpaceKind::DiscPoly, true) => Variant::DiscHighSsc,
            (PrecondChoice::Ssc, _, true) => Variant::ContHighSsc,
            (PrecondChoice::Opp | PrecondChoice::Ssc, _, false) => {
                return Err(Error::Config(format!("{c:?} needs a higher-order space; use `new`")))
            }
        };
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

/// Mesh of every level; level 1 is the initial mesh.
pub fn mesh_ladder(cfg: &ExperimentConfig) -> Result<Vec<SimplicialMesh>> {
    let mut m = make_structured(cfg.geometry, cfg.initial_elements, cfg.dirichlet.clone())?;
    let mut out = Vec::with_capacity(cfg.levels);
    for _ in 0..cfg.levels {
        let next = match cfg.refinement {
            Refinement::Uniform => uniform_refine(&m),
            Refinement::CornerLocal => nvb_refine(&m, &corner_cells(&m)),
        };
        out.push(std::mem::replace(&mut m, next));
    }
    Ok(out)
}

/// κ of `G A` by the dense pencil when `n ≤ dense_eig_max_n`, by Lanczos
/// otherwise.
pub fn measure(cfg: &ExperimentConfig, g: &PrecondFactors, a: &nalgebra::DMatrix<f64>) -> Result<SpectrumReport> {
    let n = a.nrows();
    if n <= cfg.dense_eig_max_n {
        return dense_kappa(&g.assemble_dense(cfg.dense_eig_max_n)?, a, cfg.dense_eig_max_n);
    }
    let apply_g = |x: &[f64]| g.apply(x).expect("dimension checked");
    let apply_a = |x: &[f64]| {
        let mut y = vec![0.0; n];
        dense_matvec(a, x, &mut y);
        y
    };
    lanczos_kappa(&apply_g, &apply_a, n, cfg.tol, cfg.max_iters.min(n), cfg.seed)
}

fn run_level(
    cfg: &ExperimentConfig,
    level: usize,
    mesh: &SimplicialMesh,
    variants: &[Variant],
    rows: &mut Vec<ResultRow>,
) -> Result<Option<f64>> {
    let comb = MeshCombinatorics::new(mesh);
    let layout = dof_layout(mesh, cfg.space_kind, cfg.degree)?;
    let opts = BackendOptions { alpha: cfg.alpha, oracle_depth: cfg.oracle_depth, guard: cfg.guard };
    let pair = assemble_pair(cfg.backend, mesh, &comb, &layout, &opts)?;
    let bs: Arc<dyn LinearOperator> = Arc::new(pair.bs);
    let h_min = mesh.h_min();
    let mut level_rows = Vec::new();
    for &variant in variants {
        let betas: &[f64] = if variant == Variant::Jacobi { &cfg.betas[..1] } else { &cfg.betas };
        for &beta in betas {
            let label = if variant != Variant::Jacobi && cfg.betas.len() > 1 {
                format!("{}@{}", variant.name(), beta)
            } else {
                variant.name().to_string()
            };
            let spec = PrecondSpec { variant, s: cfg.s, beta };
            let t0 = Instant::now();
            let g = build(&spec, mesh, &comb, &layout, &pair.a, bs.clone())?;
            let setup = t0.elapsed().as_secs_f64();
            let probe = vec![1.0; g.n()];
            let t1 = Instant::now();
            g.apply(&probe)?;
            let apply = t1.elapsed().as_secs_f64();
            let rep = measure(cfg, &g, &pair.a)?;
            level_rows.push(ResultRow {
                level,
                dofs: layout.n_dofs(),
                h_min,
                variant: label,
                method: rep.method,
                kappa: rep.kappa,
                lambda_min: rep.lambda_min,
                lambda_max: rep.lambda_max,
                setup_s: cfg.timings.then_some(setup),
                apply_s: cfg.timings.then_some(apply),
            });
        }
    }
    rows.extend(level_rows);
    Ok(pair.oracle_change)
}

fn best_betas(cfg: &ExperimentConfig, variants: &[Variant], rows: &[ResultRow]) -> Vec<BetaChoice> {
    if cfg.betas.len() < 2 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for &v in variants.iter().filter(|v| **v != Variant::Jacobi) {
        let mut best: Option<BetaChoice> = None;
        for &beta in &cfg.betas {
            let label = format!("{}@{}", v.name(), beta);
            let worst = rows.iter().filter(|r| r.variant == label).map(|r| r.kappa).fold(f64::NAN, f64::max);
            if worst.is_nan() {
                continue;
            }
            if best.as_ref().map(|b| worst < b.worst_kappa).unwrap_or(true) {
                best = Some(BetaChoice { variant: v, beta, worst_kappa: worst });
            }
        }
        out.extend(best);
    }
    out
}

fn render_table(rows: &[ResultRow], failures: &[(usize, String)], best: &[BetaChoice]) -> String {
    let mut labels: Vec<&str> = Vec::new();
    for r in rows {
        if !labels.contains(&r.variant.as_str()) {
            labels.push(&r.variant);
        }
    }
    let mut header = vec!["level".to_string(), "dofs".to_string(), "h_min".to_string()];
    header.extend(labels.iter().map(|l| format!("kappa({l})")));
    let mut lines: Vec<Vec<String>> = vec![header];
    let mut levels: Vec<usize> = rows.iter().map(|r| r.level).collect();
    levels.dedup();
    for lv in levels {
        let lr: Vec<&ResultRow> = rows.iter().filter(|r| r.level == lv).collect();
        let mut line = vec![lv.to_string(), lr[0].dofs.to_string(), format!("{:.3e}", lr[0].h_min)];
        for l in &labels {
            line.push(lr.iter().find(|r| r.variant == *l).map(|r| sig3(r.kappa)).unwrap_or_else(|| "-".into()));
        }
        lines.push(line);
    }
    let ncol = lines[0].len();
    let widths: Vec<usize> = (0..ncol).map(|j| lines.iter().map(|l| l[j].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (i, l) in lines.iter().enumerate() {
        let cells: Vec<String> = l.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (ncol - 1)));
            out.push('\n');
        }
    }
    for b in best {
        let _ = writeln!(out, "best beta for {}: {} (worst kappa {})", b.variant.name(), b.beta, sig3(b.worst_kappa));
    }
    for (lv, msg) in failures {
        let _ = writeln!(out, "level {lv} failed: {msg}");
    }
    out
}

/// Runs the whole ladder. Level failures are recorded and skipped; output
/// files are written when configured.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let variants = resolve_variants(cfg)?;
    let meshes = mesh_ladder(cfg)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut oracle_changes = Vec::new();
    for (i, mesh) in meshes.iter().enumerate() {
        let level = i + 1;
        match run_level(cfg, level, mesh, &variants, &mut rows) {
            Ok(Some(c)) => oracle_changes.push((level, c)),
            Ok(None) => {}
            Err(e) => failures.push((level, e.to_string())),
        }
    }
    let best_beta = best_betas(cfg, &variants, &rows);
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.csv());
        csv.push('\n');
    }
    let table = render_table(&rows, &failures, &best_beta);
    if let Some(p) = &cfg.csv {
        std::fs::write(p, &csv)?;
    }
    if let Some(p) = &cfg.table {
        std::fs::write(p, &table)?;
    }
    Ok(RunOutcome { rows, failures, best_beta, oracle_changes, csv, table })
}
