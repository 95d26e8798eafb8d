//! Command implementations. Each returns a [`Report`]; writing it out is
//! left to the caller.

use std::sync::Arc;
use std::time::Instant;

use jetrao_core::bounds::{bound_ladder, residual, BoundsError, LadderOptions, DEFAULT_TOL};
use jetrao_core::families::{builtin, builtin_names, sqrt_jet, FamilyInfo};
use jetrao_core::symbolic::{identity_suite, DEFAULT_MAX_ORDER};
use rayon::prelude::*;

use crate::config::{RunConfig, Validated};
use crate::report::{Effective, Efficiency, Report, ThetaResult, Timing, Tool};
use crate::CliError;

/// Command-line overrides and execution settings.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub tol: Option<f64>,
    pub allow_degenerate: bool,
    pub deterministic: bool,
    /// Worker threads; `None` lets rayon decide.
    pub threads: Option<usize>,
}

/// Runs `f` on a pool of the requested size, returning the pool size too.
fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<(T, usize), CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(pool.install(|| (f(), rayon::current_num_threads())))
}

fn timing(start: Instant, threads: usize, opts: &RunOptions) -> Option<Timing> {
    (!opts.deterministic).then(|| Timing {
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        threads,
    })
}

fn analyse(
    cfg: &RunConfig,
    v: &Validated,
    theta: f64,
    ladder: &LadderOptions,
    jet_order: usize,
) -> Result<ThetaResult, CliError> {
    let fam = v.family.as_ref();
    let rule = Arc::new(cfg.rule_for(&v.family, theta)?);
    v.estimator
        .check_unbiased(fam, theta, &rule)
        .map_err(|e| CliError::Config(format!("estimator: {e}")))?;
    let jet = sqrt_jet(fam, theta, rule, jet_order).map_err(CliError::Family)?;
    let e = residual(&v.estimator, &jet).map_err(|e| CliError::from_bounds(theta, e))?;
    let bounds =
        bound_ladder(&jet, &e, &v.estimator.name, ladder).map_err(|e| CliError::from_bounds(theta, e))?;
    Ok(ThetaResult {
        theta,
        bounds,
        efficiency: None,
    })
}

fn efficiency_of(r: &ThetaResult) -> Efficiency {
    let ladder = &r.bounds.ladder;
    let hit = ladder.iter().find(|e| e.certified);
    let chosen = hit.unwrap_or_else(|| ladder.last().expect("nonempty ladder"));
    Efficiency {
        attained_order: hit.map(|e| e.m),
        verdict: match hit {
            Some(e) => format!("attained at order {}", e.m),
            None => format!("no attainment through order {}", chosen.m),
        },
        coefficients: chosen.coefficients.clone(),
        sup_residual: chosen.sup_residual,
        residual_trace: ladder.iter().map(|e| e.rho).collect(),
    }
}

fn ladder_report(
    command: &str,
    cfg: &RunConfig,
    opts: &RunOptions,
    with_efficiency: bool,
) -> Result<Report, CliError> {
    let start = Instant::now();
    let v = cfg.validate()?;
    let tol = opts.tol.or(cfg.analysis.tol).unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CliError::Config(format!("--tol: {tol} must lie in (0, 1)")));
    }
    let max_order = cfg.analysis.max_order;
    // one extra row feeds the normal component of the next jet direction
    let jet_order = match v.family.max_jet_order() {
        Some(cap) => (max_order + 1).min(cap),
        None => max_order + 1,
    };
    let ladder = LadderOptions {
        max_order,
        tol,
        allow_degenerate: opts.allow_degenerate,
    };
    let (results, threads) = in_pool(opts.threads, || {
        v.thetas
            .par_iter()
            .map(|&t| analyse(cfg, &v, t, &ladder, jet_order))
            .collect::<Vec<_>>()
    })?;
    let mut results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    if with_efficiency {
        for r in &mut results {
            r.efficiency = Some(efficiency_of(r));
        }
    }
    Ok(Report {
        schema_version: crate::report::SCHEMA_VERSION,
        tool: Tool::current(),
        command: command.into(),
        config: Some(cfg.clone()),
        effective: Some(Effective {
            family: v.family.name().into(),
            estimator: v.estimator.name.clone(),
            statistic: v.estimator.statistic.render("x"),
            psi: v.estimator.psi.render(),
            max_order,
            jet_order,
            tol,
            allow_degenerate: opts.allow_degenerate,
        }),
        results,
        symbolic: None,
        timing: timing(start, threads, opts),
    })
}

pub fn cmd_bounds(cfg: &RunConfig, opts: &RunOptions) -> Result<Report, CliError> {
    ladder_report("bounds", cfg, opts, false)
}

pub fn cmd_efficiency(cfg: &RunConfig, opts: &RunOptions) -> Result<Report, CliError> {
    ladder_report("efficiency", cfg, opts, true)
}

/// Runs the identity suite for orders `1..=max_order`. Failing identities
/// are reported, not raised; see [`Report::identity_failures`].
pub fn cmd_jet_check(max_order: usize, opts: &RunOptions) -> Result<Report, CliError> {
    if !(1..=DEFAULT_MAX_ORDER).contains(&max_order) {
        return Err(CliError::Config(format!(
            "max order {max_order} outside 1..={DEFAULT_MAX_ORDER}"
        )));
    }
    let start = Instant::now();
    let (checks, threads) = in_pool(opts.threads, || identity_suite(max_order))?;
    let checks = checks.map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Report {
        schema_version: crate::report::SCHEMA_VERSION,
        tool: Tool::current(),
        command: "jet-check".into(),
        config: None,
        effective: None,
        results: Vec::new(),
        symbolic: Some(checks),
        timing: timing(start, threads, opts),
    })
}

impl Report {
    pub fn identity_failures(&self) -> usize {
        self.symbolic
            .as_ref()
            .map(|c| c.iter().filter(|c| !c.passed).count())
            .unwrap_or(0)
    }

    pub fn jet_check_text(&self) -> String {
        let mut out = String::new();
        for c in self.symbolic.iter().flatten() {
            out += &format!(
                "m={} {:<44} {}  {}\n",
                c.order,
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.witness
            );
        }
        out
    }
}

pub fn families_info() -> Vec<FamilyInfo> {
    let mut params = std::collections::BTreeMap::new();
    params.insert("sigma".to_string(), 1.0);
    builtin_names()
        .iter()
        .map(|name| {
            let p = if *name == "gaussian-mean" {
                params.clone()
            } else {
                Default::default()
            };
            builtin(name, &p).expect("built-in resolves").info()
        })
        .collect()
}

pub fn cmd_families_list(json: bool) -> String {
    let infos = families_info();
    if json {
        let mut s = serde_json::to_string_pretty(&infos).expect("family info serialises");
        s.push('\n');
        return s;
    }
    let mut out = String::new();
    for f in infos {
        out += &format!("{}\n", f.name);
        out += &format!("  domain:              θ ∈ {}\n", f.domain);
        for (k, v) in &f.parameters {
            out += &format!("  parameter {k}:{:w$}{v}\n", "", w = 10usize.saturating_sub(k.len()));
        }
        out += &format!("  recommended rule:    {}\n", f.recommended_rule);
        if let Some(e) = &f.canonical_estimator {
            out += &format!("  canonical estimator: {e}\n");
        }
    }
    out
}

impl CliError {
    fn from_bounds(theta: f64, e: BoundsError) -> CliError {
        match e {
            BoundsError::GramSingular { m, rank } => CliError::GramSingular { theta, m, rank },
            BoundsError::NotUnbiased { .. } => CliError::Config(format!("estimator: {e}")),
            other => CliError::Bounds(other),
        }
    }
}
