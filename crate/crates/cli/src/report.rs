//! Report document and its JSON/CSV renderings.

use jetrao_core::bounds::BoundReport;
use jetrao_core::symbolic::IdentityCheck;
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

/// Bumped whenever a field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Tool {
    pub fn current() -> Self {
        Tool {
            name: "jetrao",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// Settings in force after command-line overrides.
#[derive(Clone, Debug, Serialize)]
pub struct Effective {
    pub family: String,
    pub estimator: String,
    pub statistic: String,
    pub psi: String,
    pub max_order: usize,
    pub jet_order: usize,
    pub tol: f64,
    pub allow_degenerate: bool,
}

/// Per-θ summary emitted by `efficiency`.
#[derive(Clone, Debug, Serialize)]
pub struct Efficiency {
    pub attained_order: Option<usize>,
    pub verdict: String,
    /// Coefficients `c_1..c_m` at the attained order, or at the top order.
    pub coefficients: Vec<f64>,
    pub sup_residual: f64,
    /// `ρ_m` for `m = 1..=M`.
    pub residual_trace: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaResult {
    pub theta: f64,
    pub bounds: BoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<Efficiency>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
    pub threads: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: Tool,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<RunConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective: Option<Effective>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub results: Vec<ThetaResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbolic: Option<Vec<IdentityCheck>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    /// One row per `(θ, m)`: `theta, m, beta, rho, c_1..c_M`, with empty
    /// cells for `k > m`.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let max = self
            .results
            .iter()
            .flat_map(|r| r.bounds.ladder.iter().map(|e| e.m))
            .max()
            .unwrap_or(0);
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["theta".to_string(), "m".into(), "beta".into(), "rho".into()];
        header.extend((1..=max).map(|k| format!("c_{k}")));
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.results {
            for e in &r.bounds.ladder {
                let mut row = vec![num(r.theta), e.m.to_string(), num(e.beta), num(e.rho)];
                row.extend((0..max).map(|k| e.coefficients.get(k).map(|c| num(*c)).unwrap_or_default()));
                w.write_record(&row).map_err(csv_err)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

/// Shortest round-trip rendering, with an exponent for very large or small
/// magnitudes.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}
