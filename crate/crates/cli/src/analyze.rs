//! Network analysis: load an edge list and labels, fit the model, and
//! report the estimate with its bootstrap standard error and null p-value.

use ising_core::bootstrap::{analyze_network, FitReport, NullStatistic};
use ising_core::coupling::{CouplingMatrix, LabeledGraph};
use ising_core::gibbs::ChainConfig;

use crate::csvout::{fmt, fmt_opt, CsvDoc};
use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct AnalyzeConfig {
    pub edges_path: String,
    pub labels_path: String,
    pub b_boot: usize,
    pub b_null: usize,
    pub statistic: NullStatistic,
    pub chain: ChainConfig,
}

pub fn parse_statistic(name: &str) -> Result<NullStatistic, CliError> {
    match name {
        "h" => Ok(NullStatistic::Hamiltonian),
        "mple" => Ok(NullStatistic::Mple),
        other => Err(CliError::Usage(format!(
            "unknown statistic '{other}' (expected h or mple)"
        ))),
    }
}

pub fn load_network(
    edges_path: &str,
    labels_path: &str,
) -> Result<(LabeledGraph, CouplingMatrix), CliError> {
    let edges = std::fs::read_to_string(edges_path).map_err(|e| CliError::io(edges_path, e))?;
    let labels = std::fs::read_to_string(labels_path).map_err(|e| CliError::io(labels_path, e))?;
    // parse errors in the label file also surface under the edges path;
    // both files are named in the header below
    CouplingMatrix::from_edge_list(&edges, &labels)
        .map_err(|e| CliError::from_coupling(edges_path, e))
}

pub fn run_analyze(cfg: &AnalyzeConfig) -> Result<(LabeledGraph, FitReport), CliError> {
    let (graph, _) = load_network(&cfg.edges_path, &cfg.labels_path)?;
    let report = analyze_network(&graph, cfg.b_boot, cfg.b_null, &cfg.chain, cfg.statistic)?;
    Ok((graph, report))
}

pub fn text_report(cfg: &AnalyzeConfig, report: &FitReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "network: {} ({} nodes, {} edges)\n",
        cfg.edges_path, report.n, report.edges
    ));
    out.push_str(&format!(
        "MPLE: {} (status {})\n",
        report.mple.beta_hat,
        report.mple.status.as_str()
    ));
    match report.se_boot {
        Some(se) => {
            out.push_str(&format!(
                "bootstrap se: {se} over {} replicates (non-interior fraction {}{})\n",
                report.b_boot,
                report.statuses.non_interior_fraction(),
                if report.se_unreliable {
                    "; flagged unreliable"
                } else {
                    ""
                },
            ));
        }
        None => out.push_str("bootstrap se: not applicable\n"),
    }
    out.push_str(&format!(
        "p-value (H0: beta = 0): {} from {} null replicates\n",
        report.p_value_null, report.b_null
    ));
    out
}

pub fn csv_report(cfg: &AnalyzeConfig, report: &FitReport, seed: u64) -> CsvDoc {
    let mut doc = CsvDoc::new(
        "analyze",
        &[
            "n",
            "edges",
            "mple",
            "status",
            "se_boot",
            "se_unreliable",
            "non_interior_fraction",
            "p_value",
            "b_boot",
            "b_null",
        ],
    );
    doc.meta("edges_file", &cfg.edges_path)
        .meta("labels_file", &cfg.labels_path)
        .meta("b_boot", cfg.b_boot)
        .meta("b_null", cfg.b_null)
        .meta("seed", seed);
    doc.row(vec![
        report.n.to_string(),
        report.edges.to_string(),
        fmt(report.mple.beta_hat),
        report.mple.status.as_str().to_string(),
        fmt_opt(report.se_boot),
        report.se_unreliable.to_string(),
        fmt(report.statuses.non_interior_fraction()),
        fmt(report.p_value_null),
        report.b_boot.to_string(),
        report.b_null.to_string(),
    ]);
    doc
}
