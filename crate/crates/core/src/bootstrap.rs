//! Parametric-bootstrap standard errors for the pseudolikelihood estimate and
//! simulation p-values for the independence null `beta = 0`.
//!
//! Bootstrap replicates are resampled from the fitted model (exactly for
//! small systems, by Glauber chains otherwise) with one derived seed per
//! replicate, so the whole pipeline is reproducible and embarrassingly
//! parallel. Null replicates are i.i.d. uniform spin vectors, which is an
//! exact draw from `P_0` at any size.

use rayon::prelude::*;
use thiserror::Error;

use crate::coupling::{CouplingMatrix, LabeledGraph};
use crate::gibbs::{
    exact_sample, glauber_sample, hamiltonian, ChainConfig, SpinConfig, EXACT_ENUM_CAP,
};
use crate::mple::{mple_default, MpleResult, MpleStatus};
use crate::seed::{derive_seed, rng_from};

/// Above this non-interior fraction the bootstrap standard error is flagged
/// unreliable.
pub const UNRELIABLE_FRACTION: f64 = 0.20;

#[derive(Debug, Error)]
pub enum BootstrapError {
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Counts of estimate statuses over a set of replicates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StatusTally {
    pub interior: usize,
    pub boundary_zero: usize,
    pub infinite: usize,
    pub degenerate: usize,
}

impl StatusTally {
    pub fn record(&mut self, status: MpleStatus) {
        match status {
            MpleStatus::Interior => self.interior += 1,
            MpleStatus::BoundaryZero => self.boundary_zero += 1,
            MpleStatus::Infinite => self.infinite += 1,
            MpleStatus::Degenerate => self.degenerate += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.interior + self.boundary_zero + self.infinite + self.degenerate
    }

    pub fn non_interior_fraction(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (total - self.interior) as f64 / total as f64
    }
}

/// Outcome of [`parametric_bootstrap_se`].
#[derive(Debug, Clone, Copy)]
pub struct BootstrapSe {
    /// Sample standard deviation of the estimate over interior replicates;
    /// absent when fewer than two replicates are interior.
    pub se: Option<f64>,
    pub statuses: StatusTally,
    /// Set when the non-interior fraction exceeds [`UNRELIABLE_FRACTION`]
    /// or no standard error could be formed.
    pub unreliable: bool,
}

fn resample(
    coupling: &CouplingMatrix,
    beta: f64,
    count: usize,
    cfg: &ChainConfig,
) -> Vec<SpinConfig> {
    if coupling.n() <= EXACT_ENUM_CAP {
        exact_sample(coupling, beta, count, derive_seed(cfg.seed, 0xb001))
            .expect("within enumeration cap")
    } else {
        // independent chains, one derived seed per replicate
        (0..count)
            .into_par_iter()
            .map(|r| {
                let chain_cfg = cfg.with_seed(derive_seed(cfg.seed, r as u64));
                glauber_sample(coupling, beta, 1, &chain_cfg)
                    .pop()
                    .expect("one draw requested")
            })
            .collect()
    }
}

/// Standard error of the pseudolikelihood estimate by parametric bootstrap:
/// `b` model draws at `beta_hat`, refit each, and take the sample standard
/// deviation over interior refits.
pub fn parametric_bootstrap_se(
    coupling: &CouplingMatrix,
    beta_hat: f64,
    b: usize,
    cfg: &ChainConfig,
) -> Result<BootstrapSe, BootstrapError> {
    if !beta_hat.is_finite() || beta_hat < 0.0 {
        return Err(BootstrapError::NotApplicable(format!(
            "bootstrap needs a finite non-negative estimate, got {beta_hat}"
        )));
    }
    if b < 2 {
        return Err(BootstrapError::InvalidParameter(format!(
            "bootstrap needs at least 2 replicates, got {b}"
        )));
    }
    let draws = resample(coupling, beta_hat, b, cfg);
    let fits: Vec<MpleResult> = draws
        .par_iter()
        .map(|s| mple_default(coupling, s))
        .collect();
    let mut statuses = StatusTally::default();
    let mut interior_estimates = Vec::new();
    for fit in &fits {
        statuses.record(fit.status);
        if fit.status == MpleStatus::Interior {
            interior_estimates.push(fit.beta_hat);
        }
    }
    let se = if interior_estimates.len() >= 2 {
        let k = interior_estimates.len() as f64;
        let mean = interior_estimates.iter().sum::<f64>() / k;
        let ss: f64 = interior_estimates
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .sum();
        Some((ss / (k - 1.0)).sqrt())
    } else {
        None
    };
    let unreliable = se.is_none() || statuses.non_interior_fraction() > UNRELIABLE_FRACTION;
    Ok(BootstrapSe {
        se,
        statuses,
        unreliable,
    })
}

/// Test statistic for the independence null.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullStatistic {
    /// The sufficient statistic `s'Js` (most powerful by sufficiency).
    Hamiltonian,
    /// The pseudolikelihood estimate itself, for comparison.
    Mple,
}

fn statistic_value(coupling: &CouplingMatrix, spins: &SpinConfig, statistic: NullStatistic) -> f64 {
    match statistic {
        NullStatistic::Hamiltonian => hamiltonian(coupling, spins),
        NullStatistic::Mple => mple_default(coupling, spins).beta_hat,
    }
}

/// Simulation p-value for `H0: beta = 0` with the add-one estimator
/// `p = (1 + #{T_b >= T_obs}) / (b + 1)`; never exactly zero.
pub fn null_pvalue(
    coupling: &CouplingMatrix,
    observed: &SpinConfig,
    b: usize,
    statistic: NullStatistic,
    seed: u64,
) -> Result<f64, BootstrapError> {
    if b < 99 {
        return Err(BootstrapError::InvalidParameter(format!(
            "null simulation needs at least 99 replicates, got {b}"
        )));
    }
    assert_eq!(observed.len(), coupling.n(), "dimension mismatch");
    let t_obs = statistic_value(coupling, observed, statistic);
    let exceed = (0..b)
        .into_par_iter()
        .filter(|&r| {
            let mut rng = rng_from(derive_seed(seed, r as u64));
            let draw = SpinConfig::uniform_random(coupling.n(), &mut rng);
            statistic_value(coupling, &draw, statistic) >= t_obs
        })
        .count();
    Ok((1 + exceed) as f64 / (b + 1) as f64)
}

/// Full network fit: estimate, bootstrap standard error, and null p-value.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub n: usize,
    pub edges: usize,
    pub mple: MpleResult,
    pub se_boot: Option<f64>,
    pub se_unreliable: bool,
    pub statuses: StatusTally,
    pub p_value_null: f64,
    pub b_boot: usize,
    pub b_null: usize,
}

/// Fit the `1/n`-scaled model to a labeled graph, attach a bootstrap
/// standard error when the estimate is finite, and a null p-value.
pub fn analyze_network(
    graph: &LabeledGraph,
    b_boot: usize,
    b_null: usize,
    cfg: &ChainConfig,
    statistic: NullStatistic,
) -> Result<FitReport, BootstrapError> {
    let coupling = CouplingMatrix::from_labeled_graph(graph);
    let spins = graph.spins();
    let fit = mple_default(&coupling, &spins);
    let (se_boot, se_unreliable, statuses) = if fit.beta_hat.is_finite() {
        let boot_cfg = cfg.with_seed(derive_seed(cfg.seed, 0x5e));
        let boot = parametric_bootstrap_se(&coupling, fit.beta_hat, b_boot, &boot_cfg)?;
        (boot.se, boot.unreliable, boot.statuses)
    } else {
        (None, true, StatusTally::default())
    };
    let p_value_null = null_pvalue(
        &coupling,
        &spins,
        b_null,
        statistic,
        derive_seed(cfg.seed, 0x9f),
    )?;
    Ok(FitReport {
        n: graph.n(),
        edges: graph.edges.len(),
        mple: fit,
        se_boot,
        se_unreliable,
        statuses,
        p_value_null,
        b_boot,
        b_null,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mple::MpleStatus;

    #[test]
    fn zero_matrix_has_no_applicable_se() {
        let zero = CouplingMatrix::from_dense(6, vec![0.0; 36]).unwrap();
        let out = parametric_bootstrap_se(&zero, 0.0, 50, &ChainConfig::new(1)).unwrap();
        assert_eq!(out.statuses.degenerate, 50);
        assert!(out.se.is_none());
        assert!(out.unreliable);
    }

    #[test]
    fn bootstrap_rejects_bad_inputs() {
        let j = CouplingMatrix::curie_weiss(8).unwrap();
        assert!(matches!(
            parametric_bootstrap_se(&j, f64::INFINITY, 10, &ChainConfig::new(1)),
            Err(BootstrapError::NotApplicable(_))
        ));
        assert!(matches!(
            parametric_bootstrap_se(&j, 0.5, 1, &ChainConfig::new(1)),
            Err(BootstrapError::InvalidParameter(_))
        ));
    }

    #[test]
    fn bootstrap_se_matches_ground_truth_spread() {
        // ground truth: sd of the estimate over independent exact draws
        let j = CouplingMatrix::curie_weiss(12).unwrap();
        let beta = 0.5;
        let reps = 200;
        let draws = exact_sample(&j, beta, reps, 4321).unwrap();
        let mut estimates = Vec::new();
        for s in &draws {
            let fit = mple_default(&j, s);
            if fit.status == MpleStatus::Interior {
                estimates.push(fit.beta_hat);
            }
        }
        assert!(estimates.len() >= 100);
        let k = estimates.len() as f64;
        let mean = estimates.iter().sum::<f64>() / k;
        let truth = (estimates
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .sum::<f64>()
            / (k - 1.0))
            .sqrt();

        let out = parametric_bootstrap_se(&j, beta, reps, &ChainConfig::new(99)).unwrap();
        let se = out.se.expect("interior replicates expected");
        assert!(se > 0.0);
        assert!(
            (se - truth).abs() <= 0.3 * truth,
            "bootstrap se {se} vs ground truth {truth}"
        );
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let j = CouplingMatrix::curie_weiss(10).unwrap();
        let a = parametric_bootstrap_se(&j, 0.6, 80, &ChainConfig::new(5)).unwrap();
        let b = parametric_bootstrap_se(&j, 0.6, 80, &ChainConfig::new(5)).unwrap();
        assert_eq!(a.se, b.se);
        assert_eq!(a.statuses, b.statuses);
    }

    #[test]
    fn bootstrap_glauber_path_runs() {
        // n > 20 exercises the chain-based resampler
        let j = CouplingMatrix::er_scaled(30, 0.4, 2).unwrap();
        let mut cfg = ChainConfig::new(7);
        cfg.burn_in_sweeps = 200;
        let out = parametric_bootstrap_se(&j, 0.4, 40, &cfg).unwrap();
        assert_eq!(out.statuses.total(), 40);
    }

    #[test]
    fn extreme_observation_gets_minimal_pvalue() {
        let j = CouplingMatrix::curie_weiss(20).unwrap();
        let all_plus = SpinConfig::all_plus(20);
        let b = 499;
        let p = null_pvalue(&j, &all_plus, b, NullStatistic::Hamiltonian, 8).unwrap();
        assert_eq!(p, 1.0 / (b as f64 + 1.0));
    }

    #[test]
    fn pvalue_never_zero_nor_above_one() {
        let j = CouplingMatrix::er_scaled(25, 0.4, 3).unwrap();
        let mut rng = rng_from(12);
        for _ in 0..20 {
            let s = SpinConfig::uniform_random(25, &mut rng);
            let p = null_pvalue(&j, &s, 99, NullStatistic::Hamiltonian, 5).unwrap();
            assert!(p > 0.0 && p <= 1.0);
        }
        assert!(null_pvalue(
            &j,
            &SpinConfig::all_plus(25),
            50,
            NullStatistic::Hamiltonian,
            1
        )
        .is_err());
    }

    #[test]
    fn null_pvalues_are_calibrated() {
        // data simulated at beta = 0: P(p <= 0.05) should be close to 0.05
        let j = CouplingMatrix::er_scaled(40, 0.3, 8).unwrap();
        let trials = 500;
        let b = 999;
        let hits = (0..trials)
            .into_par_iter()
            .filter(|&t| {
                let mut rng = rng_from(derive_seed(0xca11, t as u64));
                let observed = SpinConfig::uniform_random(40, &mut rng);
                let p = null_pvalue(
                    &j,
                    &observed,
                    b,
                    NullStatistic::Hamiltonian,
                    derive_seed(0xca12, t as u64),
                )
                .unwrap();
                p <= 0.05
            })
            .count();
        let fraction = hits as f64 / trials as f64;
        assert!(
            (0.03..=0.07).contains(&fraction),
            "null calibration off: {fraction}"
        );
    }

    #[test]
    fn mple_statistic_variant_runs() {
        let j = CouplingMatrix::curie_weiss(12).unwrap();
        let s = exact_sample(&j, 0.8, 1, 31).unwrap().pop().unwrap();
        let p = null_pvalue(&j, &s, 199, NullStatistic::Mple, 4).unwrap();
        assert!(p > 0.0 && p <= 1.0);
    }

    #[test]
    fn analyze_path_graph_reports_boundary_status() {
        let (graph, _) = CouplingMatrix::from_edge_list("1 2\n2 3\n", "1 1\n2 1\n3 -1\n").unwrap();
        let report = analyze_network(
            &graph,
            100,
            199,
            &ChainConfig::new(6),
            NullStatistic::Hamiltonian,
        )
        .unwrap();
        // L(0) = 0 for this configuration: the estimate sits at the boundary
        assert_eq!(report.mple.status, MpleStatus::BoundaryZero);
        assert_eq!(report.mple.beta_hat, 0.0);
        assert_eq!(report.n, 3);
        assert_eq!(report.edges, 2);
        assert!(report.p_value_null > 0.0 && report.p_value_null <= 1.0);
    }

    #[test]
    fn estimate_is_invariant_under_relabeling() {
        let edges_a = "1 2\n1 3\n2 3\n3 4\n4 5\n4 6\n5 6\n1 6\n";
        let labels_a = "1 1\n2 1\n3 1\n4 0\n5 0\n6 1\n";
        // same graph with ids renamed 1..6 -> 60,50,40,30,20,10 and the
        // edge lines reordered, so the dense indices genuinely permute
        let edges_b = "20 10\n30 20\n40 30\n60 50\n60 40\n50 40\n30 10\n60 10\n";
        let labels_b = "60 1\n50 1\n40 1\n30 0\n20 0\n10 1\n";
        let (ga, ja) = CouplingMatrix::from_edge_list(edges_a, labels_a).unwrap();
        let (gb, jb) = CouplingMatrix::from_edge_list(edges_b, labels_b).unwrap();
        let fa = mple_default(&ja, &ga.spins());
        let fb = mple_default(&jb, &gb.spins());
        assert_eq!(fa.status, MpleStatus::Interior);
        assert_eq!(fb.status, MpleStatus::Interior);
        assert!((fa.beta_hat - fb.beta_hat).abs() <= 1e-12);

        // the bootstrap se agrees up to Monte Carlo error
        if fa.beta_hat.is_finite() {
            let sa = parametric_bootstrap_se(&ja, fa.beta_hat, 300, &ChainConfig::new(9))
                .unwrap()
                .se;
            let sb = parametric_bootstrap_se(&jb, fb.beta_hat, 300, &ChainConfig::new(10))
                .unwrap()
                .se;
            if let (Some(sa), Some(sb)) = (sa, sb) {
                assert!(
                    (sa - sb).abs() <= 0.3 * sa.max(sb),
                    "se not relabeling-stable: {sa} vs {sb}"
                );
            }
        }
    }
}
