//! Desk-scale experiment grids behind the CLI subcommands.
//!
//! Every grid is fully determined by its configuration and seed: cells get
//! seeds derived from `(seed, cell index)`, replicate loops run in parallel,
//! and rows are emitted in canonical (sorted) order.

use rayon::prelude::*;

use ising_core::coupling::{circulant_edges, CouplingMatrix};
use ising_core::gibbs::{
    default_burn_in, exact_sample, glauber_sample, hamiltonian, ChainConfig, SpinConfig,
    EXACT_ENUM_CAP,
};
use ising_core::mple::{mple_default, MpleStatus};
use ising_core::mptest::{er_power_closed_form, graphon_spectrum, quantile, sample_limit_law};
use ising_core::partition::{partition_report, PartitionReport};
use ising_core::seed::{derive_seed, rng_from};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    CurieWeiss,
    ErdosRenyi,
    Regular,
    Block,
}

impl Ensemble {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "cw" => Ok(Ensemble::CurieWeiss),
            "er" => Ok(Ensemble::ErdosRenyi),
            "regular" => Ok(Ensemble::Regular),
            "block" => Ok(Ensemble::Block),
            other => Err(CliError::Usage(format!(
                "unknown ensemble '{other}' (expected cw, er, regular, or block)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Ensemble::CurieWeiss => "cw",
            Ensemble::ErdosRenyi => "er",
            Ensemble::Regular => "regular",
            Ensemble::Block => "block",
        }
    }
}

/// Chain settings shared by the experiment commands.
#[derive(Debug, Clone, Copy)]
pub struct SamplerOpts {
    /// Burn-in sweeps; `None` applies the size-dependent default.
    pub burn_in: Option<usize>,
    pub thin: usize,
    pub seed: u64,
}

impl SamplerOpts {
    pub fn chain_config(&self, n: usize, seed: u64) -> ChainConfig {
        let mut cfg = ChainConfig::new(seed);
        cfg.burn_in_sweeps = self.burn_in.unwrap_or_else(|| default_burn_in(n));
        cfg.thin_sweeps = self.thin;
        cfg
    }
}

/// How the Erdős–Rényi edge probability depends on the system size.
#[derive(Debug, Clone, Copy)]
pub enum EdgeProbability {
    Fixed(f64),
    /// `p = n^{-exponent}`.
    PowerOfN(f64),
}

impl EdgeProbability {
    pub fn at(&self, n: usize) -> f64 {
        match *self {
            EdgeProbability::Fixed(p) => p,
            EdgeProbability::PowerOfN(e) => (n as f64).powf(-e),
        }
    }
}

/// Construct one ensemble member at size `n`.
pub fn build_ensemble(
    ensemble: Ensemble,
    n: usize,
    p: EdgeProbability,
    degree: Option<usize>,
    graph_seed: u64,
) -> Result<CouplingMatrix, CliError> {
    match ensemble {
        Ensemble::CurieWeiss => Ok(CouplingMatrix::curie_weiss(n)?),
        Ensemble::ErdosRenyi => Ok(CouplingMatrix::er_scaled(n, p.at(n), graph_seed)?),
        Ensemble::Regular => {
            let d = degree.unwrap_or_else(|| default_degree(n));
            let edges = circulant_edges(n, d)?;
            Ok(CouplingMatrix::regular_scaled(n, &edges, d)?)
        }
        Ensemble::Block => Ok(CouplingMatrix::block_example(n)?),
    }
}

/// Default circulant degree: the even integer nearest `sqrt(n)`.
pub fn default_degree(n: usize) -> usize {
    let d = (n as f64).sqrt().round() as usize;
    (d + d % 2).clamp(2, n.saturating_sub(1).max(2))
}

/// One configuration per replicate, each from its own derived seed.
fn replicate_draws(
    coupling: &CouplingMatrix,
    beta: f64,
    reps: usize,
    opts: &SamplerOpts,
    cell_seed: u64,
) -> Vec<SpinConfig> {
    if coupling.n() <= EXACT_ENUM_CAP {
        exact_sample(coupling, beta, reps, cell_seed).expect("within enumeration cap")
    } else {
        (0..reps)
            .into_par_iter()
            .map(|r| {
                let cfg = opts.chain_config(coupling.n(), derive_seed(cell_seed, r as u64));
                glauber_sample(coupling, beta, 1, &cfg)
                    .pop()
                    .expect("one draw requested")
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ErrorbarsConfig {
    pub ensemble: Ensemble,
    pub sizes: Vec<usize>,
    pub betas: Vec<f64>,
    pub reps: usize,
    pub p: EdgeProbability,
    pub degree: Option<usize>,
    pub sampler: SamplerOpts,
}

/// Estimate statistics for one `(n, beta)` cell.
#[derive(Debug, Clone)]
pub struct RateRow {
    pub ensemble: Ensemble,
    pub n: usize,
    pub beta: f64,
    /// Mean estimate over interior replicates.
    pub mean: Option<f64>,
    /// Sample standard deviation over interior replicates.
    pub sd: Option<f64>,
    pub non_interior_fraction: f64,
    pub reps: usize,
}

/// Log-log regression of the estimate spread against the size.
#[derive(Debug, Clone)]
pub struct RateSlope {
    pub beta: f64,
    pub slope: f64,
    pub r2: f64,
    pub points: usize,
}

/// Per-cell estimate spread over a `(size, beta)` grid, plus a
/// `log(sd) ~ log(n)` slope per beta for rate diagnosis.
pub fn errorbars(cfg: &ErrorbarsConfig) -> Result<(Vec<RateRow>, Vec<RateSlope>), CliError> {
    if cfg.reps < 2 {
        return Err(CliError::Domain(
            "errorbars needs at least 2 replicates".into(),
        ));
    }
    let mut sizes = cfg.sizes.clone();
    sizes.sort_unstable();
    let mut betas = cfg.betas.clone();
    betas.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());

    let mut rows = Vec::new();
    for (si, &n) in sizes.iter().enumerate() {
        let coupling = build_ensemble(
            cfg.ensemble,
            n,
            cfg.p,
            cfg.degree,
            derive_seed(cfg.sampler.seed, 0x6000 + n as u64),
        )?;
        for (bi, &beta) in betas.iter().enumerate() {
            if beta < 0.0 {
                return Err(CliError::Domain(format!(
                    "beta must be non-negative, got {beta}"
                )));
            }
            let cell_seed = derive_seed(cfg.sampler.seed, (si * betas.len() + bi) as u64);
            let draws = replicate_draws(&coupling, beta, cfg.reps, &cfg.sampler, cell_seed);
            let fits: Vec<_> = draws
                .par_iter()
                .map(|s| mple_default(&coupling, s))
                .collect();
            let interior: Vec<f64> = fits
                .iter()
                .filter(|f| f.status == MpleStatus::Interior)
                .map(|f| f.beta_hat)
                .collect();
            let (mean, sd) = if interior.len() >= 2 {
                let k = interior.len() as f64;
                let mean = interior.iter().sum::<f64>() / k;
                let ss: f64 = interior.iter().map(|x| (x - mean) * (x - mean)).sum();
                (Some(mean), Some((ss / (k - 1.0)).sqrt()))
            } else {
                (None, None)
            };
            rows.push(RateRow {
                ensemble: cfg.ensemble,
                n,
                beta,
                mean,
                sd,
                non_interior_fraction: (cfg.reps - interior.len()) as f64 / cfg.reps as f64,
                reps: cfg.reps,
            });
        }
    }

    let mut slopes = Vec::new();
    for &beta in &betas {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.beta == beta)
            .filter_map(|r| r.sd.map(|sd| ((r.n as f64).ln(), sd.ln())))
            .collect();
        if pts.len() >= 2 {
            let (slope, r2) = linear_fit(&pts);
            slopes.push(RateSlope {
                beta,
                slope,
                r2,
                points: pts.len(),
            });
        }
    }
    Ok((rows, slopes))
}

fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    (slope, r2)
}

/// Shared inner loop of the power commands: threshold from the null limit
/// law of the coupling's own spectrum, then the rejection rate of model
/// draws at `beta2`.
fn power_cell(
    coupling: &CouplingMatrix,
    threshold: f64,
    beta2: f64,
    reps: usize,
    opts: &SamplerOpts,
    cell_seed: u64,
) -> f64 {
    let draws = if beta2 == 0.0 {
        let mut rng = rng_from(cell_seed);
        (0..reps)
            .map(|_| SpinConfig::uniform_random(coupling.n(), &mut rng))
            .collect()
    } else if coupling.n() <= EXACT_ENUM_CAP {
        exact_sample(coupling, beta2, reps, cell_seed).expect("within enumeration cap")
    } else {
        let cfg = opts.chain_config(coupling.n(), cell_seed);
        glauber_sample(coupling, beta2, reps, &cfg)
    };
    let rejections = draws
        .iter()
        .filter(|s| hamiltonian(coupling, s) > threshold)
        .count();
    rejections as f64 / reps as f64
}

fn null_threshold(
    coupling: &CouplingMatrix,
    alpha: f64,
    law_count: usize,
    seed: u64,
) -> Result<f64, CliError> {
    let lambdas = graphon_spectrum(coupling, 1e-6);
    let law = sample_limit_law(&lambdas, 0.0, law_count, seed)?;
    Ok(quantile(&law, alpha)?)
}

#[derive(Debug, Clone)]
pub struct HeatmapConfig {
    pub n: usize,
    pub p_grid: Vec<f64>,
    pub betas: Vec<f64>,
    pub reps: usize,
    pub alpha: f64,
    pub law_count: usize,
    pub sampler: SamplerOpts,
}

/// Empirical power of the level-alpha test of `beta = 0` on `G(n, p)`,
/// over a `(p, beta)` grid. One graph is drawn per `p` and shared along its
/// beta column; the test statistic is `s'As/n` thresholded at the null
/// limit-law quantile of that graph's spectrum.
pub fn power_heatmap(cfg: &HeatmapConfig) -> Result<Vec<(f64, f64, f64)>, CliError> {
    check_alpha(cfg.alpha)?;
    check_reps(cfg.reps)?;
    let mut p_grid = cfg.p_grid.clone();
    p_grid.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mut betas = cfg.betas.clone();
    betas.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());

    let mut rows = Vec::new();
    for (pi, &p) in p_grid.iter().enumerate() {
        if !(p > 0.0 && p <= 1.0) {
            return Err(CliError::Domain(format!("p must lie in (0, 1], got {p}")));
        }
        let graph_seed = derive_seed(cfg.sampler.seed, 0x9000 + pi as u64);
        // rescale 1/(np) entries by p: the dense-convention coupling A/n
        let coupling = CouplingMatrix::er_scaled(cfg.n, p, graph_seed)?.scaled(p);
        let threshold = null_threshold(
            &coupling,
            cfg.alpha,
            cfg.law_count,
            derive_seed(cfg.sampler.seed, 0xa000 + pi as u64),
        )?;
        for (bi, &beta) in betas.iter().enumerate() {
            if beta < 0.0 {
                return Err(CliError::Domain(format!(
                    "beta must be non-negative, got {beta}"
                )));
            }
            let cell_seed = derive_seed(cfg.sampler.seed, (pi * betas.len() + bi) as u64);
            let power = power_cell(
                &coupling,
                threshold,
                beta,
                cfg.reps,
                &cfg.sampler,
                cell_seed,
            );
            rows.push((p, beta, power));
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct CwPowerConfig {
    pub n: usize,
    pub betas: Vec<f64>,
    pub reps: usize,
    pub alpha: f64,
    pub law_count: usize,
    pub sampler: SamplerOpts,
}

#[derive(Debug, Clone, Copy)]
pub struct CwPowerRow {
    pub beta: f64,
    pub empirical: f64,
    /// Limiting power of the complete-graph test; 1 above the transition.
    pub limit: f64,
}

/// Empirical power on the complete graph against the limiting power curve.
pub fn cw_power(cfg: &CwPowerConfig) -> Result<Vec<CwPowerRow>, CliError> {
    check_alpha(cfg.alpha)?;
    check_reps(cfg.reps)?;
    let coupling = CouplingMatrix::curie_weiss(cfg.n)?;
    let threshold = null_threshold(
        &coupling,
        cfg.alpha,
        cfg.law_count,
        derive_seed(cfg.sampler.seed, 0xcc),
    )?;
    let mut betas = cfg.betas.clone();
    betas.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mut rows = Vec::new();
    for (bi, &beta) in betas.iter().enumerate() {
        if beta < 0.0 {
            return Err(CliError::Domain(format!(
                "beta must be non-negative, got {beta}"
            )));
        }
        let cell_seed = derive_seed(cfg.sampler.seed, bi as u64);
        let empirical = power_cell(
            &coupling,
            threshold,
            beta,
            cfg.reps,
            &cfg.sampler,
            cell_seed,
        );
        let limit = if beta < 1.0 {
            er_power_closed_form(1.0, beta, cfg.alpha)?
        } else {
            1.0
        };
        rows.push(CwPowerRow {
            beta,
            empirical,
            limit,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct PartitionGridConfig {
    pub ensemble: Ensemble,
    pub n: usize,
    pub betas: Vec<f64>,
    pub p: EdgeProbability,
    pub degree: Option<usize>,
    pub seed: u64,
}

/// Exact value and bounds of the log-partition function over a beta grid.
pub fn partition_grid(cfg: &PartitionGridConfig) -> Result<Vec<PartitionReport>, CliError> {
    let coupling = build_ensemble(cfg.ensemble, cfg.n, cfg.p, cfg.degree, cfg.seed)?;
    let mut betas = cfg.betas.clone();
    betas.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    betas
        .iter()
        .map(|&beta| {
            if beta < 0.0 {
                return Err(CliError::Domain(format!(
                    "beta must be non-negative, got {beta}"
                )));
            }
            Ok(partition_report(&coupling, beta))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SampleConfig {
    pub ensemble: Ensemble,
    pub n: usize,
    pub beta: f64,
    pub count: usize,
    pub p: EdgeProbability,
    pub degree: Option<usize>,
    pub sampler: SamplerOpts,
    pub include_spins: bool,
}

#[derive(Debug, Clone)]
pub struct SampleRow {
    pub rep: usize,
    pub hamiltonian: f64,
    pub magnetization: f64,
    pub spins: Option<String>,
}

/// Draw configurations and summarize each one.
pub fn sample_rows(cfg: &SampleConfig) -> Result<Vec<SampleRow>, CliError> {
    if cfg.beta < 0.0 {
        return Err(CliError::Domain(format!(
            "beta must be non-negative, got {}",
            cfg.beta
        )));
    }
    let coupling = build_ensemble(
        cfg.ensemble,
        cfg.n,
        cfg.p,
        cfg.degree,
        derive_seed(cfg.sampler.seed, 0x6a),
    )?;
    let draws = if cfg.n <= EXACT_ENUM_CAP {
        exact_sample(&coupling, cfg.beta, cfg.count, cfg.sampler.seed)
            .expect("within enumeration cap")
    } else {
        let chain = cfg.sampler.chain_config(cfg.n, cfg.sampler.seed);
        glauber_sample(&coupling, cfg.beta, cfg.count, &chain)
    };
    Ok(draws
        .iter()
        .enumerate()
        .map(|(rep, s)| SampleRow {
            rep,
            hamiltonian: hamiltonian(&coupling, s),
            magnetization: s.magnetization(),
            spins: cfg.include_spins.then(|| {
                s.as_slice()
                    .iter()
                    .map(|&v| if v == 1 { '+' } else { '-' })
                    .collect()
            }),
        })
        .collect())
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Domain(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

fn check_reps(reps: usize) -> Result<(), CliError> {
    if reps == 0 {
        return Err(CliError::Domain("reps must be at least 1".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_degrees_are_even_and_valid() {
        for n in [6, 50, 100, 200, 801] {
            let d = default_degree(n);
            assert!(
                d.is_multiple_of(2) && d >= 2 && d < n,
                "degree {d} for n {n}"
            );
        }
    }

    #[test]
    fn errorbars_small_grid_is_deterministic() {
        let cfg = ErrorbarsConfig {
            ensemble: Ensemble::CurieWeiss,
            sizes: vec![8, 12],
            betas: vec![0.4, 0.8],
            reps: 40,
            p: EdgeProbability::PowerOfN(1.0 / 3.0),
            degree: None,
            sampler: SamplerOpts {
                burn_in: Some(50),
                thin: 2,
                seed: 11,
            },
        };
        let (rows_a, slopes_a) = errorbars(&cfg).unwrap();
        let (rows_b, _) = errorbars(&cfg).unwrap();
        assert_eq!(rows_a.len(), 4);
        for (a, b) in rows_a.iter().zip(&rows_b) {
            assert_eq!(a.mean, b.mean);
            assert_eq!(a.sd, b.sd);
        }
        for s in &slopes_a {
            assert!(s.points <= 2);
        }
    }

    #[test]
    fn cw_power_null_row_is_calibrated() {
        // n large enough that the lattice of the statistic does not distort
        // the rejection rate
        let cfg = CwPowerConfig {
            n: 200,
            betas: vec![0.0, 0.5],
            reps: 2000,
            alpha: 0.05,
            law_count: 100_000,
            sampler: SamplerOpts {
                burn_in: Some(300),
                thin: 5,
                seed: 5,
            },
        };
        let rows = cw_power(&cfg).unwrap();
        assert!(
            (rows[0].empirical - 0.05).abs() <= 0.03,
            "null rate {}",
            rows[0].empirical
        );
        assert!((rows[0].limit - 0.05).abs() < 1e-12);
        assert!(rows[1].limit > 0.05);
        assert!(rows[1].empirical > rows[0].empirical - 0.03);
    }

    #[test]
    fn heatmap_shape_and_domain_checks() {
        let cfg = HeatmapConfig {
            n: 30,
            p_grid: vec![0.5, 1.0],
            betas: vec![0.0, 0.4],
            reps: 100,
            alpha: 0.05,
            law_count: 50_000,
            sampler: SamplerOpts {
                burn_in: Some(100),
                thin: 2,
                seed: 9,
            },
        };
        let rows = power_heatmap(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        for (p, beta, power) in &rows {
            assert!(
                (0.0..=1.0).contains(power),
                "power {power} at ({p}, {beta})"
            );
        }

        let mut bad = cfg.clone();
        bad.alpha = 0.0;
        assert!(matches!(power_heatmap(&bad), Err(CliError::Domain(_))));
    }

    #[test]
    fn heatmap_cells_track_the_transition_curve() {
        // beta * p well below 1 keeps power moderate; well above 1 saturates
        let base = HeatmapConfig {
            n: 200,
            p_grid: vec![0.5],
            betas: vec![0.8, 2.8],
            reps: 300,
            alpha: 0.05,
            law_count: 100_000,
            sampler: SamplerOpts {
                burn_in: Some(400),
                thin: 5,
                seed: 17,
            },
        };
        let rows = power_heatmap(&base).unwrap();
        let low = rows.iter().find(|r| r.1 == 0.8).unwrap().2;
        let high = rows.iter().find(|r| r.1 == 2.8).unwrap().2;
        assert!(
            low <= 0.5,
            "power {low} at beta*p = 0.4 should stay below 0.5"
        );
        assert!(high >= 0.9, "power {high} at beta*p = 1.4 should saturate");
    }

    // The two-block coupling changes its consistency rate twice; this
    // reproduces the spread ratios at desk scale (the longest test here,
    // ~20 s).
    #[test]
    fn block_ensemble_rate_ratios() {
        let cfg = ErrorbarsConfig {
            ensemble: Ensemble::Block,
            sizes: vec![256, 1024],
            betas: vec![1.5, 2.5],
            reps: 100,
            p: EdgeProbability::Fixed(0.5),
            degree: None,
            sampler: SamplerOpts {
                burn_in: Some(600),
                thin: 5,
                seed: 424_242,
            },
        };
        let (rows, _) = errorbars(&cfg).unwrap();
        let sd = |n: usize, beta: f64| -> f64 {
            rows.iter()
                .find(|r| r.n == n && r.beta == beta)
                .and_then(|r| r.sd)
                .expect("cell has a standard deviation")
        };
        // fourth-root scaling predicts (1024/256)^(1/4) = sqrt(2); square
        // root scaling predicts 2; both with a ±35% window
        let mid = sd(256, 1.5) / sd(1024, 1.5);
        let cold = sd(256, 2.5) / sd(1024, 2.5);
        let r4 = 2.0f64.sqrt();
        assert!(
            (0.65 * r4..=1.35 * r4).contains(&mid),
            "sd ratio {mid} at beta 1.5 outside the fourth-root window"
        );
        assert!(
            (0.65 * 2.0..=1.35 * 2.0).contains(&cold),
            "sd ratio {cold} at beta 2.5 outside the square-root window"
        );
    }

    #[test]
    fn partition_grid_rows() {
        let cfg = PartitionGridConfig {
            ensemble: Ensemble::CurieWeiss,
            n: 12,
            betas: vec![0.3, 1.5],
            p: EdgeProbability::Fixed(0.5),
            degree: None,
            seed: 1,
        };
        let reports = partition_grid(&cfg).unwrap();
        assert!(reports[0].gaussian_upper.is_some());
        assert!(reports[1].gaussian_upper.is_none());
        assert!(reports[0].exact.is_some());
    }

    #[test]
    fn sample_rows_have_valid_summaries() {
        let cfg = SampleConfig {
            ensemble: Ensemble::Regular,
            n: 24,
            beta: 0.3,
            count: 6,
            p: EdgeProbability::Fixed(0.5),
            degree: Some(4),
            sampler: SamplerOpts {
                burn_in: Some(100),
                thin: 3,
                seed: 21,
            },
            include_spins: true,
        };
        let rows = sample_rows(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        for row in &rows {
            assert!(row.magnetization.abs() <= 1.0);
            let s = row.spins.as_ref().unwrap();
            assert_eq!(s.len(), 24);
            assert!(s.chars().all(|c| c == '+' || c == '-'));
        }
    }
}
