//! The high-temperature limit law of the sufficient statistic and the power
//! of the most powerful test.
//!
//! For a dense graph sequence with limiting eigenvalues `lambda_i`, the
//! statistic `s'As/n` converges under `P_beta`, `beta * max lambda < 1`, to
//! `Q = sum_i lambda_i (xi_i / (1 - beta lambda_i) - 1)` with `xi_i` i.i.d.
//! chi-square(1). Quantiles of `Q` are estimated by Monte Carlo order
//! statistics from a reservoir generated in deterministic seed-derived
//! shards, so results are reproducible under any thread schedule.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::function::erf;
use thiserror::Error;

// statrs's erfc is only ~5e-11 accurate; libm carries the 1-2 ulp musl
// implementation, which keeps the survival function below 1e-12 relative
// error. statrs still provides the inverse.

use crate::coupling::CouplingMatrix;
use crate::gibbs::{exact_sample, glauber_sample, hamiltonian, ChainConfig, SpinConfig};
use crate::seed::{derive_seed, rng_from};

const SHARD_SIZE: usize = 1 << 16;

#[derive(Debug, Error)]
pub enum MpTestError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("the Monte Carlo reservoir is empty")]
    EmptyReservoir,
}

/// Survival function of the chi-square(1) distribution,
/// `P(chi^2_1 > x) = erfc(sqrt(x/2))`.
pub fn chi_square_1_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    libm::erfc((x / 2.0).sqrt())
}

/// Quantile of the chi-square(1) distribution at probability `p`.
pub fn chi_square_1_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "probability must lie in (0, 1)");
    let r = erf::erfc_inv(1.0 - p);
    2.0 * r * r
}

/// Eigenvalues of the graphon proxy `A/n`, truncated at `|lambda| <
/// truncation_tol` and sorted in descending order.
///
/// Expects a coupling already carrying the dense-regime `1/n` scaling (the
/// complete-graph constructor and file-loaded networks both do).
pub fn graphon_spectrum(coupling: &CouplingMatrix, truncation_tol: f64) -> Vec<f64> {
    coupling
        .spectrum()
        .eigenvalues
        .into_iter()
        .filter(|l| l.abs() >= truncation_tol)
        .collect()
}

/// A weighted chi-square limit law together with its Monte Carlo reservoir.
#[derive(Debug, Clone)]
pub struct LimitLaw {
    lambdas: Vec<f64>,
    beta: f64,
    /// Sorted ascending.
    samples: Vec<f64>,
    seed: u64,
}

impl LimitLaw {
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The reservoir, sorted ascending.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Analytic mean `sum_i beta lambda_i^2 / (1 - beta lambda_i)`.
    pub fn expected_mean(&self) -> f64 {
        self.lambdas
            .iter()
            .map(|&l| self.beta * l * l / (1.0 - self.beta * l))
            .sum()
    }

    /// Analytic variance `sum_i 2 lambda_i^2 / (1 - beta lambda_i)^2`.
    pub fn expected_variance(&self) -> f64 {
        self.lambdas
            .iter()
            .map(|&l| {
                let d = 1.0 - self.beta * l;
                2.0 * l * l / (d * d)
            })
            .sum()
    }

    #[cfg(test)]
    pub(crate) fn from_samples(mut samples: Vec<f64>) -> Self {
        samples.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        Self {
            lambdas: Vec::new(),
            beta: 0.0,
            samples,
            seed: 0,
        }
    }
}

fn check_limit_domain(lambdas: &[f64], beta: f64) -> Result<(), MpTestError> {
    if beta < 0.0 {
        return Err(MpTestError::InvalidParameter(format!(
            "beta must be non-negative, got {beta}"
        )));
    }
    if lambdas.iter().any(|l| !l.is_finite()) {
        return Err(MpTestError::InvalidParameter(
            "eigenvalues must be finite".into(),
        ));
    }
    let max = lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max > 0.0 && beta * max >= 1.0 {
        return Err(MpTestError::Domain(format!(
            "the limit law requires beta < 1/max lambda = {}, got beta = {beta}",
            1.0 / max
        )));
    }
    Ok(())
}

/// Draw `count` Monte Carlo samples of the limit law
/// `Q = sum_i lambda_i (xi_i / (1 - beta lambda_i) - 1)`.
pub fn sample_limit_law(
    lambdas: &[f64],
    beta: f64,
    count: usize,
    seed: u64,
) -> Result<LimitLaw, MpTestError> {
    check_limit_domain(lambdas, beta)?;
    let coefficients: Vec<f64> = lambdas.iter().map(|&l| l / (1.0 - beta * l)).collect();
    let shift: f64 = lambdas.iter().sum();
    let shards = count.div_ceil(SHARD_SIZE.max(1));
    let mut samples: Vec<f64> = (0..shards)
        .into_par_iter()
        .flat_map_iter(|shard| {
            let mut rng = rng_from(derive_seed(seed, shard as u64));
            let size = SHARD_SIZE.min(count - shard * SHARD_SIZE);
            (0..size)
                .map(|_| {
                    let mut q = -shift;
                    for &c in &coefficients {
                        let z: f64 = rng.sample(StandardNormal);
                        q += c * z * z;
                    }
                    q
                })
                .collect::<Vec<f64>>()
        })
        .collect();
    samples.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(LimitLaw {
        lambdas: lambdas.to_vec(),
        beta,
        samples,
        seed,
    })
}

/// The `(1-alpha)`th quantile of the reservoir (type-1 order statistic).
pub fn quantile(law: &LimitLaw, alpha: f64) -> Result<f64, MpTestError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MpTestError::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let n = law.samples.len();
    if n == 0 {
        return Err(MpTestError::EmptyReservoir);
    }
    let k = (n as f64 * (1.0 - alpha) - 1e-9).ceil() as usize;
    Ok(law.samples[k.clamp(1, n) - 1])
}

/// Asymptotic power of the level-`alpha` most powerful test of `beta1`
/// against `beta2 >= beta1`: the survival fraction of `Q_{beta2}` draws
/// above the `(1-alpha)` quantile of `Q_{beta1}`.
pub fn mp_power(
    lambdas: &[f64],
    beta1: f64,
    beta2: f64,
    alpha: f64,
    count: usize,
    seed: u64,
) -> Result<f64, MpTestError> {
    if beta2 < beta1 {
        return Err(MpTestError::InvalidParameter(format!(
            "beta2 = {beta2} must not be below beta1 = {beta1}"
        )));
    }
    let null = sample_limit_law(lambdas, beta1, count, derive_seed(seed, 0x17))?;
    let threshold = quantile(&null, alpha)?;
    let alternative = sample_limit_law(lambdas, beta2, count, derive_seed(seed, 0x2b))?;
    let above = alternative.samples.partition_point(|&q| q <= threshold);
    Ok((count - above) as f64 / count as f64)
}

/// Closed-form limiting power for the constant graphon of density `p`:
/// `P(chi^2_1 > (1 - beta0 p) q_{1-alpha})`.
pub fn er_power_closed_form(p: f64, beta0: f64, alpha: f64) -> Result<f64, MpTestError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(MpTestError::InvalidParameter(format!(
            "p must lie in (0, 1], got {p}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MpTestError::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if beta0 < 0.0 || beta0 * p >= 1.0 {
        return Err(MpTestError::Domain(format!(
            "closed-form power requires 0 <= beta0 < 1/p = {}, got beta0 = {beta0}",
            1.0 / p
        )));
    }
    let q = chi_square_1_quantile(1.0 - alpha);
    Ok(chi_square_1_survival((1.0 - beta0 * p) * q))
}

/// How `empirical_power` draws configurations under the alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    /// Exact enumeration up to the cap, Glauber beyond.
    Auto,
    Exact,
    Glauber,
}

/// Settings for [`empirical_power`].
#[derive(Debug, Clone)]
pub struct EmpiricalPowerConfig {
    pub chain: ChainConfig,
    pub sampler: SamplerKind,
    /// Reservoir size behind the null quantile.
    pub law_count: usize,
    /// Spectrum truncation tolerance.
    pub truncation_tol: f64,
    /// Added to each finite-size statistic before thresholding. The default
    /// 0 compares the raw statistic to the limit-law quantile; any other
    /// centering convention can be expressed through this shift.
    pub statistic_shift: f64,
}

impl EmpiricalPowerConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            chain: ChainConfig::new(seed),
            sampler: SamplerKind::Auto,
            law_count: 200_000,
            truncation_tol: 1e-6,
            statistic_shift: 0.0,
        }
    }
}

/// Finite-size rejection rate of the most powerful test.
///
/// Simulates `reps` configurations under `beta2` from the model defined by
/// `coupling` (which must carry the dense `A/n` scaling) and counts how often
/// the statistic `s'Js` exceeds the `(1-alpha)` quantile of the `beta1`
/// limit law built from the coupling's own truncated spectrum. The finite-n
/// statistic is compared to the limit quantile without further centering.
/// `beta2` may exceed the high-temperature threshold; only the null `beta1`
/// must stay below it.
pub fn empirical_power(
    coupling: &CouplingMatrix,
    beta1: f64,
    beta2: f64,
    alpha: f64,
    reps: usize,
    cfg: &EmpiricalPowerConfig,
) -> Result<f64, MpTestError> {
    if beta2 < 0.0 {
        return Err(MpTestError::InvalidParameter(format!(
            "beta2 must be non-negative, got {beta2}"
        )));
    }
    let lambdas = graphon_spectrum(coupling, cfg.truncation_tol);
    let law = sample_limit_law(
        &lambdas,
        beta1,
        cfg.law_count,
        derive_seed(cfg.chain.seed, 0xa11),
    )?;
    let threshold = quantile(&law, alpha)?;

    let n = coupling.n();
    let draw_seed = derive_seed(cfg.chain.seed, 0xd0a);
    let draws: Vec<SpinConfig> = if beta2 == 0.0 {
        // independent fair coins are an exact draw at any size
        let mut rng = rng_from(draw_seed);
        (0..reps)
            .map(|_| SpinConfig::uniform_random(n, &mut rng))
            .collect()
    } else {
        let use_exact = match cfg.sampler {
            SamplerKind::Exact => true,
            SamplerKind::Glauber => false,
            SamplerKind::Auto => n <= crate::gibbs::EXACT_ENUM_CAP,
        };
        if use_exact {
            exact_sample(coupling, beta2, reps, draw_seed)
                .map_err(|e| MpTestError::InvalidParameter(e.to_string()))?
        } else {
            glauber_sample(coupling, beta2, reps, &cfg.chain.with_seed(draw_seed))
        }
    };
    let rejections = draws
        .iter()
        .filter(|s| hamiltonian(coupling, s) + cfg.statistic_shift > threshold)
        .count();
    Ok(rejections as f64 / reps as f64)
}

/// Power of the limiting most powerful test over a `(beta1, beta2)` grid.
///
/// `power[i][j]` covers `(beta1[i], beta2[j])` and is `NaN` on cells with
/// `beta2 < beta1`, which do not define a test.
#[derive(Debug, Clone)]
pub struct PowerCurve {
    pub alpha: f64,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub power: Vec<Vec<f64>>,
}

pub fn mp_power_curve(
    lambdas: &[f64],
    beta1_grid: &[f64],
    beta2_grid: &[f64],
    alpha: f64,
    count: usize,
    seed: u64,
) -> Result<PowerCurve, MpTestError> {
    let mut power = Vec::with_capacity(beta1_grid.len());
    for (i, &b1) in beta1_grid.iter().enumerate() {
        let mut row = Vec::with_capacity(beta2_grid.len());
        for (jcol, &b2) in beta2_grid.iter().enumerate() {
            if b2 < b1 {
                row.push(f64::NAN);
            } else {
                let cell_seed = derive_seed(seed, (i * beta2_grid.len() + jcol) as u64);
                row.push(mp_power(lambdas, b1, b2, alpha, count, cell_seed)?);
            }
        }
        power.push(row);
    }
    Ok(PowerCurve {
        alpha,
        beta1: beta1_grid.to_vec(),
        beta2: beta2_grid.to_vec(),
        power,
    })
}
