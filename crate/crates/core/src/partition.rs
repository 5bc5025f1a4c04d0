//! The log-partition function `F(beta) = log 2^{-n} sum_s exp(beta/2 s'Js)`:
//! exact evaluation by state enumeration for small systems, plus three
//! bounds that hold at any size for non-negative couplings.
//!
//! The upper bound compares the spins with i.i.d. Gaussians and needs the
//! full spectrum and `beta * lambda_max < 1`; the two lower bounds come from
//! a Rademacher comparison of the pair terms and from restricting the
//! variational mean-field inequality to product measures.

use thiserror::Error;

use crate::coupling::{CouplingMatrix, Spectrum};
use crate::gibbs::{hamiltonian_table, GibbsError, EXACT_ENUM_CAP};

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("exact evaluation supports at most {cap} spins, got {n}")]
    Capacity { n: usize, cap: usize },
    #[error("domain error: {0}")]
    Domain(String),
}

impl From<GibbsError> for PartitionError {
    fn from(e: GibbsError) -> Self {
        match e {
            GibbsError::Capacity { n, cap } => PartitionError::Capacity { n, cap },
            other => PartitionError::Domain(other.to_string()),
        }
    }
}

/// `log(cosh(x))` without overflow for large `|x|`.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Exact `F(beta)` by max-shifted log-sum-exp over all `2^n` states.
pub fn exact_log_partition(coupling: &CouplingMatrix, beta: f64) -> Result<f64, PartitionError> {
    assert!(beta >= 0.0, "beta must be non-negative");
    let table = hamiltonian_table(coupling)?;
    let max = table
        .iter()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(0.5 * beta * b));
    let sum: f64 = table.iter().map(|&h| (0.5 * beta * h - max).exp()).sum();
    Ok(max + sum.ln() - coupling.n() as f64 * std::f64::consts::LN_2)
}

/// Exact mean and variance of `s'Js` under `P_beta`, by enumeration.
pub fn exact_hamiltonian_moments(
    coupling: &CouplingMatrix,
    beta: f64,
) -> Result<(f64, f64), PartitionError> {
    assert!(beta >= 0.0, "beta must be non-negative");
    let table = hamiltonian_table(coupling)?;
    let max = table.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut total = 0.0;
    let mut mean = 0.0;
    for &h in &table {
        let w = (0.5 * beta * (h - max)).exp();
        total += w;
        mean += w * h;
    }
    mean /= total;
    let mut var = 0.0;
    for &h in &table {
        let w = (0.5 * beta * (h - max)).exp();
        var += w * (h - mean) * (h - mean);
    }
    Ok((mean, var / total))
}

/// Gaussian comparison upper bound `-(1/2) sum_i log(1 - beta lambda_i)`.
///
/// Valid for non-negative couplings when `beta * lambda_max < 1`; requires
/// the full spectrum because a truncated sum over signed eigenvalues does
/// not preserve the bound direction.
pub fn gaussian_upper_bound(spectrum: &Spectrum, beta: f64) -> Result<f64, PartitionError> {
    assert!(beta >= 0.0, "beta must be non-negative");
    if spectrum.partial {
        return Err(PartitionError::Domain(
            "upper bound needs the full spectrum; got a partial (top-norm only) one".into(),
        ));
    }
    let lambda_max = spectrum.eigenvalues.first().copied().unwrap_or(0.0);
    if lambda_max > 0.0 && beta * lambda_max >= 1.0 {
        return Err(PartitionError::Domain(format!(
            "upper bound requires beta < 1/lambda_max = {}, got beta = {beta}",
            1.0 / lambda_max
        )));
    }
    Ok(-0.5
        * spectrum
            .eigenvalues
            .iter()
            .map(|&l| (1.0 - beta * l).ln())
            .sum::<f64>())
}

/// Rademacher comparison lower bound `sum_{i<j} log cosh(beta J_ij)`.
///
/// Only stored (nonzero) pairs contribute, so sparse matrices are iterated
/// in O(edges).
pub fn rademacher_lower_bound(coupling: &CouplingMatrix, beta: f64) -> f64 {
    assert!(beta >= 0.0, "beta must be non-negative");
    assert!(
        coupling.nonnegative(),
        "the Rademacher bound requires non-negative couplings"
    );
    let mut sum = 0.0;
    coupling.for_each_edge(|_, _, v| sum += ln_cosh(beta * v));
    sum
}

/// Binary entropy-like rate `I(x) = ((1+x)log(1+x) + (1-x)log(1-x)) / 2`,
/// with `I(±1) = log 2` by continuity.
pub fn entropy_rate(x: f64) -> f64 {
    let a = if x > -1.0 { (1.0 + x) * x.ln_1p() } else { 0.0 };
    let b = if x < 1.0 {
        (1.0 - x) * (-x).ln_1p()
    } else {
        0.0
    };
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanFieldMode {
    /// Maximize over constant magnetization vectors `(m, ..., m)`.
    ConstantScan,
    /// Coordinate ascent on the full product-measure objective, started from
    /// the constant maximizer; never below the constant-scan value.
    CoordinateAscent,
}

/// Mean-field lower bound on `F(beta)`.
///
/// Every feasible magnetization vector yields a valid bound, so the
/// non-concave coordinate-ascent mode is safe at any iterate.
pub fn mean_field_lower_bound(coupling: &CouplingMatrix, beta: f64, mode: MeanFieldMode) -> f64 {
    assert!(beta >= 0.0, "beta must be non-negative");
    let n = coupling.n();
    if n == 0 {
        return 0.0;
    }
    let (constant_value, m_star) = constant_scan(coupling, beta);
    match mode {
        MeanFieldMode::ConstantScan => constant_value,
        MeanFieldMode::CoordinateAscent => {
            let start = vec![m_star; n];
            let ascent = coordinate_ascent_lower_bound(coupling, beta, &start);
            ascent.max(constant_value)
        }
    }
}

/// Product-measure objective `beta/2 z'Jz - sum_i I(z_i)` for a given `z`.
fn mean_field_objective(coupling: &CouplingMatrix, beta: f64, z: &[f64]) -> f64 {
    let jz = coupling.matvec(z);
    let quad: f64 = jz.iter().zip(z).map(|(a, b)| a * b).sum();
    0.5 * beta * quad - z.iter().map(|&x| entropy_rate(x)).sum::<f64>()
}

/// Coordinate ascent on the mean-field objective from `start`, iterating
/// `z_i <- tanh(beta m_i(z))` until the objective improves by less than
/// 1e-12. Returns the objective value at the final iterate.
pub fn coordinate_ascent_lower_bound(coupling: &CouplingMatrix, beta: f64, start: &[f64]) -> f64 {
    assert_eq!(start.len(), coupling.n(), "dimension mismatch");
    assert!(
        start.iter().all(|&x| (-1.0..=1.0).contains(&x)),
        "start must lie in [-1, 1]^n"
    );
    let mut z = start.to_vec();
    let mut fields = coupling.matvec(&z);
    let mut value = mean_field_objective(coupling, beta, &z);
    for _ in 0..10_000 {
        for i in 0..z.len() {
            let new = crate::mple::stable_tanh(beta * fields[i]);
            let delta = new - z[i];
            if delta != 0.0 {
                z[i] = new;
                coupling.axpy_column(i, delta, &mut fields);
            }
        }
        let new_value = mean_field_objective(coupling, beta, &z);
        if new_value - value < 1e-12 {
            return new_value.max(value);
        }
        value = new_value;
    }
    value
}

/// Scan constant vectors on a 10^4-point grid over `[-1, 1]` with local
/// ternary refinement. Returns the bound and the maximizing magnetization.
fn constant_scan(coupling: &CouplingMatrix, beta: f64) -> (f64, f64) {
    let n = coupling.n() as f64;
    let coupling_sum = coupling.entry_sum();
    // per-site objective of the constant vector (m, ..., m)
    let g = |m: f64| 0.5 * beta * m * m * coupling_sum / n - entropy_rate(m);
    let points = 10_001;
    let mut best_m = 0.0;
    let mut best = g(0.0);
    for k in 0..points {
        let m = -1.0 + 2.0 * k as f64 / (points - 1) as f64;
        let v = g(m);
        if v > best {
            best = v;
            best_m = m;
        }
    }
    let step = 2.0 / (points - 1) as f64;
    let mut lo = (best_m - step).max(-1.0);
    let mut hi = (best_m + step).min(1.0);
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if g(a) < g(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    let refined = 0.5 * (lo + hi);
    if g(refined) > best {
        best = g(refined);
        best_m = refined;
    }
    (n * best, best_m)
}

/// All partition-function information available at a given size.
#[derive(Debug, Clone)]
pub struct PartitionReport {
    pub beta: f64,
    /// Present when `n <= EXACT_ENUM_CAP`.
    pub exact: Option<f64>,
    /// Present for non-negative couplings with a full spectrum and
    /// `beta * lambda_max < 1`.
    pub gaussian_upper: Option<f64>,
    pub rademacher_lower: f64,
    pub mean_field_lower: f64,
}

/// Assemble the exact value and all applicable bounds; absence is encoded
/// with `None` rather than errors.
pub fn partition_report(coupling: &CouplingMatrix, beta: f64) -> PartitionReport {
    assert!(
        coupling.nonnegative(),
        "partition bounds require non-negative couplings"
    );
    let exact = if coupling.n() <= EXACT_ENUM_CAP {
        Some(exact_log_partition(coupling, beta).expect("within enumeration cap"))
    } else {
        None
    };
    let spectrum = coupling.spectrum();
    let gaussian_upper = gaussian_upper_bound(&spectrum, beta).ok();
    PartitionReport {
        beta,
        exact,
        gaussian_upper,
        rademacher_lower: rademacher_lower_bound(coupling, beta),
        mean_field_lower: mean_field_lower_bound(coupling, beta, MeanFieldMode::CoordinateAscent),
    }
}
