//! Maximum pseudolikelihood estimation of the inverse temperature.
//!
//! Given one configuration `s`, the pseudolikelihood score
//! `L_s(x) = (1/n) sum_i m_i (s_i - tanh(x m_i))` is non-increasing in `x`,
//! so the estimate `inf { x >= 0 : L_s(x) = 0 }` is found by bracketed
//! bisection with a terminal Newton polish. Every degenerate outcome is a
//! [`MpleStatus`], never a panic, so experiment grids can aggregate freely.

use crate::coupling::CouplingMatrix;
use crate::gibbs::SpinConfig;

/// `tanh` through the identity `sign(z) * (1 - 2 / (e^{2|z|} + 1))`, exact
/// under sign flip and safe at `z = ±inf`.
pub fn stable_tanh(z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let s = if z < 0.0 { -1.0 } else { 1.0 };
    s * (1.0 - 2.0 / ((2.0 * z.abs()).exp() + 1.0))
}

/// `sech^2(z)` evaluated without overflow.
fn sech_sq(z: f64) -> f64 {
    let e = (-2.0 * z.abs()).exp();
    let denom = 1.0 + e;
    4.0 * e / (denom * denom)
}

/// Local fields `m_i = sum_j J(i, j) s_j`.
///
/// `m_i` never depends on `s_i` because the diagonal is zero; for
/// non-negative couplings `|m_i|` is bounded by the row sum.
pub fn local_fields(coupling: &CouplingMatrix, spins: &SpinConfig) -> Vec<f64> {
    assert_eq!(spins.len(), coupling.n(), "dimension mismatch");
    coupling.mul_spins(spins.as_slice())
}

/// The pseudolikelihood score of one configuration, with precomputed fields.
pub struct ScoreFunction {
    fields: Vec<f64>,
    spins: Vec<i8>,
}

impl ScoreFunction {
    pub fn new(coupling: &CouplingMatrix, spins: &SpinConfig) -> Self {
        Self {
            fields: local_fields(coupling, spins),
            spins: spins.as_slice().to_vec(),
        }
    }

    /// True when every local field vanishes; the score is then identically 0.
    pub fn is_degenerate(&self) -> bool {
        self.fields.iter().all(|&m| m == 0.0)
    }

    /// `L(x)` for `x` in `[0, inf]`, interpreting `tanh(±inf) = ±1`.
    pub fn eval(&self, x: f64) -> f64 {
        if self.spins.is_empty() {
            return 0.0;
        }
        let n = self.spins.len() as f64;
        let mut sum = 0.0;
        if x.is_infinite() {
            for (&m, &s) in self.fields.iter().zip(&self.spins) {
                sum += m * s as f64 - m.abs();
            }
        } else {
            for (&m, &s) in self.fields.iter().zip(&self.spins) {
                if m != 0.0 {
                    sum += m * (s as f64 - stable_tanh(x * m));
                }
            }
        }
        sum / n
    }

    /// `L'(x) = -(1/n) sum_i m_i^2 sech^2(x m_i) <= 0`.
    pub fn derivative(&self, x: f64) -> f64 {
        if self.spins.is_empty() {
            return 0.0;
        }
        let n = self.spins.len() as f64;
        let sum: f64 = self
            .fields
            .iter()
            .map(|&m| {
                if m == 0.0 {
                    0.0
                } else {
                    m * m * sech_sq(x * m)
                }
            })
            .sum();
        -sum / n
    }
}

/// Score `L_s(x)`; at `x = 0` this equals `hamiltonian(J, s) / n`.
pub fn score(coupling: &CouplingMatrix, spins: &SpinConfig, x: f64) -> f64 {
    assert!(x.is_infinite() || x >= 0.0, "x must be non-negative");
    ScoreFunction::new(coupling, spins).eval(x)
}

/// Score derivative at finite `x >= 0`.
pub fn score_derivative(coupling: &CouplingMatrix, spins: &SpinConfig, x: f64) -> f64 {
    assert!(
        x.is_finite() && x >= 0.0,
        "x must be finite and non-negative"
    );
    ScoreFunction::new(coupling, spins).derivative(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MpleStatus {
    /// A finite root with `|L(beta_hat)| <= tolerance`.
    Interior,
    /// `L(0) <= 0`: the infimum is attained at the boundary, `beta_hat = 0`.
    BoundaryZero,
    /// `L > 0` up to the bracket cap and `L(inf) >= 0`: no finite root.
    Infinite,
    /// All local fields vanish; the score is identically zero.
    Degenerate,
}

impl MpleStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            MpleStatus::Interior => "interior",
            MpleStatus::BoundaryZero => "boundary_zero",
            MpleStatus::Infinite => "infinite",
            MpleStatus::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MpleOptions {
    /// Accept a root once `|L|` falls below this value.
    pub tolerance: f64,
    /// Upper bracket limit before the estimate is declared infinite.
    pub bracket_cap: f64,
}

impl Default for MpleOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            bracket_cap: 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MpleResult {
    /// The estimate; `f64::INFINITY` when status is [`MpleStatus::Infinite`].
    pub beta_hat: f64,
    pub status: MpleStatus,
    /// `L(beta_hat)` (`L(inf)` for the infinite status).
    pub residual: f64,
    /// Number of score evaluations spent.
    pub iterations: u32,
}

impl MpleResult {
    pub fn is_interior(&self) -> bool {
        self.status == MpleStatus::Interior
    }
}

/// Maximum pseudolikelihood estimate of the inverse temperature.
pub fn mple(coupling: &CouplingMatrix, spins: &SpinConfig, opts: &MpleOptions) -> MpleResult {
    let f = ScoreFunction::new(coupling, spins);
    if f.is_degenerate() {
        return MpleResult {
            beta_hat: 0.0,
            status: MpleStatus::Degenerate,
            residual: 0.0,
            iterations: 0,
        };
    }
    let at_zero = f.eval(0.0);
    let mut iterations = 1u32;
    if at_zero <= 0.0 {
        return MpleResult {
            beta_hat: 0.0,
            status: MpleStatus::BoundaryZero,
            residual: at_zero,
            iterations,
        };
    }

    // Double the upper bracket until the score turns strictly negative
    // (saturated tanh can pin a positive score to exactly 0.0, which must
    // not count as a bracket). Past the cap, a non-negative limit value
    // means there is no finite root; a negative limit guarantees one
    // further out, so keep going.
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut checked_cap = false;
    loop {
        let v = f.eval(hi);
        iterations += 1;
        if v < 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > opts.bracket_cap && !checked_cap {
            checked_cap = true;
            let at_inf = f.eval(f64::INFINITY);
            iterations += 1;
            if at_inf >= -opts.tolerance {
                return MpleResult {
                    beta_hat: f64::INFINITY,
                    status: MpleStatus::Infinite,
                    residual: at_inf,
                    iterations,
                };
            }
        }
    }

    // Bisection: L(lo) > 0 >= L(hi).
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        let v = f.eval(mid);
        iterations += 1;
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        let width_done = (hi - lo) <= 1e-14 * mid.abs().max(1.0);
        if v.abs() <= opts.tolerance && width_done {
            break;
        }
        let next = 0.5 * (lo + hi);
        if next == mid {
            break;
        }
        mid = next;
    }

    // One Newton step to polish the residual.
    let deriv = f.derivative(mid);
    if deriv < 0.0 {
        let candidate = mid - f.eval(mid) / deriv;
        iterations += 2;
        if candidate.is_finite() && candidate > 0.0 && f.eval(candidate).abs() < f.eval(mid).abs() {
            mid = candidate;
        }
    }

    MpleResult {
        beta_hat: mid,
        status: MpleStatus::Interior,
        residual: f.eval(mid),
        iterations,
    }
}

/// [`mple`] with default tolerance `1e-12` and bracket cap `1e6`.
pub fn mple_default(coupling: &CouplingMatrix, spins: &SpinConfig) -> MpleResult {
    mple(coupling, spins, &MpleOptions::default())
}
