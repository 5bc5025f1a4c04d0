//! Spin configurations and samplers for the quadratic exponential family
//! `P_beta(s) = 2^{-n} exp(beta/2 * s'Js - F(beta))`.
//!
//! Small systems (up to [`EXACT_ENUM_CAP`] spins) are sampled exactly by
//! enumerating all states; larger systems use single-site heat-bath (Glauber)
//! dynamics whose stationary law is `P_beta`. Chains are deterministic given
//! their seed; replicate-level parallelism is done by deriving one seed per
//! chain with [`crate::seed::derive_seed`].

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::coupling::CouplingMatrix;
use crate::seed::rng_from;

/// Exact enumeration is limited to `2^20` states.
pub const EXACT_ENUM_CAP: usize = 20;

#[derive(Debug, Error)]
pub enum GibbsError {
    #[error("exact enumeration supports at most {cap} spins, got {n}; use glauber_sample instead")]
    Capacity { n: usize, cap: usize },
    #[error("invalid spin value {value} at index {index}; spins must be -1 or +1")]
    InvalidSpin { index: usize, value: i8 },
}

/// A configuration in `{-1, +1}^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn from_slice(spins: &[i8]) -> Result<Self, GibbsError> {
        for (index, &value) in spins.iter().enumerate() {
            if value != 1 && value != -1 {
                return Err(GibbsError::InvalidSpin { index, value });
            }
        }
        Ok(Self(spins.to_vec()))
    }

    pub fn all_plus(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Independent fair ±1 draws, one per site.
    pub fn uniform_random(n: usize, rng: &mut ChaCha8Rng) -> Self {
        Self(
            (0..n)
                .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
                .collect(),
        )
    }

    /// Decode a state bitmask: bit `i` set means spin `i` is `+1`.
    pub fn from_bitmask(state: u64, n: usize) -> Self {
        Self(
            (0..n)
                .map(|i| if (state >> i) & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    /// Mean spin value.
    pub fn magnetization(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.0.iter().map(|&s| s as f64).sum::<f64>() / self.len() as f64
    }

    /// Global spin flip.
    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|&s| -s).collect())
    }

    /// Copy with the spin at `site` flipped.
    pub fn with_site_flipped(&self, site: usize) -> Self {
        let mut spins = self.0.clone();
        spins[site] = -spins[site];
        Self(spins)
    }
}

/// Site visit order within one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scan {
    Systematic,
    Random,
}

/// Chain initialization.
#[derive(Debug, Clone)]
pub enum Init {
    AllPlus,
    UniformRandom,
    Given(SpinConfig),
}

/// Glauber chain settings. A run is fully determined by `(config, seed)`.
#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub burn_in_sweeps: usize,
    pub thin_sweeps: usize,
    pub scan: Scan,
    pub seed: u64,
    pub init: Init,
}

impl ChainConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            burn_in_sweeps: 1000,
            thin_sweeps: 5,
            scan: Scan::Systematic,
            seed,
            init: Init::UniformRandom,
        }
    }

    /// Defaults with the burn-in rule `max(1000, 20 * ceil(ln n))`.
    pub fn for_size(n: usize, seed: u64) -> Self {
        let mut cfg = Self::new(seed);
        cfg.burn_in_sweeps = default_burn_in(n);
        cfg
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut cfg = self.clone();
        cfg.seed = seed;
        cfg
    }
}

/// Default burn-in length in sweeps.
pub fn default_burn_in(n: usize) -> usize {
    let log_rule = (20.0 * (n.max(2) as f64).ln().ceil()) as usize;
    log_rule.max(1000)
}

/// Quadratic form `s'Js` over the ordered index set (twice the pair sum).
pub fn hamiltonian(coupling: &CouplingMatrix, spins: &SpinConfig) -> f64 {
    assert_eq!(spins.len(), coupling.n(), "dimension mismatch");
    let fields = coupling.mul_spins(spins.as_slice());
    fields
        .iter()
        .zip(spins.as_slice())
        .map(|(m, &s)| m * s as f64)
        .sum()
}

/// `P(spin = +1 | local field m)` for heat-bath dynamics, i.e.
/// `e^{beta m} / (e^{beta m} + e^{-beta m})` computed as a stable sigmoid.
pub fn plus_probability(beta: f64, field: f64) -> f64 {
    let x = 2.0 * beta * field;
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Probability that a heat-bath update at a site holding `spin` with local
/// field `field` flips it.
pub fn flip_probability(beta: f64, spin: i8, field: f64) -> f64 {
    plus_probability(beta, -(spin as f64) * field)
}

/// Hamiltonian of every state of a small system, indexed by bitmask.
///
/// States are visited in Gray-code order so each step is an O(degree)
/// update; the returned table is independent of `beta` and is the basis for
/// exact sampling, the exact log-partition function, and exact moments.
pub fn hamiltonian_table(coupling: &CouplingMatrix) -> Result<Vec<f64>, GibbsError> {
    let n = coupling.n();
    if n > EXACT_ENUM_CAP {
        return Err(GibbsError::Capacity {
            n,
            cap: EXACT_ENUM_CAP,
        });
    }
    let states = 1usize << n;
    let mut table = vec![0.0; states];
    let mut spins = vec![-1i8; n];
    let mut fields = coupling.mul_spins(&spins);
    let mut h = coupling.entry_sum();
    table[0] = h;
    for k in 1..states {
        let j = k.trailing_zeros() as usize;
        // flipping spin j changes s'Js by -4 s_j m_j
        h -= 4.0 * spins[j] as f64 * fields[j];
        spins[j] = -spins[j];
        coupling.axpy_column(j, 2.0 * spins[j] as f64, &mut fields);
        table[k ^ (k >> 1)] = h;
    }
    Ok(table)
}

/// Exact probability of every state under `P_beta`, indexed by bitmask.
pub fn exact_pmf(coupling: &CouplingMatrix, beta: f64) -> Result<Vec<f64>, GibbsError> {
    let table = hamiltonian_table(coupling)?;
    let max = table.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut weights: Vec<f64> = table
        .iter()
        .map(|&h| (0.5 * beta * (h - max)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(weights)
}

/// I.i.d. draws from the exact distribution by inversion of the cumulative
/// state table. Only available up to [`EXACT_ENUM_CAP`] spins.
pub fn exact_sample(
    coupling: &CouplingMatrix,
    beta: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<SpinConfig>, GibbsError> {
    let n = coupling.n();
    let pmf = exact_pmf(coupling, beta)?;
    let mut cumulative = Vec::with_capacity(pmf.len());
    let mut acc = 0.0;
    for w in &pmf {
        acc += w;
        cumulative.push(acc);
    }
    let total = acc;
    let mut rng = rng_from(seed);
    let mut draws = Vec::with_capacity(count);
    for _ in 0..count {
        let target = rng.gen::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c < target);
        draws.push(SpinConfig::from_bitmask(idx.min(pmf.len() - 1) as u64, n));
    }
    Ok(draws)
}

/// A Glauber (single-site heat-bath) chain with incrementally maintained
/// local fields.
pub struct GlauberChain<'a> {
    coupling: &'a CouplingMatrix,
    beta: f64,
    spins: Vec<i8>,
    fields: Vec<f64>,
    scan: Scan,
    rng: ChaCha8Rng,
}

impl<'a> GlauberChain<'a> {
    pub fn new(coupling: &'a CouplingMatrix, beta: f64, cfg: &ChainConfig) -> Self {
        assert!(beta >= 0.0, "beta must be non-negative");
        let n = coupling.n();
        let mut rng = rng_from(cfg.seed);
        let spins = match &cfg.init {
            Init::AllPlus => vec![1; n],
            Init::UniformRandom => SpinConfig::uniform_random(n, &mut rng).0,
            Init::Given(s) => {
                assert_eq!(s.len(), n, "dimension mismatch");
                s.0.clone()
            }
        };
        let fields = coupling.mul_spins(&spins);
        Self {
            coupling,
            beta,
            spins,
            fields,
            scan: cfg.scan,
            rng,
        }
    }

    /// One sweep of `n` single-site updates.
    pub fn sweep(&mut self) {
        let n = self.spins.len();
        match self.scan {
            Scan::Systematic => {
                for site in 0..n {
                    self.update_site(site);
                }
            }
            Scan::Random => {
                for _ in 0..n {
                    let site = self.rng.gen_range(0..n);
                    self.update_site(site);
                }
            }
        }
    }

    fn update_site(&mut self, site: usize) {
        let p_plus = plus_probability(self.beta, self.fields[site]);
        let new: i8 = if self.rng.gen::<f64>() < p_plus {
            1
        } else {
            -1
        };
        if new != self.spins[site] {
            self.spins[site] = new;
            self.coupling
                .axpy_column(site, 2.0 * new as f64, &mut self.fields);
        }
    }

    pub fn spins(&self) -> SpinConfig {
        SpinConfig(self.spins.clone())
    }

    /// The maintained local fields.
    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// Fields recomputed from scratch, for drift checks.
    pub fn recomputed_fields(&self) -> Vec<f64> {
        self.coupling.mul_spins(&self.spins)
    }
}

/// One Glauber sweep over `spins` with freshly computed local fields.
pub fn glauber_sweep(
    coupling: &CouplingMatrix,
    beta: f64,
    spins: &mut SpinConfig,
    scan: Scan,
    rng: &mut ChaCha8Rng,
) {
    assert!(beta >= 0.0, "beta must be non-negative");
    assert_eq!(spins.len(), coupling.n(), "dimension mismatch");
    let n = spins.len();
    let mut fields = coupling.mul_spins(spins.as_slice());
    let mut update = |site: usize, rng: &mut ChaCha8Rng, spins: &mut SpinConfig| {
        let p_plus = plus_probability(beta, fields[site]);
        let new: i8 = if rng.gen::<f64>() < p_plus { 1 } else { -1 };
        if new != spins.0[site] {
            spins.0[site] = new;
            coupling.axpy_column(site, 2.0 * new as f64, &mut fields);
        }
    };
    match scan {
        Scan::Systematic => {
            for site in 0..n {
                update(site, rng, spins);
            }
        }
        Scan::Random => {
            for _ in 0..n {
                let site = rng.gen_range(0..n);
                update(site, rng, spins);
            }
        }
    }
}

/// Run a Glauber chain and emit `count` configurations: `burn_in_sweeps`
/// sweeps first, then one configuration every `thin_sweeps` sweeps.
pub fn glauber_sample(
    coupling: &CouplingMatrix,
    beta: f64,
    count: usize,
    cfg: &ChainConfig,
) -> Vec<SpinConfig> {
    assert!(cfg.thin_sweeps >= 1, "thin_sweeps must be at least 1");
    let mut chain = GlauberChain::new(coupling, beta, cfg);
    for _ in 0..cfg.burn_in_sweeps {
        chain.sweep();
    }
    let mut draws = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..cfg.thin_sweeps {
            chain.sweep();
        }
        draws.push(chain.spins());
    }
    draws
}
