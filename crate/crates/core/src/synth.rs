//! Seeded synthetic loss matrices and curve samples.
//!
//! Random numbers come from SplitMix64 (increment `0x9E3779B97F4A7C15`,
//! multipliers `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`, shifts 30/27/31).
//! Uniforms take the top 53 bits; normals use Box-Muller with one pair of
//! uniforms per draw. The integer stream is identical on every platform.
//!
//! Generative model for [`synth_pool`], model `m` of family `f` with budget
//! `P` on text `t`:
//!
//! ```text
//! sum_loss(m, t) = n_bar * (base_floor + amplitude * P^(-alpha_true)
//!                           + strength * s_f(t) + noise_sigma * z)
//! s_f(t) = 0 if t mod n_families == f else 1
//! ```
//!
//! Each family has low loss on its own stratum of texts, so ensembles that
//! span families lower the per-text minimum on every stratum they cover.

use serde::{Deserialize, Serialize};

use crate::data::{LossCell, LossMatrix, ModelMeta};
use crate::error::{Error, Result};
use crate::pareto::{EnsembleKey, FrontierPoint};

/// SplitMix64 stream.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(Self::GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [lo, hi].
    pub fn next_range(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.next_u64() % (hi - lo + 1)
    }

    /// Standard normal.
    pub fn next_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0, 1]
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_families: usize,
    pub models_per_family: usize,
    /// Model j of each family gets `params_grid_billions[j % len]`.
    pub params_grid_billions: Vec<f64>,
    pub n_texts: usize,
    /// Nats per token.
    pub base_floor: f64,
    pub family_signature_strength: f64,
    /// Per-token noise standard deviation, nats.
    pub noise_sigma: f64,
    pub seed: u64,
    pub amplitude: f64,
    pub alpha_true: f64,
    /// Inclusive token-count range per cell.
    pub token_range: (u64, u64),
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_families: 3,
            models_per_family: 6,
            params_grid_billions: vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0],
            n_texts: 60,
            base_floor: 1.5,
            family_signature_strength: 1.0,
            noise_sigma: 0.0,
            seed: 0,
            amplitude: 2.0,
            alpha_true: 0.35,
            token_range: (64, 512),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSynthConfig(m.to_string()));
        if self.n_families == 0 || self.models_per_family == 0 || self.n_texts == 0 {
            return bad("counts must be at least 1");
        }
        if self.params_grid_billions.is_empty() {
            return bad("params grid is empty");
        }
        if self
            .params_grid_billions
            .iter()
            .any(|p| !(p.is_finite() && *p > 0.0))
        {
            return bad("params grid values must be positive");
        }
        let non_negative = [
            self.base_floor,
            self.family_signature_strength,
            self.noise_sigma,
            self.amplitude,
            self.alpha_true,
        ];
        if non_negative.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("floor, strength, noise, amplitude and alpha must be finite and >= 0");
        }
        let (lo, hi) = self.token_range;
        if lo == 0 || hi < lo {
            return bad("token range must satisfy 1 <= lo <= hi");
        }
        Ok(())
    }

    /// Human-readable statement of the generative model with this config's
    /// constants filled in.
    pub fn generative_equation(&self) -> String {
        format!(
            "sum_loss(m,t) = n_bar * ({} + {} * P_m^(-{}) + {} * s_f(m)(t) + {} * z), \
             s_f(t) = 0 if t mod {} == f else 1, z ~ N(0,1) via SplitMix64(seed={}) Box-Muller, \
             token_count ~ U{{{}..={}}}, clamped at 0",
            self.base_floor,
            self.amplitude,
            self.alpha_true,
            self.family_signature_strength,
            self.noise_sigma,
            self.n_families,
            self.seed,
            self.token_range.0,
            self.token_range.1,
        )
    }
}

pub fn family_name(f: usize) -> String {
    format!("fam{f:02}")
}

pub fn model_name(f: usize, j: usize) -> String {
    format!("f{f:02}-m{j:02}")
}

/// Builds a synthetic pool. Deterministic in `config.seed`.
pub fn synth_pool(config: &SynthConfig) -> Result<LossMatrix> {
    config.validate()?;
    let mut rng = SplitMix64::new(config.seed);
    let grid = &config.params_grid_billions;
    let models: Vec<ModelMeta> = (0..config.n_families)
        .flat_map(|f| {
            (0..config.models_per_family).map(move |j| {
                ModelMeta::new(model_name(f, j), family_name(f), grid[j % grid.len()])
            })
        })
        .collect();
    let texts: Vec<String> = (0..config.n_texts).map(|t| format!("t{t:05}")).collect();

    let cells = models.len() * config.n_texts;
    let (lo, hi) = config.token_range;
    let tokens: Vec<u64> = (0..cells).map(|_| rng.next_range(lo, hi)).collect();
    let n_bar = tokens.iter().map(|&c| c as f64).sum::<f64>() / cells as f64;

    let mut out = Vec::with_capacity(cells);
    for (m, meta) in models.iter().enumerate() {
        let family = m / config.models_per_family;
        let scaling = config.amplitude * meta.params_billions.powf(-config.alpha_true);
        for t in 0..config.n_texts {
            let signature = if t % config.n_families == family {
                0.0
            } else {
                1.0
            };
            let z = rng.next_normal();
            let per_token = config.base_floor
                + scaling
                + config.family_signature_strength * signature
                + config.noise_sigma * z;
            out.push(LossCell {
                sum_loss: (n_bar * per_token).max(0.0),
                token_count: tokens[m * config.n_texts + t],
            });
        }
    }
    LossMatrix::new(models, texts, out)
}

/// Samples of `A * P^(-alpha) + L_inf` plus Gaussian noise, one point per
/// budget, keyed `p000`, `p001`, ...
pub fn synth_curve_points(
    a: f64,
    alpha: f64,
    l_inf: f64,
    budgets: &[f64],
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<FrontierPoint>> {
    if !(a.is_finite() && a > 0.0)
        || !(alpha.is_finite() && alpha > 0.0)
        || !(l_inf.is_finite() && l_inf >= 0.0)
    {
        return Err(Error::InvalidCurve(format!(
            "A={a}, alpha={alpha}, L_inf={l_inf}"
        )));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidCurve(format!("noise_sigma={noise_sigma}")));
    }
    if let Some(p) = budgets.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        return Err(Error::InvalidBudget(*p));
    }
    let mut rng = SplitMix64::new(seed);
    Ok(budgets
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let noise = noise_sigma * rng.next_normal();
            FrontierPoint::new(
                p,
                a * p.powf(-alpha) + l_inf + noise,
                EnsembleKey::new([format!("p{i:03}")]),
            )
        })
        .collect())
}
