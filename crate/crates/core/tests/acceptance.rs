//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run with `cargo test -p collab-frontier --test acceptance`.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use collab_frontier::enumeration::{brute_force_enumerate_with, enumerate_pruned_with};
use collab_frontier::fitting::{power_law, residual_jacobian};
use collab_frontier::pareto::pareto_front_with;
use collab_frontier::report::single_model_points;
use collab_frontier::{
    build_min_vector, cmd_run, fit_scaling_law, oracle_loss, pairwise_frontiers_and_fits,
    partition_pairs, synth_curve_points, synth_pool, Dominance, EnsembleKey, EnumerationOptions,
    Exec, FitConfig, FrontierPoint, LossCell, LossMatrix, ModelMeta, RunConfig, ScalingFit,
    SynthConfig,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIT_NOISE_FREE_REL_TOL: f64 = 1e-3;
const FIT_NOISE_SIGMA: f64 = 0.01;
const FIT_NOISE_SEEDS: u64 = 50;
const FIT_MEDIAN_ALPHA_REL_TOL: f64 = 0.05;
const FIT_MEDIAN_LINF_ABS_TOL: f64 = 0.02;
const FIT_BUDGET: Duration = Duration::from_secs(5);

const PARETO_SETS: usize = 120;
const PARETO_MAX_POINTS: usize = 10_000;
const PARETO_BUDGET: Duration = Duration::from_secs(10);

const ORACLE_MATRICES: usize = 120;
const ORACLE_NESTED_PAIRS: usize = 1_000;

const PRUNE_POOLS: usize = 60;
const PRUNE_MONOTONE_POOLS: usize = 20;
const PRUNE_BUDGET: Duration = Duration::from_secs(60);

const QUALITATIVE_BUDGET: Duration = Duration::from_secs(120);

const REFERENCE_HOMOGENEOUS_PAIRS: usize = 506;
const REFERENCE_HETEROGENEOUS_PAIRS: usize = 1979;

const GRAD_POINTS: usize = 100;
const GRAD_STEP: f64 = 1e-6;
const GRAD_REL_TOL: f64 = 1e-5;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn doubling_budgets() -> Vec<f64> {
    (0..11).map(|i| f64::from(1u32 << i)).collect()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn fit_recovery(a: f64, alpha: f64, l_inf: f64) -> Outcome {
    let start = Instant::now();
    let config = FitConfig::default();
    let budgets = doubling_budgets();
    let clean = synth_curve_points(a, alpha, l_inf, &budgets, 0.0, 0).unwrap();
    let fit = match fit_scaling_law(&clean, &config) {
        Ok(f) => f,
        Err(e) => return outcome(false, format!("noise-free fit failed: {e}")),
    };
    let worst = rel(fit.a, a)
        .max(rel(fit.alpha, alpha))
        .max(rel(fit.l_inf, l_inf));

    let mut alpha_err = Vec::new();
    let mut l_inf_err = Vec::new();
    let mut failures = 0;
    for seed in 0..FIT_NOISE_SEEDS {
        let noisy = synth_curve_points(a, alpha, l_inf, &budgets, FIT_NOISE_SIGMA, seed).unwrap();
        match fit_scaling_law(&noisy, &config) {
            Ok(f) => {
                alpha_err.push(rel(f.alpha, alpha));
                l_inf_err.push((f.l_inf - l_inf).abs());
            }
            Err(_) => failures += 1,
        }
    }
    let elapsed = start.elapsed();
    let med_alpha = median(alpha_err);
    let med_l_inf = median(l_inf_err);
    let pass = worst <= FIT_NOISE_FREE_REL_TOL
        && failures == 0
        && med_alpha <= FIT_MEDIAN_ALPHA_REL_TOL
        && med_l_inf <= FIT_MEDIAN_LINF_ABS_TOL
        && elapsed < FIT_BUDGET;
    outcome(
        pass,
        format!(
            "noise-free worst rel err {worst:.2e}; {FIT_NOISE_SEEDS} seeds sigma={FIT_NOISE_SIGMA}: \
             median alpha rel err {med_alpha:.4}, median L_inf abs err {med_l_inf:.4}, \
             failed fits {failures}; {elapsed:.2?}"
        ),
    )
}

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<FrontierPoint> {
    // Coarse grids on some sets force exact ties on one or both axes.
    let grid = if rng.random_bool(0.5) {
        Some(rng.random_range(2..40u32))
    } else {
        None
    };
    (0..n)
        .map(|i| {
            let (p, l) = match grid {
                Some(g) => (
                    f64::from(rng.random_range(1..=g)) * 0.5,
                    f64::from(rng.random_range(0..g)) * 0.25,
                ),
                None => (rng.random_range(0.1..100.0), rng.random_range(0.0..5.0)),
            };
            let key = format!(
                "x{:03}",
                rng.random_range(0..(n as u32).min(500)).max(i as u32 % 7)
            );
            FrontierPoint::new(p, l, EnsembleKey::new([key]))
        })
        .collect()
}

fn exhaustive_weak_front(points: &[FrontierPoint]) -> Vec<FrontierPoint> {
    let mut kept = Vec::new();
    for (i, q) in points.iter().enumerate() {
        let removed = points.iter().enumerate().any(|(j, p)| {
            if i == j {
                return false;
            }
            let no_worse = p.total_params_billions <= q.total_params_billions && p.loss <= q.loss;
            let better = p.total_params_billions < q.total_params_billions || p.loss < q.loss;
            let tie = p.total_params_billions == q.total_params_billions && p.loss == q.loss;
            (no_worse && better)
                || (tie
                    && (p.ensemble_key < q.ensemble_key
                        || (p.ensemble_key == q.ensemble_key && j < i)))
        });
        if !removed {
            kept.push(q.clone());
        }
    }
    kept.sort_by(|a, b| {
        a.total_params_billions
            .total_cmp(&b.total_params_billions)
            .then(a.loss.total_cmp(&b.loss))
            .then_with(|| a.ensemble_key.cmp(&b.ensemble_key))
    });
    kept
}

fn pareto_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut sizes: Vec<usize> = (0..PARETO_SETS - 4)
        .map(|_| rng.random_range(1..=2_000))
        .collect();
    sizes.extend([PARETO_MAX_POINTS; 4]);
    let mut mismatches = 0;
    let mut staircase = 0;
    let mut idempotence = 0;
    for &n in &sizes {
        let points = random_points(&mut rng, n);
        let front = pareto_front_with(&points, Dominance::Weak, Exec::default()).unwrap();
        if front.points() != exhaustive_weak_front(&points).as_slice() {
            mismatches += 1;
        }
        let strictly_monotone = front.points().windows(2).all(|w| {
            w[0].total_params_billions < w[1].total_params_billions && w[0].loss > w[1].loss
        });
        if !strictly_monotone {
            staircase += 1;
        }
        if pareto_front_with(front.points(), Dominance::Weak, Exec::default()).unwrap() != front {
            idempotence += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && staircase == 0 && idempotence == 0 && elapsed < PARETO_BUDGET,
        format!(
            "{} sets (max {} points): {mismatches} mismatches vs exhaustive, {staircase} staircase \
             violations, {idempotence} idempotence violations; {elapsed:.2?}",
            sizes.len(),
            sizes.iter().max().unwrap()
        ),
    )
}

struct RawPool {
    ids: Vec<String>,
    families: Vec<String>,
    params: Vec<f64>,
    /// `sum_loss[m][t]`
    loss: Vec<Vec<f64>>,
    tokens: Vec<Vec<u64>>,
}

impl RawPool {
    fn random(rng: &mut ChaCha8Rng, n_models: usize, n_texts: usize) -> Self {
        let n_families = rng.random_range(1..=n_models.min(4));
        let mut ids: Vec<String> = (0..n_models).map(|i| format!("model-{i:02}")).collect();
        ids.shuffle(rng);
        let tie_grid = rng.random_bool(0.3);
        let loss = (0..n_models)
            .map(|_| {
                (0..n_texts)
                    .map(|_| {
                        if tie_grid {
                            f64::from(rng.random_range(1..6u32)) * 10.0
                        } else {
                            rng.random_range(1.0..800.0)
                        }
                    })
                    .collect()
            })
            .collect();
        RawPool {
            ids,
            families: (0..n_models)
                .map(|_| format!("fam{}", rng.random_range(0..n_families)))
                .collect(),
            params: (0..n_models)
                .map(|_| f64::from(rng.random_range(1..=140u32)) * 0.5)
                .collect(),
            loss,
            tokens: (0..n_models)
                .map(|_| (0..n_texts).map(|_| rng.random_range(1..=400)).collect())
                .collect(),
        }
    }

    fn matrix(&self) -> LossMatrix {
        let models = (0..self.ids.len())
            .map(|m| {
                ModelMeta::new(
                    self.ids[m].clone(),
                    self.families[m].clone(),
                    self.params[m],
                )
            })
            .collect();
        let n_texts = self.loss[0].len();
        let texts = (0..n_texts).map(|t| format!("text-{t:03}")).collect();
        let cells = (0..self.ids.len())
            .flat_map(|m| {
                (0..n_texts).map(move |t| LossCell {
                    sum_loss: self.loss[m][t],
                    token_count: self.tokens[m][t],
                })
            })
            .collect();
        LossMatrix::new(models, texts, cells).unwrap()
    }

    fn n_bar(&self) -> f64 {
        let total: u64 = self.tokens.iter().flatten().sum();
        total as f64 / (self.ids.len() * self.loss[0].len()) as f64
    }

    /// Per-text argmin over `members`, averaged over texts, divided by n_bar.
    fn oracle(&self, members: &[usize]) -> f64 {
        let n_texts = self.loss[0].len();
        let mut total = 0.0;
        for t in 0..n_texts {
            let mut winner = members[0];
            for &m in &members[1..] {
                if self.loss[m][t] < self.loss[winner][t] {
                    winner = m;
                }
            }
            total += self.loss[winner][t];
        }
        total / n_texts as f64 / self.n_bar()
    }

    fn budget(&self, members: &[usize]) -> f64 {
        let mut sorted = members.to_vec();
        sorted.sort_by(|&a, &b| self.ids[a].cmp(&self.ids[b]));
        sorted.iter().fold(0.0, |acc, &m| acc + self.params[m])
    }

    fn key(&self, members: &[usize]) -> EnsembleKey {
        EnsembleKey::new(members.iter().map(|&m| self.ids[m].as_str()))
    }
}

fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    (1u32..1 << n)
        .filter(|mask| mask.count_ones() as usize <= k)
        .map(|mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
        .collect()
}

fn oracle_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut checked = 0usize;
    let mut mismatches = 0usize;
    let mut pools = Vec::new();
    for _ in 0..ORACLE_MATRICES {
        let n_models = rng.random_range(1..=10);
        let n_texts = rng.random_range(1..=50);
        let pool = RawPool::random(&mut rng, n_models, n_texts);
        let matrix = pool.matrix();
        for members in subsets_up_to(n_models, 3) {
            let ids: Vec<&str> = members.iter().map(|&m| pool.ids[m].as_str()).collect();
            let eval = oracle_loss(&matrix, &build_min_vector(&matrix, &ids).unwrap());
            checked += 1;
            let ok = eval.oracle_loss == pool.oracle(&members)
                && eval.total_params_billions == pool.budget(&members)
                && EnsembleKey::new(eval.member_ids.iter().map(String::as_str))
                    == pool.key(&members);
            if !ok {
                mismatches += 1;
            }
        }
        pools.push((pool, matrix));
    }

    let mut violations = 0;
    let mut pairs = 0;
    while pairs < ORACLE_NESTED_PAIRS {
        let (pool, matrix) = &pools[rng.random_range(0..pools.len())];
        let n = pool.ids.len();
        if n < 2 {
            continue;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let outer = rng.random_range(2..=n);
        let inner = rng.random_range(1..outer);
        let loss = |members: &[usize]| {
            let ids: Vec<&str> = members.iter().map(|&m| pool.ids[m].as_str()).collect();
            oracle_loss(matrix, &build_min_vector(matrix, &ids).unwrap()).oracle_loss
        };
        if loss(&order[..outer]) > loss(&order[..inner]) {
            violations += 1;
        }
        pairs += 1;
    }
    outcome(
        mismatches == 0 && violations == 0,
        format!(
            "{ORACLE_MATRICES} matrices, {checked} subsets of size <= 3: {mismatches} mismatches vs \
             independent argmin; {pairs} nested pairs: {violations} monotonicity violations"
        ),
    )
}

fn pruning_vs_exact() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let opts = EnumerationOptions::default();
    let mut envelope_violations = 0;
    let mut full_pool_mismatches = 0;
    let mut full_pool_on_both = 0;
    let mut explored = 0;
    for _ in 0..PRUNE_POOLS {
        let n = rng.random_range(8..=12);
        let n_texts = rng.random_range(5..=50);
        let pool = RawPool::random(&mut rng, n, n_texts);
        let matrix = pool.matrix();
        let exact = brute_force_enumerate_with(&matrix, n, opts).unwrap();
        let pruned = enumerate_pruned_with(&matrix, n, opts).unwrap();

        for p in pruned.merged.points() {
            explored += 1;
            match exact.envelope_at(p.total_params_billions) {
                Some(best) if best <= p.loss => {}
                _ => envelope_violations += 1,
            }
        }

        let all: Vec<usize> = (0..n).collect();
        let want = FrontierPoint::new(pool.budget(&all), pool.oracle(&all), pool.key(&all));
        let last = pruned.generations.last().unwrap();
        let min_loss = |f: &collab_frontier::Frontier| {
            f.points()
                .iter()
                .map(|p| p.loss)
                .fold(f64::INFINITY, f64::min)
        };
        let ok = last.k == n
            && last.frontier.points() == [want.clone()]
            && min_loss(&exact) == want.loss
            && min_loss(&pruned.merged) == want.loss;
        if !ok {
            full_pool_mismatches += 1;
        }
        let on = |f: &collab_frontier::Frontier| f.points().contains(&want);
        if on(&exact) && on(&pruned.merged) {
            full_pool_on_both += 1;
        }
    }

    let mut monotone_mismatches = 0;
    for i in 0..PRUNE_MONOTONE_POOLS {
        let matrix = if i % 2 == 0 {
            synth_pool(&SynthConfig {
                n_families: 1,
                models_per_family: rng.random_range(8..=12),
                params_grid_billions: vec![
                    0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0,
                ],
                n_texts: rng.random_range(10..=60),
                seed: i as u64,
                ..SynthConfig::default()
            })
            .unwrap()
        } else {
            monotone_pool(&mut rng)
        };
        let n = matrix.n_models();
        let exact = brute_force_enumerate_with(&matrix, n, opts).unwrap();
        let pruned = enumerate_pruned_with(&matrix, n, opts).unwrap();
        if exact != pruned.merged {
            monotone_mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        envelope_violations == 0 && full_pool_mismatches == 0 && monotone_mismatches == 0 && elapsed < PRUNE_BUDGET,
        format!(
            "{PRUNE_POOLS} pools of 8-12 models: {envelope_violations} envelope violations over {explored} \
             pruned points, {full_pool_mismatches} full-pool mismatches (full pool on both frontiers in \
             {full_pool_on_both}); {PRUNE_MONOTONE_POOLS} monotone pools: {monotone_mismatches} pruned != exact; \
             {elapsed:.2?}"
        ),
    )
}

/// Random pool in which a larger model is strictly better on every text.
fn monotone_pool(rng: &mut ChaCha8Rng) -> LossMatrix {
    let n = rng.random_range(8..=12);
    let n_texts = rng.random_range(5..=40);
    let mut params: Vec<f64> = Vec::new();
    while params.len() < n {
        let p = f64::from(rng.random_range(1..=200u32)) * 0.25;
        if !params.contains(&p) {
            params.push(p);
        }
    }
    params.sort_by(f64::total_cmp);
    let mut columns: Vec<Vec<f64>> = (0..n_texts)
        .map(|_| {
            let mut col: Vec<f64> = (0..n).map(|_| rng.random_range(10.0..900.0)).collect();
            col.sort_by(|a, b| b.total_cmp(a));
            col.dedup();
            col
        })
        .collect();
    columns.retain(|c| c.len() == n);
    if columns.is_empty() {
        columns.push((0..n).map(|i| 1000.0 - i as f64).collect());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let models = (0..n)
        .map(|m| ModelMeta::new(format!("mono-{:02}", order[m]), "solo", params[m]))
        .collect();
    let cells = (0..n)
        .flat_map(|m| {
            columns
                .iter()
                .map(move |c| LossCell {
                    sum_loss: c[m],
                    token_count: 100,
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let texts = (0..columns.len()).map(|t| format!("t{t}")).collect();
    LossMatrix::new(models, texts, cells).unwrap()
}

/// 71 models whose family sizes give 506 same-family pairs.
fn seventy_one_model_pool() -> LossMatrix {
    let mut families: Vec<String> = Vec::new();
    for (f, size) in [20, 20, 16, 4].into_iter().enumerate() {
        families.extend(std::iter::repeat_n(format!("fam{f}"), size));
    }
    families.extend((0..11).map(|i| format!("solo{i}")));
    let models = families
        .iter()
        .enumerate()
        .map(|(i, f)| ModelMeta::new(format!("m{i:02}"), f.clone(), 1.0 + i as f64))
        .collect();
    let cells = (0..71)
        .map(|i| LossCell {
            sum_loss: 100.0 + i as f64,
            token_count: 50,
        })
        .collect();
    LossMatrix::new(models, vec!["t0".into()], cells).unwrap()
}

fn pair_partition_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut violations = 0;
    let pools = 200;
    for _ in 0..pools {
        let n = rng.random_range(2..=40);
        let pool = RawPool::random(&mut rng, n, 1);
        let partition = partition_pairs(&pool.matrix()).unwrap();
        let same_family = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| pool.families[i] == pool.families[j])
            .count();
        if partition.total() != n * (n - 1) / 2 || partition.homogeneous.len() != same_family {
            violations += 1;
        }
    }
    let c71: usize = (0..71).map(|i| 70 - i).sum();
    let reference =
        REFERENCE_HOMOGENEOUS_PAIRS + REFERENCE_HETEROGENEOUS_PAIRS == c71 && c71 == 2485;
    let constructed = partition_pairs(&seventy_one_model_pool()).unwrap();
    let constructed_ok = constructed.homogeneous.len() == REFERENCE_HOMOGENEOUS_PAIRS
        && constructed.heterogeneous.len() == REFERENCE_HETEROGENEOUS_PAIRS;
    outcome(
        violations == 0 && reference && constructed_ok,
        format!(
            "{pools} random pools: {violations} violations of |homo| + |hetero| = C(n,2); \
             {REFERENCE_HOMOGENEOUS_PAIRS} + {REFERENCE_HETEROGENEOUS_PAIRS} = C(71,2) = {c71}: {reference}; \
             71-model pool with families of 20, 20, 16, 4 and 11 singletons splits {} / {}",
            constructed.homogeneous.len(),
            constructed.heterogeneous.len()
        ),
    )
}

fn fitted(label: &str, fit: &Result<ScalingFit, String>) -> Result<f64, String> {
    fit.as_ref()
        .map(|f| f.l_inf)
        .map_err(|e| format!("{label} fit failed: {e}"))
}

fn qualitative_reproduction() -> Outcome {
    let start = Instant::now();
    let config = SynthConfig {
        n_families: 3,
        family_signature_strength: 1.0,
        ..SynthConfig::default()
    };
    let matrix = synth_pool(&config).unwrap();
    let fit_config = FitConfig::default();
    let opts = EnumerationOptions::default();

    let single =
        pareto_front_with(&single_model_points(&matrix), opts.dominance, opts.exec).unwrap();
    let single_fit = fit_scaling_law(single.points(), &fit_config).map_err(|e| e.to_string());
    let ensemble = enumerate_pruned_with(&matrix, matrix.n_models(), opts)
        .unwrap()
        .merged_from(2);
    let ensemble_fit = fit_scaling_law(ensemble.points(), &fit_config).map_err(|e| e.to_string());
    let pairs = pairwise_frontiers_and_fits(&matrix, &fit_config).unwrap();
    let elapsed = start.elapsed();

    let values = (|| {
        Ok::<_, String>((
            fitted("single", &single_fit)?,
            fitted("ensemble", &ensemble_fit)?,
            fitted("homogeneous", &pairs.homogeneous.fit)?,
            fitted("heterogeneous", &pairs.heterogeneous.fit)?,
        ))
    })();
    match values {
        Ok((single, ensemble, homo, hetero)) => outcome(
            ensemble < single && hetero < homo && elapsed < QUALITATIVE_BUDGET,
            format!(
                "{} families x {} models: L_inf ensemble {ensemble:.4} < single {single:.4}; \
                 heterogeneous {hetero:.4} < homogeneous {homo:.4}; {elapsed:.2?}",
                config.n_families, config.models_per_family
            ),
        ),
        Err(e) => outcome(false, e),
    }
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut worst: f64 = 0.0;
    for _ in 0..GRAD_POINTS {
        let a = rng.random_range(0.1..5.0);
        let alpha = rng.random_range(0.01..1.5);
        let l_inf = rng.random_range(0.0..4.0);
        let budget = 10f64.powf(rng.random_range(-1.0..3.0));
        let loss = rng.random_range(0.5..8.0);
        let residual = |a: f64, alpha: f64, l_inf: f64| loss - power_law(a, alpha, l_inf, budget);
        let h = GRAD_STEP;
        let numeric = [
            (residual(a + h, alpha, l_inf) - residual(a - h, alpha, l_inf)) / (2.0 * h),
            (residual(a, alpha + h, l_inf) - residual(a, alpha - h, l_inf)) / (2.0 * h),
            (residual(a, alpha, l_inf + h) - residual(a, alpha, l_inf - h)) / (2.0 * h),
        ];
        let analytic = residual_jacobian(a, alpha, budget);
        for (x, y) in analytic.iter().zip(numeric) {
            worst = worst.max((x - y).abs() / x.abs().max(1.0));
        }
    }
    outcome(
        worst <= GRAD_REL_TOL,
        format!(
            "{GRAD_POINTS} random points, step {GRAD_STEP:e}: worst relative deviation {worst:.2e}"
        ),
    )
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let matrix = synth_pool(&SynthConfig {
        noise_sigma: 0.05,
        seed: 11,
        ..SynthConfig::default()
    })
    .unwrap();
    let (meta, data) = (
        tmp.path().join("metadata.csv"),
        tmp.path().join("matrix.csv"),
    );
    matrix.save(&meta, &data).unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        cmd_run(&RunConfig::new(&meta, &data, &out)).unwrap();
        read_dir_bytes(&out)
    };
    let first = run("first");
    let second = run("second");
    let names: BTreeSet<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    let kinds = ["csv", "json", "jsonl", "svg"]
        .iter()
        .filter(|ext| names.iter().any(|n| n.ends_with(&format!(".{ext}"))))
        .count();
    outcome(
        first == second && kinds == 4,
        format!(
            "{} artifacts compared byte for byte, identical: {}",
            first.len(),
            first == second
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "fit recovery, ensemble parameters (A=2.02, alpha=0.3502, L_inf=1.25)",
            || fit_recovery(2.02, 0.3502, 1.25),
        ),
        (
            "fit recovery, single-model parameters (A=1.11, alpha=0.3578, L_inf=2.21)",
            || fit_recovery(1.11, 0.3578, 2.21),
        ),
        ("pareto correctness", pareto_correctness),
        ("oracle-loss correctness", oracle_correctness),
        ("pruning vs exact", pruning_vs_exact),
        ("pair partition identity", pair_partition_identity),
        (
            "qualitative floor ordering on synthetic pools",
            qualitative_reproduction,
        ),
        ("residual jacobian vs central differences", gradient_check),
        ("determinism of cmd_run", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = check();
        println!(
            "{} {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
        if !result.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
