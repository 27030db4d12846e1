//! Saturating power-law fit `L(P) = A * P^(-alpha) + L_inf`.
//!
//! Least squares in the original loss domain, solved by Levenberg-Marquardt
//! over `(ln A, alpha, L_inf)`. `A > 0` holds by construction; `alpha` and
//! `L_inf` are projected back into their bounds after every step. The
//! `(alpha, L_inf)` trade-off produces shallow valleys, so the solver is
//! restarted from a grid of initial floors and the lowest-RSS result wins.
//!
//! Budgets `P` are in billions of parameters throughout.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::pareto::FrontierPoint;

/// Minimum number of points accepted by [`fit_scaling_law`].
pub const MIN_FIT_POINTS: usize = 4;

/// Gap kept between `L_inf` and the smallest observed loss.
pub const FLOOR_MARGIN: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    #[serde(rename = "A")]
    pub a: f64,
    pub alpha: f64,
    #[serde(rename = "L_inf")]
    pub l_inf: f64,
    /// Residual sum of squares.
    pub rss: f64,
    pub n_points: usize,
    pub converged: bool,
    pub iterations: usize,
}

impl ScalingFit {
    /// Curve value at `budget`; no domain check.
    pub fn eval(&self, budget: f64) -> f64 {
        power_law(self.a, self.alpha, self.l_inf, budget)
    }

    /// Compact JSON report.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("fit serializes")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub max_iterations: usize,
    /// Stop once an accepted step changes RSS by less than this fraction.
    pub rel_tolerance: f64,
    /// Initial floors as fractions of the smallest observed loss.
    pub multistart_floor_grid: Vec<f64>,
    /// Lower bound is exclusive in principle; used as the projection target.
    pub alpha_bounds: (f64, f64),
    /// Lower bound for A.
    pub min_amplitude: f64,
    pub initial_damping: f64,
    /// Damping multiplier after a rejected step (divisor after an accepted one).
    pub damping_factor: f64,
    /// Damping above which no descent step exists at working precision.
    pub max_damping: f64,
    pub exec: Exec,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iterations: 200,
            rel_tolerance: 1e-10,
            multistart_floor_grid: vec![0.0, 0.5, 0.8, 0.9, 0.95, 0.99],
            alpha_bounds: (1e-6, 5.0),
            min_amplitude: 1e-12,
            initial_damping: 1e-3,
            damping_factor: 10.0,
            max_damping: 1e16,
            exec: Exec::default(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidFitConfig(msg.to_string()));
        let (lo, hi) = self.alpha_bounds;
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if self.rel_tolerance.is_nan() || self.rel_tolerance <= 0.0 {
            return bad("rel_tolerance must be positive");
        }
        if self.multistart_floor_grid.is_empty() {
            return bad("multistart_floor_grid is empty");
        }
        if self
            .multistart_floor_grid
            .iter()
            .any(|f| !(0.0..1.0).contains(f))
        {
            return bad("floor fractions must lie in [0, 1)");
        }
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return bad("alpha_bounds must satisfy 0 < lo < hi");
        }
        if self.min_amplitude.is_nan() || self.min_amplitude <= 0.0 {
            return bad("min_amplitude must be positive");
        }
        if !(self.initial_damping > 0.0
            && self.damping_factor > 1.0
            && self.max_damping > self.initial_damping)
        {
            return bad("damping schedule must be positive and increasing");
        }
        Ok(())
    }
}

pub fn power_law(a: f64, alpha: f64, l_inf: f64, budget: f64) -> f64 {
    a * budget.powf(-alpha) + l_inf
}

/// Curve value at `budget` (billions of parameters).
pub fn predict(fit: &ScalingFit, budget: f64) -> Result<f64> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::InvalidBudget(budget));
    }
    Ok(fit.eval(budget))
}

/// Partial derivatives of the residual `loss - (A P^-alpha + L_inf)` with
/// respect to `(A, alpha, L_inf)`.
pub fn residual_jacobian(a: f64, alpha: f64, budget: f64) -> [f64; 3] {
    let decay = budget.powf(-alpha);
    [-decay, a * budget.ln() * decay, -1.0]
}

pub fn rss(points: &[FrontierPoint], a: f64, alpha: f64, l_inf: f64) -> f64 {
    points
        .iter()
        .map(|p| {
            let r = p.loss - power_law(a, alpha, l_inf, p.total_params_billions);
            r * r
        })
        .sum()
}

/// Analytic gradient of [`rss`] with respect to `(A, alpha, L_inf)`.
pub fn rss_gradient(points: &[FrontierPoint], a: f64, alpha: f64, l_inf: f64) -> [f64; 3] {
    let mut g = [0.0; 3];
    for p in points {
        let r = p.loss - power_law(a, alpha, l_inf, p.total_params_billions);
        let j = residual_jacobian(a, alpha, p.total_params_billions);
        for (gi, ji) in g.iter_mut().zip(j) {
            *gi += 2.0 * r * ji;
        }
    }
    g
}

/// Starting point for one multistart run.
///
/// The floor is `floor_fraction` times the smallest loss; `A` and `alpha`
/// come from an ordinary least-squares line through
/// `(ln P, ln(loss - floor))`, with `alpha` clamped into the configured
/// bounds. Fails with "infeasible start" when some loss does not exceed the
/// floor.
pub fn initialize_params(
    points: &[FrontierPoint],
    floor_fraction: f64,
    config: &FitConfig,
) -> Result<(f64, f64, f64)> {
    if points.len() < 2 {
        return Err(Error::InsufficientPoints {
            got: points.len(),
            needed: 2,
        });
    }
    let min_loss = points.iter().map(|p| p.loss).fold(f64::INFINITY, f64::min);
    let floor = floor_fraction * min_loss;
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for p in points {
        let gap = p.loss - floor;
        if gap.is_nan() || gap <= 0.0 {
            return Err(Error::InfeasibleStart {
                loss: p.loss,
                floor,
            });
        }
        xs.push(p.total_params_billions.ln());
        ys.push((p.loss - floor).ln());
    }
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateAbscissae(points[0].total_params_billions));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let (lo, hi) = config.alpha_bounds;
    Ok((intercept.exp(), (-slope).clamp(lo, hi), floor))
}

/// Fits the power law, keeping the best of all multistart runs (lowest RSS,
/// then lowest `L_inf`).
pub fn fit_scaling_law(points: &[FrontierPoint], config: &FitConfig) -> Result<ScalingFit> {
    let mut candidates = multistart_candidates(points, config)?;
    candidates.push(Ok(amplitude_floor_fit(points, config)));
    let mut best: Option<ScalingFit> = None;
    let mut first_err = None;
    for c in candidates {
        match c {
            Ok(fit) => {
                let better = match &best {
                    None => true,
                    Some(b) => fit
                        .rss
                        .total_cmp(&b.rss)
                        .then(fit.l_inf.total_cmp(&b.l_inf))
                        .is_lt(),
                };
                if better {
                    best = Some(fit);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one start"))
}

/// Closed-form optimum on the `A = min_amplitude` face: the decay term is
/// negligible there, so the best `L_inf` is the mean loss clamped into its
/// bounds. Projected steps crawl along this face, which matters for data that
/// carry no decay at all.
fn amplitude_floor_fit(points: &[FrontierPoint], config: &FitConfig) -> ScalingFit {
    let bounds = Bounds::new(points, config);
    let mean = points.iter().map(|p| p.loss).sum::<f64>() / points.len() as f64;
    let theta = Vector3::new(bounds.log_a_min, config.alpha_bounds.0, mean);
    let theta = bounds.project(theta);
    ScalingFit {
        a: theta[0].exp(),
        alpha: theta[1],
        l_inf: theta[2],
        rss: cost(points, &theta),
        n_points: points.len(),
        converged: true,
        iterations: 0,
    }
}

/// One fit per floor fraction in the config grid, in grid order.
pub fn multistart_candidates(
    points: &[FrontierPoint],
    config: &FitConfig,
) -> Result<Vec<Result<ScalingFit>>> {
    check_fit_input(points, config)?;
    Ok(config.exec.map(&config.multistart_floor_grid, |&f| {
        fit_from_start(points, config, f)
    }))
}

fn check_fit_input(points: &[FrontierPoint], config: &FitConfig) -> Result<()> {
    config.validate()?;
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            got: points.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    for p in points {
        if !(p.total_params_billions.is_finite() && p.total_params_billions > 0.0) {
            return Err(Error::InvalidBudget(p.total_params_billions));
        }
        if !p.loss.is_finite() {
            return Err(Error::InvalidPoint(format!(
                "non-finite loss at budget {}",
                p.total_params_billions
            )));
        }
    }
    let p0 = points[0].total_params_billions;
    if points.iter().all(|p| p.total_params_billions == p0) {
        return Err(Error::DegenerateAbscissae(p0));
    }
    Ok(())
}

/// A single Levenberg-Marquardt run from the given floor fraction.
pub fn fit_from_start(
    points: &[FrontierPoint],
    config: &FitConfig,
    floor_fraction: f64,
) -> Result<ScalingFit> {
    check_fit_input(points, config)?;
    let (a0, alpha0, floor0) = initialize_params(points, floor_fraction, config)?;
    let bounds = Bounds::new(points, config);
    let theta = bounds.project(Vector3::new(a0.ln(), alpha0, floor0));
    Ok(levenberg_marquardt(points, config, &bounds, theta))
}

struct Bounds {
    log_a_min: f64,
    alpha: (f64, f64),
    l_inf: (f64, f64),
}

impl Bounds {
    fn new(points: &[FrontierPoint], config: &FitConfig) -> Self {
        let min_loss = points.iter().map(|p| p.loss).fold(f64::INFINITY, f64::min);
        Bounds {
            log_a_min: config.min_amplitude.ln(),
            alpha: config.alpha_bounds,
            l_inf: (0.0, (min_loss - FLOOR_MARGIN).max(0.0)),
        }
    }

    fn project(&self, theta: Vector3<f64>) -> Vector3<f64> {
        Vector3::new(
            theta[0].max(self.log_a_min),
            theta[1].clamp(self.alpha.0, self.alpha.1),
            theta[2].clamp(self.l_inf.0, self.l_inf.1),
        )
    }
}

fn cost(points: &[FrontierPoint], theta: &Vector3<f64>) -> f64 {
    rss(points, theta[0].exp(), theta[1], theta[2])
}

// theta = (ln A, alpha, L_inf)
fn levenberg_marquardt(
    points: &[FrontierPoint],
    config: &FitConfig,
    bounds: &Bounds,
    mut theta: Vector3<f64>,
) -> ScalingFit {
    let mut current = cost(points, &theta);
    let mut lambda = config.initial_damping;
    let mut converged = current == 0.0;
    let mut iterations = 0;

    while !converged && iterations < config.max_iterations {
        iterations += 1;
        let a = theta[0].exp();
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for p in points {
            let decay = p.total_params_billions.powf(-theta[1]);
            // derivatives of the model value
            let g = Vector3::new(a * decay, -a * p.total_params_billions.ln() * decay, 1.0);
            let r = p.loss - (a * decay + theta[2]);
            jtj += g * g.transpose();
            jtr += g * r;
        }
        let scale = jtj.diagonal().map(|d| d.max(1e-12 * jtj.diagonal().max()));
        let damped = jtj + Matrix3::from_diagonal(&(scale * lambda));
        let step = damped.cholesky().map(|c| c.solve(&jtr));

        let accepted = step.and_then(|delta| {
            let trial = bounds.project(theta + delta);
            let trial_cost = cost(points, &trial);
            (trial_cost < current).then_some((trial, trial_cost))
        });
        match accepted {
            Some((trial, trial_cost)) => {
                let rel = (current - trial_cost) / current;
                theta = trial;
                current = trial_cost;
                lambda = (lambda / config.damping_factor).max(1e-15);
                converged = rel <= config.rel_tolerance || current == 0.0;
            }
            None => {
                lambda *= config.damping_factor;
                // No descent direction left at working precision.
                converged = lambda > config.max_damping;
            }
        }
    }

    ScalingFit {
        a: theta[0].exp(),
        alpha: theta[1],
        l_inf: theta[2],
        rss: current,
        n_points: points.len(),
        converged,
        iterations,
    }
}
