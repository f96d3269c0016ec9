//! Binary logistic regression by Newton/IRLS with Wald inference.
//!
//! The objective is the (optionally ridge-penalized) log-likelihood
//!
//! ```text
//! l(b) = sum_i [ y_i log p_i + (1 - y_i) log(1 - p_i) ] - ridge/2 * sum_{j>=1} b_j^2
//! ```
//!
//! with `p_i = 1 / (1 + exp(-x_i . b))`; the intercept is never penalized.
//! Each iteration solves `(X'WX + ridge I) d = X'(y - p) - ridge b` by
//! Cholesky and halves the step until the objective does not decrease.
//! Standard errors are the square roots of the diagonal of the inverse
//! information at the optimum.

use std::io::{self, Write};
use std::str::FromStr;

use serde::Serialize;

use crate::emotion::UnknownLabel;
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, SymMatrix};
use crate::pairfeat::{DesignMatrix, EmotionPair, PairVocabulary};

/// Coefficients beyond this magnitude are treated as separation.
pub const MAX_COEFFICIENT: f64 = 30.0;
const MAX_HALVINGS: usize = 10;
/// Fitted probabilities this close to 0 or 1 set `separation_flag`.
const PERFECT_PREDICTION: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    #[default]
    None,
    Bonferroni,
}

impl FromStr for Correction {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(Correction::None),
            "bonferroni" => Ok(Correction::Bonferroni),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitConfig {
    pub max_iterations: usize,
    /// Convergence threshold on the absolute objective change.
    pub tolerance: f64,
    pub ridge: f64,
    pub alpha: f64,
    pub correction: Correction,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iterations: 100,
            tolerance: 1e-8,
            ridge: 0.0,
            alpha: 0.05,
            correction: Correction::None,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidConfig("tolerance must be > 0".into()));
        }
        if !self.ridge.is_finite() || self.ridge < 0.0 {
            return Err(Error::InvalidConfig("ridge must be finite and >= 0".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig("alpha must lie in (0, 1)".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
    pub odds_ratio: f64,
}

impl Coefficient {
    fn new(name: String, coefficient: f64, std_error: f64) -> Self {
        let z = if std_error > 0.0 {
            coefficient / std_error
        } else {
            f64::NAN
        };
        let p_value = if z.is_nan() { 1.0 } else { two_sided_p(z) };
        Coefficient {
            name,
            coefficient,
            std_error,
            z,
            p_value,
            odds_ratio: coefficient.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// Intercept first, then one entry per feature column.
    pub coefficients: Vec<Coefficient>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    pub separation_flag: bool,
    /// Objective value at the start and after each accepted iteration.
    pub objective_trace: Vec<f64>,
}

impl FitResult {
    pub fn beta(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.coefficient).collect()
    }

    pub fn intercept(&self) -> &Coefficient {
        &self.coefficients[0]
    }

    /// Coefficient of feature column `j`.
    pub fn feature(&self, j: usize) -> &Coefficient {
        &self.coefficients[j + 1]
    }

    /// CSV with columns `pair,coef,se,z,p,odds_ratio`, one row per
    /// coefficient.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        write_table(out, self.coefficients.iter())
    }
}

/// Standard normal CDF.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// `2 (1 - Phi(|z|))`, evaluated in the tail to avoid cancellation.
pub fn two_sided_p(z: f64) -> f64 {
    (2.0 * std_normal_cdf(-z.abs())).min(1.0)
}

#[inline]
fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn linear_predictor(matrix: &DesignMatrix, beta: &[f64], i: usize) -> f64 {
    beta[0]
        + matrix
            .row(i)
            .iter()
            .map(|&j| beta[j as usize + 1])
            .sum::<f64>()
}

/// Penalized log-likelihood.
pub fn objective(matrix: &DesignMatrix, beta: &[f64], ridge: f64) -> f64 {
    let mut ll = 0.0;
    for (i, &y) in matrix.outcome().iter().enumerate() {
        let eta = linear_predictor(matrix, beta, i);
        ll -= if y == 1 {
            softplus(-eta)
        } else {
            softplus(eta)
        };
    }
    ll - 0.5 * ridge * beta[1..].iter().map(|b| b * b).sum::<f64>()
}

/// Gradient of [`objective`]: `X'(y - p) - ridge b` (intercept unpenalized).
pub fn gradient(matrix: &DesignMatrix, beta: &[f64], ridge: f64) -> Vec<f64> {
    let mut g = vec![0.0; beta.len()];
    for (i, &y) in matrix.outcome().iter().enumerate() {
        let r = f64::from(y) - sigmoid(linear_predictor(matrix, beta, i));
        g[0] += r;
        for &j in matrix.row(i) {
            g[j as usize + 1] += r;
        }
    }
    for (gj, bj) in g[1..].iter_mut().zip(&beta[1..]) {
        *gj -= ridge * bj;
    }
    g
}

/// `X'WX + ridge I` (intercept unpenalized), accumulated row by row in
/// row order.
fn information(matrix: &DesignMatrix, beta: &[f64], ridge: f64) -> SymMatrix {
    let p = beta.len();
    let mut h = SymMatrix::zeros(p);
    for i in 0..matrix.n_rows() {
        let mu = sigmoid(linear_predictor(matrix, beta, i));
        let w = mu * (1.0 - mu);
        let row = matrix.row(i);
        *h.at_mut(0, 0) += w;
        for (a, &ja) in row.iter().enumerate() {
            let ja = ja as usize + 1;
            *h.at_mut(0, ja) += w;
            for &jb in &row[a..] {
                *h.at_mut(ja, jb as usize + 1) += w;
            }
        }
    }
    for j in 1..p {
        *h.at_mut(j, j) += ridge;
    }
    h.mirror_upper();
    h
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn check_inputs(matrix: &DesignMatrix) -> Result<()> {
    let n = matrix.n_rows();
    if n == 0 {
        return Err(Error::InvalidConfig("design matrix has no rows".into()));
    }
    let ones = matrix.outcome().iter().filter(|&&y| y == 1).count();
    if ones == 0 || ones == n {
        return Err(Error::DegenerateOutcome {
            class: u8::from(ones == n),
        });
    }
    for (j, &sum) in matrix.column_sums().iter().enumerate() {
        if sum == 0 || sum as usize == n {
            return Err(Error::ConstantColumn {
                column: j,
                name: matrix.feature_names()[j].clone(),
            });
        }
    }
    Ok(())
}

fn separation(message: impl Into<String>) -> Error {
    Error::SeparationDetected {
        message: message.into(),
    }
}

/// Fits the joint model with an intercept and every feature column.
///
/// Convergence requires both `|objective change| < tolerance` and a
/// parameter step below `sqrt(tolerance)`; under separation the objective
/// flattens while coefficients keep drifting, and the drift is what trips
/// [`MAX_COEFFICIENT`].
pub fn fit_logistic(matrix: &DesignMatrix, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    check_inputs(matrix)?;

    let n = matrix.n_rows();
    let p = matrix.n_features() + 1;
    let ones = matrix.outcome().iter().filter(|&&y| y == 1).count() as f64;
    let mean = ones / n as f64;
    let mut beta = vec![0.0; p];
    beta[0] = (mean / (1.0 - mean)).ln();

    let step_tolerance = config.tolerance.sqrt();
    let mut current = objective(matrix, &beta, config.ridge);
    let mut trace = vec![current];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        iterations += 1;
        let info = information(matrix, &beta, config.ridge);
        let chol = Cholesky::factor(&info).ok_or_else(|| {
            separation(format!(
                "information matrix is numerically singular at iteration {iterations}"
            ))
        })?;
        let step = chol.solve(&gradient(matrix, &beta, config.ridge));

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = beta.iter().zip(&step).map(|(b, d)| b + scale * d).collect();
            let value = objective(matrix, &trial, config.ridge);
            if value >= current {
                accepted = Some((trial, value));
                break;
            }
            scale *= 0.5;
        }
        let Some((next, value)) = accepted else {
            // No ascent direction left at working precision.
            let g = gradient(matrix, &beta, config.ridge);
            converged = max_abs(&g) < 1e-6 * n as f64;
            break;
        };

        let change = value - current;
        let moved = scale * max_abs(&step);
        beta = next;
        current = value;
        trace.push(current);

        if max_abs(&beta[1..]) > MAX_COEFFICIENT {
            let (j, b) = beta[1..]
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .unwrap();
            return Err(separation(format!(
                "coefficient of {} reached {b:.1}",
                matrix.feature_names()[j]
            )));
        }
        if change.abs() < config.tolerance && moved < step_tolerance {
            converged = true;
            break;
        }
    }

    let singular = || separation("information matrix is numerically singular at the optimum");
    let mut chol =
        Cholesky::factor(&information(matrix, &beta, config.ridge)).ok_or_else(singular)?;
    if converged {
        // One more Newton step: quadratic convergence takes the estimate from
        // the stopping precision down to rounding level, so reported values do
        // not depend on summation order.
        let step = chol.solve(&gradient(matrix, &beta, config.ridge));
        if step.iter().all(|d| d.is_finite()) && max_abs(&step) < step_tolerance {
            for (b, d) in beta.iter_mut().zip(&step) {
                *b += d;
            }
            current = objective(matrix, &beta, config.ridge);
            chol =
                Cholesky::factor(&information(matrix, &beta, config.ridge)).ok_or_else(singular)?;
        }
    }
    let variances = chol.inverse_diagonal();

    let names =
        std::iter::once("(intercept)".to_string()).chain(matrix.feature_names().iter().cloned());
    let coefficients = names
        .zip(beta.iter().zip(&variances))
        .map(|(name, (&b, &v))| Coefficient::new(name, b, v.max(0.0).sqrt()))
        .collect();
    let separation_flag = (0..n).any(|i| {
        let mu = sigmoid(linear_predictor(matrix, &beta, i));
        mu.min(1.0 - mu) < PERFECT_PREDICTION
    });

    let result = FitResult {
        coefficients,
        log_likelihood: current,
        converged,
        iterations,
        separation_flag,
        objective_trace: trace,
    };
    if converged {
        Ok(result)
    } else {
        Err(Error::NotConverged {
            partial: Box::new(result),
        })
    }
}

/// One single-feature model per column. Entry `j` is the fit of column `j`
/// alone with an intercept.
pub fn fit_marginal(matrix: &DesignMatrix, config: &FitConfig) -> Result<Vec<FitResult>> {
    config.validate()?;
    check_inputs(matrix)?;
    (0..matrix.n_features())
        .map(|j| fit_logistic(&matrix.column_subset(j), config))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignificantPair {
    pub pair: EmotionPair,
    pub stats: Coefficient,
}

/// Per-test significance threshold after correction.
pub fn effective_alpha(alpha: f64, correction: Correction, n_tests: usize) -> f64 {
    match correction {
        Correction::None => alpha,
        Correction::Bonferroni => alpha / n_tests.max(1) as f64,
    }
}

/// Feature rows with `p < alpha` (Bonferroni divides alpha by the number of
/// feature columns), ordered by p then pair.
pub fn significant_pairs(
    fit: &FitResult,
    vocabulary: &PairVocabulary,
    alpha: f64,
    correction: Correction,
) -> Vec<SignificantPair> {
    let stats: Vec<&Coefficient> = (0..vocabulary.len()).map(|j| fit.feature(j)).collect();
    select_significant(&stats, vocabulary, alpha, correction)
}

/// [`significant_pairs`] over marginal fits.
pub fn significant_marginal(
    fits: &[FitResult],
    vocabulary: &PairVocabulary,
    alpha: f64,
    correction: Correction,
) -> Vec<SignificantPair> {
    let stats: Vec<&Coefficient> = fits.iter().map(|f| f.feature(0)).collect();
    select_significant(&stats, vocabulary, alpha, correction)
}

fn select_significant(
    stats: &[&Coefficient],
    vocabulary: &PairVocabulary,
    alpha: f64,
    correction: Correction,
) -> Vec<SignificantPair> {
    let threshold = effective_alpha(alpha, correction, vocabulary.len());
    let mut rows: Vec<SignificantPair> = vocabulary
        .pairs
        .iter()
        .zip(stats)
        .filter(|(_, c)| c.p_value < threshold)
        .map(|(&pair, &c)| SignificantPair {
            pair,
            stats: Coefficient {
                name: pair.to_string(),
                ..c.clone()
            },
        })
        .collect();
    rows.sort_by(|a, b| {
        a.stats
            .p_value
            .total_cmp(&b.stats.p_value)
            .then(a.pair.cmp(&b.pair))
    });
    rows
}

/// CSV with columns `pair,coef,se,z,p,odds_ratio`.
pub fn write_table<'a, W: Write>(
    mut out: W,
    rows: impl IntoIterator<Item = &'a Coefficient>,
) -> io::Result<()> {
    writeln!(out, "pair,coef,se,z,p,odds_ratio")?;
    for c in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            c.name, c.coefficient, c.std_error, c.z, c.p_value, c.odds_ratio
        )?;
    }
    out.flush()
}
