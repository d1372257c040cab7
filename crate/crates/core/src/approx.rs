//! Empirical best-approximation error on a grid.
//!
//! `E(f, Σ) = inf_{‖y‖_∞ ≤ w} ‖f − Φ(y)‖` is estimated by uniform random
//! sampling of the parameter box followed by coordinate-wise refinement.
//! Every returned error is attained by the returned parameters, so it is an
//! upper estimate of the grid-restricted infimum.

use std::io::Read;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::activation::Nonlinearity;
use crate::bounds::{approx_error_lower_bound, DecayRate, WeightRule, CONSTANT_CONVENTION};
use crate::error::{input, Error, Result};
use crate::lipschitz::checked_constant;
use crate::network::{
    check_grid, embed_wider, sup_diff, Architecture, Evaluator, Grid, Network, ParamVector,
};
use crate::rng;

/// Samples of a target `f` at the points of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetFunction {
    grid: Grid,
    values: Vec<f64>,
    label: Option<String>,
}

impl TargetFunction {
    pub fn new(grid: Grid, values: Vec<f64>, label: Option<String>) -> Result<Self> {
        if values.len() != grid.len() {
            return input(format!(
                "target has {} values for {} grid points",
                values.len(),
                grid.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return input("target values must be finite");
        }
        Ok(Self { grid, values, label })
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: Grid, label: &str, f: F) -> Result<Self> {
        let values = grid.points().map(|x| f(&x)).collect();
        Self::new(grid, values, Some(label.to_string()))
    }

    /// Rows `x_1, …, x_d, f(x)` in grid order; a non-numeric first row is a
    /// header. The grid is inferred from the row count and checked point by
    /// point.
    pub fn from_csv<R: Read>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            match parsed {
                Ok(r) => rows.push(r),
                Err(_) if rows.is_empty() && lineno == 0 => continue,
                Err(e) => return Err(Error::Parse(format!("line {}: {e}", lineno + 1))),
            }
        }
        let cols = rows.first().map_or(0, Vec::len);
        if cols < 2 || rows.iter().any(|r| r.len() != cols) {
            return input("target CSV needs rows of equal length x_1..x_d,value with d >= 1");
        }
        let dim = cols - 1;
        let m = (rows.len() as f64).powf(1.0 / dim as f64).round() as usize;
        let grid = Grid::new(dim, m)?;
        if grid.len() != rows.len() {
            return input(format!("{} rows do not form a uniform {dim}-d grid", rows.len()));
        }
        for (p, row) in rows.iter().enumerate() {
            let x = grid.point(p);
            if sup_diff(&x, &row[..dim]) > 1e-9 {
                return input(format!("row {} is not grid point {x:?}", p + 1));
            }
        }
        let values = rows.iter().map(|r| r[dim]).collect();
        Self::new(grid, values, None)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Work allowed to the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBudget {
    /// Uniform draws from the parameter box.
    pub samples: usize,
    /// Coordinate sweeps of the refinement phase.
    pub refine_steps: usize,
    /// Number of best candidates refined independently.
    pub refine_starts: usize,
    pub seed: u64,
}

impl SearchBudget {
    pub fn new(samples: usize, refine_steps: usize, seed: u64) -> Self {
        Self {
            samples,
            refine_steps,
            refine_starts: 1,
            seed,
        }
    }

    pub fn with_refine_starts(mut self, starts: usize) -> Self {
        self.refine_starts = starts;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproxResult {
    /// Grid sup-norm error of `params`.
    pub error: f64,
    pub params: ParamVector,
    /// Error after the sampling phase, before refinement.
    pub sampled_error: f64,
    pub evaluations: usize,
}

struct Objective<'a> {
    arch: &'a Architecture,
    act: &'a Nonlinearity,
    target: &'a TargetFunction,
}

impl Objective<'_> {
    fn error(&self, eval: &mut Evaluator, out: &mut Vec<f64>, y: &[f64]) -> f64 {
        let net = Network::from_slice(self.arch, y).expect("length checked");
        eval.eval_grid(&net, self.act, &self.target.grid, out);
        sup_diff(out, &self.target.values)
    }

    /// Sup error and the `p`-mean residual norm of `Φ(y)`.
    fn errors(&self, eval: &mut Evaluator, out: &mut Vec<f64>, y: &[f64], p: f64) -> (f64, f64) {
        let sup = self.error(eval, out, y);
        if p.is_infinite() {
            return (sup, sup);
        }
        if sup == 0.0 {
            return (0.0, 0.0);
        }
        // normalising by sup keeps large exponents finite
        let sum: f64 = out
            .iter()
            .zip(&self.target.values)
            .map(|(a, b)| ((a - b).abs() / sup).powf(p))
            .sum();
        (sup, sup * (sum / out.len() as f64).powf(1.0 / p))
    }
}

fn validate(target: &TargetFunction, arch: &Architecture, act: &Nonlinearity, w: f64) -> Result<()> {
    checked_constant(arch, act)?;
    check_grid(arch, &target.grid)?;
    if !(w.is_finite() && w >= 0.0) {
        return input(format!("weight bound must be finite and >= 0, got {w}"));
    }
    Ok(())
}

/// Best grid sup-norm error of `Φ(y)` against `target` over `‖y‖_∞ ≤ w`.
///
/// Candidates are the zero vector, then `budget.samples` uniform draws
/// (draw `i` a function of `(seed, i)` only); the best is refined one
/// coordinate at a time, halving a coordinate's step whenever neither
/// direction improves. Deterministic per seed.
pub fn estimate_error(
    target: &TargetFunction,
    arch: &Architecture,
    act: &Nonlinearity,
    w: f64,
    budget: &SearchBudget,
) -> Result<ApproxResult> {
    estimate_error_from(target, arch, act, w, budget, &[])
}

/// [`estimate_error`] with additional starting candidates evaluated before
/// the random draws.
pub fn estimate_error_from(
    target: &TargetFunction,
    arch: &Architecture,
    act: &Nonlinearity,
    w: f64,
    budget: &SearchBudget,
    starts: &[ParamVector],
) -> Result<ApproxResult> {
    validate(target, arch, act, w)?;
    let n = arch.param_count();
    for s in starts {
        if s.len() != n || s.max_abs() > w {
            return input("starting point does not fit the architecture and box");
        }
    }
    let objective = Objective { arch, act, target };

    let mut fixed: Vec<Vec<f64>> = vec![vec![0.0; n]];
    fixed.extend(starts.iter().map(|s| s.values().to_vec()));
    let n_fixed = fixed.len();
    let draw = |i: usize| -> Vec<f64> {
        if i < n_fixed {
            fixed[i].clone()
        } else {
            let mut r = rng::stream(budget.seed, (i - n_fixed) as u64);
            (0..n).map(|_| r.random_range(-w..=w)).collect()
        }
    };
    let total = n_fixed + budget.samples;
    let mut scored: Vec<(f64, usize)> = (0..total)
        .into_par_iter()
        .map_init(
            || (Evaluator::new(), Vec::new()),
            |(eval, out), i| (objective.error(eval, out, &draw(i)), i),
        )
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let sampled_error = scored[0].0;
    let refine_count = budget.refine_starts.clamp(1, scored.len());

    let refined: Vec<(f64, Vec<f64>, usize)> = scored[..refine_count]
        .par_iter()
        .map_init(
            || (Evaluator::new(), Vec::new()),
            |(eval, out), &(error, index)| {
                refine(&objective, eval, out, draw(index), error, w, budget.refine_steps)
            },
        )
        .collect();
    let mut evaluations = total;
    let mut winner = 0;
    for (i, r) in refined.iter().enumerate() {
        evaluations += r.2;
        if r.0 < refined[winner].0 {
            winner = i;
        }
    }
    let (error, best, _) = refined.into_iter().nth(winner).expect("at least one start");
    Ok(ApproxResult {
        error,
        params: ParamVector::new(best, w)?,
        sampled_error,
        evaluations,
    })
}

/// Residual norms driving the refinement phases, ending at the sup norm.
const REFINE_EXPONENTS: [f64; 3] = [2.0, 8.0, f64::INFINITY];

/// Upper limit on pattern moves after one sweep.
const PATTERN_MOVES: usize = 16;

/// Coordinate search from `start`, once per exponent in
/// [`REFINE_EXPONENTS`]: each coordinate tries `±step` against the current
/// residual norm, and its step halves when neither direction improves.
/// After each sweep the sweep's net displacement is extended, with
/// doubling, while it keeps improving.
/// Returns the lowest sup error seen, its point and the evaluation count.
fn refine(
    objective: &Objective,
    eval: &mut Evaluator,
    out: &mut Vec<f64>,
    start: Vec<f64>,
    start_error: f64,
    w: f64,
    sweeps: usize,
) -> (f64, Vec<f64>, usize) {
    let n = start.len();
    let mut record = (start_error, start.clone());
    let mut evaluations = 0;
    let floor = 1e-12 * w.max(1.0);
    let mut current = start;
    for p in REFINE_EXPONENTS {
        if record.0 == 0.0 || sweeps == 0 {
            break;
        }
        let mut score = |y: &[f64], evaluations: &mut usize, record: &mut (f64, Vec<f64>)| {
            let (sup, norm) = objective.errors(eval, out, y, p);
            *evaluations += 1;
            if sup < record.0 {
                *record = (sup, y.to_vec());
            }
            norm
        };
        let mut value = score(&current, &mut evaluations, &mut record);
        let mut steps = vec![w / 2.0; n];
        for _ in 0..sweeps {
            if record.0 == 0.0 || steps.iter().all(|&s| s < floor) {
                break;
            }
            let sweep_start = current.clone();
            for k in 0..n {
                if steps[k] < floor {
                    continue;
                }
                let original = current[k];
                let mut improved = false;
                for sign in [1.0, -1.0] {
                    let trial = (original + sign * steps[k]).clamp(-w, w);
                    if trial == original {
                        continue;
                    }
                    current[k] = trial;
                    let e = score(&current, &mut evaluations, &mut record);
                    if e < value {
                        value = e;
                        improved = true;
                        break;
                    }
                }
                if !improved {
                    current[k] = original;
                    steps[k] *= 0.5;
                }
            }
            // pattern move: extend the sweep's net displacement, doubling it
            // after every success
            let mut delta: Vec<f64> = current.iter().zip(&sweep_start).map(|(c, p)| c - p).collect();
            for _ in 0..PATTERN_MOVES {
                if delta.iter().all(|&d| d == 0.0) {
                    break;
                }
                let trial: Vec<f64> = current
                    .iter()
                    .zip(&delta)
                    .map(|(c, d)| (c + d).clamp(-w, w))
                    .collect();
                let e = score(&trial, &mut evaluations, &mut record);
                if e >= value {
                    break;
                }
                value = e;
                current = trial;
                delta.iter_mut().for_each(|d| *d *= 2.0);
            }
        }
    }
    (record.0, record.1, evaluations)
}

#[derive(Clone, Debug, Serialize)]
pub struct WidthError {
    #[serde(rename = "W")]
    pub width: usize,
    pub error: f64,
    pub params: ParamVector,
}

/// Errors along increasing widths, each search warm-started from the
/// previous optimum embedded into the wider network. Because the embedding
/// preserves outputs, the error list is non-increasing.
pub fn widen_monotone_experiment(
    target: &TargetFunction,
    base_arch: &Architecture,
    widths: &[usize],
    act: &Nonlinearity,
    w: f64,
    budget: &SearchBudget,
) -> Result<Vec<WidthError>> {
    if widths.is_empty() {
        return input("width list must be nonempty");
    }
    if widths.windows(2).any(|p| p[1] <= p[0]) {
        return input("widths must be strictly increasing");
    }
    if widths[0] < base_arch.width() {
        return input("widths must not be below the base width");
    }
    let mut out: Vec<WidthError> = Vec::with_capacity(widths.len());
    for &width in widths {
        let arch = base_arch.with_width(width)?;
        let starts = match out.last() {
            Some(prev) => {
                let prev_arch = base_arch.with_width(prev.width)?;
                vec![embed_wider(&prev.params, &prev_arch, width)?]
            }
            None => Vec::new(),
        };
        let result = estimate_error_from(target, &arch, act, w, budget, &starts)?;
        out.push(WidthError {
            width,
            error: result.error,
            params: result.params,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct TargetError {
    pub label: Option<String>,
    pub error: f64,
}

/// Empirical errors on a sample of targets next to the lower-bound rate.
///
/// The ratio is informational only: the bound has unknown constants and
/// concerns the worst element of the whole class, which a finite sample
/// cannot certify.
#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub arch: Architecture,
    pub n: usize,
    pub w: f64,
    pub errors: Vec<TargetError>,
    pub empirical_max: f64,
    pub rate_value: f64,
    pub ratio: f64,
    /// Every empirical error is finite and non-negative.
    pub structural_ok: bool,
    pub convention: &'static str,
    pub caveat: &'static str,
}

pub fn consistency_report(
    sample: &[TargetFunction],
    arch: &Architecture,
    act: &Nonlinearity,
    w_rule: &WeightRule,
    rate: &DecayRate,
    budget: &SearchBudget,
) -> Result<ConsistencyReport> {
    if sample.is_empty() {
        return input("target sample must be nonempty");
    }
    for t in sample {
        check_grid(arch, t.grid())?;
    }
    let n = arch.param_count();
    let w = w_rule.eval(n as f64);
    let rate_value = approx_error_lower_bound(arch, act, w_rule, rate, n as f64)?;
    let errors = sample
        .iter()
        .map(|t| {
            Ok(TargetError {
                label: t.label.clone(),
                error: estimate_error(t, arch, act, w, budget)?.error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let empirical_max = errors.iter().map(|e| e.error).fold(0.0, f64::max);
    Ok(ConsistencyReport {
        arch: *arch,
        n,
        w,
        structural_ok: errors.iter().all(|e| e.error.is_finite() && e.error >= 0.0),
        errors,
        empirical_max,
        rate_value,
        ratio: empirical_max / rate_value,
        convention: CONSTANT_CONVENTION,
        caveat: "lower bound concerns the worst element of the class; a finite sample cannot certify it",
    })
}
