//! Lower-bound rates for approximation by network outputs.
//!
//! Inputs are an assumed entropy decay of the target class and the
//! architecture regime; outputs are rate values with every unspecified
//! absolute constant set to 1. They describe how a lower bound scales, not
//! its magnitude.

use serde::Serialize;

use crate::activation::Nonlinearity;
use crate::error::{input, Error, Result};
use crate::lipschitz::checked_constant;
use crate::network::Architecture;

/// Label attached to every bound value.
pub const CONSTANT_CONVENTION: &str = "rate value, constants suppressed";

/// Assumed lower bound on the entropy numbers of the class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayRate {
    /// `ε_n ≳ (log₂ n)^β / n^α`.
    PolyLog { alpha: f64, beta: f64 },
    /// `ε_n ≳ (log₂ n)^{−α}`.
    LogOnly { alpha: f64 },
}

impl DecayRate {
    pub fn poly_log(alpha: f64, beta: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !beta.is_finite() {
            return input("beta must be finite");
        }
        Ok(Self::PolyLog { alpha, beta })
    }

    pub fn log_only(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self::LogOnly { alpha })
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            Self::PolyLog { alpha, .. } | Self::LogOnly { alpha } => alpha,
        }
    }

    /// The nominal entropy rate at `n`.
    pub fn nominal(&self, n: f64) -> Result<f64> {
        let lg = checked_log2(n, "n")?;
        Ok(match *self {
            Self::PolyLog { alpha, beta } => lg.powf(beta) / n.powf(alpha),
            Self::LogOnly { alpha } => lg.powf(-alpha),
        })
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::PolyLog { alpha, beta } => {
                check_alpha(alpha)?;
                if beta.is_finite() {
                    Ok(())
                } else {
                    input("beta must be finite")
                }
            }
            Self::LogOnly { alpha } => check_alpha(alpha),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        input(format!("alpha must be finite and > 0, got {alpha}"))
    }
}

/// `log₂ x`, rejecting arguments `≤ 1` where the formulas degenerate.
fn checked_log2(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() && x > 1.0 {
        Ok(x.log2())
    } else {
        input(format!("log2 argument {what} = {x} must exceed 1"))
    }
}

/// Parameter bound `w` as a function of the parameter count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightRule {
    Constant {
        w: f64,
    },
    /// `w(n) = scale·n^δ`.
    PowerOfN {
        delta: f64,
        scale: f64,
    },
}

impl WeightRule {
    pub fn constant(w: f64) -> Result<Self> {
        if w.is_finite() && w >= 0.0 {
            Ok(Self::Constant { w })
        } else {
            input(format!("constant weight bound must be finite and >= 0, got {w}"))
        }
    }

    pub fn power_of_n(delta: f64, scale: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0 && scale.is_finite() && scale >= 0.0) {
            return input("power rule needs finite delta >= 0 and scale >= 0");
        }
        Ok(Self::PowerOfN { delta, scale })
    }

    pub fn eval(&self, n: f64) -> f64 {
        match *self {
            Self::Constant { w } => w,
            Self::PowerOfN { delta, scale } => scale * n.powf(delta),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant { .. } | Self::PowerOfN { delta: 0.0, .. })
    }
}

/// Which closed form produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    /// Width bound from the entropy rate and `φ(n)`.
    WidthTransfer,
    /// Error bound for a general weight bound `w`.
    General,
    /// Error bound with `w` constant and absorbed into the constants.
    ConstantWeight,
}

impl Formula {
    pub fn id(&self) -> &'static str {
        match self {
            Self::WidthTransfer => "width_transfer",
            Self::General => "general",
            Self::ConstantWeight => "constant_weight",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Shallow,
    Deep,
}

impl Regime {
    pub fn of_depth(depth: usize) -> Self {
        if depth == 1 {
            Self::Shallow
        } else {
            Self::Deep
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Shallow => "l=1",
            Self::Deep => "l>1",
        }
    }
}

/// Lower bound on the Lipschitz width with constant `γ_n = 2^{φ}`:
/// `[log₂(nφ)]^β / (nφ)^α` or `[log₂(nφ)]^{−α}`.
pub fn width_lower_bound(rate: &DecayRate, n: f64, phi: f64) -> Result<f64> {
    rate.validate()?;
    if !(n >= 2.0 && n.is_finite()) {
        return input(format!("n must be >= 2, got {n}"));
    }
    if !(phi.is_finite() && phi > 0.0) {
        return input(format!("phi must be finite and > 0, got {phi}"));
    }
    if phi < n.log2() {
        log::warn!(
            "phi = {phi} < log2 n = {}; the transfer assumes phi(n) >= c log2 n",
            n.log2()
        );
    }
    let m = n * phi;
    let lg = checked_log2(m, "n*phi")?;
    Ok(match *rate {
        DecayRate::PolyLog { alpha, beta } => lg.powf(beta) / m.powf(alpha),
        DecayRate::LogOnly { alpha } => lg.powf(-alpha),
    })
}

/// `φ(n)` in the substitution used by the error bounds: `c·ℓ·log₂(W(w+1))`
/// when `ℓ > 1`, and `c·log₂(n(w+1))` when `ℓ = 1` (where `W ≍ n`).
pub fn regime_phi(depth: usize, width: usize, w: f64, n: f64, c: f64) -> Result<f64> {
    let inner = if depth == 1 {
        n * (w + 1.0)
    } else {
        width as f64 * (w + 1.0)
    };
    Ok(c * depth as f64 * checked_log2(inner, "W(w+1)")?)
}

fn check_consistency(arch: &Architecture, n: f64) {
    let count = arch.param_count() as f64;
    if !(count / 2.0..=count * 2.0).contains(&n) {
        log::warn!(
            "n = {n} is not within a factor 2 of the parameter count {count} of {:?}",
            arch
        );
    }
}

/// Rate of the lower bound on `E(K, Σ(W, ℓ, σ; w))` for a general weight
/// bound `w = w_rule(n)`.
///
/// ```text
/// ℓ > 1:  (nℓ)^{−α} [log₂(nℓ log₂(W(w+1)))]^β / [log₂(W(w+1))]^α
/// ℓ = 1:  n^{−α} [log₂(n log₂(nw))]^β / [log₂(n(w+1))]^α
/// ```
///
/// and `[log₂(nℓ log₂(W(w+1)))]^{−α}`, `[log₂(n log₂(n(w+1)))]^{−α}` for
/// `LogOnly` rates. The shallow polylog case uses `nw` (not `n(w+1)`) in its
/// inner logarithm as displayed, so it requires `w ≥ 1`.
pub fn approx_error_lower_bound(
    arch: &Architecture,
    act: &Nonlinearity,
    w_rule: &WeightRule,
    rate: &DecayRate,
    n: f64,
) -> Result<f64> {
    checked_constant(arch, act)?;
    rate.validate()?;
    if !(n >= 2.0 && n.is_finite()) {
        return input(format!("n must be >= 2, got {n}"));
    }
    check_consistency(arch, n);
    let w = w_rule.eval(n);
    let depth = arch.depth() as f64;
    if arch.depth() > 1 {
        let lw = checked_log2(arch.width() as f64 * (w + 1.0), "W(w+1)")?;
        let outer = checked_log2(n * depth * lw, "n*l*log2(W(w+1))")?;
        Ok(match *rate {
            DecayRate::PolyLog { alpha, beta } => {
                (n * depth).powf(-alpha) * outer.powf(beta) / lw.powf(alpha)
            }
            DecayRate::LogOnly { alpha } => outer.powf(-alpha),
        })
    } else {
        let lnw1 = checked_log2(n * (w + 1.0), "n(w+1)")?;
        match *rate {
            DecayRate::PolyLog { alpha, beta } => {
                if w < 1.0 {
                    return input(format!(
                        "shallow polylog bound uses log2(n*w) and needs w >= 1, got w = {w}"
                    ));
                }
                let lnw = checked_log2(n * w, "n*w")?;
                let outer = checked_log2(n * lnw, "n*log2(n*w)")?;
                Ok(n.powf(-alpha) * outer.powf(beta) / lnw1.powf(alpha))
            }
            DecayRate::LogOnly { alpha } => Ok(checked_log2(n * lnw1, "n*log2(n(w+1))")?.powf(-alpha)),
        }
    }
}

/// The same bound with the weight bound held constant and absorbed into the
/// constants:
///
/// ```text
/// ℓ > 1:  (nℓ)^{−α} [log₂(nℓ log₂ W)]^β / [log₂ W]^α     or  [log₂(nℓ log₂ W)]^{−α}
/// ℓ = 1:  n^{−α} (log₂ n)^{β−α}                         or  (log₂ n)^{−α}
/// ```
pub fn constant_weight_lower_bound(arch: &Architecture, rate: &DecayRate, n: f64) -> Result<f64> {
    rate.validate()?;
    if !(n >= 2.0 && n.is_finite()) {
        return input(format!("n must be >= 2, got {n}"));
    }
    let depth = arch.depth() as f64;
    if arch.depth() > 1 {
        let lw = checked_log2(arch.width() as f64, "W")?;
        let outer = checked_log2(n * depth * lw, "n*l*log2 W")?;
        Ok(match *rate {
            DecayRate::PolyLog { alpha, beta } => {
                (n * depth).powf(-alpha) * outer.powf(beta) / lw.powf(alpha)
            }
            DecayRate::LogOnly { alpha } => outer.powf(-alpha),
        })
    } else {
        let lg = checked_log2(n, "n")?;
        Ok(match *rate {
            DecayRate::PolyLog { alpha, beta } => n.powf(-alpha) * lg.powf(beta - alpha),
            DecayRate::LogOnly { alpha } => lg.powf(-alpha),
        })
    }
}

/// One row of a [`tradeoff_table`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TradeoffRow {
    pub l: usize,
    #[serde(rename = "W")]
    pub width: usize,
    pub n: usize,
    pub w: f64,
    pub value: f64,
    pub regime: Regime,
    pub formula: Formula,
}

/// Depth-versus-width enumeration at a fixed parameter budget.
///
/// For each depth `ℓ > 1` the width is `max(2, round(√(n_budget/ℓ)))`; for
/// `ℓ = 1` it is `n_budget`. Each row is evaluated at the exact parameter
/// count of its architecture.
pub fn tradeoff_table(
    input_dim: usize,
    n_budget: usize,
    w_rule: &WeightRule,
    rate: &DecayRate,
    act: &Nonlinearity,
    depths: &[usize],
) -> Result<Vec<TradeoffRow>> {
    if depths.is_empty() {
        return input("depth list must be nonempty");
    }
    if n_budget < 2 {
        return input("parameter budget must be >= 2");
    }
    let mut depths = depths.to_vec();
    depths.sort_unstable();
    depths.dedup();
    depths
        .into_iter()
        .map(|l| {
            let width = if l == 1 {
                n_budget
            } else {
                ((n_budget as f64 / l as f64).sqrt().round() as usize).max(2)
            };
            let arch = Architecture::new(input_dim, width, l)?;
            let n = arch.param_count();
            let value = approx_error_lower_bound(&arch, act, w_rule, rate, n as f64)?;
            Ok(TradeoffRow {
                l,
                width,
                n,
                w: w_rule.eval(n as f64),
                value,
                regime: Regime::of_depth(l),
                formula: Formula::General,
            })
        })
        .collect()
}

/// `max(1, round(factor·n^exponent))`: how width or depth scales with `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SizeRule {
    pub factor: f64,
    pub exponent: f64,
}

impl SizeRule {
    pub fn constant(value: usize) -> Self {
        Self {
            factor: value as f64,
            exponent: 0.0,
        }
    }

    pub fn linear(factor: f64) -> Self {
        Self {
            factor,
            exponent: 1.0,
        }
    }

    pub fn sqrt(factor: f64) -> Self {
        Self {
            factor: factor.sqrt(),
            exponent: 0.5,
        }
    }

    pub fn eval(&self, n: f64) -> usize {
        ((self.factor * n.powf(self.exponent)).round() as usize).max(1)
    }
}

/// Default threshold separating polynomial from polylogarithmic gaps.
pub const GAP_SLOPE_THRESHOLD: f64 = -0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapClass {
    /// Ratio decays polynomially in `n`: super-convergence is not excluded.
    Polynomial,
    /// Ratio is flat up to logarithms: no super-convergence possible.
    Polylog,
}

impl GapClass {
    pub fn describe(&self) -> &'static str {
        match self {
            Self::Polynomial => "super-convergence possible (gap polynomial)",
            Self::Polylog => "no super-convergence possible (gap polylog)",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapPoint {
    pub n: f64,
    pub l: usize,
    #[serde(rename = "W")]
    pub width: usize,
    pub w: f64,
    pub bound: f64,
    pub entropy_rate: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub points: Vec<GapPoint>,
    /// Least-squares slope of `ln ratio` against `ln n`.
    pub slope: f64,
    /// Coefficient of `ln n` when `ln ratio` is fitted against both `ln n`
    /// and `ln ln n`, so that a `(log n)^t` factor does not register as
    /// polynomial decay. The classification compares this to the threshold.
    pub power_exponent: f64,
    pub class: GapClass,
    pub classification: &'static str,
    pub formula: Formula,
    pub convention: &'static str,
}

/// Least-squares slope of `ys` against `xs`.
pub fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Least-squares coefficients `(a, b)` of `ys ≈ c + a·xs + b·zs`.
pub fn regression_two(xs: &[f64], zs: &[f64], ys: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / k;
    let (mx, mz, my) = (mean(xs), mean(zs), mean(ys));
    let (mut sxx, mut szz, mut sxz, mut sxy, mut szy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((x, z), y) in xs.iter().zip(zs).zip(ys) {
        let (x, z, y) = (x - mx, z - mz, y - my);
        sxx += x * x;
        szz += z * z;
        sxz += x * z;
        sxy += x * y;
        szy += z * y;
    }
    let det = sxx * szz - sxz * sxz;
    ((szz * sxy - sxz * szy) / det, (sxx * szy - sxz * sxy) / det)
}

/// Ratio of the error lower bound to the class's nominal entropy rate along
/// a family of architectures, and its log-log slope.
///
/// A constant weight rule uses [`constant_weight_lower_bound`]; any other
/// rule uses [`approx_error_lower_bound`].
pub fn superconvergence_gap(
    width_rule: &SizeRule,
    depth_rule: &SizeRule,
    w_rule: &WeightRule,
    rate: &DecayRate,
    act: &Nonlinearity,
    n_list: &[f64],
    threshold: f64,
) -> Result<GapReport> {
    if n_list.len() < 4 {
        return input(format!(
            "need at least 4 values of n for the regression, got {}",
            n_list.len()
        ));
    }
    if n_list.windows(2).any(|p| p[1] <= p[0]) {
        return input("n values must be strictly increasing");
    }
    if n_list[0] <= 1.0 {
        return input("n values must exceed 1");
    }
    let formula = if w_rule.is_constant() {
        Formula::ConstantWeight
    } else {
        Formula::General
    };
    let points = n_list
        .iter()
        .map(|&n| {
            let arch = Architecture::new(1, width_rule.eval(n), depth_rule.eval(n))?;
            checked_constant(&arch, act)?;
            let bound = match formula {
                Formula::ConstantWeight => constant_weight_lower_bound(&arch, rate, n)?,
                _ => approx_error_lower_bound(&arch, act, w_rule, rate, n)?,
            };
            let entropy_rate = rate.nominal(n)?;
            Ok(GapPoint {
                n,
                l: arch.depth(),
                width: arch.width(),
                w: w_rule.eval(n),
                bound,
                entropy_rate,
                ratio: bound / entropy_rate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.n.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.ratio.ln()).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::Input("bound ratio is not positive and finite".into()));
    }
    let slope = regression_slope(&xs, &ys);
    let zs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let (power_exponent, _) = regression_two(&xs, &zs, &ys);
    let class = if power_exponent < threshold {
        GapClass::Polynomial
    } else {
        GapClass::Polylog
    };
    Ok(GapReport {
        points,
        slope,
        power_exponent,
        class,
        classification: class.describe(),
        formula,
        convention: CONSTANT_CONVENTION,
    })
}
