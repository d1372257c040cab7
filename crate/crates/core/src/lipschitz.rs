//! Certified Lipschitz constant of the parameter map `y ↦ Φ(y)`.
//!
//! For `‖y‖_∞, ‖y′‖_∞ ≤ w` and `w̃ = w + 1`,
//! `‖Φ(y) − Φ(y′)‖_{C([0,1]^d)} ≤ C_ℓ ‖y − y′‖_∞` with
//!
//! ```text
//! C_0 = L(d+1)
//! C_j = L(W w̃ C_{j−1} + (d+2)(L W w̃)^j + 1),   j = 1..ℓ
//! ```
//!
//! which is dominated by the closed form `(d+2) L (ℓ+2) (L W w̃)^ℓ`. Both need
//! `L·W ≥ 2`. Values are also carried as `log₂` so that deep networks do not
//! overflow; the plain `f64` fields saturate at `f64::MAX`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::activation::Nonlinearity;
use crate::error::{input, Error, Result};
use crate::network::{check_grid, sup_diff, Architecture, Evaluator, Grid, Network, ParamVector};
use crate::rng;

/// Pairs closer than this in `‖·‖_∞` are skipped by the empirical harness.
pub const DEGENERACY_CUTOFF: f64 = 1e-12;

/// `L = max(L′, |σ(0)|)` after checking `L·W ≥ 2`.
pub fn checked_constant(arch: &Architecture, act: &Nonlinearity) -> Result<f64> {
    act.check_width(arch.width())?;
    let l = act.constant();
    if l * arch.width() as f64 >= 2.0 {
        Ok(l)
    } else {
        Err(Error::Precondition(format!(
            "L*W = {} * {} < 2; the certificate does not apply",
            l,
            arch.width()
        )))
    }
}

fn check_weight(w: f64) -> Result<()> {
    if w.is_finite() && w >= 0.0 {
        Ok(())
    } else {
        input(format!("weight bound must be finite and >= 0, got {w}"))
    }
}

fn saturate(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::MAX
    }
}

/// `log₂(2^a + 2^b)` without overflow.
fn log2_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (1.0 + (lo - hi).exp2()).log2()
}

/// `log₂ C_0, …, log₂ C_ℓ`.
pub fn log2_recursion_constants(arch: &Architecture, act: &Nonlinearity, w: f64) -> Result<Vec<f64>> {
    let l = checked_constant(arch, act)?;
    check_weight(w)?;
    let d = arch.input_dim() as f64;
    let wt = w + 1.0;
    let log_wwt = (arch.width() as f64 * wt).log2();
    let log_growth = (l * arch.width() as f64 * wt).log2();
    let mut out = Vec::with_capacity(arch.depth() + 1);
    out.push((l * (d + 1.0)).log2());
    for j in 1..=arch.depth() {
        let prev = out[j - 1];
        let s = log2_add(log_wwt + prev, (d + 2.0).log2() + j as f64 * log_growth);
        out.push(l.log2() + log2_add(s, 0.0));
    }
    Ok(out)
}

/// `C_0, …, C_ℓ` from the layer recursion.
pub fn recursion_constants(arch: &Architecture, act: &Nonlinearity, w: f64) -> Result<Vec<f64>> {
    let l = checked_constant(arch, act)?;
    check_weight(w)?;
    let d = arch.input_dim() as f64;
    let width = arch.width() as f64;
    let wt = w + 1.0;
    let growth = l * width * wt;
    let mut c = Vec::with_capacity(arch.depth() + 1);
    c.push(l * (d + 1.0));
    let mut power = 1.0;
    for j in 1..=arch.depth() {
        power *= growth;
        let next = l * (width * wt * c[j - 1] + (d + 2.0) * power + 1.0);
        c.push(next);
    }
    Ok(c.into_iter().map(saturate).collect())
}

/// `(d+2)·L·(ℓ+2)·(L W w̃)^ℓ`.
pub fn closed_form_bound(arch: &Architecture, act: &Nonlinearity, w: f64) -> Result<f64> {
    let l = checked_constant(arch, act)?;
    check_weight(w)?;
    let d = arch.input_dim() as f64;
    let depth = arch.depth();
    let growth = l * arch.width() as f64 * (w + 1.0);
    let power = i32::try_from(depth).map_or(f64::INFINITY, |e| growth.powi(e));
    Ok(saturate((d + 2.0) * l * (depth as f64 + 2.0) * power))
}

pub fn log2_closed_form_bound(arch: &Architecture, act: &Nonlinearity, w: f64) -> Result<f64> {
    let l = checked_constant(arch, act)?;
    check_weight(w)?;
    let d = arch.input_dim() as f64;
    let depth = arch.depth() as f64;
    let growth = l * arch.width() as f64 * (w + 1.0);
    Ok(((d + 2.0) * l * (depth + 2.0)).log2() + depth * growth.log2())
}

/// Bounds on `max_i sup_x |η⁽ʲ⁾_i(x)|` for the hidden layers,
/// `(d+2)·L·w̃·(L W w̃)^j`, `j = 0..ℓ−1`.
pub fn layer_magnitude_bounds(arch: &Architecture, act: &Nonlinearity, w: f64) -> Result<Vec<f64>> {
    let l = checked_constant(arch, act)?;
    check_weight(w)?;
    let d = arch.input_dim() as f64;
    let wt = w + 1.0;
    let growth = l * arch.width() as f64 * wt;
    let base = (d + 2.0) * l * wt;
    Ok((0..arch.depth())
        .map(|j| saturate(base * growth.powi(j as i32)))
        .collect())
}

/// `φ(n) = c·ℓ·log₂(W(w+1))`, the exponent of `γ_n = 2^{φ(n)}`.
pub fn phi_n(arch: &Architecture, w: f64, c: f64) -> Result<f64> {
    check_weight(w)?;
    if !(c.is_finite() && c >= 0.0) {
        return input(format!("constant c must be finite and >= 0, got {c}"));
    }
    let inner = arch.width() as f64 * (w + 1.0);
    if inner <= 1.0 {
        return input(format!("W(w+1) = {inner} must exceed 1"));
    }
    if c == 0.0 {
        log::warn!("c = 0 gives phi(n) = 0, which cannot satisfy phi(n) >= c log2 n for any c > 0");
    }
    Ok(c * arch.depth() as f64 * inner.log2())
}

/// Everything the calculus knows about one configuration.
#[derive(Clone, Debug, Serialize)]
pub struct LipschitzReport {
    pub arch: Architecture,
    pub act: Nonlinearity,
    pub w: f64,
    /// `L = max(L′, |σ(0)|)`.
    #[serde(rename = "L")]
    pub activation_constant: f64,
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    #[serde(rename = "log2_C")]
    pub log2_c: Vec<f64>,
    pub closed_form: f64,
    pub log2_closed_form: f64,
    /// `(d+2)L(ℓ+2)/ℓ`; `tilde_c·ℓ·(LWw̃)^ℓ` equals `closed_form`.
    pub tilde_c: f64,
    pub layer_bounds: Vec<f64>,
    pub phi: f64,
    pub n: usize,
    pub c_convention: f64,
}

impl LipschitzReport {
    pub fn new(arch: &Architecture, act: &Nonlinearity, w: f64, c_convention: f64) -> Result<Self> {
        let activation_constant = checked_constant(arch, act)?;
        let depth = arch.depth() as f64;
        Ok(Self {
            arch: *arch,
            act: act.clone(),
            w,
            activation_constant,
            c: recursion_constants(arch, act, w)?,
            log2_c: log2_recursion_constants(arch, act, w)?,
            closed_form: closed_form_bound(arch, act, w)?,
            log2_closed_form: log2_closed_form_bound(arch, act, w)?,
            tilde_c: (arch.input_dim() as f64 + 2.0) * activation_constant * (depth + 2.0) / depth,
            layer_bounds: layer_magnitude_bounds(arch, act, w)?,
            phi: phi_n(arch, w, c_convention)?,
            n: arch.param_count(),
            c_convention,
        })
    }

    /// The certified constant `C_ℓ`.
    pub fn certificate(&self) -> f64 {
        self.c[self.arch.depth()]
    }

    pub fn log2_certificate(&self) -> f64 {
        self.log2_c[self.arch.depth()]
    }

    /// `log₂ C_ℓ / (ℓ·log₂(W(w+1)))`; the envelope constants `c₁, c₂` are the
    /// extremes of this ratio over a family of configurations.
    pub fn envelope_ratio(&self) -> f64 {
        let scale = self.arch.depth() as f64 * (self.arch.width() as f64 * (self.w + 1.0)).log2();
        self.log2_certificate() / scale
    }
}

/// Smallest and largest [`LipschitzReport::envelope_ratio`] over `reports`.
pub fn fit_envelope<'a>(reports: impl IntoIterator<Item = &'a LipschitzReport>) -> Option<(f64, f64)> {
    reports
        .into_iter()
        .map(LipschitzReport::envelope_ratio)
        .fold(None, |acc, r| match acc {
            None => Some((r, r)),
            Some((lo, hi)) => Some((lo.min(r), hi.max(r))),
        })
}

/// How parameter pairs are drawn by [`empirical_lipschitz`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PairSampling {
    /// Fraction of pairs built as `y` plus a small perturbation; the rest are
    /// two independent uniform draws from the box.
    pub directional_fraction: f64,
    /// Perturbation size relative to `w`.
    pub relative_step: f64,
    pub degeneracy_cutoff: f64,
}

impl Default for PairSampling {
    fn default() -> Self {
        Self {
            directional_fraction: 0.5,
            relative_step: 1e-3,
            degeneracy_cutoff: DEGENERACY_CUTOFF,
        }
    }
}

/// A concrete pair of parameter vectors and the ratio it achieves.
#[derive(Clone, Debug, Serialize)]
pub struct PairWitness {
    pub index: u64,
    pub ratio: f64,
    pub sup_distance: f64,
    pub param_distance: f64,
    pub y: ParamVector,
    pub y_prime: ParamVector,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalLipschitz {
    /// Largest observed `‖Φ(y) − Φ(y′)‖ / ‖y − y′‖_∞`; 0 when no pair was valid.
    pub max_ratio: f64,
    pub argmax: Option<PairWitness>,
    pub valid_pairs: usize,
    pub skipped_pairs: usize,
}

impl EmpiricalLipschitz {
    pub fn no_valid_pairs(&self) -> bool {
        self.valid_pairs == 0
    }
}

fn draw_pair(
    n: usize,
    w: f64,
    index: u64,
    directional: bool,
    sampling: &PairSampling,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng::stream(seed, index);
    let uniform =
        |r: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| r.random_range(-w..=w)).collect() };
    let y = uniform(&mut r);
    let y_prime = if directional {
        let step = sampling.relative_step * w;
        y.iter()
            .map(|v| (v + step * r.random_range(-1.0..=1.0)).clamp(-w, w))
            .collect()
    } else {
        uniform(&mut r)
    };
    (y, y_prime)
}

/// Largest sup-norm ratio over `num_pairs` sampled parameter pairs in the
/// box of radius `w`.
///
/// Pair `i` depends only on `(seed, i)`, and ties are resolved toward the
/// lowest index, so the result is independent of the thread count.
pub fn empirical_lipschitz(
    arch: &Architecture,
    act: &Nonlinearity,
    w: f64,
    grid: &Grid,
    num_pairs: usize,
    seed: u64,
) -> Result<EmpiricalLipschitz> {
    empirical_lipschitz_with(arch, act, w, grid, num_pairs, seed, &PairSampling::default())
}

pub fn empirical_lipschitz_with(
    arch: &Architecture,
    act: &Nonlinearity,
    w: f64,
    grid: &Grid,
    num_pairs: usize,
    seed: u64,
    sampling: &PairSampling,
) -> Result<EmpiricalLipschitz> {
    checked_constant(arch, act)?;
    check_weight(w)?;
    check_grid(arch, grid)?;
    if num_pairs == 0 {
        return input("num_pairs >= 1 required");
    }
    let n = arch.param_count();
    let first_directional =
        ((num_pairs as f64) * (1.0 - sampling.directional_fraction.clamp(0.0, 1.0))).round() as u64;

    // (ratio, index) of each valid pair; None for skipped pairs.
    let scored: Vec<Option<(f64, u64, f64, f64)>> = (0..num_pairs as u64)
        .into_par_iter()
        .map_init(
            || (Evaluator::new(), Vec::new(), Vec::new()),
            |(eval, out_a, out_b), i| {
                let (y, y_prime) = draw_pair(n, w, i, i >= first_directional, sampling, seed);
                let dist = sup_diff(&y, &y_prime);
                if dist < sampling.degeneracy_cutoff {
                    return None;
                }
                let net_a = Network::from_slice(arch, &y).expect("length checked");
                let net_b = Network::from_slice(arch, &y_prime).expect("length checked");
                eval.eval_grid(&net_a, act, grid, out_a);
                eval.eval_grid(&net_b, act, grid, out_b);
                let sup = sup_diff(out_a, out_b);
                Some((sup / dist, i, sup, dist))
            },
        )
        .collect();

    let valid_pairs = scored.iter().flatten().count();
    let best = scored
        .iter()
        .flatten()
        .copied()
        .fold(None::<(f64, u64, f64, f64)>, |acc, cur| match acc {
            Some(a) if a.0 >= cur.0 => Some(a),
            _ => Some(cur),
        });

    let argmax = match best {
        Some((ratio, index, sup, dist)) => {
            let (y, y_prime) = draw_pair(n, w, index, index >= first_directional, sampling, seed);
            Some(PairWitness {
                index,
                ratio,
                sup_distance: sup,
                param_distance: dist,
                y: ParamVector::new(y, w)?,
                y_prime: ParamVector::new(y_prime, w)?,
            })
        }
        None => None,
    };
    Ok(EmpiricalLipschitz {
        max_ratio: best.map_or(0.0, |b| b.0),
        argmax,
        valid_pairs,
        skipped_pairs: num_pairs - valid_pairs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub pass: bool,
    pub certificate: f64,
    pub max_ratio: f64,
    /// `C_ℓ / max_ratio`; absent when no pair produced a positive ratio.
    pub margin: Option<f64>,
    pub valid_pairs: usize,
    pub no_valid_pairs: bool,
    /// The pair achieving `max_ratio`; a reproducible counterexample on failure.
    pub witness: Option<PairWitness>,
}

/// Try to break the certificate `C_ℓ` stored in `report` with sampled pairs.
/// A failure is a result, not an error.
pub fn verify_lipschitz(
    report: &LipschitzReport,
    grid: &Grid,
    num_pairs: usize,
    seed: u64,
) -> Result<Verification> {
    let emp = empirical_lipschitz(&report.arch, &report.act, report.w, grid, num_pairs, seed)?;
    let certificate = report.certificate();
    Ok(Verification {
        pass: emp.max_ratio <= certificate,
        certificate,
        max_ratio: emp.max_ratio,
        margin: (emp.max_ratio > 0.0).then(|| certificate / emp.max_ratio),
        valid_pairs: emp.valid_pairs,
        no_valid_pairs: emp.no_valid_pairs(),
        witness: emp.argmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::Activation;
    use crate::network::{eval_on_grid, sup_distance};

    fn relu() -> Nonlinearity {
        Activation::relu().into()
    }

    fn arch(d: usize, w: usize, l: usize) -> Architecture {
        Architecture::new(d, w, l).unwrap()
    }

    #[test]
    fn recursion_anchors() {
        assert_eq!(
            recursion_constants(&arch(1, 2, 1), &relu(), 1.0).unwrap(),
            vec![2.0, 21.0]
        );
        assert_eq!(
            recursion_constants(&arch(1, 2, 1), &relu(), 0.0).unwrap(),
            vec![2.0, 11.0]
        );
        assert_eq!(recursion_constants(&arch(3, 2, 2), &relu(), 1.0).unwrap()[0], 4.0);
    }

    #[test]
    fn closed_form_anchors() {
        assert_eq!(closed_form_bound(&arch(1, 2, 1), &relu(), 1.0).unwrap(), 36.0);
        assert_eq!(closed_form_bound(&arch(1, 2, 1), &relu(), 0.0).unwrap(), 18.0);
    }

    #[test]
    fn log_space_agrees_with_direct() {
        let act: Nonlinearity = Activation::clip().into();
        for l in 1..=6 {
            let a = arch(2, 4, l);
            let direct = recursion_constants(&a, &act, 1.5).unwrap();
            let logs = log2_recursion_constants(&a, &act, 1.5).unwrap();
            for (c, lc) in direct.iter().zip(&logs) {
                assert!((c.log2() - lc).abs() < 1e-12, "{c} vs 2^{lc}");
            }
        }
    }

    #[test]
    fn deep_networks_saturate_but_logs_stay_finite() {
        let a = arch(1, 8, 1000);
        let report = LipschitzReport::new(&a, &relu(), 2.0, 1.0).unwrap();
        assert_eq!(report.certificate(), f64::MAX);
        assert_eq!(report.closed_form, f64::MAX);
        assert!(report.log2_certificate().is_finite());
        assert!(report.log2_certificate() < report.log2_closed_form);
        let json = serde_json::to_string(&report).unwrap();
        assert!(!json.contains("null"));
    }

    #[test]
    fn log2_closed_form_is_linear_in_depth() {
        let mut prev: Option<f64> = None;
        for l in [16, 64, 256, 1024] {
            let lb = log2_closed_form_bound(&arch(1, 4, l), &relu(), 1.0).unwrap();
            let lb2 = log2_closed_form_bound(&arch(1, 4, 2 * l), &relu(), 1.0).unwrap();
            let ratio = lb2 / lb;
            if let Some(p) = prev {
                assert!((ratio - 2.0).abs() < (p - 2.0).abs());
            }
            prev = Some(ratio);
        }
        assert!((prev.unwrap() - 2.0).abs() < 0.01);
    }

    #[test]
    fn rejects_small_lw() {
        let err = recursion_constants(&arch(1, 1, 1), &relu(), 1.0).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let tiny: Nonlinearity = Activation::scaled_tanh(0.1, 1.0).unwrap().into();
        assert!(closed_form_bound(&arch(1, 4, 1), &tiny, 1.0).is_err());
        assert!(layer_magnitude_bounds(&arch(1, 4, 1), &tiny, 1.0).is_err());
    }

    #[test]
    fn layer_bounds_anchor_and_growth() {
        let b = layer_magnitude_bounds(&arch(1, 2, 3), &relu(), 1.0).unwrap();
        assert_eq!(b[0], 6.0);
        assert!(b.windows(2).all(|p| p[1] > p[0]));
        // hidden layer of the |x| network peaks at 1 on [0,1]
        let p = ParamVector::new(vec![1.0, -1.0, 0.0, 0.0, 1.0, 1.0, 0.0], 1.0).unwrap();
        let a = arch(1, 2, 1);
        let g = Grid::new(1, 1024).unwrap();
        let net = Network::new(&a, &p).unwrap();
        let mut out = Vec::new();
        let trace = Evaluator::new().eval_grid_traced(&net, &relu(), &g, &mut out);
        let peak = trace[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_eq!(peak, 1.0);
        assert!(peak <= layer_magnitude_bounds(&a, &relu(), 1.0).unwrap()[0]);
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi_n(&arch(1, 2, 1), 1.0, 1.0).unwrap(), 2.0);
        assert_eq!(phi_n(&arch(1, 2, 3), 1.0, 1.0).unwrap(), 6.0);
        assert_eq!(phi_n(&arch(1, 2, 3), 1.0, 0.0).unwrap(), 0.0);
        assert!(phi_n(&arch(1, 1, 3), 0.0, 1.0).is_err());
    }

    #[test]
    fn report_fields() {
        let r = LipschitzReport::new(&arch(1, 2, 1), &relu(), 1.0, 1.0).unwrap();
        assert_eq!(r.c, vec![2.0, 21.0]);
        assert_eq!(r.closed_form, 36.0);
        assert_eq!(r.n, 7);
        assert_eq!(r.phi, 2.0);
        assert_eq!(r.tilde_c * 1.0 * 4.0, r.closed_form);
        let v = serde_json::to_value(&r).unwrap();
        for key in [
            "arch",
            "act",
            "w",
            "C",
            "closed_form",
            "layer_bounds",
            "phi",
            "n",
            "c_convention",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn directional_ratio_of_abs_network() {
        // Perturbing the first output weight by δ changes Φ by δ·ReLU(x),
        // whose sup over [0,1] is δ.
        let a = arch(1, 2, 1);
        let g = Grid::new(1, 1024).unwrap();
        let y = ParamVector::new(vec![1.0, -1.0, 0.0, 0.0, 1.0, 1.0, 0.0], 1.0).unwrap();
        let delta = 1e-3;
        let yp = ParamVector::new(vec![1.0, -1.0, 0.0, 0.0, 1.0 - delta, 1.0, 0.0], 1.0).unwrap();
        let ratio = sup_distance(&a, &relu(), &y, &yp, &g).unwrap() / delta;
        assert!((ratio - 1.0).abs() < 1e-9);
        assert!(ratio <= recursion_constants(&a, &relu(), 1.0).unwrap()[1]);
    }

    #[test]
    fn empirical_zero_box_has_no_valid_pairs() {
        let a = arch(1, 2, 2);
        let g = Grid::new(1, 16).unwrap();
        let emp = empirical_lipschitz(&a, &relu(), 0.0, &g, 20, 1).unwrap();
        assert!(emp.no_valid_pairs());
        assert_eq!(emp.max_ratio, 0.0);
        assert!(emp.argmax.is_none());
        assert_eq!(emp.skipped_pairs, 20);
    }

    #[test]
    fn empirical_is_deterministic_and_witness_reproduces() {
        let a = arch(2, 3, 2);
        let g = Grid::new(2, 8).unwrap();
        let e1 = empirical_lipschitz(&a, &relu(), 1.0, &g, 200, 42).unwrap();
        let e2 = empirical_lipschitz(&a, &relu(), 1.0, &g, 200, 42).unwrap();
        assert_eq!(e1.max_ratio, e2.max_ratio);
        let wit = e1.argmax.unwrap();
        let sup = sup_distance(&a, &relu(), &wit.y, &wit.y_prime, &g).unwrap();
        let dist = sup_diff(wit.y.values(), wit.y_prime.values());
        assert_eq!(sup / dist, e1.max_ratio);
        // directional pairs stay in the box
        assert!(wit.y_prime.max_abs() <= 1.0);
        assert_eq!(eval_on_grid(&a, &relu(), &wit.y, &g).unwrap().len(), 64);
    }

    #[test]
    fn verify_passes_and_catches_corruption() {
        let a = arch(1, 2, 1);
        let g = Grid::new(1, 256).unwrap();
        let mut report = LipschitzReport::new(&a, &relu(), 1.0, 1.0).unwrap();
        let ok = verify_lipschitz(&report, &g, 500, 3).unwrap();
        assert!(ok.pass);
        assert!(ok.margin.unwrap() >= 1.0);
        report.c[1] /= 1e6;
        let bad = verify_lipschitz(&report, &g, 500, 3).unwrap();
        assert!(!bad.pass);
        assert!(bad.witness.is_some());
    }

    #[test]
    fn zero_pairs_rejected() {
        let report = LipschitzReport::new(&arch(1, 2, 1), &relu(), 1.0, 1.0).unwrap();
        let g = Grid::new(1, 16).unwrap();
        let err = verify_lipschitz(&report, &g, 0, 0).unwrap_err();
        assert!(err.to_string().contains("num_pairs >= 1"));
    }

    #[test]
    fn envelope_ratios_are_bounded() {
        let mut reports = Vec::new();
        for w_width in [2, 4, 8] {
            for l in 1..=4 {
                for w in [1.0, 2.0] {
                    reports.push(LipschitzReport::new(&arch(1, w_width, l), &relu(), w, 1.0).unwrap());
                }
            }
        }
        let (c1, c2) = fit_envelope(&reports).unwrap();
        assert!(c1 > 0.0 && c2 < 10.0 && c1 <= c2, "c1={c1} c2={c2}");
    }
}
