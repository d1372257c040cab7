//! Fully connected networks `A⁽ℓ⁾ ∘ σ̄ ∘ A⁽ℓ⁻¹⁾ ∘ … ∘ σ̄ ∘ A⁽⁰⁾` on `[0,1]^d`.
//!
//! Parameters live in one flat vector in canonical order: layer `j` before
//! layer `j+1`; inside a layer the weight matrix in row-major order, then the
//! bias vector.

use serde::{Deserialize, Serialize};

use crate::activation::Nonlinearity;
use crate::error::{input, Error, Result};

/// Input dimension `d`, width `W` and depth `ℓ` (number of hidden layers).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Architecture {
    #[serde(rename = "d")]
    input_dim: usize,
    #[serde(rename = "W")]
    width: usize,
    #[serde(rename = "l")]
    depth: usize,
}

impl Architecture {
    pub fn new(input_dim: usize, width: usize, depth: usize) -> Result<Self> {
        if input_dim == 0 || width == 0 || depth == 0 {
            return input(format!(
                "architecture needs d, W, l >= 1 (got d={input_dim}, W={width}, l={depth})"
            ));
        }
        Ok(Self {
            input_dim,
            width,
            depth,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `(rows, cols)` of `A⁽⁰⁾, …, A⁽ℓ⁾`.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::with_capacity(self.depth + 1);
        shapes.push((self.width, self.input_dim));
        shapes.extend(std::iter::repeat_n((self.width, self.width), self.depth - 1));
        shapes.push((1, self.width));
        shapes
    }

    pub fn param_count(&self) -> usize {
        self.layer_shapes().iter().map(|(r, c)| r * (c + 1)).sum()
    }

    pub fn with_width(&self, width: usize) -> Result<Self> {
        Self::new(self.input_dim, width, self.depth)
    }
}

/// Number of weights and biases: `(d+1)W + (ℓ−1)W(W+1) + (W+1)`.
pub fn param_count(arch: &Architecture) -> usize {
    arch.param_count()
}

/// A point `y` of the box `{‖y‖_∞ ≤ w}` in parameter space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamVector {
    values: Vec<f64>,
    bound: f64,
}

impl ParamVector {
    pub fn new(values: Vec<f64>, bound: f64) -> Result<Self> {
        if !(bound.is_finite() && bound >= 0.0) {
            return input(format!("parameter bound must be finite and >= 0, got {bound}"));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || v.abs() > bound)
        {
            return input(format!(
                "parameter {i} = {v} lies outside the box of radius {bound}"
            ));
        }
        Ok(Self { values, bound })
    }

    pub fn zeros(arch: &Architecture, bound: f64) -> Result<Self> {
        Self::new(vec![0.0; arch.param_count()], bound)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        sup_norm(&self.values)
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Parse either a JSON array or one decimal number per line (blank lines
    /// and `#` comments ignored). With `bound = None` the box radius is the
    /// largest entry.
    pub fn parse(text: &str, bound: Option<f64>) -> Result<Self> {
        let trimmed = text.trim_start();
        let values: Vec<f64> = if trimmed.starts_with('[') {
            serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()))?
        } else {
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| {
                    l.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("parameter line {l:?}: {e}")))
                })
                .collect::<Result<_>>()?
        };
        let bound = bound.unwrap_or_else(|| sup_norm(&values));
        Self::new(values, bound)
    }

    /// One value per line, shortest round-trip decimal representation.
    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        for v in &self.values {
            s.push_str(&format!("{v:?}\n"));
        }
        s
    }
}

pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// One affine map `z ↦ A z + b` with `A` stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl AffineMap {
    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.cols + col]
    }

    /// `‖A‖_{∞→∞}`: the largest absolute row sum.
    pub fn operator_norm(&self) -> f64 {
        self.weights
            .chunks(self.cols)
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Split a flat parameter vector into `(A⁽ʲ⁾, b⁽ʲ⁾)`, `j = 0..=ℓ`.
pub fn unpack(params: &ParamVector, arch: &Architecture) -> Result<Vec<AffineMap>> {
    unpack_slice(params.values(), arch)
}

fn unpack_slice(values: &[f64], arch: &Architecture) -> Result<Vec<AffineMap>> {
    let n = arch.param_count();
    if values.len() != n {
        return input(format!(
            "parameter vector has length {}, architecture needs {n}",
            values.len()
        ));
    }
    let mut rest = values;
    let mut layers = Vec::with_capacity(arch.depth() + 1);
    for (rows, cols) in arch.layer_shapes() {
        let (w, tail) = rest.split_at(rows * cols);
        let (b, tail) = tail.split_at(rows);
        layers.push(AffineMap {
            rows,
            cols,
            weights: w.to_vec(),
            bias: b.to_vec(),
        });
        rest = tail;
    }
    Ok(layers)
}

/// Inverse of [`unpack`].
pub fn pack(layers: &[AffineMap]) -> Vec<f64> {
    let mut out = Vec::with_capacity(layers.iter().map(|l| l.rows * (l.cols + 1)).sum());
    for l in layers {
        out.extend_from_slice(&l.weights);
        out.extend_from_slice(&l.bias);
    }
    out
}

/// Uniform lattice with `resolution` points per axis over `[0,1]^d`.
///
/// Points are enumerated with the last axis varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    resolution: usize,
    /// Coordinate-major: `coords[k * len + p]` is coordinate `k` of point `p`.
    coords: Vec<f64>,
}

const MAX_GRID_POINTS: usize = 1 << 24;

impl Grid {
    pub fn new(dim: usize, resolution: usize) -> Result<Self> {
        if dim == 0 {
            return input("grid dimension must be >= 1");
        }
        if resolution < 2 {
            return input(format!("grid resolution must be >= 2, got {resolution}"));
        }
        let len = u32::try_from(dim)
            .ok()
            .and_then(|e| resolution.checked_pow(e))
            .filter(|&l| l <= MAX_GRID_POINTS)
            .ok_or_else(|| {
                Error::Input(format!(
                    "grid {resolution}^{dim} exceeds {MAX_GRID_POINTS} points"
                ))
            })?;
        let step = 1.0 / (resolution - 1) as f64;
        let mut coords = vec![0.0; dim * len];
        for p in 0..len {
            let mut rem = p;
            for k in (0..dim).rev() {
                coords[k * len + p] = (rem % resolution) as f64 * step;
                rem /= resolution;
            }
        }
        Ok(Self {
            dim,
            resolution,
            coords,
        })
    }

    /// 2¹⁰ points for `d = 1`, 2⁶ per axis for `d = 2`, 2⁴ per axis beyond.
    pub fn default_for(dim: usize) -> Result<Self> {
        let m = match dim {
            1 => 1 << 10,
            2 => 1 << 6,
            _ => 1 << 4,
        };
        Self::new(dim, m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.resolution - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, p: usize) -> Vec<f64> {
        let len = self.len();
        (0..self.dim).map(|k| self.coords[k * len + p]).collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|p| self.point(p))
    }

    /// All values of coordinate `k`, one per point.
    pub fn axis(&self, k: usize) -> &[f64] {
        let len = self.len();
        &self.coords[k * len..(k + 1) * len]
    }

    pub(crate) fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// A network with unpacked layers, ready for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Network {
    arch: Architecture,
    layers: Vec<AffineMap>,
}

impl Network {
    pub fn new(arch: &Architecture, params: &ParamVector) -> Result<Self> {
        Self::from_slice(arch, params.values())
    }

    pub(crate) fn from_slice(arch: &Architecture, values: &[f64]) -> Result<Self> {
        Ok(Self {
            arch: *arch,
            layers: unpack_slice(values, arch)?,
        })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn layers(&self) -> &[AffineMap] {
        &self.layers
    }

    /// Pointwise evaluation at a single `x`.
    pub fn forward(&self, act: &Nonlinearity, x: &[f64]) -> f64 {
        let mut z: Vec<f64> = x.to_vec();
        let last = self.layers.len() - 1;
        for (j, layer) in self.layers.iter().enumerate() {
            let mut next = Vec::with_capacity(layer.rows);
            for i in 0..layer.rows {
                let row = &layer.weights[i * layer.cols..(i + 1) * layer.cols];
                let pre = layer.bias[i] + row.iter().zip(&z).map(|(a, v)| a * v).sum::<f64>();
                next.push(if j < last { act.eval_unit(i, pre) } else { pre });
            }
            z = next;
        }
        z[0]
    }

    /// Bound on the Lipschitz constant of `x ↦ Φ(x)` in the sup norm:
    /// `L′^ℓ · ∏ ‖A⁽ʲ⁾‖_{∞→∞}`.
    pub fn input_lipschitz_bound(&self, act: &Nonlinearity) -> f64 {
        let ops: f64 = self.layers.iter().map(AffineMap::operator_norm).product();
        ops * act.max_lip().powi(self.arch.depth() as i32)
    }
}

/// Reusable scratch space for batched grid evaluation.
///
/// Evaluates layer by layer over all grid points at once, keeping each
/// unit's values contiguous so the inner loop is a plain axpy.
#[derive(Default, Debug)]
pub struct Evaluator {
    cur: Vec<f64>,
    next: Vec<f64>,
}

impl Evaluator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Output values at every grid point, written to `out`.
    pub fn eval_grid(&mut self, net: &Network, act: &Nonlinearity, grid: &Grid, out: &mut Vec<f64>) {
        self.run(net, act, grid, out, None);
    }

    /// Like [`Evaluator::eval_grid`], also returning the post-activation
    /// hidden values `η⁽ʲ⁾`, `j = 0..ℓ−1`, each stored unit-major (`W × points`).
    pub fn eval_grid_traced(
        &mut self,
        net: &Network,
        act: &Nonlinearity,
        grid: &Grid,
        out: &mut Vec<f64>,
    ) -> Vec<Vec<f64>> {
        let mut trace = Vec::with_capacity(net.arch.depth());
        self.run(net, act, grid, out, Some(&mut trace));
        trace
    }

    fn run(
        &mut self,
        net: &Network,
        act: &Nonlinearity,
        grid: &Grid,
        out: &mut Vec<f64>,
        mut trace: Option<&mut Vec<Vec<f64>>>,
    ) {
        assert_eq!(
            grid.dim(),
            net.arch.input_dim(),
            "grid/network dimension mismatch"
        );
        let len = grid.len();
        let width = net.arch.width();
        out.clear();
        out.resize(len, 0.0);
        if let Some(t) = trace.as_deref_mut() {
            t.clear();
            t.resize_with(net.arch.depth(), || vec![0.0; width * len]);
        }
        let mut start = 0;
        while start < len {
            let block = BLOCK.min(len - start);
            self.run_block(
                net,
                act,
                grid,
                start,
                block,
                &mut out[start..start + block],
                trace.as_deref_mut(),
            );
            start += block;
        }
    }

    /// Evaluate points `start..start + block`, keeping the block in cache.
    #[allow(clippy::too_many_arguments)]
    fn run_block(
        &mut self,
        net: &Network,
        act: &Nonlinearity,
        grid: &Grid,
        start: usize,
        block: usize,
        out: &mut [f64],
        mut trace: Option<&mut Vec<Vec<f64>>>,
    ) {
        let len = grid.len();
        let coords = grid.coords();
        self.cur.clear();
        for k in 0..grid.dim() {
            self.cur
                .extend_from_slice(&coords[k * len + start..k * len + start + block]);
        }
        let last = net.layers.len() - 1;
        for (j, layer) in net.layers.iter().enumerate() {
            self.next.clear();
            self.next.resize(layer.rows * block, 0.0);
            for i in 0..layer.rows {
                let dst = &mut self.next[i * block..(i + 1) * block];
                let row = &layer.weights[i * layer.cols..(i + 1) * layer.cols];
                affine_row(row, layer.bias[i], &self.cur, block, dst);
                if j < last {
                    act.apply_unit(i, dst);
                }
            }
            if j < last {
                if let Some(t) = trace.as_deref_mut() {
                    for i in 0..layer.rows {
                        t[j][i * len + start..i * len + start + block]
                            .copy_from_slice(&self.next[i * block..(i + 1) * block]);
                    }
                }
            }
            std::mem::swap(&mut self.cur, &mut self.next);
        }
        out.copy_from_slice(&self.cur[..block]);
    }
}

/// Grid points evaluated together; sized so a layer's activations stay in L1.
const BLOCK: usize = 128;
const LANES: usize = 32;

/// `dst[p] = bias + Σ_k row[k]·input[k·block + p]`.
///
/// Accumulates `LANES` points at a time in registers. Terms are added in
/// increasing `k` for every point, so the result matches the pointwise sum.
/// Uses AVX2 when the CPU has it. Neither path fuses multiply and add, so
/// both round identically.
#[inline]
fn affine_row(row: &[f64], bias: f64, input: &[f64], block: usize, dst: &mut [f64]) {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx2") {
        // SAFETY: the CPU supports AVX2, checked just above.
        unsafe { affine_row_avx2(row, bias, input, block, dst) };
        return;
    }
    affine_row_portable(row, bias, input, block, dst);
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn affine_row_avx2(row: &[f64], bias: f64, input: &[f64], block: usize, dst: &mut [f64]) {
    affine_row_portable(row, bias, input, block, dst);
}

#[inline(always)]
fn affine_row_portable(row: &[f64], bias: f64, input: &[f64], block: usize, dst: &mut [f64]) {
    let full = block - block % LANES;
    let mut p = 0;
    while p < full {
        let mut acc = [bias; LANES];
        for (k, &a) in row.iter().enumerate() {
            let src: &[f64; LANES] = input[k * block + p..k * block + p + LANES]
                .try_into()
                .expect("lane slice");
            for t in 0..LANES {
                acc[t] += a * src[t];
            }
        }
        dst[p..p + LANES].copy_from_slice(&acc);
        p += LANES;
    }
    for q in full..block {
        let mut acc = bias;
        for (k, &a) in row.iter().enumerate() {
            acc += a * input[k * block + q];
        }
        dst[q] = acc;
    }
}

/// `Φ(y)(x)` for a single point `x ∈ [0,1]^d`.
pub fn forward(arch: &Architecture, act: &Nonlinearity, params: &ParamVector, x: &[f64]) -> Result<f64> {
    if x.len() != arch.input_dim() {
        return input(format!(
            "point has dimension {}, network expects {}",
            x.len(),
            arch.input_dim()
        ));
    }
    act.check_width(arch.width())?;
    Ok(Network::new(arch, params)?.forward(act, x))
}

/// Outputs of `Φ(y)` at every grid point.
pub fn eval_on_grid(
    arch: &Architecture,
    act: &Nonlinearity,
    params: &ParamVector,
    grid: &Grid,
) -> Result<Vec<f64>> {
    check_grid(arch, grid)?;
    act.check_width(arch.width())?;
    let net = Network::new(arch, params)?;
    let mut out = Vec::new();
    Evaluator::new().eval_grid(&net, act, grid, &mut out);
    Ok(out)
}

pub(crate) fn check_grid(arch: &Architecture, grid: &Grid) -> Result<()> {
    if grid.dim() != arch.input_dim() {
        return input(format!(
            "grid dimension {} does not match input dimension {}",
            grid.dim(),
            arch.input_dim()
        ));
    }
    Ok(())
}

/// Grid estimate of `‖Φ(y) − Φ(y′)‖_{C([0,1]^d)}`.
///
/// The maximum over grid points never exceeds the true sup norm, so a
/// violation found on the grid is a genuine one.
pub fn sup_distance(
    arch: &Architecture,
    act: &Nonlinearity,
    params1: &ParamVector,
    params2: &ParamVector,
    grid: &Grid,
) -> Result<f64> {
    let a = eval_on_grid(arch, act, params1, grid)?;
    let b = eval_on_grid(arch, act, params2, grid)?;
    Ok(sup_diff(&a, &b))
}

/// Zero-pad a width-`W` network to width `new_width` without changing its
/// output: new units get zero incoming weights and bias, and zero outgoing
/// weights, so their constant value `σ(0)` never reaches the output.
pub fn embed_wider(params: &ParamVector, arch: &Architecture, new_width: usize) -> Result<ParamVector> {
    if new_width <= arch.width() {
        return input(format!(
            "embedding width {new_width} must exceed current width {}",
            arch.width()
        ));
    }
    let wide = arch.with_width(new_width)?;
    let layers = unpack(params, arch)?;
    let padded: Vec<AffineMap> = layers
        .iter()
        .zip(wide.layer_shapes())
        .map(|(l, (rows, cols))| {
            let mut weights = vec![0.0; rows * cols];
            for i in 0..l.rows {
                weights[i * cols..i * cols + l.cols]
                    .copy_from_slice(&l.weights[i * l.cols..(i + 1) * l.cols]);
            }
            let mut bias = vec![0.0; rows];
            bias[..l.rows].copy_from_slice(&l.bias);
            AffineMap {
                rows,
                cols,
                weights,
                bias,
            }
        })
        .collect();
    ParamVector::new(pack(&padded), params.bound())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::Activation;
    use proptest::prelude::*;

    fn relu() -> Nonlinearity {
        Activation::relu().into()
    }

    fn arch(d: usize, w: usize, l: usize) -> Architecture {
        Architecture::new(d, w, l).unwrap()
    }

    fn abs_net() -> ParamVector {
        ParamVector::new(vec![1.0, -1.0, 0.0, 0.0, 1.0, 1.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn param_count_anchors() {
        assert_eq!(param_count(&arch(1, 2, 1)), 7);
        assert_eq!(param_count(&arch(2, 3, 2)), 25);
        assert_eq!(param_count(&arch(1, 1, 1)), 4);
    }

    #[test]
    fn param_count_matches_closed_form() {
        for d in 1..=3 {
            for w in 1..=16 {
                for l in 1..=8 {
                    let n = param_count(&arch(d, w, l));
                    assert_eq!(n, (d + 1) * w + (l - 1) * w * (w + 1) + (w + 1));
                }
            }
        }
    }

    #[test]
    fn param_count_is_order_w2l() {
        // n/(W²ℓ) = (ℓ−1)/ℓ + ((ℓ+d+1)W + 1)/(W²ℓ), so the ratio tends to
        // (ℓ−1)/ℓ ≥ 1/2 for wide networks and can fall below 1.
        let mut below_one = false;
        for d in 1..=3 {
            for w in d.max(2)..=16 {
                for l in 2..=8 {
                    let ratio = param_count(&arch(d, w, l)) as f64 / (w * w * l) as f64;
                    assert!((0.5..=3.0).contains(&ratio), "d={d} W={w} l={l} ratio={ratio}");
                    below_one |= ratio < 1.0;
                }
            }
        }
        assert!(below_one);
        assert_eq!(param_count(&arch(1, 5, 2)), 46);
    }

    #[test]
    fn rejects_degenerate_architecture() {
        assert!(Architecture::new(0, 2, 1).is_err());
        assert!(Architecture::new(1, 0, 1).is_err());
        assert!(Architecture::new(1, 2, 0).is_err());
    }

    #[test]
    fn unpack_follows_row_major_then_bias() {
        let layers = unpack(&abs_net(), &arch(1, 2, 1)).unwrap();
        assert_eq!(layers.len(), 2);
        assert_eq!((layers[0].rows, layers[0].cols), (2, 1));
        assert_eq!(layers[0].weights, vec![1.0, -1.0]);
        assert_eq!(layers[0].bias, vec![0.0, 0.0]);
        assert_eq!(layers[1].weights, vec![1.0, 1.0]);
        assert_eq!(layers[1].bias, vec![0.0]);
    }

    #[test]
    fn unpack_zero_and_length_mismatch() {
        let a = arch(2, 3, 2);
        let layers = unpack(&ParamVector::zeros(&a, 1.0).unwrap(), &a).unwrap();
        assert!(layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|&v| v == 0.0)));
        let short = ParamVector::new(vec![0.0; 24], 1.0).unwrap();
        assert!(matches!(unpack(&short, &a), Err(Error::Input(_))));
    }

    #[test]
    fn param_vector_rejects_out_of_box() {
        assert!(ParamVector::new(vec![0.5, -1.5], 1.0).is_err());
        assert!(ParamVector::new(vec![f64::NAN], 1.0).is_err());
        assert!(ParamVector::new(vec![1.0], -1.0).is_err());
    }

    #[test]
    fn param_vector_parses_lines_and_json() {
        let a = ParamVector::parse("# weights\n1\n-0.5\n\n2.25\n", None).unwrap();
        let b = ParamVector::parse("[1, -0.5, 2.25]", Some(3.0)).unwrap();
        assert_eq!(a.values(), b.values());
        assert_eq!(a.bound(), 2.25);
        assert_eq!(ParamVector::parse(&a.to_lines(), None).unwrap(), a);
        assert!(ParamVector::parse("1\nx\n", None).is_err());
        assert!(ParamVector::parse("[1, 5]", Some(2.0)).is_err());
    }

    #[test]
    fn zero_network_is_zero() {
        let a = arch(2, 4, 3);
        let p = ParamVector::zeros(&a, 1.0).unwrap();
        for x in [[0.0, 0.0], [0.3, 0.9], [1.0, 1.0]] {
            assert_eq!(forward(&a, &relu(), &p, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn abs_network_on_extended_domain() {
        let net = Network::new(&arch(1, 2, 1), &abs_net()).unwrap();
        assert_eq!(net.forward(&relu(), &[-0.5]), 0.5);
        assert_eq!(net.forward(&relu(), &[0.75]), 0.75);
    }

    #[test]
    fn hinge_cancellation() {
        let p = ParamVector::new(vec![1.0, 1.0, 0.0, -0.5, 1.0, -2.0, 0.0], 2.0).unwrap();
        assert_eq!(forward(&arch(1, 2, 1), &relu(), &p, &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn grid_layout() {
        let g = Grid::new(2, 3).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.point(0), vec![0.0, 0.0]);
        assert_eq!(g.point(1), vec![0.0, 0.5]);
        assert_eq!(g.point(3), vec![0.5, 0.0]);
        assert_eq!(g.point(8), vec![1.0, 1.0]);
        assert_eq!(g.spacing(), 0.5);
        assert!(Grid::new(1, 1).is_err());
        assert!(Grid::new(8, 1 << 10).is_err());
        assert_eq!(Grid::default_for(1).unwrap().len(), 1024);
        assert_eq!(Grid::default_for(2).unwrap().len(), 4096);
    }

    #[test]
    fn sup_distance_hand_value() {
        let a = arch(1, 2, 1);
        let g = Grid::new(1, 1024).unwrap();
        let wider_out = ParamVector::new(vec![1.0, -1.0, 0.0, 0.0, 1.1, 1.0, 0.0], 1.1).unwrap();
        assert_eq!(
            sup_distance(&a, &relu(), &abs_net(), &abs_net(), &g).unwrap(),
            0.0
        );
        let d = sup_distance(&a, &relu(), &abs_net(), &wider_out, &g).unwrap();
        assert!((d - 0.1).abs() < 1e-12, "{d}");
    }

    #[test]
    fn embed_rejects_narrowing() {
        assert!(embed_wider(&abs_net(), &arch(1, 2, 1), 2).is_err());
    }

    #[test]
    fn embed_abs_network() {
        let a = arch(1, 2, 1);
        let g = Grid::new(1, 1024).unwrap();
        let wide = embed_wider(&abs_net(), &a, 3).unwrap();
        assert_eq!(wide.len(), param_count(&arch(1, 3, 1)));
        assert_eq!(wide.max_abs(), abs_net().max_abs());
        assert_eq!(wide.bound(), abs_net().bound());
        let clip: Nonlinearity = Activation::clip().into();
        for act in [relu(), clip] {
            let narrow = eval_on_grid(&a, &act, &abs_net(), &g).unwrap();
            let widened = eval_on_grid(&arch(1, 3, 1), &act, &wide, &g).unwrap();
            assert_eq!(narrow, widened);
        }
    }

    fn arch_and_params() -> impl Strategy<Value = (Architecture, Vec<f64>)> {
        (1usize..=3, 1usize..=5, 1usize..=4).prop_flat_map(|(d, w, l)| {
            let a = Architecture::new(d, w, l).unwrap();
            (Just(a), prop::collection::vec(-2.0f64..2.0, a.param_count()))
        })
    }

    proptest! {
        #[test]
        fn pack_unpack_roundtrip((a, values) in arch_and_params()) {
            let p = ParamVector::new(values.clone(), 2.0).unwrap();
            prop_assert_eq!(pack(&unpack(&p, &a).unwrap()), values);
        }

        #[test]
        fn batched_matches_pointwise((a, values) in arch_and_params()) {
            let p = ParamVector::new(values, 2.0).unwrap();
            let g = Grid::new(a.input_dim(), 5).unwrap();
            let act: Nonlinearity = Activation::clip().into();
            let batched = eval_on_grid(&a, &act, &p, &g).unwrap();
            for (x, v) in g.points().zip(&batched) {
                let single = forward(&a, &act, &p, &x).unwrap();
                prop_assert!((single - v).abs() <= 1e-9 * (1.0 + v.abs()));
            }
        }

        #[test]
        fn embedding_preserves_outputs((a, values) in arch_and_params(), extra in 1usize..4) {
            let p = ParamVector::new(values, 2.0).unwrap();
            let g = Grid::new(a.input_dim(), 4).unwrap();
            let act: Nonlinearity = Activation::clip().into();
            let wide = embed_wider(&p, &a, a.width() + extra).unwrap();
            let wa = a.with_width(a.width() + extra).unwrap();
            prop_assert_eq!(wide.max_abs(), p.max_abs());
            prop_assert_eq!(
                eval_on_grid(&a, &act, &p, &g).unwrap(),
                eval_on_grid(&wa, &act, &wide, &g).unwrap()
            );
        }

        #[test]
        fn sup_distance_symmetric((a, v1) in arch_and_params(), seed in any::<u64>()) {
            let v2: Vec<f64> = v1.iter().enumerate()
                .map(|(i, x)| (x * 0.5 + ((seed >> (i % 60)) & 1) as f64 * 0.25).clamp(-2.0, 2.0))
                .collect();
            let p1 = ParamVector::new(v1, 2.0).unwrap();
            let p2 = ParamVector::new(v2, 2.0).unwrap();
            let g = Grid::new(a.input_dim(), 4).unwrap();
            let act = relu();
            prop_assert_eq!(
                sup_distance(&a, &act, &p1, &p2, &g).unwrap(),
                sup_distance(&a, &act, &p2, &p1, &g).unwrap()
            );
        }

        #[test]
        fn output_is_lipschitz_in_x((a, values) in arch_and_params()) {
            let p = ParamVector::new(values, 2.0).unwrap();
            let act = relu();
            let net = Network::new(&a, &p).unwrap();
            let k = net.input_lipschitz_bound(&act);
            let g = Grid::new(a.input_dim(), 6).unwrap();
            let out = eval_on_grid(&a, &act, &p, &g).unwrap();
            // neighbours along the last axis are adjacent in the enumeration
            for pt in 0..g.len() - 1 {
                if (pt + 1) % g.resolution() == 0 {
                    continue;
                }
                let diff = (out[pt + 1] - out[pt]).abs();
                prop_assert!(diff <= k * g.spacing() * (1.0 + 1e-9) + 1e-12);
            }
        }
    }
}
