//! Entropy numbers `ε_n(K)` of finite point clouds.
//!
//! `ε_n(K)` is the smallest radius for which `2^n` balls cover `K`. For finite
//! clouds we compute two versions with centers restricted to cloud points:
//! an exact one (binary search over pairwise distances with a
//! branch-and-bound set cover at each candidate radius) and a greedy
//! farthest-point one. Restricting centers costs at most a factor 2 against
//! arbitrary centers.

use std::io::Read;

use serde::Serialize;

use crate::error::{input, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Sup,
    Euclidean,
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Sup => a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs())),
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// A finite nonempty set of points of equal dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    metric: Metric,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>, metric: Metric) -> Result<Self> {
        let Some(first) = points.first() else {
            return input("point cloud must be nonempty");
        };
        let dim = first.len();
        if let Some(i) = points.iter().position(|p| p.len() != dim) {
            return input(format!(
                "point {i} has dimension {}, expected {dim}",
                points[i].len()
            ));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return input("point cloud contains non-finite coordinates");
        }
        Ok(Self { points, metric })
    }

    /// Points on the real line.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| vec![v]).collect(), Metric::Sup)
    }

    /// One point per CSV row; a non-numeric first row is taken as a header.
    pub fn from_csv<R: Read>(reader: R, metric: Metric) -> Result<Self> {
        let mut text = String::new();
        let mut reader = reader;
        reader.read_to_string(&mut text)?;
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            match parsed {
                Ok(p) => points.push(p),
                Err(_) if points.is_empty() && lineno == 0 => continue,
                Err(e) => return Err(Error::Parse(format!("line {}: {e}", lineno + 1))),
            }
        }
        Self::new(points, metric)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric.distance(&self.points[i], &self.points[j])
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.points
                .iter()
                .map(|p| p.iter().map(|v| v * factor).collect())
                .collect(),
            self.metric,
        )
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                d = d.max(self.distance(i, j));
            }
        }
        d
    }

    /// Symmetric distance matrix, row-major.
    fn distance_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = self.distance(i, j);
                m[i * n + j] = d;
                m[j * n + i] = d;
            }
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoveringMode {
    ExactSetCenters,
    Greedy,
    Analytic,
}

/// A covering of a cloud by at most `2^n` balls of a common radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringResult {
    pub n: u32,
    pub radius: f64,
    /// Indices of the centers in the cloud; empty for analytic coverings.
    pub centers: Vec<usize>,
    pub center_points: Vec<Vec<f64>>,
    pub mode: CoveringMode,
}

impl CoveringResult {
    fn from_indices(
        cloud: &PointCloud,
        n: u32,
        radius: f64,
        mut centers: Vec<usize>,
        mode: CoveringMode,
    ) -> Self {
        centers.sort_unstable();
        let center_points = centers.iter().map(|&i| cloud.points[i].clone()).collect();
        Self {
            n,
            radius,
            centers,
            center_points,
            mode,
        }
    }

    /// Largest distance from a cloud point to its nearest center; recomputed
    /// from scratch, independent of how the covering was found.
    pub fn covering_radius(&self, cloud: &PointCloud) -> f64 {
        cloud
            .points
            .iter()
            .map(|p| {
                self.center_points
                    .iter()
                    .map(|c| cloud.metric.distance(p, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// Whether every point lies within `radius` of a center and the ball
    /// count respects `2^n`.
    pub fn is_valid_for(&self, cloud: &PointCloud) -> bool {
        let count_ok = (self.center_points.len() as u128) <= ball_count(self.n);
        count_ok && self.covering_radius(cloud) <= self.radius
    }
}

fn ball_count(n: u32) -> u128 {
    if n >= 127 {
        u128::MAX
    } else {
        1u128 << n
    }
}

/// Number of balls available to cover a cloud of `len` points.
fn centers_allowed(n: u32, len: usize) -> usize {
    ball_count(n).min(len as u128) as usize
}

/// `ε_n([a,b]) = (b − a)·2^{−(n+1)}`: `2^n` equal intervals with centers at
/// their midpoints.
pub fn interval_entropy(a: f64, b: f64, n: u32) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return input(format!("interval needs finite a <= b, got [{a}, {b}]"));
    }
    Ok((b - a) * (-(n as f64 + 1.0)).exp2())
}

/// The optimal covering of `[a, b]` by `2^n` intervals.
pub fn interval_covering(a: f64, b: f64, n: u32) -> Result<CoveringResult> {
    let radius = interval_entropy(a, b, n)?;
    let k = if n >= 32 { 1u64 << 32 } else { 1u64 << n };
    if k > 1 << 16 {
        return input("interval covering lists at most 2^16 centers");
    }
    let center_points = (0..k).map(|i| vec![a + (2 * i + 1) as f64 * radius]).collect();
    Ok(CoveringResult {
        n,
        radius,
        centers: Vec::new(),
        center_points,
        mode: CoveringMode::Analytic,
    })
}

/// Largest cloud the exact search accepts.
pub const EXACT_MAX_POINTS: usize = 64;
/// Largest ball count `2^n` the exact search accepts.
pub const EXACT_MAX_BALLS: usize = 16;

/// Smallest radius `ε` such that `2^n` balls centred at cloud points cover
/// the cloud.
///
/// Budget: at most 64 points and `2^n ≤ 16`, unless `2^n` already reaches the
/// cloud size (radius 0, every point its own center).
pub fn exact_entropy(cloud: &PointCloud, n: u32) -> Result<CoveringResult> {
    let len = cloud.len();
    if ball_count(n) >= len as u128 {
        return Ok(CoveringResult::from_indices(
            cloud,
            n,
            0.0,
            (0..len).collect(),
            CoveringMode::ExactSetCenters,
        ));
    }
    if len > EXACT_MAX_POINTS || ball_count(n) > EXACT_MAX_BALLS as u128 {
        return Err(Error::Budget(format!(
            "exact covering supports at most {EXACT_MAX_POINTS} points and 2^n <= {EXACT_MAX_BALLS} \
             (got {len} points, n = {n}); use greedy_entropy instead"
        )));
    }
    let k = centers_allowed(n, len);
    let dist = cloud.distance_matrix();
    let mut radii: Vec<f64> = dist.clone();
    radii.sort_by(f64::total_cmp);
    radii.dedup();

    // greedy gives a feasible upper end for the search
    let greedy = greedy_entropy(cloud, n);
    let mut hi = radii.partition_point(|&r| r < greedy.radius);
    let mut best = greedy.centers;
    let mut lo = 0usize;
    while lo < hi {
        let mid = (lo + hi) / 2;
        match cover_with(&dist, len, radii[mid], k) {
            Some(centers) => {
                hi = mid;
                best = centers;
            }
            None => lo = mid + 1,
        }
    }
    // make the returned centers the lowest-index cover at the optimal radius
    if let Some(centers) = cover_with(&dist, len, radii[hi], k) {
        best = centers;
    }
    Ok(CoveringResult::from_indices(
        cloud,
        n,
        radii[hi],
        best,
        CoveringMode::ExactSetCenters,
    ))
}

/// Exact decision: can `k` balls of radius `r` centred at cloud points cover
/// everything? Returns the first cover found in lowest-index order.
fn cover_with(dist: &[f64], len: usize, r: f64, k: usize) -> Option<Vec<usize>> {
    let balls: Vec<u64> = (0..len)
        .map(|c| {
            (0..len)
                .filter(|&p| dist[c * len + p] <= r)
                .fold(0u64, |m, p| m | (1 << p))
        })
        .collect();
    let full = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
    let mut chosen = Vec::with_capacity(k);
    if branch(&balls, full, k, &mut chosen) {
        Some(chosen)
    } else {
        None
    }
}

fn branch(balls: &[u64], uncovered: u64, k: usize, chosen: &mut Vec<usize>) -> bool {
    if uncovered == 0 {
        return true;
    }
    if k == 0 {
        return false;
    }
    // no k balls can cover more than k times the best single gain
    let best_gain = balls
        .iter()
        .map(|b| (b & uncovered).count_ones())
        .max()
        .unwrap_or(0);
    if (best_gain as usize) * k < uncovered.count_ones() as usize {
        return false;
    }
    // the lowest uncovered point must be covered by some ball
    let p = uncovered.trailing_zeros();
    for (c, &ball) in balls.iter().enumerate() {
        if ball & (1 << p) == 0 {
            continue;
        }
        chosen.push(c);
        if branch(balls, uncovered & !ball, k - 1, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Farthest-point traversal with up to `2^n` centers, starting at point 0;
/// ties go to the lowest index.
pub fn greedy_entropy(cloud: &PointCloud, n: u32) -> CoveringResult {
    let len = cloud.len();
    let k = centers_allowed(n, len);
    let mut nearest = vec![f64::INFINITY; len];
    let mut centers = Vec::with_capacity(k);
    let mut next = 0usize;
    loop {
        centers.push(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(cloud.distance(next, i));
        }
        let (far, far_dist) =
            nearest.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |(bi, bd), (i, &d)| if d > bd { (i, d) } else { (bi, bd) },
            );
        if centers.len() == k || far_dist == 0.0 {
            return CoveringResult::from_indices(cloud, n, far_dist, centers, CoveringMode::Greedy);
        }
        next = far;
    }
}

/// `ε_0, …, ε_{n_max}`, exact where the budget allows and greedy otherwise.
///
/// If a greedy entry would exceed its predecessor, the predecessor's covering
/// is reused (it is still a valid covering with more balls available), so the
/// curve is non-increasing.
pub fn entropy_curve(cloud: &PointCloud, n_max: u32) -> Vec<CoveringResult> {
    let mut curve: Vec<CoveringResult> = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        let mut entry = exact_entropy(cloud, n).unwrap_or_else(|_| greedy_entropy(cloud, n));
        if let Some(prev) = curve.last() {
            if prev.radius < entry.radius {
                entry = CoveringResult { n, ..prev.clone() };
            }
        }
        curve.push(entry);
    }
    curve
}

/// Discretised ball of `M`-Lipschitz functions on `[0,1]` with `|f| ≤ B`,
/// sampled at `m` uniform points and quantised to multiples of `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FunctionClassSpec {
    pub lipschitz: f64,
    pub bound: f64,
    pub samples: usize,
    pub step: f64,
}

/// Largest enumeration [`discretize_lipschitz_ball`] will produce.
pub const MAX_ENUMERATION: u128 = 100_000;

impl FunctionClassSpec {
    fn validate(&self) -> Result<()> {
        if !(self.lipschitz.is_finite() && self.lipschitz >= 0.0) {
            return input("Lipschitz bound M must be finite and >= 0");
        }
        if !(self.bound.is_finite() && self.bound > 0.0) {
            return input("uniform bound B must be finite and > 0");
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return input("quantisation step q must be finite and > 0");
        }
        if self.samples < 2 {
            return input("sample count m must be >= 2");
        }
        Ok(())
    }

    /// Largest admissible level index `k` with `|k q| ≤ B`.
    fn max_level(&self) -> i64 {
        (self.bound / self.step + 1e-9).floor() as i64
    }

    /// Largest admissible jump, in levels, between neighbouring samples.
    fn max_jump(&self) -> i64 {
        let per_step = self.lipschitz / (self.samples - 1) as f64;
        (per_step / self.step + 1e-9).floor() as i64
    }

    /// Number of admissible sequences, by dynamic programming over levels.
    pub fn enumeration_size(&self) -> Result<u128> {
        self.validate()?;
        let top = self.max_level();
        let jump = self.max_jump();
        let levels = (2 * top + 1) as usize;
        let mut counts = vec![1u128; levels];
        for _ in 1..self.samples {
            let next: Vec<u128> = (0..levels as i64)
                .map(|i| {
                    let lo = (i - jump).max(0);
                    let hi = (i + jump).min(levels as i64 - 1);
                    (lo..=hi)
                        .map(|j| counts[j as usize])
                        .fold(0u128, u128::saturating_add)
                })
                .collect();
            counts = next;
        }
        Ok(counts.into_iter().fold(0, u128::saturating_add))
    }
}

/// Enumerate every admissible sample vector `(f(x_1), …, f(x_m))` as a
/// sup-norm point cloud, in lexicographic order of levels.
pub fn discretize_lipschitz_ball(class: &FunctionClassSpec) -> Result<PointCloud> {
    let count = class.enumeration_size()?;
    if count > MAX_ENUMERATION {
        return input(format!(
            "Lipschitz ball enumeration has {count} sequences, limit is {MAX_ENUMERATION}"
        ));
    }
    let top = class.max_level();
    let jump = class.max_jump();
    let mut out = Vec::with_capacity(count as usize);
    let mut seq = Vec::with_capacity(class.samples);
    fn walk(seq: &mut Vec<i64>, m: usize, top: i64, jump: i64, q: f64, out: &mut Vec<Vec<f64>>) {
        if seq.len() == m {
            out.push(seq.iter().map(|&k| k as f64 * q).collect());
            return;
        }
        let (lo, hi) = match seq.last() {
            Some(&prev) => ((prev - jump).max(-top), (prev + jump).min(top)),
            None => (-top, top),
        };
        for k in lo..=hi {
            seq.push(k);
            walk(seq, m, top, jump, q, out);
            seq.pop();
        }
    }
    walk(&mut seq, class.samples, top, jump, class.step, &mut out);
    PointCloud::new(out, Metric::Sup)
}
