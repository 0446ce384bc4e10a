//! Discrepancy, Koksma–Hlawka bounds, Haar sampling on SU(2) through a
//! measure-preserving chart, and the finite sample sets `Ŝ_n` with the maps
//! `s_n : H_n → Ŝ_n` used by the (C,F)-construction.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cf_engine::{derive_sequences, CfParams};
use crate::groups::{LongG, LongTime, Su2};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> PointCloud {
        debug_assert!(points.iter().all(|p| p.len() == dim));
        PointCloud { dim, points }
    }

    pub fn one_dim(xs: &[f64]) -> PointCloud {
        PointCloud { dim: 1, points: xs.iter().map(|&x| vec![x]).collect() }
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Exact `D*_N` over anchored boxes `[0, β)`, for `dim ≤ 4`.
///
/// Candidate corners are built from the point coordinates; counts come from an
/// s-dimensional prefix sum over the induced grid.
pub fn star_discrepancy(cloud: &PointCloud) -> Result<f64> {
    let n = cloud.points.len();
    if n == 0 {
        return Err(Error::NoPoints);
    }
    let s = cloud.dim;
    if s == 0 || s > 4 {
        return Err(Error::InvalidArgument(format!("dimension {s} not in 1..=4")));
    }
    let vals: Vec<Vec<f64>> = (0..s)
        .map(|d| {
            let mut v: Vec<f64> = cloud.points.iter().map(|p| p[d]).collect();
            v.push(1.0);
            sorted_unique(v)
        })
        .collect();
    let dims: Vec<usize> = vals.iter().map(|v| v.len()).collect();
    let total: usize = dims.iter().product();
    if total > 60_000_000 {
        return Err(Error::InvalidArgument("candidate grid too large".into()));
    }
    let mut strides = vec![1usize; s];
    for d in 1..s {
        strides[d] = strides[d - 1] * dims[d - 1];
    }
    let mut cnt = vec![0u32; total];
    for p in &cloud.points {
        let mut flat = 0;
        for d in 0..s {
            let j = vals[d].binary_search_by(|v| v.total_cmp(&p[d])).expect("value present");
            flat += j * strides[d];
        }
        cnt[flat] += 1;
    }
    // Inclusive prefix sums along each axis.
    for d in 0..s {
        for flat in 0..total {
            let j = (flat / strides[d]) % dims[d];
            if j > 0 {
                cnt[flat] += cnt[flat - strides[d]];
            }
        }
    }
    let nf = n as f64;
    let mut best: f64 = 0.0;
    let mut idx = vec![0usize; s];
    for flat in 0..total {
        let mut rem = flat;
        for d in 0..s {
            idx[d] = rem % dims[d];
            rem /= dims[d];
        }
        let vol: f64 = (0..s).map(|d| vals[d][idx[d]]).product();
        let closed = cnt[flat] as f64 / nf;
        let open = if idx.contains(&0) {
            0.0
        } else {
            let prev: usize = (0..s).map(|d| (idx[d] - 1) * strides[d]).sum();
            cnt[prev] as f64 / nf
        };
        best = best.max(vol - open).max(closed - vol);
    }
    Ok(best)
}

/// Exact `D_N` over boxes `[α, β)`.
///
/// One dimension uses sorted prefix counts; higher dimensions enumerate all
/// candidate boxes and are meant for small clouds.
pub fn extreme_discrepancy(cloud: &PointCloud) -> Result<f64> {
    let n = cloud.points.len();
    if n == 0 {
        return Err(Error::NoPoints);
    }
    let s = cloud.dim;
    if s == 0 || s > 4 {
        return Err(Error::InvalidArgument(format!("dimension {s} not in 1..=4")));
    }
    let nf = n as f64;
    if s == 1 {
        let mut xs: Vec<f64> = cloud.points.iter().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        let lower = |v: f64| xs.partition_point(|&x| x < v);
        let upper = |v: f64| xs.partition_point(|&x| x <= v);
        let mut cands = xs.clone();
        cands.push(0.0);
        cands.push(1.0);
        let cands = sorted_unique(cands);
        let mut best: f64 = 0.0;
        for (i, &a) in cands.iter().enumerate() {
            for &b in &cands[i..] {
                // [a, b+]: includes both ends.
                let over = (upper(b) - lower(a)) as f64 / nf - (b - a);
                // (a, b): excludes both ends.
                let under = if b > a { (b - a) - (lower(b) - upper(a)) as f64 / nf } else { 0.0 };
                // [0, b) and (a, 1) style boxes.
                let under_left = if a == 0.0 { b - lower(b) as f64 / nf } else { 0.0 };
                best = best.max(over).max(under).max(under_left);
            }
        }
        return Ok(best.min(1.0));
    }
    let vals: Vec<Vec<f64>> = (0..s)
        .map(|d| {
            let mut v: Vec<f64> = cloud.points.iter().map(|p| p[d]).collect();
            v.push(0.0);
            v.push(1.0);
            sorted_unique(v)
        })
        .collect();
    // Each axis contributes an (a, b, a_inclusive, b_inclusive) choice.
    let axis_choices: Vec<Vec<(f64, f64, bool, bool)>> = vals
        .iter()
        .map(|v| {
            let mut out = Vec::new();
            for (i, &a) in v.iter().enumerate() {
                for &b in &v[i..] {
                    out.push((a, b, true, true));
                    out.push((a, b, a == 0.0, false));
                }
            }
            out
        })
        .collect();
    let mut best: f64 = 0.0;
    let mut idx = vec![0usize; s];
    loop {
        let boxes: Vec<&(f64, f64, bool, bool)> = (0..s).map(|d| &axis_choices[d][idx[d]]).collect();
        let vol: f64 = boxes.iter().map(|b| b.1 - b.0).product();
        let count = cloud
            .points
            .iter()
            .filter(|p| {
                boxes.iter().enumerate().all(|(d, &&(a, b, ai, bi))| {
                    let x = p[d];
                    (if ai { x >= a } else { x > a }) && (if bi { x <= b } else { x < b })
                })
            })
            .count() as f64
            / nf;
        let all_closed = boxes.iter().all(|b| b.2 && b.3);
        let all_open = boxes.iter().all(|b| !b.3);
        if all_closed {
            best = best.max(count - vol);
        }
        if all_open {
            best = best.max(vol - count);
        }
        let mut d = 0;
        loop {
            if d == s {
                return Ok(best.min(1.0));
            }
            idx[d] += 1;
            if idx[d] < axis_choices[d].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// `(1 + 2^{2s-1}) · M(1 / ⌊d*^{-1/s}⌋)`.
pub fn koksma_hlawka_bound(modulus: &dyn Fn(f64) -> f64, d_star: f64, s: u32) -> Result<f64> {
    if !(d_star > 0.0 && d_star <= 1.0) {
        return Err(Error::InvalidArgument(format!("d_star = {d_star} outside (0, 1]")));
    }
    if s == 0 {
        return Err(Error::InvalidArgument("s must be positive".into()));
    }
    let k = d_star.powf(-1.0 / s as f64);
    // Guard against 100 being computed as 99.999...
    let k = if (k - k.round()).abs() < 1e-9 { k.round() } else { k.floor() };
    Ok((1.0 + 2f64.powi(2 * s as i32 - 1)) * modulus(1.0 / k))
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += (index % base) as f64 * f;
        index /= base;
        f *= inv;
    }
    r
}

/// Point `index` of the Halton sequence in `[0, 1)^dim`, `dim ≤ 8`.
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    PRIMES[..dim].iter().map(|&b| radical_inverse(index, b)).collect()
}

fn in_open_unit(u: f64) -> bool {
    u > 0.0 && u < 1.0
}

/// Chart from the open cube onto SU(2) pushing Lebesgue measure to Haar measure.
///
/// Hopf-type coordinates: `u1` is the CDF of `|w|^2`, `u2` and `u3` are the
/// normalized phases of `z` and `w`.
pub fn chart_to_su2(u: [f64; 3]) -> Result<Su2> {
    if !u.iter().all(|&x| in_open_unit(x)) {
        return Err(Error::ChartBoundary);
    }
    let tau = 2.0 * std::f64::consts::PI;
    let rz = (1.0 - u[0]).sqrt();
    let rw = u[0].sqrt();
    let (sz, cz) = (tau * u[1]).sin_cos();
    let (sw, cw) = (tau * u[2]).sin_cos();
    Ok(Su2 { q: [rz * cz, rz * sz, rw * cw, rw * sw] })
}

pub fn su2_to_chart(m: &Su2) -> Result<[f64; 3]> {
    let tau = 2.0 * std::f64::consts::PI;
    let u0 = m.q[2] * m.q[2] + m.q[3] * m.q[3];
    let u1 = m.q[1].atan2(m.q[0]).rem_euclid(tau) / tau;
    let u2 = m.q[3].atan2(m.q[2]).rem_euclid(tau) / tau;
    let u = [u0.clamp(0.0, 1.0), u1, u2];
    if u.iter().all(|&x| in_open_unit(x)) {
        Ok(u)
    } else {
        Err(Error::ChartBoundary)
    }
}

/// Haar-distributed element of SU(2).
pub fn haar_sample_su2<R: Rng + ?Sized>(rng: &mut R) -> Su2 {
    loop {
        let u: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        if let Ok(m) = chart_to_su2(u) {
            return m;
        }
    }
}

/// Subset of SU(2) used as the fiber of test rectangles and cylinder blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FiberSet {
    Full,
    /// Image under the chart of the box `[lo, hi)`.
    Cube {
        lo: [f64; 3],
        hi: [f64; 3],
    },
}

impl FiberSet {
    pub fn contains(&self, m: &Su2) -> bool {
        match self {
            FiberSet::Full => true,
            FiberSet::Cube { lo, hi } => match su2_to_chart(m) {
                Ok(u) => (0..3).all(|i| u[i] >= lo[i] && u[i] < hi[i]),
                Err(_) => false,
            },
        }
    }

    /// Haar measure; exact because the chart is measure preserving.
    pub fn measure(&self) -> f64 {
        match self {
            FiberSet::Full => 1.0,
            FiberSet::Cube { lo, hi } => (0..3).map(|i| (hi[i] - lo[i]).max(0.0)).product(),
        }
    }
}

/// A rectangle `(lo, hi] × fiber` in G.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: LongTime,
    pub hi: LongTime,
    pub fiber: FiberSet,
}

impl Rect {
    pub fn new(lo: f64, hi: f64, fiber: FiberSet) -> Rect {
        Rect { lo: LongTime::from_f64(lo), hi: LongTime::from_f64(hi), fiber }
    }

    pub fn contains(&self, g: &LongG) -> bool {
        g.t > self.lo && g.t <= self.hi && self.fiber.contains(&g.m)
    }

    pub fn measure(&self) -> f64 {
        (self.hi.sub(&self.lo).to_f64()).max(0.0) * self.fiber.measure()
    }
}

/// Uniform time in `(-k, k]`.
pub fn uniform_time<R: Rng + ?Sized>(k: i128, rng: &mut R) -> LongTime {
    let whole = if k > 0 { rng.random_range(-k..k) } else { 0 };
    let u: f64 = rng.random();
    LongTime::from_parts(whole, 1.0 - u)
}

/// Uniform element of `(-k, k] × SU(2)`.
pub fn uniform_in_band<R: Rng + ?Sized>(k: i128, rng: &mut R) -> LongG {
    LongG::new(uniform_time(k, rng), haar_sample_su2(rng))
}

/// A finite subset `Ŝ_n ⊂ S_n = (-K, K] × SU(2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub n: usize,
    pub half_width: i128,
    pub elements: Vec<LongG>,
}

impl SampleSet {
    pub fn contains_all(&self) -> bool {
        self.elements.iter().all(|g| g.t.in_half_open(self.half_width))
    }

    /// JSON form: list of `(t, quaternion)` pairs.
    pub fn to_pairs(&self) -> Vec<(f64, [f64; 4])> {
        self.elements.iter().map(|g| (g.t.to_f64(), g.m.q)).collect()
    }
}

/// Half width `K = (2n-1)·ã_{n-1}` of `S_n`.
pub fn s_half_width(n: usize, params: &CfParams) -> Result<i128> {
    if n == 0 {
        return Ok(0);
    }
    let seq = derive_sequences(params, n - 1)?;
    let at = seq[n - 1].1;
    (2 * n as i128 - 1).checked_mul(at).ok_or(Error::LevelTooDeep)
}

/// Builds `Ŝ_n` with `count` elements.
///
/// Element `m` is `x_m + (l_m, 0)`: `x_m ∈ [0,1) × SU(2)` is the m-th Halton
/// point (time fraction in base 3, fiber through the chart in bases 5, 7, 11)
/// after a random Cranley–Patterson rotation, and the unit shell `l_m` is
/// stratified across `(-K, K]` by the base-2 radical inverse of `m`.
pub fn build_sample_set<R: Rng + ?Sized>(n: usize, params: &CfParams, count: usize, rng: &mut R) -> Result<SampleSet> {
    if count == 0 || n == 0 {
        return Err(Error::InvalidArgument("count and n must be positive".into()));
    }
    let k = s_half_width(n, params)?;
    let shift: [f64; 4] = [rng.random(), rng.random(), rng.random(), rng.random()];
    let mut elements = Vec::with_capacity(count);
    let mut index = 0u64;
    while elements.len() < count {
        let h = halton(index + 1, 5);
        let v = radical_inverse(index, 2);
        index += 1;
        let frac = (h[1] + shift[0]).fract();
        let u = [(h[2] + shift[1]).fract(), (h[3] + shift[2]).fract(), (h[4] + shift[3]).fract()];
        let Ok(m) = chart_to_su2(u) else { continue };
        let shells = 2 * k;
        let l = -k + ((v * shells as f64).floor() as i128).min(shells - 1);
        let t = LongTime::from_parts(l, frac);
        if !t.in_half_open(k) {
            continue;
        }
        elements.push(LongG::new(t, m));
    }
    Ok(SampleSet { n, half_width: k, elements })
}

/// A probability on a finite set of atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistribution<A: Ord + Clone> {
    pub weights: BTreeMap<A, f64>,
}

impl<A: Ord + Clone> EmpiricalDistribution<A> {
    /// `dist_{a∈A} φ(a)`: normalized counting measure of a list of values.
    pub fn from_samples<I: IntoIterator<Item = A>>(it: I) -> Self {
        let mut weights = BTreeMap::new();
        let mut total = 0usize;
        for a in it {
            *weights.entry(a).or_insert(0.0) += 1.0;
            total += 1;
        }
        for w in weights.values_mut() {
            *w /= total as f64;
        }
        EmpiricalDistribution { weights }
    }

    pub fn product<B: Ord + Clone>(&self, other: &EmpiricalDistribution<B>) -> EmpiricalDistribution<(A, B)> {
        let mut weights = BTreeMap::new();
        for (a, wa) in &self.weights {
            for (b, wb) in &other.weights {
                weights.insert((a.clone(), b.clone()), wa * wb);
            }
        }
        EmpiricalDistribution { weights }
    }

    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }
}

/// `Σ_b |p(b) − q(b)|` over the union of supports.
pub fn dist_l1<A: Ord + Clone>(p: &EmpiricalDistribution<A>, q: &EmpiricalDistribution<A>) -> f64 {
    let mut d = 0.0;
    for (a, wp) in &p.weights {
        d += (wp - q.weights.get(a).copied().unwrap_or(0.0)).abs();
    }
    for (a, wq) in &q.weights {
        if !p.weights.contains_key(a) {
            d += wq.abs();
        }
    }
    d
}

/// Checking and retry rules for [`build_s_map`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SMapPolicy {
    /// Lags `h' − h` of the pair distributions that are checked.
    pub lags: Vec<i64>,
    pub max_attempts: usize,
    /// Single-label moves tried after the best i.i.d. draw, kept when the worst lag does not get worse.
    pub search_steps: usize,
    /// Fail when no attempt passes; otherwise keep the best attempt.
    pub enforce: bool,
}

impl Default for SMapPolicy {
    fn default() -> Self {
        SMapPolicy { lags: vec![1, 2, 3, 5, 8], max_attempts: 16, search_steps: 200_000, enforce: false }
    }
}

/// A map `s_n : H_n → Ŝ_n ∪ {e}` stored as alphabet indices (`None` is `e`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SMap {
    pub n: usize,
    pub r: i64,
    pub labels: Vec<Option<u16>>,
    pub alphabet: Vec<LongG>,
    /// Largest pair-distribution distance over the checked lags.
    pub pair_distance: f64,
    pub attempts: usize,
    /// Accepted local-search moves.
    pub moves: usize,
}

impl SMap {
    /// The constant map `h ↦ e`.
    pub fn identity(n: usize, r: i64) -> SMap {
        SMap { n, r, labels: vec![None; (2 * r - 1) as usize], alphabet: vec![], pair_distance: 0.0, attempts: 0, moves: 0 }
    }

    pub fn label(&self, h: i64) -> Option<u16> {
        self.labels[(h + self.r - 1) as usize]
    }

    pub fn value(&self, h: i64) -> LongG {
        match self.label(h) {
            Some(i) => self.alphabet[i as usize],
            None => LongG::IDENTITY,
        }
    }
}

/// Pair counts of one lag over its window, in array positions `(i, i + d)` for `i < len`.
struct LagStats {
    d: usize,
    len: usize,
    counts: Vec<i64>,
    l1: f64,
}

/// Incremental pair statistics; `None` is symbol `alphabet`.
struct PairStats {
    alphabet: usize,
    lags: Vec<LagStats>,
}

impl PairStats {
    fn new(labels: &[Option<u16>], r: i64, alphabet: usize, lags: &[i64]) -> PairStats {
        let sym = |x: Option<u16>| x.map_or(alphabet, |v| v as usize);
        let cells = (alphabet + 1) * (alphabet + 1);
        let mut out = Vec::new();
        for &d in lags {
            let delta = r - (d + 1) / 2;
            if delta < 1 || d >= 2 * r - 1 {
                continue;
            }
            // Window h + t, |t| < δ, with h = −r + δ starts at array position 0.
            let len = (2 * delta - 1) as usize;
            let mut counts = vec![0i64; cells];
            for i in 0..len {
                counts[sym(labels[i]) * (alphabet + 1) + sym(labels[i + d as usize])] += 1;
            }
            let mut lag = LagStats { d: d as usize, len, counts, l1: 0.0 };
            lag.l1 = (0..cells).map(|c| term(&lag, c, alphabet)).sum();
            out.push(lag);
        }
        PairStats { alphabet, lags: out }
    }

    fn worst(&self) -> f64 {
        self.lags.iter().map(|l| l.l1).fold(0.0, f64::max)
    }

    /// Moves position `p` from symbol `old` to `new`.
    fn relabel(&mut self, labels: &[Option<u16>], p: usize, old: usize, new: usize) {
        let a = self.alphabet;
        let sym = |x: Option<u16>| x.map_or(a, |v| v as usize);
        for lag in &mut self.lags {
            let bump = |lag: &mut LagStats, cell_old: usize, cell_new: usize| {
                for (cell, delta) in [(cell_old, -1), (cell_new, 1)] {
                    lag.l1 -= term(lag, cell, a);
                    lag.counts[cell] += delta;
                    lag.l1 += term(lag, cell, a);
                }
            };
            if p >= lag.d && p - lag.d < lag.len {
                let left = sym(labels[p - lag.d]);
                bump(lag, left * (a + 1) + old, left * (a + 1) + new);
            }
            if p < lag.len {
                let right = sym(labels[p + lag.d]);
                bump(lag, old * (a + 1) + right, new * (a + 1) + right);
            }
        }
    }
}

/// `|p̂(cell) − q(cell)|` with `q` uniform on pairs of real labels.
fn term(lag: &LagStats, cell: usize, alphabet: usize) -> f64 {
    let (x, y) = (cell / (alphabet + 1), cell % (alphabet + 1));
    let q = if x < alphabet && y < alphabet { 1.0 / (alphabet * alphabet) as f64 } else { 0.0 };
    (lag.counts[cell] as f64 / lag.len as f64 - q).abs()
}

/// Largest ‖·‖₁ distance between the empirical law of `(s(h+t), s(h+d+t))`
/// over the widest admissible symmetric window and `λ_Ŝ ⊗ λ_Ŝ`.
pub fn pair_distance(labels: &[Option<u16>], r: i64, alphabet: usize, lags: &[i64]) -> f64 {
    PairStats::new(labels, r, alphabet, lags).worst()
}

/// Builds `s_n`: i.i.d. uniform labels over `Ŝ_n` with `s_n(±(r_n − 1)) := e`,
/// redrawn while the pair distributions miss `ε_n`, then improved by single-label
/// moves that never increase the worst lag.
pub fn build_s_map<R: Rng + ?Sized>(n: usize, params: &CfParams, s_hat: &SampleSet, rng: &mut R, policy: &SMapPolicy) -> Result<SMap> {
    if s_hat.elements.is_empty() {
        return Err(Error::InvalidArgument("empty sample set".into()));
    }
    let r = params.r(n) as i64;
    let eps = params.eps(n);
    let size = s_hat.elements.len();
    let mut best: Option<SMap> = None;
    for attempt in 1..=policy.max_attempts.max(1) {
        let mut labels: Vec<Option<u16>> = (0..2 * r - 1).map(|_| Some(rng.random_range(0..size) as u16)).collect();
        labels[0] = None;
        let last = labels.len() - 1;
        labels[last] = None;
        let d = if size == 1 { 0.0 } else { pair_distance(&labels, r, size, &policy.lags) };
        let cand = SMap { n, r, labels, alphabet: s_hat.elements.clone(), pair_distance: d, attempts: attempt, moves: 0 };
        if best.as_ref().is_none_or(|b| d < b.pair_distance) {
            best = Some(cand);
        }
        if d < eps || size == 1 {
            break;
        }
    }
    let mut best = best.expect("at least one attempt");
    if best.pair_distance >= eps && size > 1 && best.labels.len() > 2 {
        let mut stats = PairStats::new(&best.labels, r, size, &policy.lags);
        let mut cur = stats.worst();
        let interior = best.labels.len() - 2;
        for _ in 0..policy.search_steps {
            if cur < eps {
                break;
            }
            let p = 1 + rng.random_range(0..interior);
            let old = best.labels[p].map_or(size, |v| v as usize);
            let new = rng.random_range(0..size);
            if new == old {
                continue;
            }
            stats.relabel(&best.labels, p, old, new);
            let w = stats.worst();
            if w <= cur {
                best.labels[p] = Some(new as u16);
                cur = w;
                best.moves += 1;
            } else {
                stats.relabel(&best.labels, p, new, old);
            }
        }
        best.pair_distance = pair_distance(&best.labels, r, size, &policy.lags);
    }
    if policy.enforce && best.pair_distance >= eps && size > 1 {
        return Err(Error::DistributionTestFailed { distance: best.pair_distance, bound: eps });
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn star_discrepancy_small_cases() {
        assert_eq!(star_discrepancy(&PointCloud::one_dim(&[0.5])).unwrap(), 0.5);
        assert_eq!(star_discrepancy(&PointCloud::one_dim(&[0.0; 7])).unwrap(), 1.0);
        for n in [10usize, 100, 1000] {
            let xs: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
            let d = star_discrepancy(&PointCloud::one_dim(&xs)).unwrap();
            assert!((d - 1.0 / n as f64).abs() < 1e-12);
        }
        assert_eq!(star_discrepancy(&PointCloud::one_dim(&[])), Err(Error::NoPoints));
    }

    /// Independent oracle: sup over a fine grid of anchored boxes.
    fn star_bruteforce_2d(points: &[Vec<f64>], steps: usize) -> f64 {
        let n = points.len() as f64;
        let mut best: f64 = 0.0;
        let mut cands: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
        for p in points {
            for &x in p {
                cands.push(x);
                cands.push((x + 1e-12).min(1.0));
            }
        }
        for &b0 in &cands {
            for &b1 in &cands {
                let c = points.iter().filter(|p| p[0] < b0 && p[1] < b1).count() as f64;
                best = best.max((c / n - b0 * b1).abs());
            }
        }
        best
    }

    #[test]
    fn star_discrepancy_2d_matches_bruteforce() {
        let mut rng = substream(5, "t", 0);
        for _ in 0..5 {
            let pts: Vec<Vec<f64>> = (0..12).map(|_| vec![rng.random(), rng.random()]).collect();
            let exact = star_discrepancy(&PointCloud::new(2, pts.clone())).unwrap();
            let brute = star_bruteforce_2d(&pts, 50);
            assert!((exact - brute).abs() < 1e-9, "{exact} vs {brute}");
        }
    }

    #[test]
    fn extreme_discrepancy_cases() {
        // A single atom: a short interval around it carries mass 1.
        let d = extreme_discrepancy(&PointCloud::one_dim(&[0.5])).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        for n in [10usize, 100] {
            let xs: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
            let d = extreme_discrepancy(&PointCloud::one_dim(&xs)).unwrap();
            assert!((d - 1.0 / n as f64).abs() < 1e-12);
        }
        let mut rng = substream(6, "t", 0);
        for _ in 0..5 {
            let pts: Vec<Vec<f64>> = (0..8).map(|_| vec![rng.random(), rng.random()]).collect();
            let c = PointCloud::new(2, pts);
            let ds = star_discrepancy(&c).unwrap();
            let de = extreme_discrepancy(&c).unwrap();
            assert!(ds <= de + 1e-12 && de <= 4.0 * ds + 1e-12);
        }
    }

    #[test]
    fn koksma_hlawka_formula() {
        let lip = |d: f64| d;
        assert!((koksma_hlawka_bound(&lip, 0.01, 1).unwrap() - 0.03).abs() < 1e-15);
        assert_eq!(koksma_hlawka_bound(&|_| 0.0, 0.2, 2).unwrap(), 0.0);
        assert!(koksma_hlawka_bound(&lip, 0.0, 1).is_err());
    }

    #[test]
    fn chart_round_trip_and_boundary() {
        let mut rng = substream(7, "t", 0);
        for _ in 0..1000 {
            let u = [rng.random::<f64>() * 0.98 + 0.01, rng.random::<f64>() * 0.98 + 0.01, rng.random::<f64>() * 0.98 + 0.01];
            let m = chart_to_su2(u).unwrap();
            assert!(m.norm_defect() < 1e-12);
            let v = su2_to_chart(&m).unwrap();
            for i in 0..3 {
                assert!((u[i] - v[i]).abs() < 1e-10);
            }
        }
        assert_eq!(chart_to_su2([0.0, 0.5, 0.5]), Err(Error::ChartBoundary));
        assert_eq!(chart_to_su2([0.5, 1.0, 0.5]), Err(Error::ChartBoundary));
    }

    #[test]
    fn haar_moments() {
        let mut rng = substream(8, "t", 0);
        let n = 200_000;
        let mut sum_z2 = 0.0;
        let mut sum_a = 0.0;
        for _ in 0..n {
            let m = haar_sample_su2(&mut rng);
            sum_z2 += m.z().norm_sqr();
            sum_a += m.q[0];
        }
        let nf = n as f64;
        // Var |z|^2 = 1/12 and Var a = 1/4 under Haar measure.
        assert!((sum_z2 / nf - 0.5).abs() < 4.0 * (1.0f64 / 12.0).sqrt() / nf.sqrt());
        assert!((sum_a / nf).abs() < 4.0 * 0.5 / nf.sqrt());
    }

    #[test]
    fn distances_between_distributions() {
        let p = EmpiricalDistribution::from_samples(vec![1, 2]);
        let q = EmpiricalDistribution::from_samples(vec![1]);
        assert!((dist_l1(&p, &q) - 1.0).abs() < 1e-15);
        let r = EmpiricalDistribution::from_samples(vec![3]);
        assert!((dist_l1(&q, &r) - 2.0).abs() < 1e-15);
        assert_eq!(dist_l1(&p, &p), 0.0);
    }

    #[test]
    fn radical_inverse_values() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(1, 3) - 1.0 / 3.0).abs() < 1e-15);
    }

    /// Oracle: the pair law built with `EmpiricalDistribution`.
    fn pair_distance_oracle(labels: &[Option<u16>], r: i64, alphabet: usize, d: i64) -> f64 {
        let uniform = EmpiricalDistribution::from_samples((0..alphabet as u16).map(Some));
        let delta = r - (d + 1) / 2;
        let h = -r + delta;
        let at = |x: i64| labels[(x + r - 1) as usize];
        let emp = EmpiricalDistribution::from_samples((1 - delta..delta).map(|t| (at(h + t), at(h + d + t))));
        dist_l1(&emp, &uniform.product(&uniform))
    }

    #[test]
    fn pair_statistics_match_oracle_and_updates() {
        let mut rng = substream(3, "pairs", 0);
        let r = 40;
        let mut labels: Vec<Option<u16>> = (0..2 * r - 1).map(|_| Some(rng.random_range(0..5u16))).collect();
        labels[0] = None;
        for d in [1, 2, 7] {
            let fast = pair_distance(&labels, r, 5, &[d]);
            assert!((fast - pair_distance_oracle(&labels, r, 5, d)).abs() < 1e-12);
        }
        let lags = [1, 2, 3, 5, 8];
        let mut stats = PairStats::new(&labels, r, 5, &lags);
        for _ in 0..500 {
            let p = 1 + rng.random_range(0..(2 * r - 3) as usize);
            let old = labels[p].map_or(5, |v| v as usize);
            let new = rng.random_range(0..5);
            stats.relabel(&labels, p, old, new);
            labels[p] = Some(new as u16);
        }
        assert!((stats.worst() - pair_distance(&labels, r, 5, &lags)).abs() < 1e-9);
    }

    #[test]
    fn s_maps_meet_pair_bound_with_identity_ends() {
        let params = CfParams::default();
        for n in 2..=6 {
            let mut rng = substream(params.seed, "s_hat", n as u64);
            let s_hat = build_sample_set(n, &params, 8, &mut rng).unwrap();
            assert!(s_hat.contains_all() && s_hat.elements.len() == 8);
            let policy = SMapPolicy { enforce: true, ..SMapPolicy::default() };
            let m = build_s_map(n, &params, &s_hat, &mut rng, &policy).unwrap();
            let r = params.r(n) as i64;
            assert_eq!(m.value(r - 1), LongG::IDENTITY);
            assert_eq!(m.value(1 - r), LongG::IDENTITY);
            assert!(m.pair_distance < params.eps(n), "n = {n}: {}", m.pair_distance);
        }
        let strict = SMapPolicy { search_steps: 0, max_attempts: 1, enforce: true, ..SMapPolicy::default() };
        let mut rng = substream(1, "s_hat", 2);
        let s_hat = build_sample_set(2, &params, 8, &mut rng).unwrap();
        assert!(matches!(build_s_map(2, &params, &s_hat, &mut rng, &strict), Err(Error::DistributionTestFailed { .. })));
    }
}
