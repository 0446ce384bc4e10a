//! Correlation tables of 2-fold self-joinings, the weighted metric on them, and
//! their estimation along Følner windows of the (C,F)-action.
//!
//! A joining is seen through a fixed dictionary `f_1..f_K` as the table
//! `corr[i][j] = ∫ f_i(x) conj(f_j(y)) dν(x, y)`.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cf_engine::{act, derive_sequences, sample_h, sample_point, CfParams, CfPoint, Construction};
use crate::groups::{LongG, Su2};
use crate::rng::par_chunks;
use crate::{Error, Result};

/// One dictionary entry, evaluated on the level-1 representation `(t, M)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    /// `z` (`entry = 0`) or `w` (`entry = 1`) of the defining representation.
    Defining { entry: u8 },
    /// `R_ij(M) = ½ tr(σ_i M σ_j M†)`.
    Adjoint { i: u8, j: u8 },
    /// `e^{2πi m t / a_1}`.
    Harmonic { m: i32 },
}

impl Observable {
    /// `E|g|²` under Haar measure on SU(2) and Lebesgue measure on `(−a_1, a_1]`.
    fn mean_square(&self) -> f64 {
        match self {
            Observable::Defining { .. } => 0.5,
            Observable::Adjoint { .. } => 1.0 / 3.0,
            Observable::Harmonic { .. } => 1.0,
        }
    }

    fn raw(&self, t: f64, m: &Su2, a1: f64) -> Complex64 {
        match *self {
            Observable::Defining { entry: 0 } => m.z(),
            Observable::Defining { .. } => m.w(),
            Observable::Adjoint { i, j } => Complex64::new(adjoint(m)[i as usize][j as usize], 0.0),
            Observable::Harmonic { m: k } => Complex64::from_polar(1.0, 2.0 * PI * k as f64 * t / a1),
        }
    }
}

/// Rotation matrix of `U` acting on `span(σ_x, σ_y, σ_z)` by conjugation.
pub fn adjoint(u: &Su2) -> [[f64; 3]; 3] {
    let [a, b, c, d] = u.q;
    // U = a − i(−d σ_x + c σ_y − b σ_z): rotation quaternion (a, −d, c, −b).
    let (w, x, y, z) = (a, -d, c, -b);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// Observables on `X`, each zero off `X_1` and scaled to unit `L²(μ)` norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionDictionary {
    pub id: String,
    pub observables: Vec<Observable>,
    pub a1: f64,
    pub mu_x1: f64,
}

pub const DEFAULT_DICTIONARY: &str = "su2-then-harmonics-16";

impl FunctionDictionary {
    /// `z, w`, six adjoint entries, then eight time harmonics.
    pub fn default_for(cons: &Construction) -> FunctionDictionary {
        let mut observables = vec![Observable::Defining { entry: 0 }, Observable::Defining { entry: 1 }];
        for (i, j) in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)] {
            observables.push(Observable::Adjoint { i, j });
        }
        observables.extend((1..=8).map(|m| Observable::Harmonic { m }));
        FunctionDictionary { id: DEFAULT_DICTIONARY.into(), observables, a1: cons.levels[1].a as f64, mu_x1: cons.mu_x[1] }
    }

    pub fn by_id(id: &str, cons: &Construction) -> Result<FunctionDictionary> {
        if id == DEFAULT_DICTIONARY {
            Ok(FunctionDictionary::default_for(cons))
        } else {
            Err(Error::InvalidArgument(format!("unknown dictionary {id}")))
        }
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    /// Values at a level-1 coordinate `(t, M)`.
    pub fn eval_f(&self, f: &LongG) -> Vec<Complex64> {
        let t = f.t.to_f64();
        self.observables.iter().map(|o| o.raw(t, &f.m, self.a1) / (self.mu_x1 * o.mean_square()).sqrt()).collect()
    }

    /// Values at `x`; all zero when `x ∉ X_1`.
    pub fn eval(&self, cons: &Construction, x: &CfPoint) -> Result<Vec<Complex64>> {
        Ok(match x.at_level(cons, 1)? {
            Some(p) => self.eval_f(&p.f),
            None => vec![Complex64::new(0.0, 0.0); self.len()],
        })
    }

    /// Monte Carlo `‖f_i‖²` with standard errors, from points uniform on `X_1`.
    pub fn norm_check(&self, cons: &Construction, samples: usize, seed: u64) -> Vec<(f64, f64)> {
        let acc = chunked(seed, "dict_norm", samples, self.len(), |rng, acc| {
            let x = sample_point(cons, 1, 0, rng);
            let v = self.eval_f(&x.f);
            acc.push(&v, &v);
            Ok(())
        })
        .expect("norm sampling cannot fail");
        let j = acc.finish(&self.id, self.mu_x1);
        (0..self.len()).map(|i| (j.corr[i][i][0], j.stderr[i][i])).collect()
    }
}

/// `K × K` correlation table with per-entry standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalJoining {
    pub dict_id: String,
    pub n_samples: usize,
    /// Rows of `[re, im]` pairs.
    pub corr: Vec<Vec<[f64; 2]>>,
    pub stderr: Vec<Vec<f64>>,
}

impl EmpiricalJoining {
    pub fn zeros(dict_id: &str, k: usize) -> EmpiricalJoining {
        EmpiricalJoining { dict_id: dict_id.into(), n_samples: 0, corr: vec![vec![[0.0; 2]; k]; k], stderr: vec![vec![0.0; k]; k] }
    }

    pub fn dim(&self) -> usize {
        self.corr.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let [re, im] = self.corr[i][j];
        Complex64::new(re, im)
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.corr[i][j] = [v.re, v.im];
    }

    /// Entrywise `Σ w_k ν_k`; standard errors combine in quadrature.
    pub fn combine(parts: &[(f64, &EmpiricalJoining)]) -> Result<EmpiricalJoining> {
        let first = parts.first().ok_or(Error::NoPoints)?.1;
        let k = first.dim();
        let mut out = EmpiricalJoining::zeros(&first.dict_id, k);
        for &(w, p) in parts {
            if p.dict_id != first.dict_id || p.dim() != k {
                return Err(Error::DictionaryMismatch);
            }
            out.n_samples += p.n_samples;
            for i in 0..k {
                for j in 0..k {
                    let v = out.get(i, j) + p.get(i, j) * w;
                    out.set(i, j, v);
                    out.stderr[i][j] += (w * p.stderr[i][j]).powi(2);
                }
            }
        }
        out.stderr.iter_mut().flatten().for_each(|s| *s = s.sqrt());
        Ok(out)
    }
}

/// `d̄(ν, ν') = Σ_{i,j≥1} 2^{−(i+j)} |corr_ν[i][j] − corr_ν'[i][j]|`.
pub fn joining_metric(x: &EmpiricalJoining, y: &EmpiricalJoining) -> Result<f64> {
    if x.dict_id != y.dict_id || x.dim() != y.dim() {
        return Err(Error::DictionaryMismatch);
    }
    let mut d = 0.0;
    for i in 0..x.dim() {
        for j in 0..x.dim() {
            d += weight(i, j) * (x.get(i, j) - y.get(i, j)).norm();
        }
    }
    Ok(d)
}

/// `2^{−(i+j)}` for zero-based indices.
pub fn weight(i: usize, j: usize) -> f64 {
    0.5f64.powi((i + j + 2) as i32)
}

/// Standard error of `d̄(e, X) − d̄(e, Y)` when `e`, `X` and `Y` are independent estimates.
pub fn margin_stderr(e: &EmpiricalJoining, x: &EmpiricalJoining, y: &EmpiricalJoining) -> f64 {
    let mut v = 0.0;
    for i in 0..e.dim() {
        for j in 0..e.dim() {
            let w = weight(i, j);
            v += w * w * (4.0 * e.stderr[i][j].powi(2) + x.stderr[i][j].powi(2) + y.stderr[i][j].powi(2));
        }
    }
    v.sqrt()
}

/// Standard error of `d̄(x, y)` from the entrywise errors.
pub fn distance_stderr(x: &EmpiricalJoining, y: &EmpiricalJoining) -> f64 {
    let mut v = 0.0;
    for i in 0..x.dim() {
        for j in 0..x.dim() {
            v += (weight(i, j)).powi(2) * (x.stderr[i][j].powi(2) + y.stderr[i][j].powi(2));
        }
    }
    v.sqrt()
}

/// `|d̄(ξ∘(T×T), ν∘(T×T)) − d̄(ξ, ν)|` where `push` re-expands a table after the transform.
pub fn metric_invariance_check<P>(xi: &EmpiricalJoining, nu: &EmpiricalJoining, push: P) -> Result<f64>
where
    P: Fn(&EmpiricalJoining) -> Result<EmpiricalJoining>,
{
    let before = joining_metric(xi, nu)?;
    let after = joining_metric(&push(xi)?, &push(nu)?)?;
    Ok((after - before).abs())
}

/// `∫₀¹ ν∘(T_t×T_t) dt` by the rectangle rule on `grid` nodes (exact trapezoid for periodic integrands).
pub fn suspension_average<E>(nu_estimator: E, grid: usize) -> Result<EmpiricalJoining>
where
    E: Fn(f64) -> Result<EmpiricalJoining>,
{
    if grid < 2 {
        return Err(Error::InvalidArgument("grid must be at least 2".into()));
    }
    let tables = (0..grid).map(|j| nu_estimator(j as f64 / grid as f64)).collect::<Result<Vec<_>>>()?;
    let w = 1.0 / grid as f64;
    EmpiricalJoining::combine(&tables.iter().map(|t| (w, t)).collect::<Vec<_>>())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Period {
    /// `ν∘T_{1/k} = ν` at dictionary resolution; `Finite(1)` means flow-invariant.
    Finite(u32),
    Infinite,
}

/// Period of `t ↦ ν∘(T_t×T_t)` at resolution `tol`.
///
/// Returns `Finite(1)` if every `k ≤ k_max` matches, else the largest matching `k`,
/// else `Infinite`.
pub fn detect_period<E>(nu_estimator: E, k_max: u32, tol: f64) -> Result<Period>
where
    E: Fn(f64) -> Result<EmpiricalJoining>,
{
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be positive".into()));
    }
    let base = nu_estimator(0.0)?;
    let mut matches = Vec::new();
    for k in 1..=k_max {
        if joining_metric(&nu_estimator(1.0 / k as f64)?, &base)? < tol {
            matches.push(k);
        }
    }
    Ok(if matches.len() == k_max as usize { Period::Finite(1) } else { matches.last().map_or(Period::Infinite, |&k| Period::Finite(k)) })
}

/// `Φ_n = I_n + 2ã_n J_n` with `I_n = {|b| < a_n/n²}` and `J_n = {|t| < r_n/n²}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FolnerWindow {
    pub n: usize,
    pub i_half: i128,
    pub j_half: i128,
    /// `2ã_n`.
    pub step: i128,
}

impl FolnerWindow {
    pub fn len(&self) -> i128 {
        (2 * self.i_half + 1) * (2 * self.j_half + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, g: i128) -> bool {
        let t = (g + self.i_half).div_euclid(self.step);
        t.abs() <= self.j_half && (g - self.step * t).abs() <= self.i_half
    }

    pub fn max_abs(&self) -> i128 {
        self.i_half + self.step * self.j_half
    }

    /// Maximal integer intervals making up the window, in increasing order.
    pub fn intervals(&self) -> Vec<(i128, i128)> {
        (-self.j_half..=self.j_half).map(|t| (self.step * t - self.i_half, self.step * t + self.i_half)).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i128 {
        let b = rng.random_range(-self.i_half..=self.i_half);
        let t = rng.random_range(-self.j_half..=self.j_half);
        b + self.step * t
    }
}

/// Largest `h ≥ 0` with `h n² < x`.
fn half_width(x: i128, n: usize) -> i128 {
    (x - 1).div_euclid((n * n) as i128)
}

pub fn folner_window(params: &CfParams, n: usize) -> Result<FolnerWindow> {
    if n < 2 {
        return Err(Error::NTooSmall);
    }
    let seq = derive_sequences(params, n)?;
    let (a, a_tilde) = seq[n];
    let w = FolnerWindow { n, i_half: half_width(a, n), j_half: half_width(params.r(n) as i128, n), step: 2 * a_tilde };
    if w.i_half < 0 || w.j_half < 0 {
        return Err(Error::NTooSmall);
    }
    Ok(w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShulmanCheck {
    pub n: usize,
    /// `#(Φ_{n+1} ∖ ∪_{m≤n} Φ_m)`.
    pub fresh: i128,
    /// `#Φ_{n+1}`.
    pub size: i128,
    pub holds: bool,
    /// `Φ_n ⊂ I_{n+1} + I_{n+1}`.
    pub nested: bool,
    /// `#Φ_n < #Φ_{n+1}`.
    pub grows: bool,
}

/// Exact integer-set check of the Shulman inequality for `Φ_{n+1}` and of the nesting display.
pub fn shulman_check(params: &CfParams, n: usize) -> Result<ShulmanCheck> {
    let windows = (2..=n + 1).map(|m| folner_window(params, m)).collect::<Result<Vec<_>>>()?;
    let (next, prev) = windows.split_last().expect("at least one window");
    let mut union: Vec<(i128, i128)> = prev.iter().flat_map(|w| w.intervals()).collect();
    union.sort();
    let mut merged: Vec<(i128, i128)> = Vec::with_capacity(union.len());
    for (lo, hi) in union {
        match merged.last_mut() {
            Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    let mut covered = 0i128;
    for (lo, hi) in next.intervals() {
        let start = merged.partition_point(|&(_, h)| h < lo);
        for &(ulo, uhi) in &merged[start..] {
            if ulo > hi {
                break;
            }
            covered += uhi.min(hi) - ulo.max(lo) + 1;
        }
    }
    let size = next.len();
    let fresh = size - covered;
    let cur = prev.last().copied().unwrap_or(folner_window(params, n)?);
    Ok(ShulmanCheck { n, fresh, size, holds: fresh <= 3 * size, nested: cur.max_abs() <= 2 * next.i_half, grows: cur.len() < size })
}

/// Running sums of `u_i conj(v_j)` and `|u_i conj(v_j)|²`.
struct Acc {
    k: usize,
    n: usize,
    sum: Vec<Complex64>,
    sq: Vec<f64>,
}

impl Acc {
    fn new(k: usize) -> Acc {
        Acc { k, n: 0, sum: vec![Complex64::new(0.0, 0.0); k * k], sq: vec![0.0; k * k] }
    }

    fn push(&mut self, u: &[Complex64], v: &[Complex64]) {
        self.n += 1;
        for i in 0..self.k {
            for j in 0..self.k {
                let p = u[i] * v[j].conj();
                self.sum[i * self.k + j] += p;
                self.sq[i * self.k + j] += p.norm_sqr();
            }
        }
    }

    fn merge(mut self, o: Acc) -> Acc {
        self.n += o.n;
        self.sum.iter_mut().zip(&o.sum).for_each(|(a, b)| *a += b);
        self.sq.iter_mut().zip(&o.sq).for_each(|(a, b)| *a += b);
        self
    }

    /// Table of `scale · mean`.
    fn finish(&self, dict_id: &str, scale: f64) -> EmpiricalJoining {
        let mut out = EmpiricalJoining::zeros(dict_id, self.k);
        out.n_samples = self.n;
        let n = self.n.max(1) as f64;
        for i in 0..self.k {
            for j in 0..self.k {
                let m = self.sum[i * self.k + j] / n;
                let var = (self.sq[i * self.k + j] / n - m.norm_sqr()).max(0.0);
                out.set(i, j, m * scale);
                out.stderr[i][j] = scale * (var / (n - 1.0).max(1.0)).sqrt();
            }
        }
        out
    }
}

fn chunked<F>(seed: u64, label: &str, total: usize, k: usize, body: F) -> Result<Acc>
where
    F: Fn(&mut ChaCha8Rng, &mut Acc) -> Result<()> + Sync,
{
    par_chunks(seed, label, total, || Acc::new(k), body, Acc::merge)
}

/// `(1/#Φ) Σ_{g∈Φ} f_i(T_g x) conj(f_j(T_g x'))`, estimated on `samples` uniform draws from `Φ`.
pub fn empirical_joining(
    cons: &Construction,
    x: &CfPoint,
    x2: &CfPoint,
    window: &FolnerWindow,
    dict: &FunctionDictionary,
    samples: usize,
    seed: u64,
) -> Result<EmpiricalJoining> {
    let acc = chunked(seed, "window", samples, dict.len(), |rng, acc| {
        let g = window.sample(rng);
        let gg = LongG::time(g);
        let y = act(cons, &gg, x).map_err(|_| Error::TranslateOverflow(g))?;
        let y2 = act(cons, &gg, x2).map_err(|_| Error::TranslateOverflow(g))?;
        acc.push(&dict.eval(cons, &y)?, &dict.eval(cons, &y2)?);
        Ok(())
    })?;
    Ok(acc.finish(&dict.id, 1.0))
}

/// `∫ f_i(x) conj(f_j(T_k x)) dμ`, from points uniform on `X_1` (the dictionary vanishes elsewhere).
pub fn graph_joining_target(
    cons: &Construction,
    k: &LongG,
    dict: &FunctionDictionary,
    samples: usize,
    truncation: usize,
    seed: u64,
) -> Result<EmpiricalJoining> {
    let acc = chunked(seed, "graph", samples, dict.len(), |rng, acc| {
        let x = sample_point(cons, 1, truncation, rng);
        let y = act(cons, k, &x)?;
        acc.push(&dict.eval_f(&x.f), &dict.eval(cons, &y)?);
        Ok(())
    })?;
    Ok(acc.finish(&dict.id, dict.mu_x1))
}

/// `(∫ f_i dμ) conj(∫ f_j dμ)`.
pub fn product_target(cons: &Construction, dict: &FunctionDictionary, samples: usize, seed: u64) -> Result<EmpiricalJoining> {
    let one = [Complex64::new(1.0, 0.0)];
    let k = dict.len();
    let acc = chunked(seed, "product", samples, k, |rng, acc| {
        let x = sample_point(cons, 1, 0, rng);
        let mut v = dict.eval_f(&x.f);
        v.push(one[0]);
        acc.push(&v, &vec![one[0]; k + 1]);
        Ok(())
    })?;
    let means = acc.finish(&dict.id, dict.mu_x1);
    let mut out = EmpiricalJoining::zeros(&dict.id, k);
    out.n_samples = means.n_samples;
    for i in 0..k {
        for j in 0..k {
            let (mi, mj) = (means.get(i, 0), means.get(j, 0));
            out.set(i, j, mi * mj.conj());
            out.stderr[i][j] = mj.norm() * means.stderr[i][0] + mi.norm() * means.stderr[j][0];
        }
    }
    Ok(out)
}

/// `½(ν + ν')`.
pub fn mixture(a: &EmpiricalJoining, b: &EmpiricalJoining) -> Result<EmpiricalJoining> {
    EmpiricalJoining::combine(&[(0.5, a), (0.5, b)])
}

/// A point of `X_level` whose tail indices satisfy `|h_m| < (1 − m⁻²) r_m` for `m ≥ 2`,
/// and differ from `avoid` coordinatewise when given.
pub fn sample_generic_point<R: Rng + ?Sized>(
    cons: &Construction,
    level: usize,
    truncation: usize,
    avoid: Option<&CfPoint>,
    rng: &mut R,
) -> CfPoint {
    let mut x = sample_point(cons, level, truncation, rng);
    for (j, h) in x.tail.iter_mut().enumerate() {
        let m = level + j;
        let r = cons.levels[m].r;
        let bound = if m >= 2 { (1.0 - 1.0 / (m * m) as f64) * r as f64 } else { r as f64 };
        let other = avoid.and_then(|p| (p.level == level).then(|| p.tail.get(j).copied()).flatten());
        while (*h as f64).abs() >= bound || Some(*h) == other {
            *h = sample_h(r, rng);
        }
    }
    x
}
