//! The (C,F)-construction of an action of `G = R ⋉ SU(2)`.
//!
//! Level data are exact integers: `a_0 = ã_0 = 1`, `a_{n+1} = ã_n (2r_n − 1)`,
//! `ã_{n+1} = a_{n+1} + (2n+1) ã_n`, with `F_n = (−a_n, a_n] × SU(2)`,
//! `H_n = {|h| < r_n}` and `c_{n+1}(h) = s_n(h) · (2h ã_n, I)`.
//!
//! A point of `X_n = F_n × C_{n+1} × C_{n+2} × …` is stored as its level-n
//! coordinate `f` and a finite tail of shift indices. The action of `g` raises
//! the point until `g f` fits in `F_level` and then multiplies.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::equidist::{build_s_map, build_sample_set, haar_sample_su2, uniform_time, FiberSet, Rect, SMap, SMapPolicy, SampleSet};
use crate::groups::{LongG, LongTime};
use crate::rng::substream;
use crate::{Error, Result};

/// `n ↦ r_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    /// `max(floor, n^power)`.
    MaxPow {
        floor: u64,
        power: u32,
    },
    Constant {
        value: u64,
    },
    /// Listed values; the last one repeats.
    Explicit {
        values: Vec<u64>,
    },
}

impl Schedule {
    pub fn r(&self, n: usize) -> u64 {
        match self {
            Schedule::MaxPow { floor, power } => {
                let p = (n as u64).checked_pow(*power).unwrap_or(u64::MAX);
                p.max(*floor)
            }
            Schedule::Constant { value } => *value,
            Schedule::Explicit { values } => values.get(n).or(values.last()).copied().unwrap_or(1),
        }
    }
}

/// `n ↦ ε_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsSchedule {
    /// `1/(n+1)`.
    Harmonic,
    Constant {
        value: f64,
    },
}

/// Serialized construction descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CfParams {
    pub r_schedule: Schedule,
    pub eps_schedule: EpsSchedule,
    pub max_level: usize,
    /// `#Ŝ_n`.
    pub sample_count: usize,
    pub seed: u64,
}

impl Default for CfParams {
    fn default() -> Self {
        CfParams {
            r_schedule: Schedule::MaxPow { floor: 100, power: 5 },
            eps_schedule: EpsSchedule::Harmonic,
            max_level: 8,
            sample_count: 8,
            seed: 20240607,
        }
    }
}

impl CfParams {
    pub fn r(&self, n: usize) -> u64 {
        self.r_schedule.r(n)
    }

    pub fn eps(&self, n: usize) -> f64 {
        match self.eps_schedule {
            EpsSchedule::Harmonic => 1.0 / (n as f64 + 1.0),
            EpsSchedule::Constant { value } => value,
        }
    }

    /// `λ(F_{n+1}) / (λ(F_n) #C_{n+1}) = 1 + (2n−1)/(2r_{n−1}−1)`, and 1 at `n = 0`.
    pub fn ratio(&self, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        1.0 + (2.0 * n as f64 - 1.0) / (2.0 * self.r(n - 1) as f64 - 1.0)
    }
}

/// `(a_n, ã_n)` for `n = 0..=upto`, in exact integer arithmetic.
pub fn derive_sequences(params: &CfParams, upto: usize) -> Result<Vec<(i128, i128)>> {
    let mut out = Vec::with_capacity(upto + 1);
    out.push((1i128, 1i128));
    for n in 0..upto {
        let at = out[n].1;
        let r = params.r(n) as i128;
        let a_next = (2 * r - 1).checked_mul(at).ok_or(Error::LevelTooDeep)?;
        let carry = (2 * n as i128 + 1).checked_mul(at).ok_or(Error::LevelTooDeep)?;
        let at_next = a_next.checked_add(carry).ok_or(Error::LevelTooDeep)?;
        out.push((a_next, at_next));
    }
    Ok(out)
}

/// `μ(X_0) = 1/∏ ratio_n`, truncated at `depth`, and a bound on the truncation error.
///
/// For `r_m ≥ m^p` (`p ≥ 3`, `m ≥ 2`) each tail term obeys
/// `(2m+1)/(2r_m−1) ≤ 2 m^{1−p}`, whose sum from `depth` on is at most
/// `2 (D^{1−p} + D^{2−p}/(p−2))`; with `log(1+x) ≤ x` this bounds the log of the
/// neglected factor.
pub fn mu_total_normalizer(params: &CfParams, depth: usize) -> Result<(f64, f64)> {
    let p = match params.r_schedule {
        Schedule::MaxPow { power, .. } if power >= 3 => power as f64,
        _ => return Err(Error::Divergent),
    };
    let d = depth.max(2);
    let mut log_prod = 0.0;
    for n in 1..=d {
        log_prod += params.ratio(n).ln();
    }
    let df = d as f64;
    let tail_log = 2.0 * (df.powf(1.0 - p) + df.powf(2.0 - p) / (p - 2.0));
    let mu0 = (-log_prod).exp();
    Ok((mu0, mu0 * tail_log))
}

/// One level of the construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Level {
    pub n: usize,
    pub a: i128,
    pub a_tilde: i128,
    pub r: i64,
    pub s_hat: Option<SampleSet>,
    pub s_map: SMap,
}

impl Level {
    /// `c_{n+1}(h) = s_n(h) · (2h ã_n, I)`.
    pub fn c(&self, h: i64) -> LongG {
        self.s_map.value(h).mul(&LongG::time(2 * h as i128 * self.a_tilde))
    }

    /// `#C_{n+1} = 2r_n − 1`.
    pub fn card_c(&self) -> i64 {
        2 * self.r - 1
    }

    /// Half width of `S_n`.
    pub fn s_half_width(&self, prev_a_tilde: i128) -> i128 {
        (2 * self.n as i128 - 1) * prev_a_tilde
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Construction {
    pub params: CfParams,
    pub levels: Vec<Level>,
    /// `μ(X_n)`.
    pub mu_x: Vec<f64>,
    pub normalizer_tail: f64,
}

pub const NORMALIZER_DEPTH: usize = 200;

impl Construction {
    /// Builds levels `0..=max_level`; `s_n` maps are drawn without enforcing the pair test.
    pub fn build(params: &CfParams) -> Result<Construction> {
        Construction::build_with(params, &SMapPolicy::default())
    }

    pub fn build_with(params: &CfParams, policy: &SMapPolicy) -> Result<Construction> {
        let seq = derive_sequences(params, params.max_level)?;
        let mut levels = Vec::with_capacity(seq.len());
        for (n, &(a, a_tilde)) in seq.iter().enumerate() {
            let r = params.r(n) as i64;
            let (s_hat, s_map) = if n == 0 || n == params.max_level {
                (None, SMap::identity(n, r))
            } else {
                let mut rng = substream(params.seed, "s_hat", n as u64);
                let s_hat = build_sample_set(n, params, params.sample_count, &mut rng)?;
                let mut rng = substream(params.seed, "s_map", n as u64);
                let s_map = build_s_map(n, params, &s_hat, &mut rng, policy)?;
                (Some(s_hat), s_map)
            };
            levels.push(Level { n, a, a_tilde, r, s_hat, s_map });
        }
        let (mu0, tail) = mu_total_normalizer(params, NORMALIZER_DEPTH)?;
        let mut mu_x = vec![mu0];
        for n in 0..params.max_level {
            let l = &levels[n];
            mu_x.push(mu_x[n] * (l.a_tilde as f64 / l.a as f64));
        }
        Ok(Construction { params: params.clone(), levels, mu_x, normalizer_tail: tail })
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &Level {
        &self.levels[n]
    }

    /// `c_{n+1}(h)`.
    pub fn c(&self, n: usize, h: i64) -> LongG {
        self.levels[n].c(h)
    }

    /// CSV dump with header `n,a,a_tilde,card_C,ratio`.
    pub fn level_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "a", "a_tilde", "card_C", "ratio"]).map_err(|e| Error::Io(e.to_string()))?;
        for l in &self.levels {
            let ratio = l.a_tilde as f64 / l.a as f64;
            w.write_record([l.n.to_string(), l.a.to_string(), l.a_tilde.to_string(), l.card_c().to_string(), ratio.to_string()])
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf8"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CfReport {
    pub checks: Vec<CheckLine>,
    /// `(n, pair distance of s_n, ε_n)`; informational.
    pub pair_distances: Vec<(usize, f64, f64)>,
}

impl CfReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckLine> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(name: &str, failures: Vec<String>, ok_detail: String) -> CheckLine {
    let pass = failures.is_empty();
    let detail = if pass { ok_detail } else { failures.into_iter().take(5).collect::<Vec<_>>().join("; ") };
    CheckLine { name: name.into(), pass, detail }
}

/// Checks the structural conditions of the construction with exact interval
/// arithmetic on time coordinates.
pub fn validate_cf(cons: &Construction) -> CfReport {
    let params = &cons.params;
    let top = cons.max_level();
    let mut checks = Vec::new();

    let mut f = vec![];
    for n in 0..top {
        if cons.levels[n].card_c() <= 1 {
            f.push(format!("#C_{} = {}", n + 1, cons.levels[n].card_c()));
        }
    }
    checks.push(check("more_than_one_shift", f, format!("{top} levels")));

    let mut f = vec![];
    for n in 0..top {
        let (l, m) = (&cons.levels[n], &cons.levels[n + 1]);
        if m.a != l.a_tilde * (2 * l.r as i128 - 1) || m.a_tilde - m.a != (2 * n as i128 + 1) * l.a_tilde {
            f.push(format!("recursion broken at n = {}", n + 1));
        }
    }
    checks.push(check("recursion", f, "exact".into()));

    // S_n ⊂ F_n and F_n S_n ⊂ F̃_n.
    let mut f = vec![];
    for n in 1..=top {
        let k = cons.levels[n].s_half_width(cons.levels[n - 1].a_tilde);
        let l = &cons.levels[n];
        if k > l.a || l.a + k != l.a_tilde {
            f.push(format!("band mismatch at n = {n}"));
        }
        if let Some(s) = &l.s_hat {
            if !s.contains_all() {
                f.push(format!("sample outside S_{n}"));
            }
        }
    }
    checks.push(check("sample_band", f, "exact".into()));

    // Tiles F̃_n φ_n(h) partition F_{n+1}; the tiles with |h| ≤ n give S_{n+1}.
    let mut f = vec![];
    for n in 0..top {
        let l = &cons.levels[n];
        let at = l.a_tilde;
        let lo = -at + 2 * (1 - l.r as i128) * at;
        let hi = at + 2 * (l.r as i128 - 1) * at;
        if lo != -cons.levels[n + 1].a || hi != cons.levels[n + 1].a {
            f.push(format!("tiles do not cover F_{}", n + 1));
        }
        let band = (2 * n as i128 + 1) * at;
        if -at - 2 * n as i128 * at != -band || at + 2 * n as i128 * at != band {
            f.push(format!("tiles do not cover S_{}", n + 1));
        }
    }
    checks.push(check("tiling", f, "consecutive tiles share endpoints".into()));

    // F_n c(h) ⊂ F̃_n φ_n(h) ⊂ F_{n+1}, and the translates are disjoint.
    let mut f_contain = vec![];
    let mut f_disjoint = vec![];
    for n in 0..top {
        let l = &cons.levels[n];
        let a_next = cons.levels[n + 1].a;
        let mut prev_hi: Option<LongTime> = None;
        for h in (1 - l.r)..l.r {
            let tc = l.c(h).t;
            let lo = tc.add(&LongTime::int(-l.a));
            let hi = tc.add(&LongTime::int(l.a));
            let tile_lo = LongTime::int(2 * h as i128 * l.a_tilde - l.a_tilde);
            let tile_hi = LongTime::int(2 * h as i128 * l.a_tilde + l.a_tilde);
            if lo < tile_lo || hi > tile_hi || lo < LongTime::int(-a_next) || hi > LongTime::int(a_next) {
                f_contain.push(format!("F_{n} c({h}) leaves its tile"));
            }
            if let Some(p) = prev_hi {
                if lo < p {
                    f_disjoint.push(format!("F_{n} c({}) meets F_{n} c({h})", h - 1));
                }
            }
            prev_hi = Some(hi);
        }
    }
    checks.push(check("containment", f_contain, "all translates inside their tiles".into()));
    checks.push(check("disjointness", f_disjoint, "translates ordered and disjoint".into()));

    // Følner: boundary share of a unit shift is 1/a_n, strictly decreasing.
    let mut f = vec![];
    for n in 0..top {
        if cons.levels[n + 1].a <= cons.levels[n].a {
            f.push(format!("a_{} <= a_{n}", n + 1));
        }
    }
    let last = 1.0 / cons.levels[top].a as f64;
    checks.push(check("folner", f, format!("boundary share at top level {last:e}")));

    // n^4 / r_n decreases from its maximum on over the instantiated range.
    let q: Vec<f64> = (0..=top).map(|n| (n as f64).powi(4) / params.r(n) as f64).collect();
    let argmax = (0..q.len()).fold(0, |b, i| if q[i] > q[b] { i } else { b });
    let mut f = vec![];
    for n in argmax..top {
        if q[n + 1] > q[n] {
            f.push(format!("n^4/r_n rises at n = {}", n + 1));
        }
    }
    if let Schedule::Constant { .. } = params.r_schedule {
        f.push("constant schedule: n^4/r_n does not tend to 0".into());
    }
    checks.push(check("growth", f, format!("decreasing from n = {argmax}")));

    let finite = match mu_total_normalizer(params, NORMALIZER_DEPTH) {
        Ok((mu0, tail)) => {
            CheckLine { name: "finite_measure".into(), pass: tail.is_finite(), detail: format!("mu(X_0) = {mu0}, tail bound {tail:e}") }
        }
        Err(e) => CheckLine { name: "finite_measure".into(), pass: false, detail: e.to_string() },
    };
    checks.push(finite);

    let pair_distances = cons.levels.iter().filter(|l| l.s_hat.is_some()).map(|l| (l.n, l.s_map.pair_distance, params.eps(l.n))).collect();
    CfReport { checks, pair_distances }
}

/// A right translate `rect · shift` of a rectangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub rect: Rect,
    pub shift: LongG,
}

impl Block {
    pub fn contains(&self, g: &LongG) -> bool {
        self.rect.contains(&g.mul(&self.shift.inv()))
    }

    /// Haar measure; right translation preserves it.
    pub fn measure(&self) -> f64 {
        self.rect.measure()
    }

    pub fn time_span(&self) -> (LongTime, LongTime) {
        (self.rect.lo.add(&self.shift.t), self.rect.hi.add(&self.shift.t))
    }
}

/// `[A]_n` for `A` a finite disjoint union of blocks inside `F_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderSet {
    pub level: usize,
    pub blocks: Vec<Block>,
}

impl CylinderSet {
    pub fn rect(level: usize, rect: Rect) -> CylinderSet {
        CylinderSet { level, blocks: vec![Block { rect, shift: LongG::IDENTITY }] }
    }

    /// `(lo, hi] × SU(2)` at `level`.
    pub fn interval(level: usize, lo: f64, hi: f64) -> CylinderSet {
        CylinderSet::rect(level, Rect::new(lo, hi, FiberSet::Full))
    }

    /// `F_n` itself.
    pub fn base(cons: &Construction, level: usize) -> CylinderSet {
        let a = cons.levels[level].a;
        CylinderSet::rect(level, Rect { lo: LongTime::int(-a), hi: LongTime::int(a), fiber: FiberSet::Full })
    }

    pub fn contains_f(&self, f: &LongG) -> bool {
        self.blocks.iter().any(|b| b.contains(f))
    }

    /// Membership of a point, after moving it to this cylinder's level.
    pub fn contains(&self, cons: &Construction, x: &CfPoint) -> Result<bool> {
        Ok(match x.at_level(cons, self.level)? {
            Some(p) => self.contains_f(&p.f),
            None => false,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.blocks.iter().map(Block::measure).sum()
    }
}

/// `μ([A]_n) = λ(A)/λ(F_n) · μ(X_n)`; exact, so the standard error is 0.
pub fn cylinder_measure(c: &CylinderSet, cons: &Construction) -> (f64, f64) {
    let a = cons.levels[c.level].a as f64;
    (c.lambda() / (2.0 * a) * cons.mu_x[c.level], 0.0)
}

/// `[A]_n = [A C_{n+1}]_{n+1}`, repeated up to `to_level`.
pub fn expand_cylinder(c: &CylinderSet, cons: &Construction, to_level: usize, cap: usize) -> Result<CylinderSet> {
    if to_level < c.level || to_level > cons.max_level() {
        return Err(Error::InvalidArgument(format!("cannot expand level {} to {to_level}", c.level)));
    }
    let mut cur = c.clone();
    while cur.level < to_level {
        let l = &cons.levels[cur.level];
        let count = cur.blocks.len().saturating_mul(l.card_c() as usize);
        if count > cap {
            return Err(Error::ExpansionTooLarge);
        }
        let mut blocks = Vec::with_capacity(count);
        for h in (1 - l.r)..l.r {
            let ch = l.c(h);
            for b in &cur.blocks {
                blocks.push(Block { rect: b.rect.clone(), shift: b.shift.mul(&ch) });
            }
        }
        cur = CylinderSet { level: cur.level + 1, blocks };
    }
    Ok(cur)
}

/// `x = (f, c_{level+1}(tail[0]), c_{level+2}(tail[1]), …)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CfPoint {
    pub level: usize,
    pub f: LongG,
    pub tail: Vec<i64>,
}

impl CfPoint {
    /// `(f, h, …) ↦ (f c_{level+1}(h), …)`.
    pub fn raise(&self, cons: &Construction) -> Result<CfPoint> {
        let (&h, rest) = self.tail.split_first().ok_or(Error::TailExhausted)?;
        Ok(CfPoint { level: self.level + 1, f: self.f.mul(&cons.c(self.level, h)), tail: rest.to_vec() })
    }

    /// Inverse of [`CfPoint::raise`]; `None` when the point is not in `X_{level−1}`.
    pub fn lower(&self, cons: &Construction) -> Option<CfPoint> {
        if self.level == 0 {
            return None;
        }
        let l = &cons.levels[self.level - 1];
        let q = tile_index(&self.f.t, l.a_tilde);
        if q.abs() >= l.r as i128 {
            return None;
        }
        let q = q as i64;
        let f = self.f.mul(&l.c(q).inv());
        if !f.t.in_half_open(l.a) {
            return None;
        }
        let mut tail = Vec::with_capacity(self.tail.len() + 1);
        tail.push(q);
        tail.extend_from_slice(&self.tail);
        Some(CfPoint { level: self.level - 1, f, tail })
    }

    /// Representation at level `k`: raised through the tail or lowered.
    pub fn at_level(&self, cons: &Construction, k: usize) -> Result<Option<CfPoint>> {
        let mut p = self.clone();
        while p.level < k {
            p = p.raise(cons)?;
        }
        while p.level > k {
            match p.lower(cons) {
                Some(q) => p = q,
                None => return Ok(None),
            }
        }
        Ok(Some(p))
    }
}

/// Index `q` of the tile `(−ã + 2qã, ã + 2qã]` containing `t`.
fn tile_index(t: &LongTime, a_tilde: i128) -> i128 {
    let x = t.add(&LongTime::int(a_tilde));
    let d = 2 * a_tilde;
    if x.frac > 0.0 {
        x.whole.div_euclid(d)
    } else {
        -(-x.whole).div_euclid(d) - 1
    }
}

/// `T_g x`: raises `x` until `g f ∈ F_level`, then multiplies.
pub fn act(cons: &Construction, g: &LongG, x: &CfPoint) -> Result<CfPoint> {
    let mut y = x.clone();
    loop {
        let gf = g.mul(&y.f);
        if gf.t.in_half_open(cons.levels[y.level].a) {
            return Ok(CfPoint { level: y.level, f: gf, tail: y.tail });
        }
        if y.tail.is_empty() {
            return Err(Error::OrbitLeftTruncation);
        }
        y = y.raise(cons)?;
    }
}

/// Uniform shift index in `H_n`.
pub fn sample_h<R: Rng + ?Sized>(r: i64, rng: &mut R) -> i64 {
    rng.random_range((1 - r)..r)
}

/// A point of `X_level` under `μ` restricted and normalized: `f` uniform on `F_level`,
/// tail indices uniform on each `H_k`, tail length `min(truncation, max_level − level)`.
pub fn sample_point<R: Rng + ?Sized>(cons: &Construction, level: usize, truncation: usize, rng: &mut R) -> CfPoint {
    let a = cons.levels[level].a;
    let f = LongG::new(uniform_time(a, rng), haar_sample_su2(rng));
    let len = truncation.min(cons.max_level() - level);
    let tail = (0..len).map(|j| sample_h(cons.levels[level + j].r, rng)).collect();
    CfPoint { level, f, tail }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::Su2;

    fn small_params() -> CfParams {
        CfParams { max_level: 5, ..CfParams::default() }
    }

    #[test]
    fn sequences_by_hand() {
        let p = CfParams::default();
        let s = derive_sequences(&p, 4).unwrap();
        assert_eq!(s[0], (1, 1));
        assert_eq!(s[1], (199, 200));
        // a_2 = 200·199, ã_2 = a_2 + 3·200.
        assert_eq!(s[2], (39_800, 40_400));
        assert_eq!(s[3], (40_400 * 199, 40_400 * 199 + 5 * 40_400));
        let a4 = s[3].1 * (2 * 243 - 1);
        assert_eq!(s[4], (a4, a4 + 7 * s[3].1));
        assert_eq!(derive_sequences(&p, 40), Err(Error::LevelTooDeep));
    }

    #[test]
    fn ratio_identity() {
        let p = CfParams::default();
        let s = derive_sequences(&p, 8).unwrap();
        for n in 1..=8 {
            let exact = s[n].1 as f64 / s[n].0 as f64;
            assert!((exact - p.ratio(n)).abs() < 1e-12);
            let lhs = 2.0 * s[n].1 as f64 * (2.0 * p.r(n) as f64 - 1.0) / (2.0 * s[n].0 as f64 * (2.0 * p.r(n) as f64 - 1.0));
            assert!((lhs - p.ratio(n)).abs() < 1e-12);
        }
    }

    #[test]
    fn normalizer_tail_and_consistency() {
        let p = CfParams::default();
        let (mu0, tail) = mu_total_normalizer(&p, 100).unwrap();
        assert!(tail < 1e-6);
        // Direct product with a much deeper truncation lies within the bound.
        let deep: f64 = (1..=20_000).map(|n| p.ratio(n).ln()).sum();
        assert!((mu0 - (-deep).exp()).abs() <= tail);
        let cons = Construction::build(&small_params()).unwrap();
        for n in 0..5 {
            assert!((cons.mu_x[n + 1] - p.ratio(n) * cons.mu_x[n]).abs() < 1e-12);
        }
        let constant = CfParams { r_schedule: Schedule::Constant { value: 2 }, ..p };
        assert_eq!(mu_total_normalizer(&constant, 100), Err(Error::Divergent));
    }

    #[test]
    fn default_construction_validates() {
        let cons = Construction::build(&small_params()).unwrap();
        let rep = validate_cf(&cons);
        assert!(rep.pass(), "{:?}", rep.checks);
    }

    #[test]
    fn constant_schedule_fails_finiteness() {
        let p = CfParams { r_schedule: Schedule::Constant { value: 2 }, max_level: 4, ..CfParams::default() };
        let cons = Construction { params: p.clone(), ..Construction::build(&small_params()).unwrap() };
        let rep = validate_cf(&cons);
        assert!(!rep.get("finite_measure").unwrap().pass);
    }

    #[test]
    fn single_level_is_vacuous() {
        let p = CfParams { max_level: 0, ..CfParams::default() };
        let cons = Construction::build(&p).unwrap();
        assert!(validate_cf(&cons).pass());
    }

    #[test]
    fn cylinder_measures() {
        let cons = Construction::build(&small_params()).unwrap();
        for n in 0..4 {
            let (m, se) = cylinder_measure(&CylinderSet::base(&cons, n), &cons);
            assert!((m - cons.mu_x[n]).abs() < 1e-12 && se == 0.0);
        }
        let a1 = cons.levels[1].a as f64;
        let half = CylinderSet::interval(1, 0.0, a1);
        assert!((cylinder_measure(&half, &cons).0 - 0.5 * cons.mu_x[1]).abs() < 1e-12);
        // μ([A]_n) = #C_{n+1} μ([A c]_{n+1}).
        let a = CylinderSet::interval(2, -3.5, 17.25);
        for h in [-5, 0, 7] {
            let ac = CylinderSet { level: 3, blocks: vec![Block { rect: a.blocks[0].rect.clone(), shift: cons.c(2, h) }] };
            let lhs = cylinder_measure(&a, &cons).0;
            let rhs = cons.levels[2].card_c() as f64 * cylinder_measure(&ac, &cons).0;
            assert!((lhs - rhs).abs() < 1e-12 * lhs.max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn expansion_preserves_measure_and_disjointness() {
        let cons = Construction::build(&small_params()).unwrap();
        let c = CylinderSet::interval(1, -50.0, 120.0);
        assert_eq!(expand_cylinder(&c, &cons, 1, 10).unwrap(), c);
        let e = expand_cylinder(&c, &cons, 2, 1000).unwrap();
        assert_eq!(e.blocks.len(), 199);
        assert!((cylinder_measure(&e, &cons).0 - cylinder_measure(&c, &cons).0).abs() < 1e-12);
        let mut spans: Vec<_> = e.blocks.iter().map(Block::time_span).collect();
        spans.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        for w in spans.windows(2) {
            assert!(w[0].1 <= w[1].0);
        }
        assert_eq!(expand_cylinder(&c, &cons, 3, 1000), Err(Error::ExpansionTooLarge));
    }

    #[test]
    fn action_identity_inverse_and_shift() {
        let cons = Construction::build(&small_params()).unwrap();
        let mut rng = substream(11, "t", 0);
        for _ in 0..200 {
            let x = sample_point(&cons, 1, 12, &mut rng);
            let same = act(&cons, &LongG::IDENTITY, &x).unwrap();
            assert_eq!((same.level, &same.tail, same.f.t), (x.level, &x.tail, x.f.t));
            assert!(same.f.m.dist(&x.f.m) < 1e-12);
            let g = LongG::new(LongTime::from_f64(rng.random_range(-3000.0..3000.0)), haar_sample_su2(&mut rng));
            let y = act(&cons, &g, &x).unwrap();
            let z = act(&cons, &g.inv(), &y).unwrap();
            let back = z.at_level(&cons, 1).unwrap().unwrap();
            assert_eq!(back.tail, x.tail);
            assert!((back.f.t.sub(&x.f.t)).to_f64().abs() < 1e-9);
            assert!(back.f.m.dist(&x.f.m) < 1e-9);
        }
        // Two neighbours with s_n(h) = s_n(h+1): (2ã_n, I) moves h to h+1.
        let n = 2;
        let l = &cons.levels[n];
        let h = (1 - l.r..l.r - 1).find(|&h| l.s_map.label(h) == l.s_map.label(h + 1)).expect("equal neighbours");
        let x = CfPoint { level: n, f: LongG::new(LongTime::from_f64(0.5), Su2::H0), tail: vec![h, 0, 0] };
        let y = act(&cons, &LongG::time(2 * l.a_tilde), &x).unwrap();
        let y = y.at_level(&cons, n).unwrap().unwrap();
        assert_eq!(y.tail[0], h + 1);
        assert!(y.f.m.dist(&Su2::H0) < 1e-12);
    }

    #[test]
    fn raise_lower_round_trip() {
        let cons = Construction::build(&small_params()).unwrap();
        let mut rng = substream(12, "t", 0);
        for _ in 0..500 {
            let x = sample_point(&cons, 0, 12, &mut rng);
            let top = x.at_level(&cons, 5).unwrap().unwrap();
            let back = top.at_level(&cons, 0).unwrap().unwrap();
            assert_eq!(back.tail, x.tail);
        }
    }

    #[test]
    fn sampling_is_uniform() {
        let cons = Construction::build(&small_params()).unwrap();
        let mut rng = substream(13, "t", 0);
        let n = 20_000;
        let a = cons.levels[1].a as f64;
        let mut ts: Vec<f64> = Vec::with_capacity(n);
        let mut counts = vec![0usize; 199];
        for _ in 0..n {
            let x = sample_point(&cons, 1, 12, &mut rng);
            ts.push((x.f.t.to_f64() + a) / (2.0 * a));
            counts[(x.tail[0] + 99) as usize] += 1;
        }
        ts.sort_by(f64::total_cmp);
        let ks = ts
            .iter()
            .enumerate()
            .map(|(i, &u)| ((i + 1) as f64 / n as f64 - u).abs().max((u - i as f64 / n as f64).abs()))
            .fold(0.0, f64::max);
        assert!(ks < 1.63 / (n as f64).sqrt(), "ks = {ks}");
        let e = n as f64 / 199.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // Wilson–Hilferty 1% point for 198 degrees of freedom.
        let k: f64 = 198.0;
        let crit = k * (1.0 - 2.0 / (9.0 * k) + 2.326 * (2.0 / (9.0 * k)).sqrt()).powi(3);
        assert!(chi2 < crit, "chi2 = {chi2} crit = {crit}");
    }

    #[test]
    fn level_csv_header() {
        let cons = Construction::build(&small_params()).unwrap();
        let csv = cons.level_csv().unwrap();
        assert!(csv.starts_with("n,a,a_tilde,card_C,ratio\n0,1,1,199,1\n1,199,200,199,"));
    }
}
