//! Chacon's rank-one automorphism by cutting and stacking.
//!
//! The stage-(k+1) tower is column 0, column 1, one spacer, column 2, each column
//! a copy of the stage-k tower, so `h_{k+1} = 3h_k + 1` and `h_0 = 1`. A point is
//! kept in its lowest tower: the stage-0 interval or the spacer added at its
//! stage, together with the column choices made above it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Heights grow like `3^k`; stage 38 is the last that fits in `u64`.
pub const MAX_STAGE: usize = 38;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerScheme {
    pub heights: Vec<u64>,
    pub cuts: u32,
    /// Spacers placed after column `i`, per stage.
    pub spacers_after: Vec<u32>,
}

/// `h_k = (3^{k+1} − 1)/2`.
pub fn chacon_height(k: usize) -> u64 {
    (3u64.pow(k as u32 + 1) - 1) / 2
}

pub fn chacon_scheme(stages: usize) -> Result<TowerScheme> {
    if stages == 0 || stages > MAX_STAGE {
        return Err(Error::InvalidArgument(format!("stages = {stages}")));
    }
    Ok(TowerScheme { heights: (0..stages).map(chacon_height).collect(), cuts: 3, spacers_after: vec![0, 1, 0] })
}

/// Width of a single stage-k level: `(2/3) 3^{-k}`, so that the total mass is 1.
pub fn level_measure(stage: usize) -> f64 {
    2.0 / 3.0 * 3f64.powi(-(stage as i32))
}

fn offset(k: usize, col: u8) -> u64 {
    match col {
        0 => 0,
        1 => chacon_height(k),
        _ => 2 * chacon_height(k) + 1,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TowerPoint {
    pub stage: usize,
    pub rung: u64,
    /// `tail[j]` is the column of the stage-(stage+j) tower inside the next one.
    pub tail: Vec<u8>,
}

impl TowerPoint {
    fn lift(&self) -> Result<TowerPoint> {
        let (&c, rest) = self.tail.split_first().ok_or(Error::TailExhausted)?;
        if self.stage + 1 > MAX_STAGE {
            return Err(Error::TailExhausted);
        }
        Ok(TowerPoint { stage: self.stage + 1, rung: offset(self.stage, c) + self.rung, tail: rest.to_vec() })
    }

    /// Moves to the lowest tower containing the point.
    pub fn canonical(mut self) -> TowerPoint {
        while self.stage > 0 {
            let h = chacon_height(self.stage - 1);
            let col = if self.rung < h {
                0
            } else if self.rung < 2 * h {
                1
            } else if self.rung == 2 * h {
                break;
            } else {
                2
            };
            self.rung -= offset(self.stage - 1, col);
            self.stage -= 1;
            self.tail.insert(0, col);
        }
        self
    }

    /// Rung in the stage-k tower, `None` for spacers added above stage k.
    pub fn rung_at(&self, k: usize) -> Result<Option<u64>> {
        if self.stage > k {
            return Ok(None);
        }
        let mut p = self.clone();
        while p.stage < k {
            p = p.lift()?;
        }
        Ok(Some(p.rung))
    }

    /// 1 on spacers, 0 on the stage-0 interval.
    pub fn symbol(&self) -> u8 {
        (self.stage != 0) as u8
    }
}

/// One step up the tower.
pub fn tower_apply(p: &TowerPoint) -> Result<TowerPoint> {
    let mut q = p.clone();
    while q.rung + 1 >= chacon_height(q.stage) {
        q = q.lift()?;
    }
    q.rung += 1;
    Ok(q.canonical())
}

/// One step down the tower.
pub fn tower_apply_inv(p: &TowerPoint) -> Result<TowerPoint> {
    let mut q = p.clone();
    while q.rung == 0 {
        q = q.lift()?;
    }
    q.rung -= 1;
    Ok(q.canonical())
}

/// A `μ`-distributed point: the stage-0 interval has mass 2/3 and the spacer
/// added at stage `m ≥ 1` has mass `(2/3) 3^{-m}`.
pub fn sample_tower_point<R: Rng + ?Sized>(tail_len: usize, rng: &mut R) -> TowerPoint {
    let mut stage = 0;
    // P(stage ≥ m+1 | stage ≥ m) = 1/3 for m ≥ 1, and 1/3 at m = 0.
    while stage < MAX_STAGE && rng.random::<f64>() < 1.0 / 3.0 {
        stage += 1;
    }
    let rung = if stage == 0 { 0 } else { 2 * chacon_height(stage - 1) };
    let tail = (0..tail_len.min(MAX_STAGE - stage)).map(|_| rng.random_range(0..3u8)).collect();
    TowerPoint { stage, rung, tail }
}

/// A union of levels of one tower.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSet {
    pub stage: usize,
    pub rungs: Vec<u64>,
}

impl LevelSet {
    pub fn contains(&self, p: &TowerPoint) -> Result<bool> {
        Ok(match p.rung_at(self.stage)? {
            Some(r) => self.rungs.contains(&r),
            None => false,
        })
    }

    pub fn measure(&self) -> f64 {
        self.rungs.len() as f64 * level_measure(self.stage)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Estimates `μ(A ∩ T^{-n} B)` from `batches` independent orbits of length
/// `orbit_len`; the standard error is taken across batches.
pub fn birkhoff_correlation<R: Rng + ?Sized>(
    a: &LevelSet,
    b: &LevelSet,
    shift: usize,
    orbit_len: usize,
    batches: usize,
    rng: &mut R,
) -> Result<Estimate> {
    let mut means = Vec::with_capacity(batches);
    for _ in 0..batches.max(2) {
        let mut x = sample_tower_point(MAX_STAGE, rng);
        let mut window: std::collections::VecDeque<bool> = std::collections::VecDeque::with_capacity(shift + 1);
        let mut hits = 0usize;
        for i in 0..orbit_len + shift {
            window.push_back(a.contains(&x)?);
            if i >= shift {
                let in_a = window.pop_front().expect("window holds shift+1 flags");
                if in_a && b.contains(&x)? {
                    hits += 1;
                }
            }
            x = tower_apply(&x)?;
        }
        means.push(hits as f64 / orbit_len as f64);
    }
    Ok(mean_and_stderr(&means))
}

pub(crate) fn mean_and_stderr(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Estimate { value: m, stderr: (var / n).sqrt() }
}

/// Symbols of the stage-k tower from bottom to top: `B_0 = 0`, `B_{k+1} = B_k B_k 1 B_k`.
pub fn tower_word(k: usize) -> Vec<u8> {
    let mut b = vec![0u8];
    for _ in 0..k {
        let mut next = Vec::with_capacity(3 * b.len() + 1);
        next.extend_from_slice(&b);
        next.extend_from_slice(&b);
        next.push(1);
        next.extend_from_slice(&b);
        b = next;
    }
    b
}

fn occurrences(w: &[u8], s: &[u8]) -> u64 {
    if s.len() < w.len() {
        return 0;
    }
    s.windows(w.len()).filter(|x| *x == w).count() as u64
}

/// `μ{x : symbols of x, Tx, …, T^{L−1}x spell w}`, via occurrence counts in
/// `B_k` carried to stage 30 through the junctions of the recursion; the error
/// is below `L · 3^{-30}`.
pub fn word_measure(w: &[u8]) -> f64 {
    let l = w.len();
    if l == 0 {
        return 1.0;
    }
    let mut k = 0;
    while (chacon_height(k) as usize) < l {
        k += 1;
    }
    let b = tower_word(k);
    let pre = b[..l - 1].to_vec();
    let suf = b[b.len() - (l - 1)..].to_vec();
    let mut junction1 = suf.clone();
    junction1.extend_from_slice(&pre);
    let mut junction2 = suf;
    junction2.push(1);
    junction2.extend_from_slice(&pre);
    let cross = (occurrences(w, &junction1) + occurrences(w, &junction2)) as f64;
    let mut count = occurrences(w, &b) as f64;
    for _ in k..30 {
        count = 3.0 * count + cross;
    }
    count * level_measure(30)
}
