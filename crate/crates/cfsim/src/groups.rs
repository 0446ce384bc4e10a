//! Arithmetic in SU(2), in G = R ⋉_φ SU(2), in the dihedral group D6 and in Z2.
//!
//! SU(2) elements are unit quaternions `(a, b, c, d)` read as the matrix
//! `[[z, -conj(w)], [w, conj(z)]]` with `z = a + bi`, `w = c + di`. Products are
//! matrix products, renormalized after every multiplication.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::equidist::haar_sample_su2;

/// Tolerance for exact bookkeeping on floating values.
pub const TOL_EXACT: f64 = 1e-12;
/// Tolerance for floating group arithmetic.
pub const TOL_GROUP: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Su2 {
    pub q: [f64; 4],
}

impl Su2 {
    pub const IDENTITY: Su2 = Su2 { q: [1.0, 0.0, 0.0, 0.0] };
    pub const MINUS_IDENTITY: Su2 = Su2 { q: [-1.0, 0.0, 0.0, 0.0] };
    /// `h0 = [[0, -1], [1, 0]]`.
    pub const H0: Su2 = Su2 { q: [0.0, 0.0, 1.0, 0.0] };

    /// Builds an element from a nonzero quaternion, normalizing it.
    pub fn new(q: [f64; 4]) -> Su2 {
        let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        Su2 { q: [q[0] / n, q[1] / n, q[2] / n, q[3] / n] }
    }

    pub fn from_zw(z: Complex64, w: Complex64) -> Su2 {
        Su2::new([z.re, z.im, w.re, w.im])
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.q[0], self.q[1])
    }

    pub fn w(&self) -> Complex64 {
        Complex64::new(self.q[2], self.q[3])
    }

    /// Diagonal element `diag(e^{2πiθ}, e^{-2πiθ})`.
    pub fn diag_turn(theta: f64) -> Su2 {
        let a = 2.0 * std::f64::consts::PI * theta;
        Su2 { q: [a.cos(), a.sin(), 0.0, 0.0] }
    }

    pub fn inv(&self) -> Su2 {
        Su2 { q: [self.q[0], -self.q[1], -self.q[2], -self.q[3]] }
    }

    /// Largest coordinate difference of the quaternions.
    pub fn dist(&self, other: &Su2) -> f64 {
        (0..4).map(|i| (self.q[i] - other.q[i]).abs()).fold(0.0, f64::max)
    }

    pub fn norm_defect(&self) -> f64 {
        (self.q.iter().map(|x| x * x).sum::<f64>() - 1.0).abs()
    }

    /// The 2×2 complex matrix, row-major.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let (z, w) = (self.z(), self.w());
        [[z, -w.conj()], [w, z.conj()]]
    }
}

impl fmt::Display for Su2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.6}, {:.6}, {:.6}, {:.6}]", self.q[0], self.q[1], self.q[2], self.q[3])
    }
}

pub fn su2_mul(p: &Su2, q: &Su2) -> Su2 {
    let (z1, w1, z2, w2) = (p.z(), p.w(), q.z(), q.w());
    Su2::from_zw(z1 * z2 - w1.conj() * w2, w1 * z2 + z1.conj() * w2)
}

fn twist(n: &Su2, phase: Complex64) -> Su2 {
    Su2::from_zw(n.z(), n.w() * phase)
}

/// `φ_t(N) = D_t N D_t^{-1}` with `D_t = diag(e^{πit/2}, e^{-πit/2})`.
pub fn phi(t: f64, n: &Su2) -> Su2 {
    let r = t.rem_euclid(2.0);
    twist(n, Complex64::from_polar(1.0, -std::f64::consts::PI * r))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GElement {
    pub t: f64,
    pub m: Su2,
}

impl GElement {
    pub const IDENTITY: GElement = GElement { t: 0.0, m: Su2::IDENTITY };

    pub fn new(t: f64, m: Su2) -> GElement {
        GElement { t, m }
    }

    pub fn time(t: f64) -> GElement {
        GElement { t, m: Su2::IDENTITY }
    }

    pub fn fiber(m: Su2) -> GElement {
        GElement { t: 0.0, m }
    }

    /// Time difference plus quaternion distance.
    pub fn dist(&self, other: &GElement) -> f64 {
        (self.t - other.t).abs() + self.m.dist(&other.m)
    }
}

pub fn g_mul(x: &GElement, y: &GElement) -> GElement {
    GElement { t: x.t + y.t, m: su2_mul(&x.m, &phi(x.t, &y.m)) }
}

pub fn g_inv(x: &GElement) -> GElement {
    GElement { t: -x.t, m: phi(-x.t, &x.m.inv()) }
}

/// `k* = (1, I) k (1, I)^{-1} = (t, φ_1(M))`.
pub fn conj_star(k: &GElement) -> GElement {
    GElement { t: k.t, m: phi(1.0, &k.m) }
}

/// Outcome of a randomized centrality test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centrality {
    pub central: bool,
    pub trials: usize,
    pub witness: Option<GElement>,
}

/// Random element with time uniform in `(-4, 4)` and Haar fiber.
pub fn random_g<R: Rng + ?Sized>(rng: &mut R) -> GElement {
    let t = rng.random_range(-4.0..4.0);
    GElement { t, m: haar_sample_su2(rng) }
}

/// Tests `k g = g k` for `trials` random `g`; the first failure is returned as witness.
pub fn is_central<R: Rng + ?Sized>(k: &GElement, trials: usize, rng: &mut R) -> Centrality {
    for _ in 0..trials {
        let g = random_g(rng);
        let kg = g_mul(k, &g);
        let gk = g_mul(&g, k);
        if kg.t != gk.t || kg.m.dist(&gk.m) > TOL_GROUP {
            return Centrality { central: false, trials, witness: Some(g) };
        }
    }
    Centrality { central: true, trials, witness: None }
}

/// A real time coordinate split as `whole + frac` with `frac ∈ [0, 1)`.
///
/// Level data of the (C,F)-construction reaches 10^25 and beyond, so time
/// coordinates of points keep the integer part exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongTime {
    pub whole: i128,
    pub frac: f64,
}

impl LongTime {
    pub const ZERO: LongTime = LongTime { whole: 0, frac: 0.0 };

    pub fn int(whole: i128) -> LongTime {
        LongTime { whole, frac: 0.0 }
    }

    pub fn from_parts(whole: i128, frac: f64) -> LongTime {
        let fl = frac.floor();
        let mut t = LongTime { whole: whole + fl as i128, frac: frac - fl };
        if t.frac >= 1.0 {
            t.whole += 1;
            t.frac = 0.0;
        }
        t
    }

    pub fn from_f64(t: f64) -> LongTime {
        LongTime::from_parts(0, t)
    }

    pub fn to_f64(&self) -> f64 {
        self.whole as f64 + self.frac
    }

    pub fn add(&self, o: &LongTime) -> LongTime {
        LongTime::from_parts(self.whole + o.whole, self.frac + o.frac)
    }

    pub fn neg(&self) -> LongTime {
        if self.frac == 0.0 {
            LongTime::int(-self.whole)
        } else {
            LongTime::from_parts(-self.whole - 1, 1.0 - self.frac)
        }
    }

    pub fn sub(&self, o: &LongTime) -> LongTime {
        self.add(&o.neg())
    }

    /// Membership in `(-a, a]`.
    pub fn in_half_open(&self, a: i128) -> bool {
        *self > LongTime::int(-a) && *self <= LongTime::int(a)
    }

    /// `e^{-iπt}`.
    pub fn phase(&self) -> Complex64 {
        let base = Complex64::from_polar(1.0, -std::f64::consts::PI * self.frac);
        if self.whole.rem_euclid(2) == 1 {
            -base
        } else {
            base
        }
    }
}

impl PartialOrd for LongTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.whole.cmp(&other.whole).then(self.frac.total_cmp(&other.frac)))
    }
}

/// An element of G whose time coordinate is a [`LongTime`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongG {
    pub t: LongTime,
    pub m: Su2,
}

impl LongG {
    pub const IDENTITY: LongG = LongG { t: LongTime::ZERO, m: Su2::IDENTITY };

    pub fn new(t: LongTime, m: Su2) -> LongG {
        LongG { t, m }
    }

    pub fn time(whole: i128) -> LongG {
        LongG { t: LongTime::int(whole), m: Su2::IDENTITY }
    }

    pub fn fiber(m: Su2) -> LongG {
        LongG { t: LongTime::ZERO, m }
    }

    pub fn from_g(g: &GElement) -> LongG {
        LongG { t: LongTime::from_f64(g.t), m: g.m }
    }

    pub fn to_g(&self) -> GElement {
        GElement { t: self.t.to_f64(), m: self.m }
    }

    pub fn mul(&self, o: &LongG) -> LongG {
        LongG { t: self.t.add(&o.t), m: su2_mul(&self.m, &twist(&o.m, self.t.phase())) }
    }

    pub fn inv(&self) -> LongG {
        let nt = self.t.neg();
        LongG { t: nt, m: twist(&self.m.inv(), nt.phase()) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum D6 {
    E,
    A,
    B,
    C,
    D,
    F,
}

const D6_TABLE: [[D6; 6]; 6] = {
    use D6::*;
    [[E, A, B, C, D, F], [A, E, D, F, B, C], [B, F, E, D, C, A], [C, D, F, E, A, B], [D, C, A, B, F, E], [F, B, C, A, E, D]]
};

impl D6 {
    pub const ALL: [D6; 6] = [D6::E, D6::A, D6::B, D6::C, D6::D, D6::F];

    fn index(self) -> usize {
        self as usize
    }

    pub fn inv(self) -> D6 {
        *D6::ALL.iter().find(|&&g| d6_mul(self, g) == D6::E).expect("table has inverses")
    }

    pub fn label(self) -> char {
        ['e', 'a', 'b', 'c', 'd', 'f'][self.index()]
    }
}

/// Row `g`, column `h` of the Cayley table.
pub fn d6_mul(g: D6, h: D6) -> D6 {
    D6_TABLE[g.index()][h.index()]
}

/// A group with a binary operation, used as the fiber of skew products.
pub trait FiberGroup: Copy + PartialEq + fmt::Debug {
    fn identity() -> Self;
    fn op(&self, other: &Self) -> Self;
}

/// Z2 as `{0, 1}` under addition mod 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Z2(pub u8);

impl Z2 {
    pub fn new(v: u8) -> Z2 {
        Z2(v & 1)
    }
}

impl FiberGroup for Z2 {
    fn identity() -> Z2 {
        Z2(0)
    }
    fn op(&self, other: &Z2) -> Z2 {
        Z2(self.0 ^ other.0)
    }
}

impl FiberGroup for D6 {
    fn identity() -> D6 {
        D6::E
    }
    fn op(&self, other: &D6) -> D6 {
        d6_mul(*self, *other)
    }
}

impl FiberGroup for Su2 {
    fn identity() -> Su2 {
        Su2::IDENTITY
    }
    fn op(&self, other: &Su2) -> Su2 {
        su2_mul(self, other)
    }
}
