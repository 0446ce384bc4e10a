//! Group extensions over Chacon's automorphism and the identities they satisfy.
//!
//! Convention: the cocycle multiplies the fiber on the left, `T_φ(x, h) = (Tx, φ(x) h)`,
//! and `σ_g(x, h) = (x, h g)` multiplies on the right, so every `σ_g` commutes with `T_φ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::groups::{su2_mul, FiberGroup, Su2, D6, TOL_GROUP, Z2};
use crate::rank_one::{chacon_height, tower_apply, TowerPoint};
use crate::Result;

/// `(x, g) ↦ (T x, φ(x) g)`.
pub fn skew_apply<X, G, T, P>(base: &T, cocycle: &P, x: &X, g: &G) -> Result<(X, G)>
where
    G: FiberGroup,
    T: Fn(&X) -> Result<X>,
    P: Fn(&X) -> Result<G>,
{
    let c = cocycle(x)?;
    Ok((base(x)?, c.op(g)))
}

/// `n` steps of the skew product.
pub fn skew_iterate<X, G, T, P>(base: &T, cocycle: &P, x: &X, g: &G, n: usize) -> Result<(X, G)>
where
    X: Clone,
    G: FiberGroup,
    T: Fn(&X) -> Result<X>,
    P: Fn(&X) -> Result<G>,
{
    let mut y = (x.clone(), *g);
    for _ in 0..n {
        y = skew_apply(base, cocycle, &y.0, &y.1)?;
    }
    Ok(y)
}

/// `σ_g(x, h) = (x, h g)`.
pub fn sigma<X: Clone, G: FiberGroup>(g: &G, y: &(X, G)) -> (X, G) {
    (y.0.clone(), y.1.op(g))
}

/// The Z2 cocycle over Chacon: indicator of the top level of the stage-2 tower.
pub fn chacon_phi(x: &TowerPoint) -> Result<Z2> {
    Ok(Z2((x.rung_at(2)? == Some(chacon_height(2) - 1)) as u8))
}

pub fn chacon_base(x: &TowerPoint) -> Result<TowerPoint> {
    tower_apply(x)
}

/// `T_φ(x, s) = (T x, φ(x) + s)`.
pub fn t_phi(y: &(TowerPoint, Z2)) -> Result<(TowerPoint, Z2)> {
    skew_apply(&chacon_base, &chacon_phi, &y.0, &y.1)
}

/// `ψ(x, s) = s`.
pub fn psi(y: &(TowerPoint, Z2)) -> Z2 {
    y.1
}

/// `ψ^(2) = ψ + ψ ∘ T_φ`.
pub fn psi2(y: &(TowerPoint, Z2)) -> Result<Z2> {
    Ok(psi(y).op(&psi(&t_phi(y)?)))
}

/// `T̄(x, s, r) = (T x, φ(x) + s, s + r)`.
pub fn double_ext_apply(x: &TowerPoint, s: Z2, r: Z2) -> Result<(TowerPoint, Z2, Z2)> {
    Ok((tower_apply(x)?, chacon_phi(x)?.op(&s), s.op(&r)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationCheck {
    pub holds: bool,
    pub checked: usize,
    pub first_failure: Option<usize>,
}

/// Pointwise test of `lhs(y) = F(S y) + F(y)` over Z2 on the given points.
pub fn cocycle_eq_check<X, L, F, S>(lhs: &L, transfer: &F, transform: &S, points: &[X]) -> Result<EquationCheck>
where
    L: Fn(&X) -> Result<Z2>,
    F: Fn(&X) -> Result<Z2>,
    S: Fn(&X) -> Result<X>,
{
    for (i, y) in points.iter().enumerate() {
        if lhs(y)? != transfer(&transform(y)?)?.op(&transfer(y)?) {
            return Ok(EquationCheck { holds: false, checked: i + 1, first_failure: Some(i) });
        }
    }
    Ok(EquationCheck { holds: true, checked: points.len(), first_failure: None })
}

/// Left side of the lifting equation for `σ(x, s) = (x, s + 1)` under `T_φ²`:
/// `ψ^(2)(x, s+1) + ψ^(2)(x, s)`.
pub fn lifting_lhs(y: &(TowerPoint, Z2)) -> Result<Z2> {
    let shifted = (y.0.clone(), y.1.op(&Z2(1)));
    Ok(psi2(&shifted)?.op(&psi2(y)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstruction {
    pub stage: usize,
    pub first_sum: u8,
    pub second_sum: u8,
    /// The walk returned to the same stage-m rung and fiber value.
    pub returned: bool,
    pub obstructed: bool,
}

/// Word-sum test against `θ = F ∘ T_φ + F` with `F` determined by stage-m data.
///
/// Starting at rung 0 of column 0 of the stage-(m+1) tower, `h_m` steps reach
/// column 1 and `h_m + 1` more reach column 2, at the same stage-m rung and, since
/// each pass crosses the stage-2 top an odd number of times, the same fiber
/// value. Any such coboundary sums to 0 along the two passes; an odd total
/// rules it out.
pub fn word_sum_obstruction<C>(theta: &C, stage: usize, s0: Z2) -> Result<Obstruction>
where
    C: Fn(&(TowerPoint, Z2)) -> Result<Z2>,
{
    let start = TowerPoint { stage: stage + 1, rung: 0, tail: vec![0; 4] }.canonical();
    let mut y = (start.clone(), s0);
    let h = chacon_height(stage) as usize;
    let mut sums = [0u8; 2];
    for (pass, len) in [h, h + 1].into_iter().enumerate() {
        for _ in 0..len {
            sums[pass] ^= theta(&y)?.0;
            y = t_phi(&y)?;
        }
    }
    let returned = y.0.rung_at(stage)? == start.rung_at(stage)? && y.1 == s0;
    Ok(Obstruction { stage, first_sum: sums[0], second_sum: sums[1], returned, obstructed: returned && (sums[0] ^ sums[1]) == 1 })
}

/// A D6 cocycle over Chacon read off the stage-2 rung.
pub fn chacon_d6(x: &TowerPoint) -> Result<D6> {
    Ok(match x.rung_at(2)? {
        Some(r) => D6::ALL[(r % 6) as usize],
        None => D6::C,
    })
}

pub fn t_phi_d6(y: &(TowerPoint, D6)) -> Result<(TowerPoint, D6)> {
    skew_apply(&chacon_base, &chacon_d6, &y.0, &y.1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub samples: usize,
    /// `(T_φ ∘ σ_a)² = T_φ²` at every sample.
    pub root_identity: bool,
    /// `σ_g ∘ T_φ = T_φ ∘ σ_g` for all g at every sample.
    pub sigma_commutes: bool,
    /// `(h, σ_a σ_b (h), σ_b σ_a (h))` with the last two different.
    pub witness: Option<(D6, D6, D6)>,
}

/// First fiber value `h` in `group` with `σ_{g1} σ_{g2}(h) ≠ σ_{g2} σ_{g1}(h)`.
pub fn sigma_witness(g1: D6, g2: D6, group: &[D6]) -> Option<(D6, D6, D6)> {
    group.iter().find_map(|&h| {
        let l = h.op(&g2).op(&g1);
        let r = h.op(&g1).op(&g2);
        (l != r).then_some((h, l, r))
    })
}

pub fn d6_root_check(points: &[(TowerPoint, D6)], a: D6, b: D6, group: &[D6]) -> Result<RootReport> {
    let mut root_identity = true;
    let mut sigma_commutes = true;
    for y in points {
        let lhs = t_phi_d6(&sigma(&a, &t_phi_d6(&sigma(&a, y))?))?;
        let rhs = t_phi_d6(&t_phi_d6(y)?)?;
        root_identity &= lhs == rhs;
        for g in group {
            sigma_commutes &= sigma(g, &t_phi_d6(y)?) == t_phi_d6(&sigma(g, y))?;
        }
    }
    Ok(RootReport { samples: points.len(), root_identity, sigma_commutes, witness: sigma_witness(a, b, group) })
}

/// Whether `h_0 g_t = g_t h_0` with `g_t = diag(e^{2πit}, e^{−2πit})`.
pub fn su2_flow_commutation(t: f64) -> bool {
    let g = Su2::diag_turn(t);
    su2_mul(&Su2::H0, &g).dist(&su2_mul(&g, &Su2::H0)) <= TOL_GROUP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralRow {
    pub theta: f64,
    pub modulus: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub n: usize,
    /// `N^{-1/2}`.
    pub reference: f64,
    pub rows: Vec<SpectralRow>,
}

impl SpectralReport {
    pub fn all_below(&self) -> bool {
        self.rows.iter().all(|r| r.modulus < r.threshold)
    }

    pub fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| crate::Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf8"))
    }
}

/// `5 N^{-1/2} log N`.
pub fn spectral_threshold(n: usize) -> f64 {
    let nf = n as f64;
    5.0 * nf.ln() / nf.sqrt()
}

/// `|(1/N) Σ_{n<N} e^{−2πinθ} v_n|` for each θ.
pub fn eigenvalue_probe(values: &[Complex64], thetas: &[f64]) -> SpectralReport {
    let n = values.len();
    let threshold = spectral_threshold(n);
    let rows = thetas
        .iter()
        .map(|&theta| {
            let step = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * theta);
            let mut rot = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, v) in values.iter().enumerate() {
                if i % 1024 == 0 {
                    rot = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * ((theta * i as f64).fract()));
                }
                acc += rot * v;
                rot *= step;
            }
            SpectralRow { theta, modulus: acc.norm() / n as f64, threshold }
        })
        .collect();
    SpectralReport { n, reference: (n as f64).powf(-0.5), rows }
}

/// Values `χ(s_n, r_n)` along a `T̄`-orbit for the three nontrivial characters of Z2².
pub fn double_ext_character_orbits(x: &TowerPoint, s: Z2, r: Z2, n: usize) -> Result<[Vec<Complex64>; 3]> {
    let mut out = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut y = (x.clone(), s, r);
    let sign = |b: u8| Complex64::new(if b == 0 { 1.0 } else { -1.0 }, 0.0);
    for _ in 0..n {
        out[0].push(sign(y.1 .0));
        out[1].push(sign(y.2 .0));
        out[2].push(sign(y.1 .0 ^ y.2 .0));
        y = double_ext_apply(&y.0, y.1, y.2)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::d6_mul;
    use crate::rank_one::{sample_tower_point, MAX_STAGE};
    use crate::rng::substream;
    use rand::Rng;

    fn points(n: usize, seed: u64) -> Vec<(TowerPoint, Z2)> {
        let mut rng = substream(seed, "t", 0);
        (0..n).map(|_| (sample_tower_point(MAX_STAGE, &mut rng), Z2(rng.random_range(0..2)))).collect()
    }

    #[test]
    fn skew_product_basics() {
        let ident = |_: &TowerPoint| Ok(Z2(0));
        let one = |_: &TowerPoint| Ok(Z2(1));
        for (x, s) in points(50, 1) {
            let (y, g) = skew_apply(&chacon_base, &ident, &x, &s).unwrap();
            assert_eq!((y, g), (tower_apply(&x).unwrap(), s));
            let mut cur = (x.clone(), s);
            for k in 1..6u8 {
                cur = skew_apply(&chacon_base, &one, &cur.0, &cur.1).unwrap();
                assert_eq!(cur.1, Z2(s.0 ^ (k & 1)));
            }
            // Iterating composes the cocycle word.
            let (xn, gn) = skew_iterate(&chacon_base, &chacon_phi, &x, &s, 40).unwrap();
            let mut word = s;
            let mut z = x.clone();
            for _ in 0..40 {
                word = chacon_phi(&z).unwrap().op(&word);
                z = tower_apply(&z).unwrap();
            }
            assert_eq!((xn, gn), (z, word));
        }
    }

    #[test]
    fn double_extension_formula() {
        for (x, s) in points(200, 2) {
            let r = Z2((x.rung % 2 == 0) as u8);
            let (y, s1, r1) = double_ext_apply(&x, s, r).unwrap();
            assert_eq!(y, tower_apply(&x).unwrap());
            assert_eq!(s1, Z2(chacon_phi(&x).unwrap().0 ^ s.0));
            assert_eq!(r1, Z2(s.0 ^ r.0));
            // Two steps: r gains ψ + ψ ∘ T_φ.
            let (_, _, r2) = double_ext_apply(&y, s1, r1).unwrap();
            let p2 = psi2(&(x.clone(), s)).unwrap();
            assert_eq!(r2, Z2(r.0 ^ p2.0));
        }
    }

    #[test]
    fn lifting_equation_with_zero_transfer() {
        let pts = points(2000, 3);
        let zero = |_: &(TowerPoint, Z2)| Ok(Z2(0));
        let sq = |y: &(TowerPoint, Z2)| t_phi(&t_phi(y)?);
        let c = cocycle_eq_check(&lifting_lhs, &zero, &sq, &pts).unwrap();
        assert!(c.holds && c.checked == 2000);
        // A tautological coboundary.
        let f = |y: &(TowerPoint, Z2)| -> Result<Z2> { Ok(Z2(((y.0.rung_at(3)?.unwrap_or(0) % 3 == 1) as u8) ^ y.1 .0)) };
        let cob = |y: &(TowerPoint, Z2)| -> Result<Z2> { Ok(f(&t_phi(y)?)?.op(&f(y)?)) };
        assert!(cocycle_eq_check(&cob, &f, &t_phi, &pts).unwrap().holds);
        // The constant cocycle 1 is not F ∘ T_φ + F for F ≡ 0.
        let one = |_: &(TowerPoint, Z2)| Ok(Z2(1));
        let c = cocycle_eq_check(&one, &zero, &t_phi, &pts).unwrap();
        assert_eq!(c.first_failure, Some(0));
    }

    #[test]
    fn obstruction_separates_constant_from_coboundaries() {
        let one = |_: &(TowerPoint, Z2)| Ok(Z2(1));
        for m in 2..8 {
            for s in [Z2(0), Z2(1)] {
                let o = word_sum_obstruction(&one, m, s).unwrap();
                assert!(o.obstructed, "{o:?}");
            }
        }
        let f = |y: &(TowerPoint, Z2)| -> Result<Z2> { Ok(Z2((y.0.rung_at(3)?.is_some_and(|r| r % 5 == 2) as u8) ^ y.1 .0)) };
        let cob = |y: &(TowerPoint, Z2)| -> Result<Z2> { Ok(f(&t_phi(y)?)?.op(&f(y)?)) };
        for m in 3..8 {
            let o = word_sum_obstruction(&cob, m, Z2(0)).unwrap();
            assert!(o.returned && !o.obstructed, "{o:?}");
        }
    }

    #[test]
    fn d6_roots() {
        let mut rng = substream(4, "t", 0);
        let pts: Vec<(TowerPoint, D6)> =
            (0..2000).map(|_| (sample_tower_point(MAX_STAGE, &mut rng), D6::ALL[rng.random_range(0..6)])).collect();
        let rep = d6_root_check(&pts, D6::A, D6::B, &D6::ALL).unwrap();
        assert!(rep.root_identity && rep.sigma_commutes);
        let (h, l, r) = rep.witness.unwrap();
        assert_eq!(h, D6::E);
        assert_eq!((l, r), (d6_mul(D6::B, D6::A), d6_mul(D6::A, D6::B)));
        assert_eq!((l, r), (D6::F, D6::D));
        assert!(sigma_witness(D6::A, D6::A, &[D6::E, D6::A]).is_none());
        assert!(sigma_witness(D6::A, D6::E, &D6::ALL).is_none());
    }

    #[test]
    fn flow_commutation_grid() {
        assert!(su2_flow_commutation(0.0));
        assert!(su2_flow_commutation(0.5));
        assert!(!su2_flow_commutation(0.25));
        for k in -128..=128 {
            let t = k as f64 / 64.0;
            assert_eq!(su2_flow_commutation(t), k % 32 == 0, "t = {t}");
        }
    }

    #[test]
    fn probe_on_rotation_and_constant() {
        let alpha = (5f64.sqrt() - 1.0) / 2.0;
        let n = 10_000;
        let vals: Vec<Complex64> =
            (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (0.1 + k as f64 * alpha).fract())).collect();
        let rep = eigenvalue_probe(&vals, &[alpha, 0.3]);
        assert!((rep.rows[0].modulus - 1.0).abs() < 1e-9);
        assert!(rep.rows[1].modulus < rep.rows[1].threshold);
        let ones = vec![Complex64::new(1.0, 0.0); n];
        assert!((eigenvalue_probe(&ones, &[0.0]).rows[0].modulus - 1.0).abs() < 1e-12);
    }
}
