//! The basis u = Σ|z_i|², v_k = Σ_{i<k}|z_i|² − |z_k|² and the unique mixed
//! expansion E = Σ E^{(K)}_{(I,J)} z^I z̄^J u^{k₁} v₂^{k₂}⋯vₙ^{kₙ} with
//! i_l·j_l = 0.
//!
//! Polynomials in (u, v₂, …, vₙ) reuse [`FormalSeries`] with u in the z₁
//! slot and v_h in the z_h slot. Indices are 0-based: `v(h)` with h ≥ 1 is
//! the paper's v_{h+1}.

use crate::error::{Error, Result};
use crate::series::coeff::{self, Rational, C};
use crate::series::{FormalSeries, Monomial};
use std::collections::BTreeMap;

/// (u, v) polynomial cap for a z-degree cap.
fn uv_cap(cap: u32) -> u32 {
    cap / 2
}

fn pow2(e: i64) -> C {
    if e >= 0 {
        coeff::real(Rational::from(1i64 << e))
    } else {
        coeff::real(Rational::from_signeds(1, 1i64 << (-e)))
    }
}

/// |z_i|² as a linear form in (u, v₂, …, vₙ); `i` is 0-based.
pub fn modulus_to_uv(dim: usize, i: usize, cap: u32) -> Result<FormalSeries> {
    if i >= dim {
        return Err(Error::IndexOutOfRange(i));
    }
    let n = dim as i64;
    let p = i as i64 + 1;
    let mut terms = Vec::new();
    if p == 1 {
        terms.push((Monomial::z(0), pow2(1 - n)));
        for h in 2..=n {
            terms.push((Monomial::z(h as usize - 1), pow2(1 - h)));
        }
    } else {
        terms.push((Monomial::z(0), pow2(p - 1 - n)));
        for h in (p + 1)..=n {
            terms.push((Monomial::z(h as usize - 1), pow2(p - 1 - h)));
        }
        terms.push((Monomial::z(p as usize - 1), coeff::ratio(-1, 2)));
    }
    Ok(FormalSeries::from_terms(dim, uv_cap(cap).max(1), terms))
}

/// u = Σ|z_i|² as a series in (z, z̄).
pub fn u_series(dim: usize, cap: u32) -> FormalSeries {
    FormalSeries::norm_sq(dim, cap)
}

/// v_{h+1} = Σ_{i<h}|z_i|² − |z_h|² (0-based h ≥ 1) as a series in (z, z̄).
pub fn v_series(dim: usize, cap: u32, h: usize) -> FormalSeries {
    assert!(h >= 1 && h < dim);
    let modsq = |i: usize| Monomial::z(i).mul(Monomial::zbar(i));
    let mut terms: Vec<(Monomial, C)> = (0..h).map(|i| (modsq(i), coeff::one())).collect();
    terms.push((modsq(h), coeff::int(-1)));
    FormalSeries::from_terms(dim, cap, terms)
}

/// Key (I, J, K): `ij` carries I in z slots and J in z̄ slots, `k` carries
/// K in z slots (u at slot 0).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct UvKey {
    pub ij: Monomial,
    pub k: Monomial,
}

impl UvKey {
    pub fn new(i: &[u32], j: &[u32], k: &[u32]) -> UvKey {
        UvKey {
            ij: Monomial::new(i, j, 0),
            k: Monomial::new(k, &[], 0),
        }
    }

    pub fn degree(&self) -> u32 {
        self.ij.degree() + 2 * self.k.degree()
    }

    pub fn i_deg(&self) -> u32 {
        self.ij.z_degree()
    }

    pub fn j_deg(&self) -> u32 {
        self.ij.zbar_degree()
    }
}

/// Coefficient table E^{(K)}_{(I,J)}.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UvExpansion {
    dim: usize,
    cap: u32,
    table: BTreeMap<(Monomial, Monomial), C>,
}

impl UvExpansion {
    pub fn empty(dim: usize, cap: u32) -> UvExpansion {
        UvExpansion {
            dim,
            cap,
            table: BTreeMap::new(),
        }
    }

    /// Builds from raw entries; rejects keys that violate i_l·j_l = 0 or
    /// exceed the cap.
    pub fn from_entries<T: IntoIterator<Item = (UvKey, C)>>(dim: usize, cap: u32, entries: T) -> Result<UvExpansion> {
        let mut out = UvExpansion::empty(dim, cap);
        for (key, a) in entries {
            if (0..dim).any(|l| key.ij.z_exp(l) > 0 && key.ij.zbar_exp(l) > 0) {
                return Err(Error::InvalidParameter(format!("key {key:?} violates i_l·j_l = 0")));
            }
            if key.degree() > cap || key.ij.has_w() || key.k.has_zbar() || key.k.has_w() {
                return Err(Error::InvalidParameter(format!("key {key:?} out of range")));
            }
            out.add_entry(key, &a);
        }
        Ok(out)
    }

    fn add_entry(&mut self, key: UvKey, a: &C) {
        let e = self.table.entry((key.ij, key.k)).or_insert_with(coeff::zero);
        coeff::add_assign(e, a);
        if coeff::is_zero(e) {
            self.table.remove(&(key.ij, key.k));
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, key: &UvKey) -> C {
        self.table.get(&(key.ij, key.k)).cloned().unwrap_or_else(coeff::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (UvKey, &C)> {
        self.table.iter().map(|((ij, k), a)| (UvKey { ij: *ij, k: *k }, a))
    }

    /// The (u, v) polynomial multiplying z^I z̄^J.
    pub fn poly(&self, ij: Monomial) -> FormalSeries {
        let lo = (ij, Monomial::ONE);
        FormalSeries::from_terms(
            self.dim,
            uv_cap(self.cap),
            self.table
                .range(lo..)
                .take_while(|((m, _), _)| *m == ij)
                .map(|((_, k), a)| (*k, a.clone())),
        )
    }

    /// Distinct (I, J) pairs present.
    pub fn ij_keys(&self) -> Vec<Monomial> {
        let mut out: Vec<Monomial> = self.table.keys().map(|(ij, _)| *ij).collect();
        out.dedup();
        out
    }
}

/// The unique expansion of a w-free series.
pub fn expand(e: &FormalSeries) -> Result<UvExpansion> {
    if e.has_w() {
        return Err(Error::UnexpectedVariable("w in a series passed to expand".into()));
    }
    let dim = e.dim();
    let cap = e.cap();
    let ucap = uv_cap(cap);
    let moduli: Vec<FormalSeries> = (0..dim)
        .map(|i| modulus_to_uv(dim, i, cap).map(|s| s.with_cap_unchecked(ucap)))
        .collect::<Result<_>>()?;
    let mut powers: Vec<Vec<FormalSeries>> = moduli
        .iter()
        .map(|_| vec![FormalSeries::one(dim, ucap)])
        .collect();
    let mut out = UvExpansion::empty(dim, cap);
    for (m, a) in e.terms() {
        let mut prod = FormalSeries::constant(dim, ucap, a.clone());
        let mut i = [0u32; crate::series::MAX_DIM];
        let mut j = [0u32; crate::series::MAX_DIM];
        for l in 0..dim {
            let (p, q) = (m.z_exp(l), m.zbar_exp(l));
            let k = p.min(q);
            i[l] = p - k;
            j[l] = q - k;
            if k > 0 {
                while powers[l].len() <= k as usize {
                    let next = powers[l].last().unwrap().mul(&moduli[l])?;
                    powers[l].push(next);
                }
                prod = prod.mul(&powers[l][k as usize])?;
            }
        }
        let ij = Monomial::new(&i[..dim], &j[..dim], 0);
        for (k, b) in prod.terms() {
            out.add_entry(UvKey { ij, k: *k }, b);
        }
    }
    Ok(out)
}

/// Substitutes u, v_k back and expands.
pub fn contract(t: &UvExpansion) -> FormalSeries {
    let dim = t.dim;
    let cap = t.cap;
    let mut bases: Vec<FormalSeries> = vec![u_series(dim, cap)];
    for h in 1..dim {
        bases.push(v_series(dim, cap, h));
    }
    let mut powers: Vec<Vec<FormalSeries>> = bases.iter().map(|_| vec![FormalSeries::one(dim, cap)]).collect();
    let mut acc = crate::series::Acc::default();
    for (key, a) in t.entries() {
        let mut prod = FormalSeries::monomial(dim, cap, key.ij, a.clone());
        for (l, base) in bases.iter().enumerate() {
            let e = key.k.z_exp(l) as usize;
            if e == 0 {
                continue;
            }
            while powers[l].len() <= e {
                let next = powers[l].last().unwrap().mul(base).unwrap();
                powers[l].push(next);
            }
            prod = prod.mul(&powers[l][e]).unwrap();
        }
        for (m, b) in prod.terms() {
            let x = acc.entry(*m).or_insert_with(coeff::zero);
            coeff::add_assign(x, b);
        }
    }
    FormalSeries::from_acc(dim, cap, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uv(dim: usize, terms: &[(&[u32], (i64, i64))]) -> FormalSeries {
        FormalSeries::from_terms(
            dim,
            4,
            terms.iter().map(|(k, (p, q))| (Monomial::new(k, &[], 0), coeff::ratio(*p, *q))),
        )
    }

    #[test]
    fn modulus_formulas() {
        assert_eq!(modulus_to_uv(2, 0, 8).unwrap(), uv(2, &[(&[1, 0], (1, 2)), (&[0, 1], (1, 2))]));
        assert_eq!(modulus_to_uv(2, 1, 8).unwrap(), uv(2, &[(&[1, 0], (1, 2)), (&[0, 1], (-1, 2))]));
        assert_eq!(
            modulus_to_uv(3, 0, 8).unwrap(),
            uv(3, &[(&[1, 0, 0], (1, 4)), (&[0, 1, 0], (1, 2)), (&[0, 0, 1], (1, 4))])
        );
        assert!(modulus_to_uv(2, 2, 8).is_err());
    }

    #[test]
    fn modulus_inverts_definition() {
        // u and v_k built from the linear forms recover Σ|z|² and the v's
        for n in 2..=5 {
            let cap = 4;
            let forms: Vec<FormalSeries> = (0..n).map(|i| modulus_to_uv(n, i, cap).unwrap()).collect();
            let mut u = FormalSeries::zero(n, 2);
            for f in &forms {
                u = u.add(f).unwrap();
            }
            assert_eq!(u, FormalSeries::z(n, 2, 0));
            for h in 1..n {
                let mut v = forms[h].neg();
                for f in &forms[..h] {
                    v = v.add(f).unwrap();
                }
                assert_eq!(v, FormalSeries::z(n, 2, h));
            }
        }
    }

    #[test]
    fn expand_examples() {
        let m11 = Monomial::new(&[1, 0], &[1, 0], 0);
        let e = FormalSeries::monomial(2, 6, m11, coeff::one());
        let t = expand(&e).unwrap();
        let want = UvExpansion::from_entries(
            2,
            6,
            [
                (UvKey::new(&[0, 0], &[0, 0], &[1, 0]), coeff::ratio(1, 2)),
                (UvKey::new(&[0, 0], &[0, 0], &[0, 1]), coeff::ratio(1, 2)),
            ],
        )
        .unwrap();
        assert_eq!(t, want);

        let e = FormalSeries::monomial(2, 6, Monomial::new(&[2, 0], &[0, 2], 0), coeff::one());
        let t = expand(&e).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.get(&UvKey::new(&[2, 0], &[0, 2], &[0, 0])), coeff::one());

        // oracle: ((u+v)/2)((u−v)/2) = u²/4 − v²/4
        let e = FormalSeries::monomial(2, 6, Monomial::new(&[1, 1], &[1, 1], 0), coeff::one());
        let t = expand(&e).unwrap();
        let want = UvExpansion::from_entries(
            2,
            6,
            [
                (UvKey::new(&[0, 0], &[0, 0], &[2, 0]), coeff::ratio(1, 4)),
                (UvKey::new(&[0, 0], &[0, 0], &[0, 2]), coeff::ratio(-1, 4)),
            ],
        )
        .unwrap();
        assert_eq!(t, want);
    }

    #[test]
    fn expand_rejects_w() {
        assert!(expand(&FormalSeries::w(2, 4)).is_err());
    }

    #[test]
    fn contract_examples() {
        assert!(contract(&UvExpansion::empty(3, 5)).is_zero());
        let t = UvExpansion::from_entries(3, 5, [(UvKey::new(&[0; 3], &[0; 3], &[1, 0, 0]), coeff::one())]).unwrap();
        assert_eq!(contract(&t), FormalSeries::norm_sq(3, 5));
    }

    #[test]
    fn rejects_invalid_support() {
        let bad = UvKey::new(&[1, 0], &[1, 0], &[0, 0]);
        assert!(UvExpansion::from_entries(2, 5, [(bad, coeff::one())]).is_err());
    }

    fn w_free(dim: usize, cap: u32) -> impl Strategy<Value = FormalSeries> {
        prop::collection::vec(
            (prop::collection::vec(0u32..4, dim), prop::collection::vec(0u32..4, dim), -5i64..6, -5i64..6),
            0..8,
        )
        .prop_map(move |ts| {
            FormalSeries::from_terms(
                dim,
                cap,
                ts.into_iter()
                    .map(|(i, j, a, b)| (Monomial::new(&i, &j, 0), coeff::complex_ratio((a, 1), (b, 3)))),
            )
        })
    }

    fn table(dim: usize, cap: u32) -> impl Strategy<Value = UvExpansion> {
        prop::collection::vec(
            (
                prop::collection::vec(0u32..3, dim),
                prop::collection::vec(0u32..3, dim),
                prop::collection::vec(0u32..2, dim),
                -5i64..6,
            ),
            0..8,
        )
        .prop_map(move |ts| {
            let entries = ts.into_iter().filter_map(|(i, j, k, a)| {
                let j: Vec<u32> = j.iter().zip(&i).map(|(&y, &x)| if x > 0 { 0 } else { y }).collect();
                let key = UvKey::new(&i, &j, &k);
                (key.degree() <= cap).then(|| (key, coeff::int(a)))
            });
            UvExpansion::from_entries(dim, cap, entries).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn round_trip(e in w_free(3, 8)) {
            prop_assert_eq!(contract(&expand(&e).unwrap()), e);
        }

        #[test]
        fn round_trip_n2(e in w_free(2, 10)) {
            prop_assert_eq!(contract(&expand(&e).unwrap()), e);
        }

        #[test]
        fn uniqueness(t in table(3, 8)) {
            prop_assert_eq!(expand(&contract(&t)).unwrap(), t);
        }

        #[test]
        fn support_condition(e in w_free(3, 8)) {
            for (key, _) in expand(&e).unwrap().entries() {
                for l in 0..3 {
                    prop_assert!(key.ij.z_exp(l) == 0 || key.ij.zbar_exp(l) == 0);
                }
            }
        }

        #[test]
        fn linearity(a in w_free(2, 8), b in w_free(2, 8)) {
            let two = coeff::int(2);
            let lhs = expand(&a.scale(&two).add(&b).unwrap()).unwrap();
            let ea = expand(&a).unwrap();
            let eb = expand(&b).unwrap();
            let mut rhs = UvExpansion::empty(2, 8);
            for (k, x) in ea.entries() {
                rhs.add_entry(k, &coeff::mul(x, &two));
            }
            for (k, x) in eb.entries() {
                rhs.add_entry(k, x);
            }
            prop_assert_eq!(lhs, rhs);
        }
    }
}
