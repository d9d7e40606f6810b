use super::coeff::{self, C};
use super::monomial::{slot_weight, Monomial, MAX_DIM};
use crate::error::{Error, Result};
use rustc_hash::FxHashMap;
use std::fmt;

/// Largest supported truncation degree (exponents are packed in 7 bits).
pub const MAX_CAP: u32 = 120;

/// Weighted order of a series: the zero series has order `Infinite`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<u32> {
        match self {
            Order::Finite(k) => Some(k),
            Order::Infinite => None,
        }
    }

    pub fn at_least(self, k: u32) -> bool {
        match self {
            Order::Finite(d) => d >= k,
            Order::Infinite => true,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(k) => write!(f, "{k}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

/// A truncated power series in (z, z̄, w), weighted by z, z̄ ↦ 1 and w ↦ 2.
/// Terms are kept sorted by (weighted degree, exponents) with no zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FormalSeries {
    dim: usize,
    cap: u32,
    terms: Vec<(Monomial, C)>,
}

pub(crate) type Acc = FxHashMap<Monomial, C>;

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if (2..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::BadDimension(dim))
    }
}

pub(crate) fn check_cap(cap: u32) -> Result<()> {
    if cap <= MAX_CAP {
        Ok(())
    } else {
        Err(Error::BadCap(cap))
    }
}

impl FormalSeries {
    pub fn zero(dim: usize, cap: u32) -> FormalSeries {
        assert!(check_dim(dim).is_ok() && check_cap(cap).is_ok());
        FormalSeries {
            dim,
            cap,
            terms: Vec::new(),
        }
    }

    pub fn monomial(dim: usize, cap: u32, m: Monomial, a: C) -> FormalSeries {
        FormalSeries::from_terms(dim, cap, [(m, a)])
    }

    pub fn constant(dim: usize, cap: u32, a: C) -> FormalSeries {
        FormalSeries::monomial(dim, cap, Monomial::ONE, a)
    }

    pub fn one(dim: usize, cap: u32) -> FormalSeries {
        FormalSeries::constant(dim, cap, coeff::one())
    }

    pub fn z(dim: usize, cap: u32, i: usize) -> FormalSeries {
        assert!(i < dim);
        FormalSeries::monomial(dim, cap, Monomial::z(i), coeff::one())
    }

    pub fn zbar(dim: usize, cap: u32, i: usize) -> FormalSeries {
        assert!(i < dim);
        FormalSeries::monomial(dim, cap, Monomial::zbar(i), coeff::one())
    }

    pub fn w(dim: usize, cap: u32) -> FormalSeries {
        FormalSeries::monomial(dim, cap, Monomial::w(), coeff::one())
    }

    /// Σ |z_i|².
    pub fn norm_sq(dim: usize, cap: u32) -> FormalSeries {
        FormalSeries::from_terms(
            dim,
            cap,
            (0..dim).map(|i| (Monomial::z(i).mul(Monomial::zbar(i)), coeff::one())),
        )
    }

    /// Collects terms, summing repeats and dropping zeros and terms above cap.
    pub fn from_terms<T: IntoIterator<Item = (Monomial, C)>>(
        dim: usize,
        cap: u32,
        terms: T,
    ) -> FormalSeries {
        assert!(check_dim(dim).is_ok() && check_cap(cap).is_ok());
        let mut acc = Acc::default();
        for (m, a) in terms {
            if m.degree() > cap {
                continue;
            }
            debug_assert!((0..MAX_DIM).all(|k| k < dim || (m.z_exp(k) == 0 && m.zbar_exp(k) == 0)));
            match acc.get_mut(&m) {
                Some(e) => coeff::add_assign(e, &a),
                None => {
                    acc.insert(m, a);
                }
            }
        }
        FormalSeries::from_acc(dim, cap, acc)
    }

    pub(crate) fn from_acc(dim: usize, cap: u32, acc: Acc) -> FormalSeries {
        let mut terms: Vec<(Monomial, C)> =
            acc.into_iter().filter(|(_, a)| !coeff::is_zero(a)).collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        FormalSeries { dim, cap, terms }
    }

    /// Builds from terms already sorted, unique, nonzero and within cap.
    pub(crate) fn from_sorted(dim: usize, cap: u32, terms: Vec<(Monomial, C)>) -> FormalSeries {
        debug_assert!(terms.windows(2).all(|p| p[0].0 < p[1].0));
        debug_assert!(terms.iter().all(|(m, a)| m.degree() <= cap && !coeff::is_zero(a)));
        FormalSeries { dim, cap, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn terms(&self) -> &[(Monomial, C)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        match self.terms.binary_search_by(|t| t.0.cmp(m)) {
            Ok(k) => self.terms[k].1.clone(),
            Err(_) => coeff::zero(),
        }
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Monomial::ONE)
    }

    fn same_dim(&self, other: &FormalSeries) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(self.dim, other.dim))
        }
    }

    /// Lowers the cap, dropping terms above it.
    pub fn truncate(&self, cap: u32) -> FormalSeries {
        let cap = cap.min(self.cap);
        let end = self.terms.partition_point(|t| t.0.degree() <= cap);
        FormalSeries::from_sorted(self.dim, cap, self.terms[..end].to_vec())
    }

    /// Keeps the terms of weighted degree in `lo..=hi`; the cap is unchanged,
    /// so the dropped terms count as zero.
    pub fn degree_range(&self, lo: u32, hi: u32) -> FormalSeries {
        let a = self.terms.partition_point(|t| t.0.degree() < lo);
        let b = self.terms.partition_point(|t| t.0.degree() <= hi);
        let terms = if a < b { self.terms[a..b].to_vec() } else { Vec::new() };
        FormalSeries::from_sorted(self.dim, self.cap, terms)
    }

    /// Declares a higher cap, treating the missing terms as zero. Used by
    /// fixed-point loops that refine an approximation degree by degree.
    pub(crate) fn with_cap_unchecked(&self, cap: u32) -> FormalSeries {
        let end = self.terms.partition_point(|t| t.0.degree() <= cap);
        FormalSeries::from_sorted(self.dim, cap, self.terms[..end].to_vec())
    }

    /// Reinterprets the series in a different dimension.
    pub fn with_dim(&self, dim: usize) -> Result<FormalSeries> {
        check_dim(dim)?;
        for (m, _) in &self.terms {
            if (dim..MAX_DIM).any(|k| m.z_exp(k) > 0 || m.zbar_exp(k) > 0) {
                return Err(Error::DimensionMismatch(self.dim, dim));
            }
        }
        Ok(FormalSeries {
            dim,
            cap: self.cap,
            terms: self.terms.clone(),
        })
    }

    pub fn add(&self, other: &FormalSeries) -> Result<FormalSeries> {
        self.same_dim(other)?;
        let cap = self.cap.min(other.cap);
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        loop {
            let next = match (a.get(i), b.get(j)) {
                (None, None) => break,
                (Some(x), None) => {
                    i += 1;
                    x.clone()
                }
                (None, Some(y)) => {
                    j += 1;
                    y.clone()
                }
                (Some(x), Some(y)) => match x.0.cmp(&y.0) {
                    std::cmp::Ordering::Less => {
                        i += 1;
                        x.clone()
                    }
                    std::cmp::Ordering::Greater => {
                        j += 1;
                        y.clone()
                    }
                    std::cmp::Ordering::Equal => {
                        i += 1;
                        j += 1;
                        (x.0, &x.1 + &y.1)
                    }
                },
            };
            if next.0.degree() > cap {
                continue;
            }
            if !coeff::is_zero(&next.1) {
                out.push(next);
            }
        }
        Ok(FormalSeries::from_sorted(self.dim, cap, out))
    }

    pub fn neg(&self) -> FormalSeries {
        FormalSeries::from_sorted(
            self.dim,
            self.cap,
            self.terms.iter().map(|(m, a)| (*m, -a.clone())).collect(),
        )
    }

    pub fn sub(&self, other: &FormalSeries) -> Result<FormalSeries> {
        self.add(&other.neg())
    }

    pub fn scale(&self, a: &C) -> FormalSeries {
        if coeff::is_zero(a) {
            return FormalSeries::zero(self.dim, self.cap);
        }
        FormalSeries::from_sorted(
            self.dim,
            self.cap,
            self.terms.iter().map(|(m, b)| (*m, coeff::mul(a, b))).collect(),
        )
    }

    /// Multiplies by a monomial times a coefficient.
    pub fn mul_monomial(&self, m: Monomial, a: &C) -> FormalSeries {
        if coeff::is_zero(a) {
            return FormalSeries::zero(self.dim, self.cap);
        }
        let cap = self.cap;
        let terms = self
            .terms
            .iter()
            .take_while(|(t, _)| t.degree() + m.degree() <= cap)
            .map(|(t, b)| (t.mul(m), coeff::mul(a, b)))
            .collect();
        FormalSeries::from_acc_sorted_by_degree(self.dim, cap, terms)
    }

    fn from_acc_sorted_by_degree(dim: usize, cap: u32, mut terms: Vec<(Monomial, C)>) -> FormalSeries {
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        FormalSeries::from_sorted(dim, cap, terms)
    }

    pub fn mul(&self, other: &FormalSeries) -> Result<FormalSeries> {
        self.same_dim(other)?;
        let cap = self.cap.min(other.cap);
        Ok(self.mul_trunc(other, cap))
    }

    /// Product truncated at `cap` (which may be below both operand caps).
    pub(crate) fn mul_trunc(&self, other: &FormalSeries, cap: u32) -> FormalSeries {
        let cap = cap.min(self.cap).min(other.cap);
        let mut acc = Acc::default();
        mul_into(&mut acc, &self.terms, &other.terms, cap);
        FormalSeries::from_acc(self.dim, cap, acc)
    }

    pub fn pow(&self, k: u32) -> FormalSeries {
        let mut out = FormalSeries::one(self.dim, self.cap);
        for _ in 0..k {
            out = out.mul_trunc(self, self.cap);
        }
        out
    }

    /// Swaps z ↔ z̄ on every monomial and conjugates coefficients; w is
    /// left unchanged (treated as a formally real variable).
    pub fn conj(&self) -> FormalSeries {
        let mut terms: Vec<(Monomial, C)> = self
            .terms
            .iter()
            .map(|(m, a)| (m.conj(), coeff::conj(a)))
            .collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        FormalSeries::from_sorted(self.dim, self.cap, terms)
    }

    /// (a + conj a) / 2.
    pub fn re(&self) -> FormalSeries {
        self.add(&self.conj())
            .expect("same dim")
            .scale(&coeff::ratio(1, 2))
    }

    pub fn weighted_ord(&self) -> Order {
        match self.terms.first() {
            Some((m, _)) => Order::Finite(m.degree()),
            None => Order::Infinite,
        }
    }

    /// Highest weighted degree of a nonzero term.
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.last().map(|t| t.0.degree())
    }

    pub fn weighted_component(&self, t: u32) -> Result<FormalSeries> {
        if t > self.cap {
            return Err(Error::DegreeOutOfRange { t, cap: self.cap });
        }
        Ok(self.degree_range(t, t))
    }

    pub fn has_zbar(&self) -> bool {
        self.terms.iter().any(|(m, _)| m.has_zbar())
    }

    pub fn has_w(&self) -> bool {
        self.terms.iter().any(|(m, _)| m.has_w())
    }

    pub fn has_z(&self) -> bool {
        self.terms.iter().any(|(m, _)| m.has_z())
    }

    /// True when every coefficient is real.
    pub fn has_real_coefficients(&self) -> bool {
        self.terms.iter().all(|(_, a)| coeff::is_real(a))
    }

    /// Partial derivative in a slot. The cap drops by the slot's weight.
    pub fn derivative(&self, slot: usize) -> FormalSeries {
        let wt = slot_weight(slot);
        let cap = self.cap.saturating_sub(wt);
        let one = Monomial::slot_pow(slot, 1);
        let terms = self.terms.iter().filter_map(|(m, a)| {
            let e = m.exp(slot);
            (e > 0 && m.degree() - wt <= cap)
                .then(|| (one.div_into(*m), coeff::mul(a, &coeff::int(e as i64))))
        });
        FormalSeries::from_terms(self.dim, cap, terms)
    }

    pub fn map_coeffs<F: Fn(&Monomial, &C) -> C>(&self, f: F) -> FormalSeries {
        FormalSeries::from_terms(
            self.dim,
            self.cap,
            self.terms.iter().map(|(m, a)| (*m, f(m, a))),
        )
    }

    pub fn filter<F: Fn(&Monomial, &C) -> bool>(&self, f: F) -> FormalSeries {
        FormalSeries::from_sorted(
            self.dim,
            self.cap,
            self.terms.iter().filter(|(m, a)| f(m, a)).cloned().collect(),
        )
    }

    /// Homogeneous parts indexed by weighted degree `0..=cap`.
    pub(crate) fn graded(&self) -> Vec<&[(Monomial, C)]> {
        let mut out = Vec::with_capacity(self.cap as usize + 1);
        let mut start = 0;
        for t in 0..=self.cap {
            let end = start + self.terms[start..].partition_point(|x| x.0.degree() <= t);
            out.push(&self.terms[start..end]);
            start = end;
        }
        out
    }

    /// 1/a for a series with nonzero constant term.
    pub fn reciprocal(&self) -> Result<FormalSeries> {
        let c0 = self.constant_term();
        let inv0 = coeff::inv(&c0)
            .ok_or_else(|| Error::ConstantTerm("reciprocal of a series with zero constant term".into()))?;
        let a = self.graded();
        let mut parts: Vec<Vec<(Monomial, C)>> = vec![vec![(Monomial::ONE, inv0.clone())]];
        let minus_inv0 = -inv0;
        for k in 1..=self.cap as usize {
            let mut acc = Acc::default();
            for i in 1..=k {
                mul_into(&mut acc, a[i], &parts[k - i], self.cap);
            }
            let mut part: Vec<(Monomial, C)> = acc
                .into_iter()
                .filter(|(_, x)| !coeff::is_zero(x))
                .map(|(m, x)| (m, coeff::mul(&x, &minus_inv0)))
                .collect();
            part.sort_unstable_by(|x, y| x.0.cmp(&y.0));
            parts.push(part);
        }
        Ok(FormalSeries::from_sorted(self.dim, self.cap, parts.concat()))
    }

    /// The square root with constant term 1 of a series with constant term 1.
    pub fn formal_sqrt(&self) -> Result<FormalSeries> {
        if self.constant_term() != coeff::one() {
            return Err(Error::ConstantTerm("formal_sqrt needs constant term 1".into()));
        }
        let a = self.graded();
        let half = coeff::ratio(1, 2);
        let mut parts: Vec<Vec<(Monomial, C)>> = vec![vec![(Monomial::ONE, coeff::one())]];
        for k in 1..=self.cap as usize {
            let mut acc = Acc::default();
            for (m, x) in a[k] {
                acc.insert(*m, x.clone());
            }
            let mut cross = Acc::default();
            for i in 1..k {
                mul_into(&mut cross, &parts[i], &parts[k - i], self.cap);
            }
            for (m, x) in cross {
                let e = acc.entry(m).or_insert_with(coeff::zero);
                *e -= x;
            }
            let mut part: Vec<(Monomial, C)> = acc
                .into_iter()
                .filter(|(_, x)| !coeff::is_zero(x))
                .map(|(m, x)| (m, coeff::mul(&x, &half)))
                .collect();
            part.sort_unstable_by(|x, y| x.0.cmp(&y.0));
            parts.push(part);
        }
        Ok(FormalSeries::from_sorted(self.dim, self.cap, parts.concat()))
    }

    /// a / b for b with nonzero constant term.
    pub fn div(&self, b: &FormalSeries) -> Result<FormalSeries> {
        self.mul(&b.reciprocal()?)
    }

    /// Evaluates at a floating point (z, z̄, w) point.
    pub fn eval_f64(&self, z: &[(f64, f64)], zbar: &[(f64, f64)], w: (f64, f64)) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        let mut powers: Vec<Vec<(f64, f64)>> = Vec::new();
        let maxe = self.cap as usize + 1;
        let cmul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
        let mut push = |base: (f64, f64)| {
            let mut v = vec![(1.0, 0.0)];
            for k in 1..maxe {
                let p = cmul(v[k - 1], base);
                v.push(p);
            }
            powers.push(v);
        };
        for k in 0..MAX_DIM {
            push(z.get(k).copied().unwrap_or((0.0, 0.0)));
        }
        for k in 0..MAX_DIM {
            push(zbar.get(k).copied().unwrap_or((0.0, 0.0)));
        }
        push(w);
        for (m, a) in &self.terms {
            let mut v = (coeff::to_f64(&a.real), coeff::to_f64(&a.imaginary));
            for (s, e) in m.support() {
                v = cmul(v, powers[s][e as usize]);
            }
            re += v.0;
            im += v.1;
        }
        (re, im)
    }
}

/// acc += a·b restricted to weighted degree ≤ cap. Both inputs sorted by degree.
pub(crate) fn mul_into(acc: &mut Acc, a: &[(Monomial, C)], b: &[(Monomial, C)], cap: u32) {
    let Some(b0) = b.first() else { return };
    let ord_b = b0.0.degree();
    for (ma, ca) in a {
        let da = ma.degree();
        if da + ord_b > cap {
            break;
        }
        let budget = cap - da;
        for (mb, cb) in b {
            if mb.degree() > budget {
                break;
            }
            let p = coeff::mul(ca, cb);
            match acc.get_mut(&ma.mul(*mb)) {
                Some(e) => coeff::add_assign(e, &p),
                None => {
                    acc.insert(ma.mul(*mb), p);
                }
            }
        }
    }
}

impl fmt::Debug for FormalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[n={} cap={}] ", self.dim, self.cap)?;
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, a)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}) {:?}", a, m)?;
        }
        Ok(())
    }
}
