//! Automorphisms of the quadric w = |z|² as truncated series, and the
//! normalization of maps by composing with them on the left.

use crate::error::{Error, Result};
use crate::linalg;
use crate::pseudo_normal::check_map_normalization;
use crate::series::coeff::{self, Rational, C};
use crate::series::{
    invert_slot_map, substitute, FormalSeries, HoloMap, Monomial, Substitution, W_SLOT,
};
use malachite_base::num::basic::traits::Zero;

pub use crate::pseudo_normal::{lowest_vanishing_order, Vanishing};

/// Data of the families: z' = b(w)·(Möbius part in a)·U(w), w' = b b̄ w.
/// All entries are series in w alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutoParams {
    pub a: Vec<FormalSeries>,
    pub b: FormalSeries,
    pub u: Vec<Vec<FormalSeries>>,
}

impl AutoParams {
    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    pub fn cap(&self) -> u32 {
        self.b.cap()
    }

    /// a = 0, U = I.
    pub fn scalar(b: FormalSeries) -> AutoParams {
        let dim = b.dim();
        let cap = b.cap();
        AutoParams {
            a: vec![FormalSeries::zero(dim, cap); dim],
            u: identity_matrix(dim, cap),
            b,
        }
    }

    fn validate(&self) -> Result<()> {
        let dim = self.dim();
        let all = self.a.iter().chain(std::iter::once(&self.b)).chain(self.u.iter().flatten());
        for s in all {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch(dim, s.dim()));
            }
            if s.has_z() || s.has_zbar() {
                return Err(Error::UnexpectedVariable("automorphism data must be series in w".into()));
            }
        }
        if self.a.len() != dim || self.u.len() != dim || self.u.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("a must have n entries and U must be n×n".into()));
        }
        if coeff::is_zero(&self.b.constant_term()) {
            return Err(Error::InvalidParameter("b(0) = 0".into()));
        }
        if !is_unitary(&self.u) {
            return Err(Error::InvalidParameter("U(x) is not unitary for real x".into()));
        }
        Ok(())
    }
}

pub fn identity_matrix(dim: usize, cap: u32) -> Vec<Vec<FormalSeries>> {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { FormalSeries::one(dim, cap) } else { FormalSeries::zero(dim, cap) })
                .collect()
        })
        .collect()
}

/// U(w)·Ū(w)ᵗ = I through the cap.
pub fn is_unitary(u: &[Vec<FormalSeries>]) -> bool {
    let n = u.len();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let mut s = u[i][0].mul(&u[j][0].conj()).unwrap();
            for k in 1..n {
                s = s.add(&u[i][k].mul(&u[j][k].conj()).unwrap()).unwrap();
            }
            let target = if i == j { FormalSeries::one(s.dim(), s.cap()) } else { FormalSeries::zero(s.dim(), s.cap()) };
            s == target
        })
    })
}

/// Σ_k zs_k U_kj for every column j.
fn times_matrix(zs: &[FormalSeries], u: &[Vec<FormalSeries>]) -> Result<Vec<FormalSeries>> {
    let n = zs.len();
    (0..n)
        .map(|j| {
            let mut s = FormalSeries::zero(zs[0].dim(), zs[0].cap());
            for k in 0..n {
                s = s.add(&zs[k].mul(&u[k][j])?)?;
            }
            Ok(s)
        })
        .collect()
}

fn g_of(b: &FormalSeries) -> Result<FormalSeries> {
    b.mul(&b.conj())?.mul(&FormalSeries::w(b.dim(), b.cap()))
}

/// (b(w) z U(w), b b̄ w).
pub fn make_linear_auto(p: &AutoParams) -> Result<HoloMap> {
    p.validate()?;
    if p.a.iter().any(|s| !s.is_zero()) {
        return Err(Error::InvalidParameter("the linear family needs a = 0".into()));
    }
    let (dim, cap) = (p.dim(), p.cap());
    let zs: Vec<FormalSeries> = (0..dim).map(|i| FormalSeries::z(dim, cap, i).mul(&p.b).unwrap()).collect();
    HoloMap::new(times_matrix(&zs, &p.u)?, g_of(&p.b)?)
}

/// The Möbius family with a(0) ≠ 0 and ⟨a(0), ā(0)⟩ < 1.
pub fn make_full_auto(p: &AutoParams) -> Result<HoloMap> {
    p.validate()?;
    let (dim, cap) = (p.dim(), p.cap());
    let a0: Vec<C> = p.a.iter().map(|s| s.constant_term()).collect();
    let q0: Rational = a0.iter().map(coeff::norm_sqr).sum();
    if q0 == Rational::ZERO {
        return Err(Error::InvalidParameter("a(0) = 0; use the linear family".into()));
    }
    if q0 >= Rational::from(1) {
        return Err(Error::InvalidParameter("<a(0), ā(0)> >= 1".into()));
    }
    let w = FormalSeries::w(dim, cap);
    let abar: Vec<FormalSeries> = p.a.iter().map(|s| s.conj()).collect();
    let mut s = FormalSeries::zero(dim, cap);
    let mut q = FormalSeries::zero(dim, cap);
    for i in 0..dim {
        s = s.add(&abar[i].mul(&FormalSeries::z(dim, cap, i))?)?;
        q = q.add(&p.a[i].mul(&abar[i])?)?;
    }
    let v = FormalSeries::one(dim, cap).sub(&w.mul(&q)?)?.formal_sqrt()?;
    let ratio = s.div(&q)?;
    let denom = FormalSeries::one(dim, cap).sub(&s)?.reciprocal()?.mul(&p.b)?;
    let zs: Vec<FormalSeries> = (0..dim)
        .map(|k| {
            let proj = ratio.mul(&p.a[k])?;
            let own = FormalSeries::z(dim, cap, k).sub(&proj)?;
            w.mul(&p.a[k])?.sub(&proj)?.add(&v.mul(&own)?)?.mul(&denom)
        })
        .collect::<Result<_>>()?;
    HoloMap::new(times_matrix(&zs, &p.u)?, g_of(&p.b)?)
}

/// G(z, |z|²) − Σ|F_i(z, |z|²)|²; zero iff H preserves the quadric through the cap.
pub fn quadric_residual(h: &HoloMap) -> Result<FormalSeries> {
    let (dim, cap) = (h.dim(), h.cap());
    let sub = Substitution::new(dim).with(W_SLOT, FormalSeries::norm_sq(dim, cap));
    let mut r = substitute(h.g(), &sub)?;
    for f in h.fs() {
        let fi = substitute(f, &sub)?;
        r = r.sub(&fi.mul(&fi.conj())?)?;
    }
    Ok(r)
}

/// One factor of a normalizing automorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AutoFactor {
    /// (z M, κ w) with M M* = κ I.
    Linear { m: Vec<Vec<C>>, kappa: Rational },
    /// T_j: z_j ↦ (z_j − wα)/(1 − ᾱ z_j), z_i ↦ v z_i/(1 − ᾱ z_j), v = √(1 − w α ᾱ).
    Moebius { j: usize, alpha: FormalSeries },
    /// Unitary rotation in the (i, j) plane: U_ii = U_jj = c, U_ij = −σc,
    /// U_ji = σ̄c, c = (1 + σσ̄)^{-1/2}.
    Rotation { i: usize, j: usize, sigma: FormalSeries },
    /// (d z, d d̄ w).
    Dilation { d: FormalSeries },
    /// (β_0 z_0, …, β_{n−1} z_{n−1}, w) with β_i β̄_i = 1.
    Phase { beta: Vec<FormalSeries> },
}

impl AutoFactor {
    pub fn to_map(&self, dim: usize, cap: u32) -> Result<HoloMap> {
        match self {
            AutoFactor::Linear { m, kappa } => {
                let f = (0..dim)
                    .map(|j| {
                        FormalSeries::from_terms(dim, cap, (0..dim).map(|i| (Monomial::z(i), m[i][j].clone())))
                    })
                    .collect();
                HoloMap::new(f, FormalSeries::monomial(dim, cap, Monomial::w(), coeff::real(kappa.clone())))
            }
            AutoFactor::Moebius { j, alpha } => moebius(dim, cap, *j, alpha),
            AutoFactor::Rotation { i, j, sigma } => {
                let u = givens(dim, cap, *i, *j, sigma)?;
                let zs: Vec<FormalSeries> = (0..dim).map(|k| FormalSeries::z(dim, cap, k)).collect();
                HoloMap::new(times_matrix(&zs, &u)?, FormalSeries::w(dim, cap))
            }
            AutoFactor::Dilation { d } => make_linear_auto(&AutoParams::scalar(d.truncate(cap))),
            AutoFactor::Phase { beta } => {
                let f = (0..dim).map(|i| FormalSeries::z(dim, cap, i).mul(&beta[i].truncate(cap))).collect::<Result<_>>()?;
                HoloMap::new(f, FormalSeries::w(dim, cap))
            }
        }
    }
}

/// The Möbius factor of the normalization, directly from its display; it
/// is the full family with a = α e_j, b = 1 and U = I except U_jj = −1.
pub fn moebius(dim: usize, cap: u32, j: usize, alpha: &FormalSeries) -> Result<HoloMap> {
    let alpha = alpha.truncate(cap);
    let w = FormalSeries::w(dim, cap);
    let zj = FormalSeries::z(dim, cap, j);
    let abar = alpha.conj();
    let v = FormalSeries::one(dim, cap).sub(&w.mul(&alpha)?.mul(&abar)?)?.formal_sqrt()?;
    let denom = FormalSeries::one(dim, cap).sub(&abar.mul(&zj)?)?.reciprocal()?;
    let f = (0..dim)
        .map(|i| {
            if i == j {
                zj.sub(&w.mul(&alpha)?)?.mul(&denom)
            } else {
                v.mul(&FormalSeries::z(dim, cap, i))?.mul(&denom)
            }
        })
        .collect::<Result<_>>()?;
    HoloMap::new(f, w)
}

/// (1 + σσ̄)^{-1/2} needs 1 + |σ(0)|² to be a rational square.
fn inv_sqrt_norm(sigma: &FormalSeries) -> Result<FormalSeries> {
    let (dim, cap) = (sigma.dim(), sigma.cap());
    let s = FormalSeries::one(dim, cap).add(&sigma.mul(&sigma.conj())?)?;
    let s0 = s.constant_term().real;
    let r0 = coeff::exact_sqrt(&s0)
        .ok_or_else(|| Error::InvalidParameter("1 + |σ(0)|² is not a rational square".into()))?;
    let unit = s.scale(&coeff::real(Rational::from(1) / &s0));
    unit.formal_sqrt()?.reciprocal().map(|x| x.scale(&coeff::real(Rational::from(1) / r0)))
}

pub fn givens(dim: usize, cap: u32, i: usize, j: usize, sigma: &FormalSeries) -> Result<Vec<Vec<FormalSeries>>> {
    if i >= dim || j >= dim || i == j {
        return Err(Error::IndexOutOfRange(i.max(j)));
    }
    let sigma = sigma.truncate(cap);
    let c = inv_sqrt_norm(&sigma)?;
    let mut u = identity_matrix(dim, cap);
    u[i][i] = c.clone();
    u[j][j] = c.clone();
    u[i][j] = sigma.mul(&c)?.neg();
    u[j][i] = sigma.conj().mul(&c)?;
    Ok(u)
}

/// z-free part F_(0)(w).
fn z_free(s: &FormalSeries) -> FormalSeries {
    s.filter(|m, _| !m.has_z())
}

/// Coefficient series F_(e_l)(w), kept at the cap of s.
fn z_linear(s: &FormalSeries, l: usize) -> FormalSeries {
    let zl = Monomial::z(l);
    FormalSeries::from_terms(
        s.dim(),
        s.cap(),
        s.terms().iter().filter(|(m, _)| m.z_part() == zl).map(|(m, a)| (m.without(crate::series::z_slot(l)), a.clone())),
    )
}

/// s / w for a series divisible by w.
fn div_w(s: &FormalSeries) -> FormalSeries {
    FormalSeries::from_terms(
        s.dim(),
        s.cap(),
        s.terms().iter().map(|(m, a)| (m.without(W_SLOT).mul(Monomial::slot_pow(W_SLOT, m.w_exp() - 1)), a.clone())),
    )
}

fn compose_w(s: &FormalSeries, inner: &FormalSeries) -> Result<FormalSeries> {
    substitute(s, &Substitution::new(s.dim()).with(W_SLOT, inner.clone()))
}

fn invert_w(g0: &FormalSeries) -> Result<FormalSeries> {
    Ok(invert_slot_map(g0.dim(), &[W_SLOT], &[g0.clone()])?.remove(0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized {
    /// Factors in order of application: the first acts on H directly.
    pub factors: Vec<AutoFactor>,
    pub t: HoloMap,
    pub h: HoloMap,
}

/// Finds the automorphism T with T∘H satisfying the map normalization.
pub fn normalize_map(h: &HoloMap) -> Result<Normalized> {
    let (dim, cap) = (h.dim(), h.cap());
    let mut cur = h.clone();
    let mut factors = Vec::new();
    let mut apply = |f: AutoFactor, cur: &mut HoloMap| -> Result<()> {
        *cur = f.to_map(dim, cap)?.compose(cur)?;
        factors.push(f);
        Ok(())
    };

    // linear part: F = zA + O(2), G = κ w + O(3) with A A* = κ I
    let mut a = vec![vec![coeff::zero(); dim]; dim];
    for j in 0..dim {
        let fj = h.f(j);
        if !coeff::is_zero(&fj.constant_term()) {
            return Err(Error::NotInvertible("H(0) ≠ 0".into()));
        }
        for i in 0..dim {
            a[i][j] = fj.coeff(&Monomial::z(i));
        }
    }
    let g = h.g();
    let kappa = g.coeff(&Monomial::w());
    let g_low_ok = g.terms().iter().all(|(m, _)| m.degree() > 2 || *m == Monomial::w());
    if !coeff::is_real(&kappa) || kappa.real <= Rational::ZERO || !g_low_ok {
        return Err(Error::NotInvertible("G is not κw + O(3) with κ > 0".into()));
    }
    let kappa = kappa.real;
    for i in 0..dim {
        for k in 0..dim {
            let mut s = coeff::zero();
            for j in 0..dim {
                coeff::add_assign(&mut s, &coeff::mul(&a[i][j], &coeff::conj(&a[k][j])));
            }
            let want = if i == k { coeff::real(kappa.clone()) } else { coeff::zero() };
            if s != want {
                return Err(Error::NotInvertible("the linear part of F is not a multiple of a unitary matrix".into()));
            }
        }
    }
    let identity_linear = kappa == Rational::from(1)
        && (0..dim).all(|i| (0..dim).all(|j| a[i][j] == if i == j { coeff::one() } else { coeff::zero() }));
    if !identity_linear {
        let m = linalg::invert(&a).ok_or_else(|| Error::NotInvertible("singular linear part".into()))?;
        apply(AutoFactor::Linear { m, kappa: Rational::from(1) / kappa }, &mut cur)?;
    }

    // F_(0) = 0
    for j in 0..dim {
        let fj0 = z_free(cur.f(j));
        if fj0.is_zero() {
            continue;
        }
        let g0 = z_free(cur.g());
        let ratio = div_w(&fj0).div(&div_w(&g0))?;
        let alpha = compose_w(&ratio, &invert_w(&g0)?)?;
        apply(AutoFactor::Moebius { j, alpha }, &mut cur)?;
    }

    // F_{j,(e_i)} = 0 for i < j
    for i in 0..dim {
        for j in (i + 1)..dim {
            let fji = z_linear(cur.f(j), i);
            if fji.is_zero() {
                continue;
            }
            let ratio = fji.div(&z_linear(cur.f(i), i))?;
            let sigma = compose_w(&ratio, &invert_w(&z_free(cur.g()))?)?;
            apply(AutoFactor::Rotation { i, j, sigma }, &mut cur)?;
        }
    }

    // F_{0,(e_0)} = 1
    let f00 = z_linear(cur.f(0), 0);
    if f00 != FormalSeries::one(dim, cap) {
        let d = compose_w(&f00.reciprocal()?, &invert_w(&z_free(cur.g()))?)?;
        apply(AutoFactor::Dilation { d }, &mut cur)?;
    }

    // Im F_{i,(e_i)} = 0
    let g0 = z_free(cur.g());
    let mut beta = vec![FormalSeries::one(dim, cap); dim];
    let mut any = false;
    for i in 1..dim {
        let fii = z_linear(cur.f(i), i);
        if fii.has_real_coefficients() {
            continue;
        }
        any = true;
        beta[i] = unimodular_real_factor(&fii, &g0)?;
    }
    if any {
        apply(AutoFactor::Phase { beta }, &mut cur)?;
    }

    let mut t = HoloMap::identity(dim, cap);
    for f in &factors {
        t = f.to_map(dim, cap)?.compose(&t)?;
    }
    debug_assert!(check_map_normalization(&cur).is_empty());
    Ok(Normalized { factors, t, h: cur })
}

/// β with β β̄ = 1, β(0) = 1 and β(G₀(w))·p(w) real, solved one w-power at a time.
fn unimodular_real_factor(p: &FormalSeries, g0: &FormalSeries) -> Result<FormalSeries> {
    let (dim, cap) = (p.dim(), p.cap());
    let mut b: Vec<C> = vec![coeff::one()];
    let build = |b: &[C]| {
        FormalSeries::from_terms(dim, cap, b.iter().enumerate().map(|(k, x)| (Monomial::slot_pow(W_SLOT, k as u32), x.clone())))
    };
    for k in 1..=(cap / 2) as usize {
        let mut re = Rational::ZERO;
        for a in 1..k {
            re -= coeff::mul(&b[a], &coeff::conj(&b[k - a])).real;
        }
        re /= Rational::from(2);
        b.push(coeff::real(re.clone()));
        let prod = compose_w(&build(&b), g0)?.mul(p)?;
        let im = prod.coeff(&Monomial::slot_pow(W_SLOT, k as u32)).imaginary;
        b[k] = coeff::c(re, -im);
    }
    Ok(build(&b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Linear,
    Full,
}

fn small<R: rand::Rng>(rng: &mut R) -> Rational {
    Rational::from_signeds(rng.gen_range(-3i64..=3), rng.gen_range(1i64..=4))
}

fn random_w_series<R: rand::Rng>(rng: &mut R, dim: usize, cap: u32, c0: C, complex: bool) -> FormalSeries {
    let mut terms = vec![(Monomial::ONE, c0)];
    for k in 1..=cap / 2 {
        if rng.gen_bool(0.6) {
            let im = if complex { small(rng) } else { Rational::ZERO };
            terms.push((Monomial::slot_pow(W_SLOT, k), coeff::c(small(rng), im)));
        }
    }
    FormalSeries::from_terms(dim, cap, terms)
}

/// (1 + i t)/(1 − i t) for a real series t: unimodular for real w.
fn random_phase<R: rand::Rng>(rng: &mut R, dim: usize, cap: u32) -> FormalSeries {
    let t0 = coeff::real(small(rng));
    let it = random_w_series(rng, dim, cap, t0, false).scale(&coeff::i_unit());
    let one = FormalSeries::one(dim, cap);
    one.add(&it).unwrap().div(&one.sub(&it).unwrap()).unwrap()
}

fn mat_mul(x: &[Vec<FormalSeries>], y: &[Vec<FormalSeries>]) -> Vec<Vec<FormalSeries>> {
    let n = x.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n).fold(FormalSeries::zero(x[0][0].dim(), x[0][0].cap()), |s, k| {
                        s.add(&x[i][k].mul(&y[k][j]).unwrap()).unwrap()
                    })
                })
                .collect()
        })
        .collect()
}

/// Seeded parameters for either family, with exactly unitary U(w).
pub fn random_params<R: rand::Rng>(rng: &mut R, dim: usize, cap: u32, family: Family) -> AutoParams {
    let b0 = loop {
        let c = coeff::c(small(rng), small(rng));
        if !coeff::is_zero(&c) {
            break c;
        }
    };
    let b = random_w_series(rng, dim, cap, b0, true);
    let a = (0..dim)
        .map(|i| match family {
            Family::Linear => FormalSeries::zero(dim, cap),
            Family::Full => {
                let q = |r: &mut R| Rational::from_signeds(r.gen_range(-1i64..=1), 4);
                let re = if i == 0 { Rational::from_signeds(1, 4) } else { q(rng) };
                let im = q(rng);
                random_w_series(rng, dim, cap, coeff::c(re, im), true)
            }
        })
        .collect();
    let mut u = identity_matrix(dim, cap);
    for (i, row) in u.iter_mut().enumerate() {
        row[i] = random_phase(rng, dim, cap);
    }
    for _ in 0..dim {
        let i = rng.gen_range(0..dim);
        let j = (i + rng.gen_range(1..dim)) % dim;
        let s0 = match rng.gen_range(0..3) {
            0 => coeff::zero(),
            1 => coeff::ratio(3, 4),
            _ => coeff::complex_ratio((0, 1), (-4, 3)),
        };
        let sigma = random_w_series(rng, dim, cap, s0, true);
        u = mat_mul(&u, &givens(dim, cap, i, j, &sigma).unwrap());
    }
    AutoParams { a, b, u }
}

/// Builds the member of the chosen family.
pub fn make_auto(p: &AutoParams, family: Family) -> Result<HoloMap> {
    match family {
        Family::Linear => make_linear_auto(p),
        Family::Full => make_full_auto(p),
    }
}

#[cfg(test)]
mod tests;
