//! The pseudo-normal form: closed-form solution of the linearized equation
//! Γ + g(z,u) = 2Re Σ z̄_i f_i(z,u) + φ, the degree-by-degree normal form,
//! and the normalization checks on maps and remainders.
//!
//! Indices are 0-based throughout: z_0 is the first coordinate, and in a
//! (u, v) key the slot 0 exponent is the power of u while slot h ≥ 1 is the
//! power of v_h (the second coordinate's v is slot 1).

use crate::error::{Error, Result};
use crate::series::coeff::{self, C};
use crate::series::{
    check_cap, check_dim, invert_slot_map, substitute, zbar_slot, z_slot, Acc, FormalSeries, HoloMap, Monomial,
    Substitution, W_SLOT,
};
use crate::uv::{self, UvExpansion, UvKey};
use std::fmt;

/// M: w = |z|² + E(z, z̄) with Ord(E) ≥ 3.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Manifold {
    dim: usize,
    cap: u32,
    e: FormalSeries,
}

impl Manifold {
    pub fn new(e: FormalSeries) -> Result<Manifold> {
        check_dim(e.dim())?;
        check_cap(e.cap())?;
        if e.has_w() {
            return Err(Error::UnexpectedVariable("w in E".into()));
        }
        if !e.weighted_ord().at_least(3) {
            return Err(Error::Order(format!("Ord(E) = {} < 3", e.weighted_ord())));
        }
        Ok(Manifold {
            dim: e.dim(),
            cap: e.cap(),
            e,
        })
    }

    pub fn quadric(dim: usize, cap: u32) -> Manifold {
        Manifold::new(FormalSeries::zero(dim, cap)).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn e(&self) -> &FormalSeries {
        &self.e
    }

    /// Φ = |z|² + E.
    pub fn phi(&self) -> FormalSeries {
        FormalSeries::norm_sq(self.dim, self.cap).add(&self.e).unwrap()
    }

    pub fn truncate(&self, cap: u32) -> Manifold {
        Manifold::new(self.e.truncate(cap)).unwrap()
    }
}

/// Solution (f, g, φ) of the linearized equation. f_i and g are series in
/// (z, w); φ is given both in (z, z̄) and as its (I, J, K) table.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearSolution {
    pub f: Vec<FormalSeries>,
    pub g: FormalSeries,
    pub phi: FormalSeries,
    pub phi_uv: UvExpansion,
}

impl LinearSolution {
    pub fn map(&self) -> HoloMap {
        HoloMap::from_increments(self.f.clone(), self.g.clone()).unwrap()
    }
}

struct Builder {
    dim: usize,
    cap: u32,
    f: Vec<Acc>,
    g: Acc,
    phi: Vec<(UvKey, C)>,
}

impl Builder {
    fn push(acc: &mut Acc, m: Monomial, a: C) {
        let e = acc.entry(m).or_insert_with(coeff::zero);
        coeff::add_assign(e, &a);
    }

    fn f(&mut self, i: usize, zpart: Monomial, wpow: u32, a: C) {
        Builder::push(&mut self.f[i], zpart.mul(Monomial::slot_pow(W_SLOT, wpow)), a);
    }

    fn g(&mut self, zpart: Monomial, wpow: u32, a: C) {
        Builder::push(&mut self.g, zpart.mul(Monomial::slot_pow(W_SLOT, wpow)), a);
    }

    fn phi(&mut self, ij: Monomial, k: Monomial, a: C) {
        self.phi.push((UvKey { ij, k }, a));
    }
}

/// Solves Γ + g(z,u) = 2Re Σ z̄_i f_i(z,u) + φ under the map and remainder
/// normalizations, by the explicit coefficient formulas.
pub fn solve_linearized(gamma: &FormalSeries) -> Result<LinearSolution> {
    if gamma.has_w() {
        return Err(Error::UnexpectedVariable("w in Γ".into()));
    }
    if !gamma.weighted_ord().at_least(3) {
        return Err(Error::Order(format!("Ord(Γ) = {} < 3", gamma.weighted_ord())));
    }
    let dim = gamma.dim();
    let cap = gamma.cap();
    let table = uv::expand(gamma)?;
    let mut b = Builder {
        dim,
        cap,
        f: vec![Acc::default(); dim],
        g: Acc::default(),
        phi: Vec::new(),
    };
    let half = coeff::ratio(1, 2);
    for (key, gam) in table.entries() {
        let gam = gam.clone();
        let gbar = coeff::conj(&gam);
        let ij = key.ij;
        let zpart = ij.z_part();
        let zbpart = ij.zbar_part();
        let (ni, nj) = (key.i_deg(), key.j_deg());
        let k = key.k.z_exp(0);
        let vslots: Vec<(usize, u32)> = (1..dim).filter_map(|h| {
            let e = key.k.z_exp(h);
            (e > 0).then_some((h, e))
        }).collect();
        let vdeg: u32 = vslots.iter().map(|x| x.1).sum();
        match (ni, nj) {
            (0, 0) => match vdeg {
                0 => b.g(Monomial::ONE, k, -gam),
                1 => {
                    let h = vslots[0].0;
                    let x = coeff::real(gam.real.clone());
                    b.g(Monomial::ONE, k + 1, -x.clone());
                    b.f(h, Monomial::z(h), k, -x.clone());
                    for i in (h + 1)..dim {
                        b.f(i, Monomial::z(i), k, -coeff::mul(&x, &half));
                    }
                    let im = coeff::c(coeff::Rational::from(0), gam.imaginary.clone());
                    b.phi(ij, key.k, im);
                }
                _ => b.phi(ij, key.k, gam),
            },
            (_, 0) => match vdeg {
                0 => b.g(zpart, k, -gam),
                _ => b.phi(ij, key.k, gam),
            },
            (0, _) => {
                // z̄^J with J playing the role of I in the formulas
                let jz = zbpart.conj();
                match vdeg {
                    0 if k >= 1 => {
                        for j in 0..dim {
                            b.f(j, jz.mul(Monomial::z(j)), k - 1, gbar.clone());
                        }
                        b.g(jz, k, gbar);
                    }
                    0 => {
                        b.g(jz, 0, gbar.clone());
                        b.phi(jz, key.k, gbar);
                        b.phi(ij, key.k, gam);
                    }
                    1 => {
                        let h = vslots[0].0;
                        b.f(0, jz.mul(Monomial::z(0)), k, gbar.clone());
                        for j in 1..h {
                            b.f(j, jz.mul(Monomial::z(j)), k, gbar.clone());
                        }
                        b.f(h, jz.mul(Monomial::z(h)), k, -gbar.clone());
                        b.phi(jz, key.k, -gbar);
                    }
                    _ => b.phi(ij, key.k, gam),
                }
            }
            (1, 1) => {
                let a = (0..dim).find(|&l| ij.z_exp(l) > 0).unwrap();
                let c = (0..dim).find(|&l| ij.zbar_exp(l) > 0).unwrap();
                if vdeg == 0 && a > c {
                    b.f(c, Monomial::z(a), k, gam);
                    let swapped = Monomial::z(c).mul(Monomial::zbar(a));
                    b.phi(swapped, key.k, -gbar);
                } else {
                    b.phi(ij, key.k, gam);
                }
            }
            (_, 1) => {
                let i = (0..dim).find(|&l| ij.zbar_exp(l) > 0).unwrap();
                if vdeg == 0 {
                    b.f(i, zpart, k, gam);
                    b.phi(ij.conj(), key.k, -gbar);
                } else {
                    b.phi(ij, key.k, gam);
                }
            }
            _ => b.phi(ij, key.k, gam),
        }
    }
    let f = b
        .f
        .into_iter()
        .map(|acc| FormalSeries::from_terms(b.dim, b.cap, acc))
        .collect();
    let g = FormalSeries::from_terms(b.dim, b.cap, b.g);
    let phi_uv = UvExpansion::from_entries(dim, cap, b.phi)?;
    let phi = uv::contract(&phi_uv);
    Ok(LinearSolution { f, g, phi, phi_uv })
}

/// Γ + g(z,u) − 2Re Σ z̄_i f_i(z,u) − φ with u = |z|².
pub fn linearized_residual(gamma: &FormalSeries, f: &[FormalSeries], g: &FormalSeries, phi: &FormalSeries) -> Result<FormalSeries> {
    let dim = gamma.dim();
    let cap = gamma.cap();
    let u = FormalSeries::norm_sq(dim, cap);
    let sub = Substitution::new(dim).with(W_SLOT, u);
    let mut r = gamma.add(&substitute(g, &sub)?)?.sub(phi)?;
    for (i, fi) in f.iter().enumerate() {
        let s = FormalSeries::zbar(dim, cap, i).mul(&substitute(fi, &sub)?)?;
        r = r.sub(&s.add(&s.conj())?)?;
    }
    Ok(r)
}

/// The restriction of H to M in source coordinates: z' = F(z, Φ), w' = G(z, Φ).
fn restrict(m: &Manifold, h: &HoloMap) -> Result<(Vec<FormalSeries>, FormalSeries, u32)> {
    if m.dim() != h.dim() {
        return Err(Error::DimensionMismatch(m.dim(), h.dim()));
    }
    let cap = m.cap().min(h.cap());
    let sub = Substitution::new(m.dim()).with(W_SLOT, m.phi().truncate(cap));
    let zp = h
        .fs()
        .iter()
        .map(|fi| substitute(&fi.truncate(cap), &sub))
        .collect::<Result<_>>()?;
    let wp = substitute(&h.g().truncate(cap), &sub)?;
    Ok((zp, wp, cap))
}

/// Inverse of (z, z̄) ↦ (z', z̄') on the complexification, as a substitution
/// taking source-coordinate series to target coordinates.
fn target_chart(dim: usize, zp: &[FormalSeries]) -> Result<Substitution> {
    let mut slots: Vec<usize> = (0..dim).map(z_slot).collect();
    slots.extend((0..dim).map(zbar_slot));
    let mut comps = zp.to_vec();
    comps.extend(zp.iter().map(|s| s.conj()));
    let inv = invert_slot_map(dim, &slots, &comps)?;
    let mut back = Substitution::new(dim);
    for (k, &s) in slots.iter().enumerate() {
        back.set(s, inv[k].clone());
    }
    Ok(back)
}

fn image_from_e(e: FormalSeries) -> Result<Manifold> {
    if !e.weighted_ord().at_least(3) {
        return Err(Error::NotInvertible(
            "image is not of the form w = |z|² + O(3); the linear part is not admissible".into(),
        ));
    }
    Manifold::new(e)
}

/// The image of M under H, as a manifold in the target coordinates.
pub fn transform_manifold(m: &Manifold, h: &HoloMap) -> Result<Manifold> {
    let (zp, wp, cap) = restrict(m, h)?;
    let back = target_chart(m.dim(), &zp)?;
    image_from_e(substitute(&wp, &back)?.sub(&FormalSeries::norm_sq(m.dim(), cap))?)
}

/// The image of M under H given its defect q = G(z,Φ) − |F(z,Φ)|² in source
/// coordinates.
pub fn image_from_source_defect(m: &Manifold, h: &HoloMap, q: &FormalSeries) -> Result<Manifold> {
    let (zp, _, cap) = restrict(m, h)?;
    let back = target_chart(m.dim(), &zp)?;
    image_from_e(substitute(&q.truncate(cap), &back)?)
}

/// Lowest vanishing order of a remainder, honest about truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vanishing {
    Order(u32),
    /// The series is exactly zero.
    Infinite,
    /// No nonzero term through the cap: the order is at least the payload.
    BeyondCap(u32),
}

impl fmt::Display for Vanishing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vanishing::Order(k) => write!(f, "{k}"),
            Vanishing::Infinite => write!(f, "inf"),
            Vanishing::BeyondCap(k) => write!(f, ">={k}"),
        }
    }
}

impl serde::Serialize for Vanishing {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Vanishing::Order(k) => s.serialize_u32(*k),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

pub fn lowest_vanishing_order(phi: &FormalSeries) -> Vanishing {
    match phi.weighted_ord().finite() {
        Some(k) => Vanishing::Order(k),
        None => Vanishing::BeyondCap(phi.cap() + 1),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalFormResult {
    pub map: HoloMap,
    pub phi: FormalSeries,
    pub s: Vanishing,
}

/// The pseudo-normal form through the cap.
///
/// Stage t adds the solution of the linearized equation for the current
/// degree-t defect to the accumulated map, then re-derives the image of
/// the original manifold under the whole map.
pub fn normal_form(m: &Manifold) -> Result<NormalFormResult> {
    let dim = m.dim();
    let cap = m.cap();
    let mut h = HoloMap::identity(dim, cap);
    let mut phi = FormalSeries::zero(dim, cap);
    for t in 3..=cap {
        let image = transform_manifold(&m.truncate(t), &h.truncate(t))?;
        let gamma = image.e().weighted_component(t)?;
        if gamma.is_zero() {
            continue;
        }
        let sol = solve_linearized(&gamma.with_cap_unchecked(cap))?;
        let f: Vec<FormalSeries> = (0..dim)
            .map(|i| h.f_increment(i).add(&sol.f[i]))
            .collect::<Result<_>>()?;
        h = HoloMap::from_increments(f, h.g_increment().add(&sol.g)?)?;
        phi = phi.add(&sol.phi)?;
    }
    // only the quadric itself is known to vanish identically
    let s = if m.e().is_zero() { Vanishing::Infinite } else { lowest_vanishing_order(&phi) };
    Ok(NormalFormResult { map: h, phi, s })
}

/// A failed normalization condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub family: String,
    pub detail: String,
    pub degree: u32,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at degree {}: {}", self.family, self.degree, self.detail)
    }
}

/// Conditions on f = F − z: f_{i,(0)} = 0, f_{i,(e_j)} = 0 for j < i,
/// f_{0,(e_0)} = 0 and Im f_{i,(e_i)} = 0.
pub fn check_map_normalization(h: &HoloMap) -> Vec<Violation> {
    let mut out = Vec::new();
    for i in 0..h.dim() {
        for (m, a) in h.f_increment(i).terms() {
            let zp = m.z_part();
            let deg = m.degree();
            let name = |s: &str| format!("f_{{{},{}}}", i + 1, s);
            if zp == Monomial::ONE {
                out.push(Violation {
                    family: format!("{} != 0", name("(0)")),
                    detail: format!("{m:?} coefficient {a}"),
                    degree: deg,
                });
            } else if zp.degree() == 1 {
                let j = (0..h.dim()).find(|&l| zp.z_exp(l) == 1).unwrap();
                if j < i || (i == 0 && j == 0) {
                    out.push(Violation {
                        family: format!("{} != 0", name(&format!("(e{})", j + 1))),
                        detail: format!("{m:?} coefficient {a}"),
                        degree: deg,
                    });
                } else if j == i && !coeff::is_real(a) {
                    out.push(Violation {
                        family: format!("Im {} != 0", name(&format!("(e{})", j + 1))),
                        detail: format!("{m:?} coefficient {a}"),
                        degree: deg,
                    });
                }
            }
        }
    }
    out
}

/// The clauses of the remainder normalization that apply to a key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhiClause {
    /// φ^{(τe₁)}_{(0,0)} = 0, τ ≥ 2.
    PureU,
    /// Re φ^{(le₁+e_i)}_{(0,0)} = 0, l ≥ 1.
    RealUV,
    /// φ^{(le₁)}_{(e_i,e_j)} = 0, i > j, l ≥ 1.
    MixedLinear,
    /// φ^{(le₁)}_{(I,0)} = 0, l ≥ 1.
    HolomorphicU,
    /// φ^{(le₁)}_{(0,I)} = 0, l ≥ 1.
    AntiU,
    /// φ^{(ke₁+e_j)}_{(0,I)} = 0, k ≥ 0.
    AntiUV,
    /// φ^{(ke₁)}_{(I,e_h)} = 0, |I| ≥ 2, i_h = 0.
    OneBar,
    /// φ^{(0)}_{(0,I)} = conj φ^{(0)}_{(I,0)}, |I| > 2.
    Harmonic,
}

pub fn phi_clauses(dim: usize, key: &UvKey) -> Vec<PhiClause> {
    let ni = key.i_deg();
    let nj = key.j_deg();
    let k = key.k.z_exp(0);
    let vdeg: u32 = (1..dim).map(|h| key.k.z_exp(h)).sum();
    let mut out = Vec::new();
    if ni == 0 && nj == 0 {
        if vdeg == 0 && k >= 2 {
            out.push(PhiClause::PureU);
        }
        if vdeg == 1 && k >= 1 {
            out.push(PhiClause::RealUV);
        }
    }
    if ni == 1 && nj == 1 && vdeg == 0 && k >= 1 {
        let i = (0..dim).find(|&l| key.ij.z_exp(l) > 0).unwrap();
        let j = (0..dim).find(|&l| key.ij.zbar_exp(l) > 0).unwrap();
        if i > j {
            out.push(PhiClause::MixedLinear);
        }
    }
    if ni >= 1 && nj == 0 && vdeg == 0 && k >= 1 {
        out.push(PhiClause::HolomorphicU);
    }
    if ni == 0 && nj >= 1 {
        if vdeg == 0 && k >= 1 {
            out.push(PhiClause::AntiU);
        }
        if vdeg == 1 {
            out.push(PhiClause::AntiUV);
        }
    }
    if ni >= 2 && nj == 1 && vdeg == 0 {
        out.push(PhiClause::OneBar);
    }
    if (ni == 0 || nj == 0) && ni + nj > 2 && vdeg == 0 && k == 0 {
        out.push(PhiClause::Harmonic);
    }
    out
}

/// Checks the remainder normalization on expand(φ).
pub fn check_phi_normalization(phi: &FormalSeries) -> Result<Vec<Violation>> {
    let dim = phi.dim();
    let table = uv::expand(phi)?;
    let mut out = Vec::new();
    let describe = |key: &UvKey| {
        format!(
            "(I={:?}, J={:?}, K={:?})",
            key.ij.i_vec(dim),
            key.ij.j_vec(dim),
            key.k.i_vec(dim)
        )
    };
    for (key, a) in table.entries() {
        let clauses = phi_clauses(dim, &key);
        if clauses.len() > 1 {
            out.push(Violation {
                family: "key constrained by several clauses".into(),
                detail: format!("{} {:?}", describe(&key), clauses),
                degree: key.degree(),
            });
        }
        for c in clauses {
            let bad = match c {
                PhiClause::RealUV => !a.real.eq(&coeff::Rational::from(0)),
                PhiClause::Harmonic => {
                    if key.i_deg() == 0 {
                        let partner = UvKey { ij: key.ij.conj(), k: key.k };
                        table.get(&partner) != coeff::conj(a)
                    } else {
                        false
                    }
                }
                _ => true,
            };
            if bad {
                out.push(Violation {
                    family: format!("{c:?}"),
                    detail: format!("{} coefficient {a}", describe(&key)),
                    degree: key.degree(),
                });
            }
        }
    }
    // a harmonic holomorphic term without its antiholomorphic partner
    for (key, a) in table.entries() {
        if key.j_deg() == 0 && phi_clauses(dim, &key).contains(&PhiClause::Harmonic) {
            let partner = UvKey { ij: key.ij.conj(), k: key.k };
            if coeff::is_zero(&table.get(&partner)) {
                out.push(Violation {
                    family: format!("{:?}", PhiClause::Harmonic),
                    detail: format!("{} coefficient {a} has no conjugate partner", describe(&key)),
                    degree: key.degree(),
                });
            }
        }
    }
    Ok(out)
}
