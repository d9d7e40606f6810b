use super::coeff::{self};
use super::monomial::{z_slot, zbar_slot, Monomial, W_SLOT};
use super::series::FormalSeries;
use super::subst::{invert_slot_map, substitute, Substitution};
use crate::error::{Error, Result};

/// A formal holomorphic map (z, w) ↦ (F(z, w), G(z, w)).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HoloMap {
    dim: usize,
    f: Vec<FormalSeries>,
    g: FormalSeries,
}

/// How z̄ slots are treated when a map is substituted into a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConjRule {
    /// z̄ slots are left untouched.
    Keep,
    /// z̄_i ↦ conj(F_i), where conj keeps w (w is a formally real slot).
    RealW,
}

impl HoloMap {
    pub fn new(f: Vec<FormalSeries>, g: FormalSeries) -> Result<HoloMap> {
        let dim = g.dim();
        if f.len() != dim {
            return Err(Error::DimensionMismatch(dim, f.len()));
        }
        for c in f.iter().chain(std::iter::once(&g)) {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch(dim, c.dim()));
            }
            if c.has_zbar() {
                return Err(Error::UnexpectedVariable("z̄ in a holomorphic map".into()));
            }
        }
        Ok(HoloMap { dim, f, g })
    }

    pub fn identity(dim: usize, cap: u32) -> HoloMap {
        HoloMap {
            dim,
            f: (0..dim).map(|i| FormalSeries::z(dim, cap, i)).collect(),
            g: FormalSeries::w(dim, cap),
        }
    }

    /// (z + f, w + g).
    pub fn from_increments(f: Vec<FormalSeries>, g: FormalSeries) -> Result<HoloMap> {
        let dim = g.dim();
        let cap = f.iter().map(|s| s.cap()).chain(std::iter::once(g.cap())).min().unwrap();
        let id = HoloMap::identity(dim, cap);
        if f.len() != dim {
            return Err(Error::DimensionMismatch(dim, f.len()));
        }
        let f = f
            .iter()
            .zip(&id.f)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        HoloMap::new(f, g.add(&id.g)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> u32 {
        self.f.iter().map(|s| s.cap()).fold(self.g.cap(), u32::min)
    }

    pub fn f(&self, i: usize) -> &FormalSeries {
        &self.f[i]
    }

    pub fn fs(&self) -> &[FormalSeries] {
        &self.f
    }

    pub fn g(&self) -> &FormalSeries {
        &self.g
    }

    pub fn f_increment(&self, i: usize) -> FormalSeries {
        self.f[i].sub(&FormalSeries::z(self.dim, self.f[i].cap(), i)).unwrap()
    }

    pub fn g_increment(&self) -> FormalSeries {
        self.g.sub(&FormalSeries::w(self.dim, self.g.cap())).unwrap()
    }

    pub fn truncate(&self, cap: u32) -> HoloMap {
        HoloMap {
            dim: self.dim,
            f: self.f.iter().map(|s| s.truncate(cap)).collect(),
            g: self.g.truncate(cap),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == HoloMap::identity(self.dim, self.cap()).truncate(self.cap()) && self.f.iter().all(|s| s.cap() == self.g.cap())
    }

    pub fn substitution(&self, rule: ConjRule) -> Substitution {
        let mut sub = Substitution::new(self.dim);
        for i in 0..self.dim {
            sub.set(z_slot(i), self.f[i].clone());
            if rule == ConjRule::RealW {
                sub.set(zbar_slot(i), self.f[i].conj());
            }
        }
        sub.set(W_SLOT, self.g.clone());
        sub
    }

    /// self ∘ inner.
    pub fn compose(&self, inner: &HoloMap) -> Result<HoloMap> {
        if self.dim != inner.dim {
            return Err(Error::DimensionMismatch(self.dim, inner.dim));
        }
        let sub = inner.substitution(ConjRule::Keep);
        let f = self
            .f
            .iter()
            .map(|c| substitute(c, &sub))
            .collect::<Result<Vec<_>>>()?;
        let g = substitute(&self.g, &sub)?;
        HoloMap::new(f, g)
    }

    /// Formal inverse. Requires an invertible weighted-linear part
    /// (z ↦ Az, w ↦ c·w + q(z)).
    pub fn inverse(&self) -> Result<HoloMap> {
        let mut slots: Vec<usize> = (0..self.dim).map(z_slot).collect();
        slots.push(W_SLOT);
        let mut comps = self.f.clone();
        comps.push(self.g.clone());
        let mut inv = invert_slot_map(self.dim, &slots, &comps)?;
        let g = inv.pop().unwrap();
        HoloMap::new(inv, g)
    }

    /// Inverse of a map tangent to the identity: f of order ≥ 2, g of order ≥ 3.
    pub fn invert_map(&self) -> Result<HoloMap> {
        for i in 0..self.dim {
            if !self.f_increment(i).weighted_ord().at_least(2) {
                return Err(Error::Order(format!("F_{} is not z_{} + O(2)", i + 1, i + 1)));
            }
        }
        if !self.g_increment().weighted_ord().at_least(3) {
            return Err(Error::Order("G is not w + O(3)".into()));
        }
        self.inverse()
    }

    /// Maps in z alone, scaled: (c z, |c|² w).
    pub fn scaling(dim: usize, cap: u32, c: &coeff::C) -> HoloMap {
        HoloMap {
            dim,
            f: (0..dim)
                .map(|i| FormalSeries::monomial(dim, cap, Monomial::z(i), c.clone()))
                .collect(),
            g: FormalSeries::monomial(dim, cap, Monomial::w(), coeff::real(coeff::norm_sqr(c))),
        }
    }
}

/// h with z ↦ F, w ↦ G and z̄ handled by `rule`.
pub fn substitute_map(h: &FormalSeries, map: &HoloMap, rule: ConjRule) -> Result<FormalSeries> {
    substitute(h, &map.substitution(rule))
}
