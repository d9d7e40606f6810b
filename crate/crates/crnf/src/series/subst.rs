//! Simultaneous substitution of series into the variable slots of a series,
//! and formal inversion of maps given slot by slot.

use super::coeff::{self, C};
use super::monomial::{slot_weight, Monomial, SLOTS};
use super::series::{mul_into, Acc, FormalSeries, Order};
use crate::error::{Error, Result};
use crate::linalg;
use std::cell::RefCell;
use std::collections::BTreeMap;

/// Replacement series per slot; `None` keeps the variable.
#[derive(Clone, Debug)]
pub struct Substitution {
    dim: usize,
    slots: Vec<Option<FormalSeries>>,
}

impl Substitution {
    pub fn new(dim: usize) -> Substitution {
        Substitution {
            dim,
            slots: vec![None; SLOTS],
        }
    }

    pub fn set(&mut self, slot: usize, s: FormalSeries) -> &mut Self {
        self.slots[slot] = Some(s);
        self
    }

    pub fn with(mut self, slot: usize, s: FormalSeries) -> Self {
        self.slots[slot] = Some(s);
        self
    }

    pub fn get(&self, slot: usize) -> Option<&FormalSeries> {
        self.slots[slot].as_ref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

struct Evaluator<'a> {
    dim: usize,
    cap: u32,
    slots: Vec<usize>,
    repl: Vec<&'a FormalSeries>,
    ords: Vec<u32>,
    powers: RefCell<Vec<Vec<FormalSeries>>>,
}

impl<'a> Evaluator<'a> {
    fn power(&self, level: usize, e: u32) -> FormalSeries {
        let mut powers = self.powers.borrow_mut();
        let list = &mut powers[level];
        while list.len() <= e as usize {
            let next = list.last().unwrap().mul_trunc(self.repl[level], self.cap);
            list.push(next);
        }
        list[e as usize].clone()
    }

    fn eval(&self, terms: &[(Monomial, C)], level: usize, budget: u32) -> FormalSeries {
        if level == self.slots.len() {
            return FormalSeries::from_terms(self.dim, budget, terms.iter().cloned());
        }
        let slot = self.slots[level];
        let mut groups: BTreeMap<u32, Vec<(Monomial, C)>> = BTreeMap::new();
        for (m, a) in terms {
            groups
                .entry(m.exp(slot))
                .or_default()
                .push((m.without(slot), a.clone()));
        }
        let mut acc = Acc::default();
        for (e, group) in groups {
            if e > 0 && self.repl[level].is_zero() {
                continue;
            }
            let need = e * self.ords[level];
            if need > budget {
                break;
            }
            let sub = self.eval(&group, level + 1, budget - need);
            if sub.is_zero() {
                continue;
            }
            if e == 0 {
                for (m, a) in sub.terms() {
                    match acc.get_mut(m) {
                        Some(x) => coeff::add_assign(x, a),
                        None => {
                            acc.insert(*m, a.clone());
                        }
                    }
                }
            } else {
                let p = self.power(level, e);
                mul_into(&mut acc, sub.terms(), p.terms(), budget);
            }
        }
        FormalSeries::from_acc(self.dim, budget, acc)
    }
}

/// Replaces every slot that has a replacement, simultaneously.
///
/// Each replacement must have weighted order at least the weight of its
/// slot, so that the composition is well defined degree by degree.
pub fn substitute(h: &FormalSeries, sub: &Substitution) -> Result<FormalSeries> {
    substitute_trunc(h, sub, h.cap())
}

pub(crate) fn substitute_trunc(h: &FormalSeries, sub: &Substitution, cap: u32) -> Result<FormalSeries> {
    if h.dim() != sub.dim {
        return Err(Error::DimensionMismatch(h.dim(), sub.dim));
    }
    let mut cap = cap.min(h.cap());
    let mut slots = Vec::new();
    let mut repl = Vec::new();
    let mut ords = Vec::new();
    for (slot, r) in sub.slots.iter().enumerate() {
        let Some(r) = r else { continue };
        if r.dim() != h.dim() {
            return Err(Error::DimensionMismatch(h.dim(), r.dim()));
        }
        let ord = match r.weighted_ord() {
            Order::Finite(k) => k,
            Order::Infinite => u32::MAX / 4,
        };
        if ord < slot_weight(slot) {
            return Err(Error::Order(format!(
                "replacement for slot {slot} has order {ord} below the slot weight {}",
                slot_weight(slot)
            )));
        }
        if !h.terms().iter().any(|(m, _)| m.exp(slot) > 0) {
            continue;
        }
        cap = cap.min(r.cap());
        slots.push(slot);
        repl.push(r);
        ords.push(ord);
    }
    let ev = Evaluator {
        dim: h.dim(),
        cap,
        powers: RefCell::new(
            repl.iter()
                .map(|_| vec![FormalSeries::one(h.dim(), cap)])
                .collect(),
        ),
        slots,
        repl,
        ords,
    };
    let truncated = h.truncate(cap);
    Ok(ev.eval(truncated.terms(), 0, cap))
}

/// A map y_{slots[k]} = comps[k](x), where the comps only involve the listed
/// slots. Inverts it formally: returns x_{slots[k]} as series in y.
///
/// The weighted-degree-preserving part must be invertible: a linear map on
/// the weight-one slots, and c·w + (quadratic in weight-one slots) on the
/// w slot with c ≠ 0.
pub fn invert_slot_map(dim: usize, slots: &[usize], comps: &[FormalSeries]) -> Result<Vec<FormalSeries>> {
    assert_eq!(slots.len(), comps.len());
    let cap = comps.iter().map(|c| c.cap()).min().unwrap_or(0);
    for (k, comp) in comps.iter().enumerate() {
        if comp.dim() != dim {
            return Err(Error::DimensionMismatch(dim, comp.dim()));
        }
        for (m, _) in comp.terms() {
            if m.support().any(|(s, _)| !slots.contains(&s)) {
                return Err(Error::UnexpectedVariable(format!("component {k} uses a slot outside the map")));
            }
        }
        if !comp.weighted_ord().at_least(slot_weight(slots[k])) {
            return Err(Error::Order(format!("component {k} has order below its slot weight")));
        }
    }
    let lin: Vec<usize> = (0..slots.len()).filter(|&k| slot_weight(slots[k]) == 1).collect();
    let quad: Vec<usize> = (0..slots.len()).filter(|&k| slot_weight(slots[k]) == 2).collect();
    let a: Vec<Vec<C>> = lin
        .iter()
        .map(|&k| {
            lin.iter()
                .map(|&l| comps[k].coeff(&Monomial::slot_pow(slots[l], 1)))
                .collect()
        })
        .collect();
    let a_inv = linalg::invert(&a).ok_or_else(|| Error::NotInvertible("singular linear part".into()))?;
    let mut quad_data = Vec::new();
    for &k in &quad {
        let c = comps[k].coeff(&Monomial::slot_pow(slots[k], 1));
        let c_inv = coeff::inv(&c).ok_or_else(|| Error::NotInvertible("zero w coefficient".into()))?;
        let q = comps[k]
            .degree_range(2, 2)
            .filter(|m, _| *m != Monomial::slot_pow(slots[k], 1));
        if q.terms().iter().any(|(m, _)| m.support().any(|(s, _)| quad.iter().any(|&j| slots[j] == s))) {
            return Err(Error::NotInvertible("mixed weight-two part".into()));
        }
        quad_data.push((k, c_inv, q));
    }
    // nonlinear remainders N_k = comps_k − (degree-wt part)
    let nonlin: Vec<FormalSeries> = comps
        .iter()
        .enumerate()
        .map(|(k, comp)| {
            let wt = slot_weight(slots[k]);
            comp.filter(|m, _| m.degree() != wt)
        })
        .collect();
    let excess = nonlin
        .iter()
        .enumerate()
        .filter_map(|(k, n)| n.weighted_ord().finite().map(|o| o - slot_weight(slots[k])))
        .min();

    let linv = |rhs: &[FormalSeries], t: u32| -> Result<Vec<FormalSeries>> {
        let mut out: Vec<FormalSeries> = vec![FormalSeries::zero(dim, t); slots.len()];
        for (row, &l) in lin.iter().enumerate() {
            let mut s = FormalSeries::zero(dim, t);
            for (col, &k) in lin.iter().enumerate() {
                if !coeff::is_zero(&a_inv[row][col]) {
                    s = s.add(&rhs[k].scale(&a_inv[row][col]))?;
                }
            }
            out[l] = s;
        }
        for (k, c_inv, q) in &quad_data {
            let mut sub = Substitution::new(dim);
            for &l in &lin {
                sub.set(slots[l], out[l].clone());
            }
            let qx = substitute_trunc(&q.with_cap_unchecked(t), &sub, t)?;
            out[*k] = rhs[*k].sub(&qx)?.scale(c_inv);
        }
        Ok(out)
    };

    let ident: Vec<FormalSeries> = slots
        .iter()
        .map(|&s| FormalSeries::monomial(dim, cap, Monomial::slot_pow(s, 1), coeff::one()))
        .collect();
    let Some(e) = excess else {
        return linv(&ident, cap);
    };
    let mut t = cap.min(2 + e);
    let mut p = linv(&ident.iter().map(|s| s.truncate(t)).collect::<Vec<_>>(), t)?;
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > cap + 4 {
            return Err(Error::Order("inversion did not stabilize".into()));
        }
        let next_t = cap.min(t + e);
        let mut sub = Substitution::new(dim);
        for (k, &s) in slots.iter().enumerate() {
            sub.set(s, p[k].with_cap_unchecked(next_t));
        }
        let mut rhs = Vec::with_capacity(slots.len());
        for k in 0..slots.len() {
            let nk = substitute_trunc(&nonlin[k], &sub, next_t)?;
            rhs.push(ident[k].truncate(next_t).sub(&nk.with_cap_unchecked(next_t))?);
        }
        let q = linv(&rhs, next_t)?;
        let stable = next_t == cap && t == cap && q == p;
        p = q;
        if stable {
            return Ok(p);
        }
        t = next_t;
    }
}
