//! Dense reference solver for the linearized equation: one real linear
//! system per weighted degree, built by monomial matching with every
//! unknown coefficient of f, g and φ allowed by the normalizations.

use crate::error::{Error, Result};
use crate::linalg::{self, Solution};
use crate::pseudo_normal::LinearSolution;
use crate::series::coeff::{self, Rational, C};
use crate::series::{FormalSeries, Monomial, W_SLOT};
use crate::uv::{self, UvExpansion, UvKey};
use malachite_base::num::basic::traits::Zero;
use std::collections::HashMap;

/// All exponent vectors of length n summing to d.
pub fn multi_indices(n: usize, d: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in multi_indices(n - 1, d - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Part {
    Both,
    RealOnly,
    ImagOnly,
}

#[derive(Clone, Debug)]
enum Target {
    F(usize, Monomial),
    G(Monomial),
    Phi(UvKey),
}

struct Basis {
    dim: usize,
    cap: u32,
    u: FormalSeries,
    v: Vec<FormalSeries>,
}

impl Basis {
    fn new(dim: usize, cap: u32) -> Basis {
        let modsq = |i: usize| FormalSeries::z(dim, cap, i).mul(&FormalSeries::zbar(dim, cap, i)).unwrap();
        let u = (0..dim).fold(FormalSeries::zero(dim, cap), |s, i| s.add(&modsq(i)).unwrap());
        let v = (0..dim)
            .map(|h| {
                let below = (0..h).fold(FormalSeries::zero(dim, cap), |s, i| s.add(&modsq(i)).unwrap());
                below.sub(&modsq(h)).unwrap()
            })
            .collect();
        Basis { dim, cap, u, v }
    }

    fn uv_monomial(&self, k: &Monomial) -> FormalSeries {
        let mut s = self.u.pow(k.z_exp(0));
        for h in 1..self.dim {
            s = s.mul(&self.v[h].pow(k.z_exp(h))).unwrap();
        }
        s
    }

    /// Contribution to g − 2Re Σ z̄_i f_i − φ of a unit coefficient x.
    fn column(&self, t: &Target, x: &C) -> FormalSeries {
        let (d, c) = (self.dim, self.cap);
        match t {
            Target::F(i, m) => {
                let s = FormalSeries::monomial(d, c, Monomial::zbar(*i).mul(m.without(W_SLOT)), x.clone())
                    .mul(&self.u.pow(m.w_exp()))
                    .unwrap();
                s.add(&s.conj()).unwrap().neg()
            }
            Target::G(m) => FormalSeries::monomial(d, c, m.without(W_SLOT), x.clone())
                .mul(&self.u.pow(m.w_exp()))
                .unwrap(),
            Target::Phi(key) => FormalSeries::monomial(d, c, key.ij, x.clone())
                .mul(&self.uv_monomial(&key.k))
                .unwrap()
                .neg(),
        }
    }
}

fn phi_part(dim: usize, i: &[u32], j: &[u32], k: &[u32]) -> Option<Part> {
    let ni: u32 = i.iter().sum();
    let nj: u32 = j.iter().sum();
    let k0 = k[0];
    let vdeg: u32 = k[1..].iter().sum();
    let unit = |v: &[u32]| v.iter().position(|&x| x == 1);
    if ni == 0 && nj == 0 && vdeg == 0 && k0 >= 2 {
        return None;
    }
    if ni == 0 && nj == 0 && vdeg == 1 && k0 >= 1 {
        return Some(Part::ImagOnly);
    }
    if ni == 1 && nj == 1 && vdeg == 0 && k0 >= 1 && unit(i) > unit(j) {
        return None;
    }
    if (ni >= 1 && nj == 0 || ni == 0 && nj >= 1) && vdeg == 0 && k0 >= 1 {
        return None;
    }
    if ni == 0 && nj >= 1 && vdeg == 1 {
        return None;
    }
    if ni >= 2 && nj == 1 && vdeg == 0 {
        let h = unit(j).unwrap();
        if i[h] == 0 {
            return None;
        }
    }
    let _ = dim;
    Some(Part::Both)
}

/// Solves the linearized equation for the homogeneous degree-t part of Γ.
fn solve_degree(gamma_t: &FormalSeries, t: u32, basis: &Basis) -> Result<Vec<(Target, C)>> {
    let dim = basis.dim;
    let mut unknowns: Vec<(Target, Part)> = Vec::new();
    for i in 0..dim {
        for m in 0..=(t - 1) / 2 {
            for p in multi_indices(dim, t - 1 - 2 * m) {
                let np: u32 = p.iter().sum();
                let part = if np == 0 {
                    continue;
                } else if np == 1 {
                    let j = p.iter().position(|&x| x == 1).unwrap();
                    if j < i || (i == 0 && j == 0) {
                        continue;
                    }
                    if j == i { Part::RealOnly } else { Part::Both }
                } else {
                    Part::Both
                };
                unknowns.push((Target::F(i, Monomial::new(&p, &[], m)), part));
            }
        }
    }
    for m in 0..=t / 2 {
        for p in multi_indices(dim, t - 2 * m) {
            unknowns.push((Target::G(Monomial::new(&p, &[], m)), Part::Both));
        }
    }
    let mut harmonic: Vec<(usize, usize)> = Vec::new();
    let mut phi_pos: HashMap<UvKey, usize> = HashMap::new();
    for kdeg in 0..=t / 2 {
        for ijdeg_i in 0..=(t - 2 * kdeg) {
            let ijdeg_j = t - 2 * kdeg - ijdeg_i;
            for i in multi_indices(dim, ijdeg_i) {
                for j in multi_indices(dim, ijdeg_j) {
                    if i.iter().zip(&j).any(|(a, b)| a * b != 0) {
                        continue;
                    }
                    for k in multi_indices(dim, kdeg) {
                        if let Some(part) = phi_part(dim, &i, &j, &k) {
                            let key = UvKey::new(&i, &j, &k);
                            phi_pos.insert(key, unknowns.len());
                            unknowns.push((Target::Phi(key), part));
                        }
                    }
                }
            }
        }
    }
    for (key, &pos) in &phi_pos {
        if key.i_deg() == 0 && key.j_deg() > 2 && key.k.degree() == 0 {
            let partner = UvKey { ij: key.ij.conj(), k: key.k };
            harmonic.push((pos, phi_pos[&partner]));
        }
    }

    // real columns: (unknown index, is imaginary part)
    let mut cols: Vec<(usize, bool)> = Vec::new();
    for (n, (_, part)) in unknowns.iter().enumerate() {
        if *part != Part::ImagOnly {
            cols.push((n, false));
        }
        if *part != Part::RealOnly {
            cols.push((n, true));
        }
    }
    let col_of: HashMap<(usize, bool), usize> = cols.iter().enumerate().map(|(c, &k)| (k, c)).collect();
    let ncols = cols.len();
    let mut rows: HashMap<Monomial, usize> = HashMap::new();
    let mut a: Vec<Vec<Rational>> = Vec::new();
    let mut b: Vec<Rational> = Vec::new();
    let mut row_for = |m: Monomial, a: &mut Vec<Vec<Rational>>, b: &mut Vec<Rational>| -> usize {
        *rows.entry(m).or_insert_with(|| {
            a.push(vec![Rational::ZERO; ncols]);
            a.push(vec![Rational::ZERO; ncols]);
            b.push(Rational::ZERO);
            b.push(Rational::ZERO);
            a.len() - 2
        })
    };
    for (c, &(n, imag)) in cols.iter().enumerate() {
        let x = if imag { coeff::i_unit() } else { coeff::one() };
        let col = basis.column(&unknowns[n].0, &x);
        for (m, v) in col.terms() {
            let r = row_for(*m, &mut a, &mut b);
            a[r][c] = v.real.clone();
            a[r + 1][c] = v.imaginary.clone();
        }
    }
    for (m, v) in gamma_t.terms() {
        let r = row_for(*m, &mut a, &mut b);
        b[r] = -v.real.clone();
        b[r + 1] = -v.imaginary.clone();
    }
    for (anti, holo) in harmonic {
        let mut re = vec![Rational::ZERO; ncols];
        re[col_of[&(anti, false)]] = Rational::from(1);
        re[col_of[&(holo, false)]] = Rational::from(-1);
        let mut im = vec![Rational::ZERO; ncols];
        im[col_of[&(anti, true)]] = Rational::from(1);
        im[col_of[&(holo, true)]] = Rational::from(1);
        a.push(re);
        a.push(im);
        b.push(Rational::ZERO);
        b.push(Rational::ZERO);
    }
    match linalg::solve(a, b, ncols) {
        Solution::Unique(x) => {
            let mut vals: Vec<C> = vec![coeff::zero(); unknowns.len()];
            for (c, &(n, imag)) in cols.iter().enumerate() {
                if imag {
                    vals[n].imaginary = x[c].clone();
                } else {
                    vals[n].real = x[c].clone();
                }
            }
            Ok(unknowns
                .into_iter()
                .zip(vals)
                .filter(|(_, v)| !coeff::is_zero(v))
                .map(|((t, _), v)| (t, v))
                .collect())
        }
        Solution::Underdetermined { rank, unknowns } => Err(Error::NotInvertible(format!(
            "degree {t}: rank {rank} < {unknowns} unknowns"
        ))),
        Solution::Inconsistent => Err(Error::NotInvertible(format!("degree {t}: inconsistent system"))),
    }
}

/// The dense reference solution of the linearized equation for Γ.
pub fn oracle_solve(gamma: &FormalSeries) -> Result<LinearSolution> {
    if gamma.has_w() {
        return Err(Error::UnexpectedVariable("w in Γ".into()));
    }
    if !gamma.weighted_ord().at_least(3) {
        return Err(Error::Order(format!("Ord(Γ) = {} < 3", gamma.weighted_ord())));
    }
    let dim = gamma.dim();
    let cap = gamma.cap();
    let basis = Basis::new(dim, cap);
    let mut f: Vec<Vec<(Monomial, C)>> = vec![Vec::new(); dim];
    let mut g = Vec::new();
    let mut phi = Vec::new();
    for t in 3..=cap {
        for (target, v) in solve_degree(&gamma.weighted_component(t)?, t, &basis)? {
            match target {
                Target::F(i, m) => f[i].push((m, v)),
                Target::G(m) => g.push((m, v)),
                Target::Phi(k) => phi.push((k, v)),
            }
        }
    }
    let phi_uv = UvExpansion::from_entries(dim, cap, phi)?;
    Ok(LinearSolution {
        f: f.into_iter().map(|t| FormalSeries::from_terms(dim, cap, t)).collect(),
        g: FormalSeries::from_terms(dim, cap, g),
        phi: uv::contract(&phi_uv),
        phi_uv,
    })
}
