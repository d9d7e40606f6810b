//! Formal flattening: M can be flattened iff its pseudo-normal form is real.

use crate::error::Result;
use crate::pseudo_normal::{normal_form, Manifold};
use crate::series::coeff::{self, C};
use crate::series::{FormalSeries, Monomial};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flatness {
    pub flat: bool,
    /// The first stored monomial whose coefficient is not the conjugate of
    /// the coefficient at the conjugate monomial.
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub i: Vec<u32>,
    pub j: Vec<u32>,
    pub coeff: C,
    pub conj_coeff: C,
}

/// conj(φ) = φ through the cap.
pub fn is_flat(phi: &FormalSeries) -> Flatness {
    let dim = phi.dim();
    for (m, a) in phi.terms() {
        let other = phi.coeff(&m.conj());
        if other != coeff::conj(a) {
            return Flatness {
                flat: false,
                witness: Some(Witness {
                    i: m.i_vec(dim),
                    j: m.j_vec(dim),
                    coeff: a.clone(),
                    conj_coeff: other,
                }),
            };
        }
    }
    Flatness { flat: true, witness: None }
}

/// Flatness of M certified through `cap` only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlattenVerdict {
    pub flat: bool,
    pub witness: Option<Witness>,
    pub cap: u32,
    pub phi: FormalSeries,
}

pub fn flatten_test(m: &Manifold) -> Result<FlattenVerdict> {
    let r = normal_form(m)?;
    let f = is_flat(&r.phi);
    Ok(FlattenVerdict {
        flat: f.flat,
        witness: f.witness,
        cap: m.cap(),
        phi: r.phi,
    })
}

/// w = |z|² + 2Re Σ a_J z^J + Σ b_{IJ} z^I z̄^J with |J| ≥ 3 in the harmonic
/// part and |I|, |J| ≥ 2 with disjoint supports in the mixed part.
pub fn harmonic_mixed_manifold(
    dim: usize,
    cap: u32,
    harmonic: &[(Vec<u32>, C)],
    mixed: &[(Vec<u32>, Vec<u32>, C)],
) -> Result<Manifold> {
    let h = FormalSeries::from_terms(dim, cap, harmonic.iter().map(|(j, a)| (Monomial::new(j, &[], 0), a.clone())));
    let b = FormalSeries::from_terms(dim, cap, mixed.iter().map(|(i, j, a)| (Monomial::new(i, j, 0), a.clone())));
    Manifold::new(h.add(&h.conj())?.add(&b)?)
}
