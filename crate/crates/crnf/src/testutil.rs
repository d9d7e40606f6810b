use crate::series::coeff;
use crate::series::{FormalSeries, Monomial};
use proptest::prelude::*;

/// Sparse w-free series with all terms of weighted degree in [lo, cap].
pub fn zzbar_series(dim: usize, cap: u32, lo: u32, max_terms: usize) -> impl Strategy<Value = FormalSeries> {
    let term = (
        prop::collection::vec(0u32..4, dim),
        prop::collection::vec(0u32..4, dim),
        -5i64..6,
        -5i64..6,
        1i64..4,
    )
        .prop_map(|(i, j, re, im, den)| (Monomial::new(&i, &j, 0), coeff::complex_ratio((re, den), (im, den))))
        .prop_filter("degree window", move |(m, _)| m.degree() >= lo && m.degree() <= cap);
    prop::collection::vec(term, 0..=max_terms).prop_map(move |t| FormalSeries::from_terms(dim, cap, t))
}

/// E made real by adding its conjugate.
pub fn real_series(dim: usize, cap: u32, lo: u32, max_terms: usize) -> impl Strategy<Value = FormalSeries> {
    zzbar_series(dim, cap, lo, max_terms).prop_map(|s| s.add(&s.conj()).unwrap())
}

pub fn mono(i: &[u32], j: &[u32]) -> Monomial {
    Monomial::new(i, j, 0)
}

/// Seeded w-free series with `n` random terms in the degree window [lo, cap].
pub fn random_zzbar<R: rand::Rng>(rng: &mut R, dim: usize, cap: u32, lo: u32, n: usize) -> FormalSeries {
    let mut terms = Vec::new();
    while terms.len() < n {
        let i: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..4)).collect();
        let j: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..4)).collect();
        let m = Monomial::new(&i, &j, 0);
        if m.degree() < lo || m.degree() > cap {
            continue;
        }
        let den = rng.gen_range(1i64..4);
        terms.push((m, coeff::complex_ratio((rng.gen_range(-5..6), den), (rng.gen_range(-5..6), den))));
    }
    FormalSeries::from_terms(dim, cap, terms)
}
