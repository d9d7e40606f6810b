#![allow(dead_code)]

use crnf::io::{ManifoldDocument, TermDoc};
use crnf::pseudo_normal::{transform_manifold, Manifold};
use crnf::series::coeff;
use crnf::series::{FormalSeries, HoloMap, Monomial};
use rand::Rng;

pub fn seeded(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// `n` random w-free terms with weighted degree in [lo, cap].
pub fn random_gamma<R: Rng>(rng: &mut R, dim: usize, cap: u32, lo: u32, n: usize) -> FormalSeries {
    let mut terms = Vec::new();
    while terms.len() < n {
        let i: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..4)).collect();
        let j: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..4)).collect();
        let m = Monomial::new(&i, &j, 0);
        if m.degree() < lo || m.degree() > cap {
            continue;
        }
        let den = rng.gen_range(1i64..5);
        terms.push((m, coeff::complex_ratio((rng.gen_range(-5..6), den), (rng.gen_range(-5..6), den))));
    }
    FormalSeries::from_terms(dim, cap, terms)
}

fn small<R: Rng>(rng: &mut R) -> coeff::C {
    coeff::complex_ratio((rng.gen_range(-2..3), 8), (rng.gen_range(-2..3), 8))
}

/// The quadric moved by z ↦ z + (quadratic in z, w), w ↦ w + (cubic), with
/// small coefficients; redrawn until Ord(E) = 3.
pub fn random_quadric_image<R: Rng>(rng: &mut R, dim: usize, cap: u32) -> Manifold {
    loop {
        let quad: Vec<Monomial> = (0..dim)
            .flat_map(|a| (a..dim).map(move |b| Monomial::z(a).mul(Monomial::z(b))))
            .chain(std::iter::once(Monomial::w()))
            .collect();
        let f: Vec<FormalSeries> = (0..dim)
            .map(|i| {
                let mut t = vec![(Monomial::z(i), coeff::one())];
                for m in &quad {
                    if rng.gen_bool(0.4) {
                        t.push((*m, small(rng)));
                    }
                }
                FormalSeries::from_terms(dim, cap, t)
            })
            .collect();
        let mut t = vec![(Monomial::w(), coeff::one())];
        for a in 0..dim {
            if rng.gen_bool(0.5) {
                t.push((Monomial::z(a).mul(Monomial::w()), small(rng)));
            }
        }
        let g = FormalSeries::from_terms(dim, cap, t);
        let h = HoloMap::new(f, g).unwrap();
        let m = transform_manifold(&Manifold::quadric(dim, cap), &h).unwrap();
        if m.e().weighted_ord().finite() == Some(3) {
            return m;
        }
    }
}

fn rational_string<R: Rng>(rng: &mut R) -> String {
    let p = rng.gen_range(-12i64..13);
    match rng.gen_range(0..3) {
        0 => p.to_string(),
        1 => format!("{}/{}", 2 * p, 2 * rng.gen_range(1i64..7)),
        _ => format!("{p}/{}", rng.gen_range(1i64..9)),
    }
}

/// A valid but non-canonical document: unsorted, possibly repeated
/// monomials, unreduced fractions.
pub fn random_document<R: Rng>(rng: &mut R) -> ManifoldDocument {
    let n = rng.gen_range(2usize..5);
    let degree = rng.gen_range(3u32..10);
    let count = rng.gen_range(0..8);
    let mut terms = Vec::new();
    while terms.len() < count {
        let i: Vec<u32> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let j: Vec<u32> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let d: u32 = i.iter().chain(&j).sum();
        if d < 3 || d > degree {
            continue;
        }
        terms.push(TermDoc { i, j, m: 0, re: rational_string(rng), im: rational_string(rng) });
        if rng.gen_bool(0.2) {
            let dup = terms.last().unwrap().clone();
            terms.push(dup);
        }
    }
    ManifoldDocument { n, degree, terms }
}
