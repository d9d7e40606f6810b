//! JSON documents for manifolds, series and automorphism parameters.
//! Rationals travel as "p/q" strings.

use crate::error::{Error, Result};
use crate::pseudo_normal::Manifold;
use crate::quadric_auto::AutoParams;
use crate::series::coeff::{self, Rational};
use crate::series::{FormalSeries, HoloMap, Monomial, MAX_CAP, MAX_DIM};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    #[serde(default)]
    pub i: Vec<u32>,
    #[serde(default)]
    pub j: Vec<u32>,
    /// Power of w; absent in manifold documents.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub m: u32,
    pub re: String,
    pub im: String,
}

fn is_zero(m: &u32) -> bool {
    *m == 0
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldDocument {
    pub n: usize,
    pub degree: u32,
    pub terms: Vec<TermDoc>,
}

/// A series in (z, z̄, w) with its own dimension and cap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesDocument {
    pub n: usize,
    pub degree: u32,
    pub terms: Vec<TermDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapDocument {
    pub f: Vec<SeriesDocument>,
    pub g: SeriesDocument,
}

/// Automorphism data; every entry lists terms in w only (i, j omitted).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutoParamsDocument {
    pub n: usize,
    pub degree: u32,
    /// "linear" or "full".
    pub family: String,
    pub a: Vec<Vec<TermDoc>>,
    pub b: Vec<TermDoc>,
    pub u: Vec<Vec<Vec<TermDoc>>>,
}

fn check_header(n: usize, degree: u32) -> Result<()> {
    if !(2..=MAX_DIM).contains(&n) {
        return Err(Error::BadDimension(n));
    }
    if degree > MAX_CAP {
        return Err(Error::BadCap(degree));
    }
    Ok(())
}

fn parse_q(s: &str, k: usize, part: &str) -> Result<Rational> {
    coeff::parse_rational(s).ok_or_else(|| Error::Parse(format!("term {k}: malformed rational {part} = {s:?}")))
}

fn pad(v: &[u32], n: usize, k: usize, name: &str) -> Result<Vec<u32>> {
    match v.len() {
        0 => Ok(vec![0; n]),
        l if l == n => Ok(v.to_vec()),
        l => Err(Error::Parse(format!("term {k}: {name} has length {l}, expected {n}"))),
    }
}

fn parse_terms(n: usize, cap: u32, terms: &[TermDoc]) -> Result<FormalSeries> {
    let mut out = Vec::with_capacity(terms.len());
    for (k, t) in terms.iter().enumerate() {
        let i = pad(&t.i, n, k, "i")?;
        let j = pad(&t.j, n, k, "j")?;
        let deg: u64 = i.iter().chain(&j).map(|&e| e as u64).sum::<u64>() + 2 * t.m as u64;
        if deg > cap as u64 {
            return Err(Error::Parse(format!("term {k}: weighted degree {deg} exceeds degree {cap}")));
        }
        let c = coeff::c(parse_q(&t.re, k, "re")?, parse_q(&t.im, k, "im")?);
        out.push((Monomial::new(&i, &j, t.m), c));
    }
    Ok(FormalSeries::from_terms(n, cap, out))
}

fn emit_terms(s: &FormalSeries, with_zz: bool) -> Vec<TermDoc> {
    let n = s.dim();
    s.terms()
        .iter()
        .map(|(m, a)| TermDoc {
            i: if with_zz { m.i_vec(n) } else { vec![] },
            j: if with_zz { m.j_vec(n) } else { vec![] },
            m: m.w_exp(),
            re: a.real.to_string(),
            im: a.imaginary.to_string(),
        })
        .collect()
}

/// Terms with |i| + |j| < 3 or any w are rejected by index; repeated
/// monomials add.
pub fn parse_manifold(doc: &ManifoldDocument) -> Result<Manifold> {
    check_header(doc.n, doc.degree)?;
    for (k, t) in doc.terms.iter().enumerate() {
        if t.m != 0 {
            return Err(Error::Parse(format!("term {k}: manifold terms cannot contain w")));
        }
        let d: u64 = t.i.iter().chain(&t.j).map(|&e| e as u64).sum();
        if d < 3 {
            return Err(Error::Parse(format!("term {k}: order < 3 (|i| + |j| = {d})")));
        }
    }
    Manifold::new(parse_terms(doc.n, doc.degree, &doc.terms)?)
}

/// Canonical form: terms in the engine's monomial order, zero terms dropped.
pub fn emit_manifold(m: &Manifold) -> ManifoldDocument {
    ManifoldDocument { n: m.dim(), degree: m.cap(), terms: emit_terms(m.e(), true) }
}

pub fn parse_series(doc: &SeriesDocument) -> Result<FormalSeries> {
    check_header(doc.n, doc.degree)?;
    parse_terms(doc.n, doc.degree, &doc.terms)
}

pub fn emit_series(s: &FormalSeries) -> SeriesDocument {
    SeriesDocument { n: s.dim(), degree: s.cap(), terms: emit_terms(s, true) }
}

pub fn emit_map(h: &HoloMap) -> MapDocument {
    MapDocument { f: h.fs().iter().map(emit_series).collect(), g: emit_series(h.g()) }
}

pub fn parse_map(doc: &MapDocument) -> Result<HoloMap> {
    let f = doc.f.iter().map(parse_series).collect::<Result<Vec<_>>>()?;
    HoloMap::new(f, parse_series(&doc.g)?)
}

fn parse_w_series(n: usize, cap: u32, terms: &[TermDoc], name: &str) -> Result<FormalSeries> {
    if terms.iter().any(|t| t.i.iter().chain(&t.j).any(|&e| e != 0)) {
        return Err(Error::Parse(format!("{name}: automorphism entries are series in w only")));
    }
    parse_terms(n, cap, terms).map_err(|e| Error::Parse(format!("{name}: {e}")))
}

pub fn parse_auto_params(doc: &AutoParamsDocument) -> Result<(AutoParams, crate::quadric_auto::Family)> {
    use crate::quadric_auto::Family;
    check_header(doc.n, doc.degree)?;
    let family = match doc.family.as_str() {
        "linear" => Family::Linear,
        "full" => Family::Full,
        other => return Err(Error::Parse(format!("unknown family {other:?}"))),
    };
    let (n, cap) = (doc.n, doc.degree);
    if doc.a.len() != n || doc.u.len() != n || doc.u.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("a must have {n} entries and u must be {n}x{n}")));
    }
    let a = doc
        .a
        .iter()
        .enumerate()
        .map(|(k, t)| parse_w_series(n, cap, t, &format!("a[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    let b = parse_w_series(n, cap, &doc.b, "b")?;
    let mut u = Vec::with_capacity(n);
    for (r, row) in doc.u.iter().enumerate() {
        let row = row
            .iter()
            .enumerate()
            .map(|(c, t)| parse_w_series(n, cap, t, &format!("u[{r}][{c}]")))
            .collect::<Result<Vec<_>>>()?;
        u.push(row);
    }
    Ok((AutoParams { a, b, u }, family))
}

pub fn emit_auto_params(p: &AutoParams, family: crate::quadric_auto::Family) -> AutoParamsDocument {
    use crate::quadric_auto::Family;
    AutoParamsDocument {
        n: p.dim(),
        degree: p.cap(),
        family: match family {
            Family::Linear => "linear",
            Family::Full => "full",
        }
        .into(),
        a: p.a.iter().map(|s| emit_terms(s, false)).collect(),
        b: emit_terms(&p.b, false),
        u: p.u.iter().map(|r| r.iter().map(|s| emit_terms(s, false)).collect()).collect(),
    }
}

pub fn manifold_from_json(text: &str) -> Result<Manifold> {
    let doc: ManifoldDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    parse_manifold(&doc)
}

pub fn manifold_to_json(m: &Manifold) -> String {
    serde_json::to_string(&emit_manifold(m)).expect("documents serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::real_series;
    use proptest::prelude::*;

    fn term(i: &[u32], j: &[u32], re: &str, im: &str) -> TermDoc {
        TermDoc { i: i.to_vec(), j: j.to_vec(), m: 0, re: re.into(), im: im.into() }
    }

    #[test]
    fn parse_examples() {
        let empty = ManifoldDocument { n: 2, degree: 6, terms: vec![] };
        assert_eq!(parse_manifold(&empty).unwrap(), Manifold::quadric(2, 6));
        let one = ManifoldDocument { n: 2, degree: 6, terms: vec![term(&[2, 0], &[0, 1], "1", "0")] };
        let m = parse_manifold(&one).unwrap();
        assert_eq!(m.e().terms(), &[(Monomial::new(&[2, 0], &[0, 1], 0), coeff::one())]);
    }

    #[test]
    fn rejections_name_the_term() {
        let bad = |t: TermDoc| {
            let doc = ManifoldDocument { n: 2, degree: 6, terms: vec![term(&[3, 0], &[], "1", "0"), t] };
            parse_manifold(&doc).unwrap_err().to_string()
        };
        assert!(bad(term(&[1, 0], &[0, 1], "1", "0")).contains("term 1: order < 3"));
        assert!(bad(term(&[1, 0, 1], &[0, 1, 0], "1", "0")).contains("term 1: i has length 3"));
        assert!(bad(term(&[2, 0], &[0, 1], "1/x", "0")).contains("term 1: malformed rational"));
        assert!(bad(term(&[4, 4], &[], "1", "0")).contains("term 1: weighted degree 8"));
        let doc = ManifoldDocument { n: 9, degree: 6, terms: vec![] };
        assert!(parse_manifold(&doc).is_err());
    }

    #[test]
    fn canonical_emit_merges_and_sorts() {
        let doc = ManifoldDocument {
            n: 2,
            degree: 6,
            terms: vec![
                term(&[0, 3], &[], "1/2", "0"),
                term(&[3, 0], &[], "2/4", "0"),
                term(&[0, 3], &[], "1/2", "1"),
            ],
        };
        let m = parse_manifold(&doc).unwrap();
        let out = emit_manifold(&m);
        assert_eq!(out.terms.len(), 2);
        assert!(out.terms.iter().all(|t| t.re != "2/4"));
        assert_eq!(emit_manifold(&parse_manifold(&out).unwrap()), out);
    }

    #[test]
    fn map_and_params_round_trip() {
        use crate::quadric_auto::{random_params, Family};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for family in [Family::Linear, Family::Full] {
            let p = random_params(&mut rng, 2, 6, family);
            let doc = emit_auto_params(&p, family);
            let text = serde_json::to_string(&doc).unwrap();
            let back: AutoParamsDocument = serde_json::from_str(&text).unwrap();
            assert_eq!(parse_auto_params(&back).unwrap(), (p.clone(), family));
            let h = crate::quadric_auto::make_auto(&p, family).unwrap();
            assert_eq!(parse_map(&emit_map(&h)).unwrap(), h);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn json_round_trip(e in real_series(3, 7, 3, 6)) {
            let m = Manifold::new(e).unwrap();
            let text = manifold_to_json(&m);
            let back = manifold_from_json(&text).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(manifold_to_json(&back), text);
        }
    }
}
