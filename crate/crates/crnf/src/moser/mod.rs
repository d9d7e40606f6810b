//! The rapid iteration scheme: truncated solutions, one-step transforms,
//! order doubling, and sup-norm bound checks bracketed between a sampled
//! lower bound and a rational majorant.

use crate::error::{Error, Result};
use crate::pseudo_normal::{image_from_source_defect, linearized_residual, solve_linearized, Manifold, Vanishing};
use crate::series::coeff::{self, Rational};
use crate::series::{z_slot, FormalSeries, HoloMap, Substitution, W_SLOT};
use crate::uv;
use malachite_base::num::arithmetic::traits::Pow;
use malachite_base::num::basic::traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

fn pow2(e: i64) -> Rational {
    Rational::from(2).pow(e)
}

fn ser_q<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

/// Radii R_0 = R_1 = 2^{-(n-2)/2} r, R_h = 2^{-(n-1-h)/2} r (0-based h ≥ 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolydiscSpec {
    dim: usize,
    r: Rational,
}

impl PolydiscSpec {
    pub fn new(dim: usize, r: Rational) -> Result<PolydiscSpec> {
        if r <= Rational::ZERO {
            return Err(Error::InvalidParameter("radius must be positive".into()));
        }
        Ok(PolydiscSpec { dim, r })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r(&self) -> &Rational {
        &self.r
    }

    /// R_i², always rational.
    pub fn radius_sq(&self, i: usize) -> Rational {
        let n = self.dim as i64;
        let h = if i == 0 { 1 } else { i as i64 };
        pow2(h + 1 - n) * &self.r * &self.r
    }

    /// The bound 2r² on |w|.
    pub fn w_radius(&self) -> Rational {
        Rational::from(2) * &self.r * &self.r
    }

    pub fn radius_vector_norm_sq(&self) -> Rational {
        (0..self.dim).map(|i| self.radius_sq(i)).sum()
    }

    /// An upper bound of R^{I+J}·(2r²)^m for the monomial's exponents.
    pub fn monomial_bound(&self, m: &crate::series::Monomial) -> Rational {
        let mut sq = Rational::ONE;
        for i in 0..self.dim {
            let e = (m.z_exp(i) + m.zbar_exp(i)) as u64;
            sq *= self.radius_sq(i).pow(e);
        }
        coeff::sqrt_upper(&sq) * self.w_radius().pow(m.w_exp() as u64)
    }

    fn radii_f64(&self) -> Vec<f64> {
        (0..self.dim).map(|i| coeff::to_f64(&self.radius_sq(i)).sqrt()).collect()
    }
}

/// Σ |a|·R^{I+J}(2r²)^m, a certified upper bound of the sup norm on D_r
/// (or on Δ_r for series in (z, w)).
pub fn majorant_norm(e: &FormalSeries, spec: &PolydiscSpec) -> Rational {
    e.terms().iter().map(|(m, a)| coeff::modulus_upper(a) * spec.monomial_bound(m)).sum()
}

/// Worst-case floating error of evaluating h on the closed polydisc: a
/// generous multiple of ε times the majorant.
fn rounding_allowance(h: &FormalSeries, spec: &PolydiscSpec) -> f64 {
    let ops = 2 * h.cap() as usize + h.len() + 8;
    ops as f64 * f64::EPSILON * coeff::to_f64(&majorant_norm(h, spec)) * (1.0 + 1e-6)
}

/// The largest |h| over the first `samples` points of a seeded sequence on
/// the distinguished boundary (radii shrunk by 1 − 2⁻⁴⁰), less a rounding
/// allowance. z̄ slots are sampled independently of z, so this is a lower
/// bound of the sup on D_r (or Δ_r), and it is monotone in `samples`.
pub fn sampled_sup(h: &FormalSeries, spec: &PolydiscSpec, samples: usize, seed: u64) -> f64 {
    if h.is_zero() {
        return 0.0;
    }
    let shrink = 1.0 - 2f64.powi(-40);
    let radii = spec.radii_f64();
    let wr = coeff::to_f64(&spec.w_radius()) * shrink;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    let polar = |rad: f64, t: f64| (rad * t.cos(), rad * t.sin());
    for _ in 0..samples {
        let z: Vec<(f64, f64)> = radii.iter().map(|&r| polar(r * shrink, rng.gen::<f64>() * std::f64::consts::TAU)).collect();
        let zb: Vec<(f64, f64)> = radii.iter().map(|&r| polar(r * shrink, rng.gen::<f64>() * std::f64::consts::TAU)).collect();
        let w = polar(wr, rng.gen::<f64>() * std::f64::consts::TAU);
        let (re, im) = h.eval_f64(&z, &zb, w);
        best = best.max(re.hypot(im));
    }
    (best - rounding_allowance(h, spec)).max(0.0)
}

/// f̂ keeps weighted degrees ≤ 2d − 4, ĝ keeps ≤ 2d − 3.
pub fn truncate_solution(f: &[FormalSeries], g: &FormalSeries, d: u32) -> Result<(Vec<FormalSeries>, FormalSeries)> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!("d = {d} < 3")));
    }
    let fh = f.iter().map(|s| s.degree_range(0, 2 * d - 4)).collect();
    Ok((fh, g.degree_range(0, 2 * d - 3)))
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub theta: HoloMap,
    pub image: Manifold,
    pub f_hat: Vec<FormalSeries>,
    pub g_hat: FormalSeries,
    pub phi_hat: FormalSeries,
    /// The pseudo-normal remainder below degree 2d − 2; nonzero means stall.
    pub phi_low: FormalSeries,
}

/// One step: Θ = (z + f̂, w + ĝ) and the image M' = Θ(M), formed from the
/// source-coordinate defect and re-expressed in target coordinates.
pub fn iterate_step(m: &Manifold, d: u32) -> Result<StepOutcome> {
    if d < 3 || !m.e().weighted_ord().at_least(d) {
        return Err(Error::Order(format!("need Ord(E) >= d >= 3, have Ord(E) = {}, d = {d}", m.e().weighted_ord())));
    }
    let (dim, cap) = (m.dim(), m.cap());
    let sol = solve_linearized(m.e())?;
    let (f_hat, g_hat) = truncate_solution(&sol.f, &sol.g, d)?;
    let phi_hat = linearized_residual(m.e(), &f_hat, &g_hat, &FormalSeries::zero(dim, cap))?;
    let theta = HoloMap::from_increments(f_hat.clone(), g_hat.clone())?;

    let on_m = Substitution::new(dim).with(W_SLOT, m.phi());
    let on_u = Substitution::new(dim).with(W_SLOT, FormalSeries::norm_sq(dim, cap));
    let g_phi = crate::series::substitute(&g_hat, &on_m)?;
    let mut q = g_phi.sub(&crate::series::substitute(&g_hat, &on_u)?)?.add(&phi_hat)?;
    for (i, fi) in f_hat.iter().enumerate() {
        let fp = crate::series::substitute(fi, &on_m)?;
        let diff = fp.sub(&crate::series::substitute(fi, &on_u)?)?;
        let s = FormalSeries::zbar(dim, cap, i).mul(&diff)?;
        q = q.sub(&s.add(&s.conj())?)?.sub(&fp.mul(&fp.conj())?)?;
    }
    let image = image_from_source_defect(m, &theta, &q)?;
    let phi_low = sol.phi.degree_range(0, 2 * d - 3);
    Ok(StepOutcome { theta, image, f_hat, g_hat, phi_hat, phi_low })
}

/// LHS is a certified lower bound, RHS a certified upper bound.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    #[serde(serialize_with = "ser_q")]
    pub rhs: Rational,
    pub rhs_approx: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn new(name: impl Into<String>, lhs: f64, rhs: Rational) -> BoundCheck {
        let pass = lhs.is_finite() && coeff::from_f64(lhs) <= rhs;
        BoundCheck { name: name.into(), lhs, rhs_approx: coeff::to_f64(&rhs), rhs, pass }
    }

    fn exact(name: impl Into<String>, lhs: u32, rhs: u32) -> BoundCheck {
        BoundCheck {
            name: name.into(),
            lhs: lhs as f64,
            rhs: Rational::from(rhs),
            rhs_approx: rhs as f64,
            pass: lhs >= rhs,
        }
    }
}

/// C(n) = 3³·n(n+1)·2^{n+3}.
pub fn c_n(n: usize) -> Rational {
    Rational::from(27 * n as u64 * (n as u64 + 1)) * pow2(n as i64 + 3)
}

/// Upper bound of x^{p/q} for q ∈ {1, 2, 4} and 0 ≤ x.
fn root_pow_upper(x: &Rational, p: u64, q: u32) -> Rational {
    let mut v = x.pow(p);
    let mut k = q;
    while k > 1 {
        v = coeff::sqrt_upper(&v);
        k /= 2;
    }
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientBoundReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

/// |E^{(ke₁)}_{(I,T)}| ≤ (k+2)ⁿ‖E‖/(R^{I+T}(2r²)^k) and
/// |E^{(ke₁+e_j)}_{(I,T)}| ≤ 2ⁿ(k+2)ⁿ‖E‖/(R^{I+T}(2r²)^{k+1}), with the
/// majorant standing in for ‖E‖_r; compared exactly after squaring.
pub fn check_coefficient_bounds(e: &FormalSeries, spec: &PolydiscSpec) -> Result<CoefficientBoundReport> {
    let n = spec.dim();
    let norm = majorant_norm(e, spec);
    let table = uv::expand(e)?;
    let mut checked = 0;
    let mut failures = Vec::new();
    let w2 = spec.w_radius();
    for (key, a) in table.entries() {
        let vdeg: u32 = (1..n).map(|h| key.k.z_exp(h)).sum();
        if vdeg > 1 {
            continue;
        }
        let k = key.k.z_exp(0) as u64;
        let mut r_sq = Rational::ONE;
        for i in 0..n {
            r_sq *= spec.radius_sq(i).pow((key.ij.z_exp(i) + key.ij.zbar_exp(i)) as u64);
        }
        let base = Rational::from(k + 2).pow(n as u64) * &norm;
        let (num, wk) = if vdeg == 0 { (base, k) } else { (pow2(n as i64) * base, k + 1) };
        let lhs = coeff::norm_sqr(a) * r_sq * w2.clone().pow(2 * wk);
        checked += 1;
        if lhs > &num * &num {
            failures.push(format!("(I={:?}, J={:?}, K={:?})", key.ij.i_vec(n), key.ij.j_vec(n), key.k.i_vec(n)));
        }
    }
    Ok(CoefficientBoundReport { checked, failures })
}

#[derive(Clone, Debug, Serialize)]
pub struct GradientCheck {
    pub points: usize,
    pub compared: usize,
    pub max_rel_err: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub d: u32,
    #[serde(serialize_with = "ser_q")]
    pub majorant: Rational,
    pub checks: Vec<BoundCheck>,
    pub gradient: GradientCheck,
    pub coefficient_bounds: CoefficientBoundReport,
}

impl EstimateReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.gradient.pass && self.coefficient_bounds.failures.is_empty()
    }
}

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-6;

/// ℓ¹ norm of the n + 1 holomorphic partials of h, as a sampled lower
/// bound of the sup on Δ.
fn gradient_sup(partials: &[FormalSeries], spec: &PolydiscSpec, samples: usize, seed: u64) -> f64 {
    let shrink = 1.0 - 2f64.powi(-40);
    let radii = spec.radii_f64();
    let wr = coeff::to_f64(&spec.w_radius()) * shrink;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeros = vec![(0.0, 0.0); spec.dim()];
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let (z, w) = sample_delta(&mut rng, &radii, shrink, wr);
        let s: f64 = partials.iter().map(|p| {
            let (re, im) = p.eval_f64(&z, &zeros, w);
            re.hypot(im)
        }).sum();
        best = best.max(s);
    }
    let slack: f64 = partials.iter().map(|p| rounding_allowance(p, spec)).sum();
    (best - slack).max(0.0)
}

fn sample_delta(rng: &mut ChaCha8Rng, radii: &[f64], shrink: f64, wr: f64) -> (Vec<(f64, f64)>, (f64, f64)) {
    let polar = |rad: f64, t: f64| (rad * t.cos(), rad * t.sin());
    let z = radii.iter().map(|&r| polar(r * shrink, rng.gen::<f64>() * std::f64::consts::TAU)).collect();
    let w = polar(wr, rng.gen::<f64>() * std::f64::consts::TAU);
    (z, w)
}

/// Compares analytic partials against central differences at sample points.
fn validate_gradients(fs: &[&FormalSeries], spec: &PolydiscSpec, points: usize, seed: u64) -> GradientCheck {
    let dim = spec.dim();
    let radii = spec.radii_f64();
    let wr = coeff::to_f64(&spec.w_radius()) * 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeros = vec![(0.0, 0.0); dim];
    let (mut compared, mut max_rel) = (0usize, 0f64);
    let mut pass = true;
    for _ in 0..points {
        let (z, w) = sample_delta(&mut rng, &radii, 0.5, wr);
        for f in fs {
            let value = {
                let (re, im) = f.eval_f64(&z, &zeros, w);
                re.hypot(im)
            };
            for slot in (0..dim).map(z_slot).chain(std::iter::once(W_SLOT)) {
                let an = f.derivative(slot).eval_f64(&z, &zeros, w);
                let shifted = |sgn: f64| {
                    let mut zz = z.clone();
                    let mut ww = w;
                    if slot == W_SLOT {
                        ww.0 += sgn * FD_STEP;
                    } else {
                        zz[slot].0 += sgn * FD_STEP;
                    }
                    f.eval_f64(&zz, &zeros, ww)
                };
                let (p, m) = (shifted(1.0), shifted(-1.0));
                let fd = ((p.0 - m.0) / (2.0 * FD_STEP), (p.1 - m.1) / (2.0 * FD_STEP));
                let err = (fd.0 - an.0).hypot(fd.1 - an.1);
                let scale = an.0.hypot(an.1).max(value);
                compared += 1;
                if scale > 0.0 {
                    let rel = err / scale;
                    max_rel = max_rel.max(rel);
                    if rel > FD_TOL {
                        pass = false;
                    }
                } else if err > 0.0 {
                    pass = false;
                }
            }
        }
    }
    GradientCheck { points, compared, max_rel_err: max_rel, pass }
}

/// Checks the solution estimates at radius ϱ: sampled sups of f̂_h, ĝ, their
/// gradients and φ̂ against the bounds with the majorant of E on D_r.
pub fn check_solution_estimates(m: &Manifold, d: u32, r: &Rational, rho: &Rational, samples: usize, seed: u64) -> Result<EstimateReport> {
    let half = Rational::from_signeds(1, 2);
    if !(half < *rho && rho < r && *r <= Rational::ONE) {
        return Err(Error::InvalidParameter("need 1/2 < rho < r <= 1".into()));
    }
    let n = m.dim();
    let spec_r = PolydiscSpec::new(n, r.clone())?;
    let spec_rho = PolydiscSpec::new(n, rho.clone())?;
    let step = iterate_step(m, d)?;
    let norm = majorant_norm(m.e(), &spec_r);
    let k = c_n(n) * Rational::from(2 * d as u64).pow(2 * n as u64) * &norm;
    let ratio = rho / r;
    let gap = r - rho;
    let rhs_f = &k / &gap * ratio.clone().pow((d - 1) as u64);
    let rhs_grad = &k / gap.clone().pow(3u64) * root_pow_upper(&ratio, (d - 1) as u64, 2);
    let rhs_phi = Rational::from(2 * d as u64).pow(2 * n as u64) * &norm / gap.clone().pow(2 * n as u64)
        * ratio.clone().pow((2 * d - 2) as u64);

    let mut checks = Vec::new();
    let mut comps: Vec<(String, &FormalSeries)> =
        step.f_hat.iter().enumerate().map(|(h, f)| (format!("f_hat[{h}]"), f)).collect();
    comps.push(("g_hat".into(), &step.g_hat));
    for (name, f) in &comps {
        checks.push(BoundCheck::new(format!("|{name}|"), sampled_sup(f, &spec_rho, samples, seed), rhs_f.clone()));
        let partials: Vec<FormalSeries> =
            (0..n).map(z_slot).chain(std::iter::once(W_SLOT)).map(|s| f.derivative(s)).collect();
        checks.push(BoundCheck::new(
            format!("|grad {name}|"),
            gradient_sup(&partials, &spec_rho, samples, seed),
            rhs_grad.clone(),
        ));
    }
    checks.push(BoundCheck::new("|phi_hat|", sampled_sup(&step.phi_hat, &spec_rho, samples, seed), rhs_phi));
    let fs: Vec<&FormalSeries> = comps.iter().map(|c| c.1).collect();
    let gradient = validate_gradients(&fs, &spec_rho, samples.clamp(1, 16), seed ^ 0x9e37);
    let coefficient_bounds = check_coefficient_bounds(m.e(), &spec_r)?;
    Ok(EstimateReport { d, majorant: norm, checks, gradient, coefficient_bounds })
}

/// Schedule radii r_ν = ½(1 + 1/(ν+1)).
pub fn schedule_r(nu: u32) -> Rational {
    Rational::from_signeds(1, 2) * (Rational::ONE + Rational::from_signeds(1, nu as i64 + 1))
}

#[derive(Clone, Debug, Serialize)]
pub struct Radii {
    #[serde(serialize_with = "ser_q")]
    pub r: Rational,
    #[serde(serialize_with = "ser_q")]
    pub rho: Rational,
    #[serde(serialize_with = "ser_q")]
    pub sigma: Rational,
    #[serde(serialize_with = "ser_q")]
    pub r_next: Rational,
}

impl Radii {
    pub fn at(nu: u32) -> Radii {
        let r = schedule_r(nu);
        let r_next = schedule_r(nu + 1);
        let rho = (Rational::from(2) * &r + &r_next) / Rational::from(3);
        let sigma = (Rational::from(2) * &r + &rho) / Rational::from(3);
        Radii { r, rho, sigma, r_next }
    }

    /// (r_ν − r_{ν+1})⁻¹ = 2(ν+1)(ν+2) and r_{ν+1}/r_ν = 1 − 1/(ν+2)².
    pub fn identities_hold(&self, nu: u32) -> bool {
        let a = nu as i64 + 1;
        let b = nu as i64 + 2;
        Rational::ONE / (&self.r - &self.r_next) == Rational::from(2 * a * b)
            && &self.r_next / &self.r == Rational::ONE - Rational::from_signeds(1, b * b)
    }
}

/// C_d and C̃_d of the one-step contraction estimate.
pub fn contraction_constants(n: usize, d: u32, r: &Rational, r_next: &Rational) -> (Rational, Rational) {
    let two_d = Rational::from(2 * d as u64).pow(2 * n as u64);
    let cn = c_n(n);
    let gap = r - r_next;
    let ratio = r_next / r;
    let first = Rational::from(2 * n as u64 + 1) * Rational::from(27) * &cn * &two_d / gap.clone().pow(3u64)
        * root_pow_upper(&ratio, (d - 1) as u64, 4);
    let inner = Rational::from(3) * &cn * &two_d / &gap;
    let second = ratio.clone().pow((d - 1) as u64) * Rational::from(n as u64) * inner.clone() * inner;
    let tilde = Rational::from(3).pow(2 * n as u64) * &two_d / gap.pow(2 * n as u64) * ratio.pow((d - 1) as u64);
    (first + second, tilde)
}

#[derive(Clone, Debug)]
pub struct IterationConfig {
    /// Threshold for the monitored smallness predicate; defaults to 1/(2n+4).
    pub delta: Option<Rational>,
    pub eta: Rational,
    pub epsilon: Rational,
    pub samples: usize,
    pub seed: u64,
    /// Exponents (m₁, m₂, m₃) of the limit v^{m₃} d^{m₁} (1 − v^{−m₂})^d.
    pub decay_exponents: (i32, i32, i32),
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            delta: None,
            eta: Rational::from_signeds(1, 100),
            epsilon: Rational::from_signeds(1, 2),
            samples: 64,
            seed: 0,
            decay_exponents: (1, 1, 1),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub nu: u32,
    pub d: u32,
    pub radii: Radii,
    pub schedule_identities: bool,
    #[serde(serialize_with = "ser_q")]
    pub majorant_e: Rational,
    pub majorant_f_hat: Vec<f64>,
    pub majorant_g_hat: f64,
    pub estimates: Vec<BoundCheck>,
    pub gradient: GradientCheck,
    pub coefficient_bounds: CoefficientBoundReport,
    /// The smallness hypothesis of the contraction step, monitored only.
    pub hypothesis_lhs: f64,
    pub hypothesis_holds: bool,
    pub c_d: f64,
    pub c_tilde_d: f64,
    pub contraction: BoundCheck,
    pub d_next: Vanishing,
    pub order_doubling: BoundCheck,
    pub growth: BoundCheck,
    pub decay_term: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationReport {
    pub dim: usize,
    pub cap: u32,
    pub steps_requested: u32,
    pub d_sequence: Vec<Vanishing>,
    pub records: Vec<StepRecord>,
    /// The lowest nonvanishing order of the pseudo-normal form when it is
    /// seen below 2d − 2 (the iteration cannot pass it).
    pub stall: Option<u32>,
    pub stationary: bool,
    pub cap_exhausted: Option<String>,
    pub certifiable_steps: u32,
    #[serde(serialize_with = "ser_q")]
    pub delta: Rational,
    pub eta: f64,
    pub eta_holds: bool,
    pub eta0_star: Option<f64>,
    pub binding_threshold: String,
    pub decay_term_tail_decreasing: bool,
}

impl IterationReport {
    pub fn orders(&self) -> Vec<Option<u32>> {
        self.d_sequence
            .iter()
            .map(|v| match v {
                Vanishing::Order(k) => Some(*k),
                _ => None,
            })
            .collect()
    }

    pub fn all_checks_pass(&self) -> bool {
        self.records.iter().all(|r| {
            r.estimates.iter().all(|c| c.pass) && r.gradient.pass && r.coefficient_bounds.failures.is_empty() && r.contraction.pass
        })
    }
}

/// Steps a cap can certify starting from order d: each needs 2d − 2 ≤ cap.
pub fn certifiable_steps(cap: u32, mut d: u32) -> u32 {
    let mut k = 0;
    while d >= 3 && 2 * d - 2 <= cap {
        k += 1;
        d = 2 * d - 2;
    }
    k
}

/// (z, w) ↦ (az, a²w): E(z, z̄) becomes E(az, az̄)/a².
pub fn scale_manifold(m: &Manifold, a: &Rational) -> Result<Manifold> {
    if *a <= Rational::ZERO {
        return Err(Error::InvalidParameter("scale must be positive".into()));
    }
    let e = m.e().map_coeffs(|mono, c| {
        let t = mono.degree() as i64 - 2;
        coeff::scale_real(c, &a.clone().pow(t))
    });
    Manifold::new(e)
}

/// Halves a until the majorant of E on D_1 is at most η.
pub fn scale_to_eta(m: &Manifold, eta: &Rational) -> Result<(Rational, Manifold)> {
    let unit = PolydiscSpec::new(m.dim(), Rational::ONE)?;
    let mut a = Rational::ONE;
    for _ in 0..256 {
        let s = scale_manifold(m, &a)?;
        if majorant_norm(s.e(), &unit) <= *eta {
            return Ok((a, s));
        }
        a /= Rational::from(2);
    }
    Err(Error::InvalidParameter("no dyadic scale reaches eta".into()))
}

fn decay_term(v: f64, d: f64, (m1, m2, m3): (i32, i32, i32)) -> f64 {
    v.powi(m3) * d.powi(m1) * (1.0 - v.powi(-m2)).powf(d)
}

/// Runs the scheme with the radii schedule for up to `steps` steps.
pub fn run_iteration(m: &Manifold, steps: u32, cfg: &IterationConfig) -> Result<IterationReport> {
    let (n, cap) = (m.dim(), m.cap());
    let delta = cfg.delta.clone().unwrap_or_else(|| Rational::from_signeds(1, 2 * n as i64 + 4));
    let e0_norm = majorant_norm(m.e(), &PolydiscSpec::new(n, Rational::ONE)?);
    let mut cur = m.clone();
    let mut d_sequence = Vec::new();
    let mut records: Vec<StepRecord> = Vec::new();
    let (mut stall, mut stationary, mut cap_exhausted) = (None, false, None);
    let first_d = m.e().weighted_ord().finite().unwrap_or(cap + 1);
    for nu in 0..steps {
        let d = match cur.e().weighted_ord().finite() {
            Some(d) => d,
            None => {
                stationary = true;
                break;
            }
        };
        if nu == 0 {
            d_sequence.push(Vanishing::Order(d));
        }
        if 2 * d - 2 > cap {
            cap_exhausted = Some(format!("step {nu} needs cap >= {} to witness the order jump from d = {d}", 2 * d - 2));
            break;
        }
        let radii = Radii::at(nu);
        let spec_rho = PolydiscSpec::new(n, radii.rho.clone())?;
        let spec_next = PolydiscSpec::new(n, radii.r_next.clone())?;
        let seed = cfg.seed.wrapping_add(nu as u64);
        let est = check_solution_estimates(&cur, d, &radii.r, &radii.rho, cfg.samples, seed)?;
        let step = iterate_step(&cur, d)?;
        let norm = est.majorant.clone();
        let two_d = Rational::from(2 * d as u64).pow(2 * n as u64);
        let ratio = &radii.rho / &radii.r;
        let hyp = c_n(n) * two_d * &norm / (&radii.r - &radii.rho).pow(3u64) * root_pow_upper(&ratio, (d - 1) as u64, 2);
        let (c_d, c_tilde) = contraction_constants(n, d, &radii.r, &radii.r_next);
        let rhs_414 = &c_d * &norm * &norm + &c_tilde * &norm;
        let image_sup = sampled_sup(step.image.e(), &spec_next, cfg.samples, seed);
        let d_next = crate::pseudo_normal::lowest_vanishing_order(step.image.e());
        let d_next_val = match d_next {
            Vanishing::Order(k) => k,
            _ => cap + 1,
        };
        if !step.phi_low.is_zero() && stall.is_none() {
            stall = step.phi_low.weighted_ord().finite();
        }
        records.push(StepRecord {
            nu,
            d,
            schedule_identities: radii.identities_hold(nu),
            majorant_e: norm.clone(),
            majorant_f_hat: step.f_hat.iter().map(|f| coeff::to_f64(&majorant_norm(f, &spec_rho))).collect(),
            majorant_g_hat: coeff::to_f64(&majorant_norm(&step.g_hat, &spec_rho)),
            estimates: est.checks,
            gradient: est.gradient,
            coefficient_bounds: est.coefficient_bounds,
            hypothesis_lhs: coeff::to_f64(&hyp),
            hypothesis_holds: hyp < delta,
            c_d: coeff::to_f64(&c_d),
            c_tilde_d: coeff::to_f64(&c_tilde),
            contraction: BoundCheck::new("||E'|| <= C_d||E||^2 + C~_d||E||", image_sup, rhs_414),
            d_next,
            order_doubling: BoundCheck::exact("d_next >= 2d - 2", d_next_val, 2 * d - 2),
            growth: BoundCheck::exact("d >= 2^nu + 2", d, (1u32 << nu.min(31)) + 2),
            decay_term: decay_term(nu as f64 + 2.0, d as f64, cfg.decay_exponents),
            radii,
        });
        d_sequence.push(d_next);
        cur = step.image;
    }
    let values: Vec<f64> = records.iter().map(|r| r.decay_term).collect();
    let peak = values.iter().cloned().enumerate().fold((0, f64::MIN), |b, (i, v)| if v > b.1 { (i, v) } else { b }).0;
    let decay_term_tail_decreasing = values[peak.min(values.len())..].windows(2).all(|w| w[1] <= w[0]);

    // η₀* = ε(2C)^{−2N} with N the first step where both constants are ≤ 1/4
    let quarter = 0.25;
    let big_c = records.iter().flat_map(|r| [r.c_d, r.c_tilde_d]).fold(1.0f64, f64::max);
    let big_n = records.iter().position(|r| r.c_d <= quarter && r.c_tilde_d <= quarter);
    let eps = coeff::to_f64(&cfg.epsilon);
    let eta0_star = big_n.map(|k| eps * (2.0 * big_c).powf(-2.0 * k as f64));
    let eta = coeff::to_f64(&cfg.eta);
    let binding_threshold = match eta0_star {
        Some(s) if s < eta => "eta0_star".to_string(),
        Some(_) => "eta".to_string(),
        None => "undetermined: the constants never drop to 1/4 within the run".to_string(),
    };
    Ok(IterationReport {
        dim: n,
        cap,
        steps_requested: steps,
        d_sequence,
        records,
        stall,
        stationary,
        cap_exhausted,
        certifiable_steps: certifiable_steps(cap, first_d),
        delta,
        eta,
        eta_holds: e0_norm <= cfg.eta,
        eta0_star,
        binding_threshold,
        decay_term_tail_decreasing,
    })
}

/// The quadric moved by (z₁ + z₂², z₂, w + z₁w/8): n = 2, Ord(E) = 3, and
/// formally equivalent to the quadric by construction.
pub fn quadric_image_fixture(cap: u32) -> Result<Manifold> {
    let dim = 2;
    let z = |i| FormalSeries::z(dim, cap, i);
    let f = vec![z(0).add(&z(1).pow(2))?, z(1)];
    let zw = crate::series::Monomial::z(0).mul(crate::series::Monomial::w());
    let g = FormalSeries::w(dim, cap).add(&FormalSeries::monomial(dim, cap, zw, coeff::ratio(1, 8)))?;
    crate::pseudo_normal::transform_manifold(&Manifold::quadric(dim, cap), &HoloMap::new(f, g)?)
}
