//! Frames spanning the orthocomplement of ⟨z₁ᵏ − εe^{it}⟩ in H²₂.
//!
//! Every frame element lives on a single coefficient chain: the monomials
//! z₁^{r+kq} z₂ⁿ for fixed residue r and fixed z₂-degree n, coupled by the
//! orthogonality recursion x_{m+k,n} ω_{m+k,n} = x_{m,n} ω_{m,n} ε e^{−it}.
//! Three flavors are built here:
//!
//! * `alpha` — the orthogonal frame with coefficients C(r+kq+n, n) ε^q e^{−iqt},
//! * `beta`  — `alpha` normalized to unit H²₂-norm,
//! * `gamma` — `beta` twisted by the transport phase e^{i f_{r,n} t}.
//!
//! Coefficient tables are stored chain-wise (indexed by q), which keeps the
//! storage linear in the truncation depth and makes cross-chain orthogonality
//! exact rather than numerical.

use std::collections::BTreeMap;

use num::complex::Complex64;
use num::{BigRational, One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series;
use crate::transport;

/// Monomial z₁ᵐ z₂ⁿ addressed as (m, n).
pub type MonomialIndex = (u64, u32);

/// Index (r, n) of one coefficient chain / one frame element,
/// with 0 ≤ r ≤ k−1 and n ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ChainIndex {
    pub r: u32,
    pub n: u32,
}

impl ChainIndex {
    pub fn new(r: u32, n: u32) -> Self {
        ChainIndex { r, n }
    }
}

/// Scalar backend selector for the finite approximations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Backend {
    Float,
    Exact,
}

/// Which frame family a vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameKind {
    Alpha,
    Beta,
    Gamma,
}

/// Truncation policy for all finite approximations: either a fixed chain
/// depth `q_max` or a tail tolerance from which the depth is derived so the
/// discarded H²₂-mass stays below tail_tol².
#[derive(Debug, Clone, Copy)]
pub struct TruncationSpec {
    pub q_max: Option<u32>,
    pub tail_tol: f64,
    pub n_max: u32,
    pub m_max: u64,
    pub backend: Backend,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        TruncationSpec {
            q_max: None,
            tail_tol: 1e-14,
            n_max: 20,
            m_max: 40,
            backend: Backend::Float,
        }
    }
}

impl TruncationSpec {
    pub fn with_tail_tol(tail_tol: f64) -> Self {
        TruncationSpec {
            tail_tol,
            ..Default::default()
        }
    }
}

/// One frame element as a truncated coefficient table on its chain.
/// `coeffs[q]` multiplies the monomial z₁^{r+kq} z₂ⁿ; `weights[q]` caches the
/// corresponding H²₂ monomial weight ω_{r+kq,n}.
#[derive(Debug, Clone)]
pub struct FrameVector {
    pub k: u32,
    pub epsilon: f64,
    pub t: f64,
    pub index: ChainIndex,
    pub kind: FrameKind,
    pub derivative_order: u32,
    pub coeffs: Vec<Complex64>,
    pub weights: Vec<f64>,
    /// Upper bound on the H²₂-norm of the omitted chain tail.
    pub tail_bound: f64,
}

impl FrameVector {
    pub fn q_max(&self) -> u32 {
        self.coeffs.len() as u32 - 1
    }

    /// Monomial exponents carried by chain position q.
    pub fn monomial(&self, q: u32) -> MonomialIndex {
        (self.index.r as u64 + self.k as u64 * q as u64, self.index.n)
    }

    /// H²₂-norm computed from the stored table.
    pub fn norm(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| c.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }

    /// H²₂ inner product ⟨self, other⟩.  Distinct chains share no monomials,
    /// so the product is exactly zero unless the chain indices agree.
    pub fn inner(&self, other: &FrameVector) -> Complex64 {
        if self.index != other.index || self.k != other.k {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .zip(&self.weights)
            .map(|((a, b), w)| a * b.conj() * w)
            .sum()
    }

    /// Expand the chain table into a monomial-indexed coefficient map.
    pub fn to_monomials(&self) -> BTreeMap<MonomialIndex, Complex64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(q, c)| (self.monomial(q as u32), *c))
            .collect()
    }

    /// JSON form: {k, epsilon, t, r, n, kind, q_max, coeffs: [[m, n, re, im]…], tail_bound}.
    pub fn to_json(&self) -> serde_json::Value {
        let coeffs: Vec<serde_json::Value> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(q, c)| {
                let (m, n) = self.monomial(q as u32);
                serde_json::json!([m, n, c.re, c.im])
            })
            .collect();
        serde_json::json!({
            "k": self.k,
            "epsilon": self.epsilon,
            "t": self.t,
            "r": self.index.r,
            "n": self.index.n,
            "kind": match self.kind {
                FrameKind::Alpha => "alpha",
                FrameKind::Beta => "beta",
                FrameKind::Gamma => "gamma",
            },
            "q_max": self.q_max(),
            "coeffs": coeffs,
            "tail_bound": self.tail_bound,
        })
    }
}

fn validate(k: u32, epsilon: f64, r: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    if r >= k {
        return Err(Error::ResidueOutOfRange { r, k });
    }
    Ok(())
}

/// Chain depth at which the discarded H²₂-mass Σ_{q>Q} ω⁻¹ ε^{2q} is
/// certified below mass_tol, together with the certified mass tail.
fn resolve_depth(
    k: u32,
    epsilon: f64,
    r: u32,
    n: u32,
    trunc: &TruncationSpec,
    min_q: u32,
) -> Result<(u32, f64)> {
    let e = epsilon * epsilon;
    let mass_tol = trunc.tail_tol * trunc.tail_tol;
    let mut mass_term = 1.0_f64; // C(n+r, n) ε^0 relative units are fine: the
                                 // bound is used on the normalized chain, and
                                 // C(n+r,n) ≥ 1 only makes it conservative.
    let mass_at = |q: u32, term: f64| -> f64 {
        if epsilon == 0.0 {
            return 0.0;
        }
        let rho = ratio(e, k, r, n, q);
        if rho < 1.0 {
            term * rho / (1.0 - rho)
        } else {
            f64::INFINITY
        }
    };
    fn ratio(e: f64, k: u32, r: u32, n: u32, q: u32) -> f64 {
        e * (1.0 + n as f64 / (r as u64 + k as u64 * q as u64 + 1) as f64).powi(k as i32)
    }

    if let Some(q_max) = trunc.q_max {
        let q_max = q_max.max(min_q);
        let mut term = 1.0;
        for q in 0..q_max {
            let idx0 = n as u64 + r as u64 + k as u64 * q as u64;
            let mut step = 1.0;
            for i in 1..=k as u64 {
                step *= (idx0 + i) as f64 / (idx0 + i - n as u64) as f64;
            }
            term *= e * step;
        }
        return Ok((q_max, mass_at(q_max, term)));
    }

    let mut q = 0u32;
    loop {
        let bound = mass_at(q, mass_term);
        if q >= min_q && bound <= mass_tol {
            return Ok((q, bound));
        }
        let idx0 = n as u64 + r as u64 + k as u64 * q as u64;
        let mut step = 1.0;
        for i in 1..=k as u64 {
            step *= (idx0 + i) as f64 / (idx0 + i - n as u64) as f64;
        }
        mass_term *= e * step;
        q += 1;
        if q > 10_000_000 {
            return Err(Error::TailNotCertified {
                max_terms: 10_000_000,
            });
        }
    }
}

/// The orthogonal frame element α_{r,n}(t) with coefficients
/// C(r+kq+n, n) ε^q e^{−iqt} at z₁^{r+kq} z₂ⁿ.  ε = 0 is admitted and
/// degenerates to the single monomial with coefficient C(r+n, n).
pub fn alpha(k: u32, epsilon: f64, t: f64, r: u32, n: u32, trunc: &TruncationSpec) -> Result<FrameVector> {
    alpha_derivative(k, epsilon, t, r, n, 0, trunc)
}

/// Termwise time derivative dˡα/dtˡ: each chain coefficient picks up the
/// factor (−iq)ˡ.  Order 0 is α itself.  Any start offset r ≥ 0 is
/// admitted (the table is a plain coefficient chain); only the orthonormal
/// frame members β, γ require r < k.
pub fn alpha_derivative(
    k: u32,
    epsilon: f64,
    t: f64,
    r: u32,
    n: u32,
    order: u32,
    trunc: &TruncationSpec,
) -> Result<FrameVector> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let (q_max, mass_tail) = resolve_depth(k, epsilon, r, n, trunc, 0)?;
    let mut coeffs = Vec::with_capacity(q_max as usize + 1);
    let mut weights = Vec::with_capacity(q_max as usize + 1);
    // binom = C(n + r + kq, n), advanced multiplicatively.
    let mut binom = series::binomial(r as u64 + n as u64, n as u64)?;
    let mut eps_pow = 1.0_f64;
    for q in 0..=q_max {
        let phase = Complex64::from_polar(1.0, -(q as f64) * t);
        let deriv = if order == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            (Complex64::new(0.0, -(q as f64))).powu(order)
        };
        coeffs.push(phase * deriv * binom * eps_pow);
        weights.push(1.0 / binom);
        let idx0 = n as u64 + r as u64 + k as u64 * q as u64;
        let mut step = 1.0;
        for i in 1..=k as u64 {
            step *= (idx0 + i) as f64 / (idx0 + i - n as u64) as f64;
        }
        binom *= step;
        eps_pow *= epsilon;
        if !binom.is_finite() || !(binom * eps_pow).is_finite() {
            return Err(Error::Overflow {
                m: r as u64 + k as u64 * q as u64,
                n: n as u64,
            });
        }
    }
    // Mass tail is quoted for the undifferentiated chain; the derivative
    // picks up a q^order factor absorbed here by a crude (q_max+1)^order
    // prefactor, which is still a certified bound because the ratio
    // majorant only decreases past the resolved depth.
    let tail_scale = ((q_max as f64) + 1.0).powi(order as i32);
    Ok(FrameVector {
        k,
        epsilon,
        t,
        index: ChainIndex::new(r, n),
        kind: FrameKind::Alpha,
        derivative_order: order,
        coeffs,
        weights,
        tail_bound: (mass_tail.sqrt() * tail_scale).min(f64::MAX),
    })
}

/// ‖α_{r,n}‖² = Σ_q C(r+kq+n, n) ε^{2q}, evaluated by the closed form
/// (t-independent).  At ε = 0 the norm² is the single weight C(r+n, n).
pub fn alpha_norm_sq(k: u32, epsilon: f64, r: u32, n: u32) -> Result<f64> {
    validate(k, epsilon, r)?;
    if epsilon == 0.0 {
        return series::binomial(r as u64 + n as u64, n as u64);
    }
    let e = Complex64::new(epsilon * epsilon, 0.0);
    Ok(series::closed_sum(k, e, r, n, 0)?.re)
}

/// The orthonormal frame element β_{r,n}(t) = α_{r,n}(t)/‖α_{r,n}‖.
pub fn beta(k: u32, epsilon: f64, t: f64, r: u32, n: u32, trunc: &TruncationSpec) -> Result<FrameVector> {
    let mut v = alpha(k, epsilon, t, r, n, trunc)?;
    let inv_norm = 1.0 / alpha_norm_sq(k, epsilon, r, n)?.sqrt();
    for c in v.coeffs.iter_mut() {
        *c *= inv_norm;
    }
    v.tail_bound *= inv_norm;
    v.kind = FrameKind::Beta;
    Ok(v)
}

/// The parallel frame element γ_{r,n}(t) = e^{i f_{r,n} t} β_{r,n}(t).
pub fn gamma(k: u32, epsilon: f64, t: f64, r: u32, n: u32, trunc: &TruncationSpec) -> Result<FrameVector> {
    let mut v = beta(k, epsilon, t, r, n, trunc)?;
    let f = transport::frequency(k, epsilon, r, n)?;
    let phase = Complex64::from_polar(1.0, f * t);
    for c in v.coeffs.iter_mut() {
        *c *= phase;
    }
    v.kind = FrameKind::Gamma;
    Ok(v)
}

/// Gram matrix of β over a finite index set: entries ⟨β_a, β_b⟩ computed
/// from the coefficient tables.  Hermitian by construction; off-chain
/// entries are exactly zero.
pub fn gram(
    k: u32,
    epsilon: f64,
    t: f64,
    indices: &[ChainIndex],
    trunc: &TruncationSpec,
) -> Result<Vec<Vec<Complex64>>> {
    let vectors: Vec<FrameVector> = indices
        .iter()
        .map(|ix| beta(k, epsilon, t, ix.r, ix.n, trunc))
        .collect::<Result<_>>()?;
    let dim = vectors.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for i in 0..dim {
        for j in 0..=i {
            let v = vectors[i].inner(&vectors[j]);
            out[i][j] = v;
            out[j][i] = v.conj();
        }
    }
    Ok(out)
}

/// ⟨α_{r,n}, z₁ᴹ z₂ᴺ (z₁ᵏ − ε e^{it})⟩.  Vanishes identically: either the
/// supports are disjoint, or the two surviving terms cancel through the
/// chain recursion.  Computed from the stored table (extended to cover the
/// two monomials involved) so the cancellation is exercised numerically.
pub fn membership_residual(
    k: u32,
    epsilon: f64,
    t: f64,
    r: u32,
    n: u32,
    m_exp: u64,
    n_exp: u32,
    trunc: &TruncationSpec,
) -> Result<Complex64> {
    validate(k, epsilon, r)?;
    if n_exp != n || m_exp % k as u64 != r as u64 {
        // no monomials in common
        return Ok(Complex64::new(0.0, 0.0));
    }
    let q_hit = ((m_exp - r as u64) / k as u64) as u32;
    let spec = TruncationSpec {
        q_max: Some(trunc.q_max.unwrap_or(0).max(q_hit + 1)),
        ..*trunc
    };
    let v = alpha(k, epsilon, t, r, n, &spec)?;
    // generator column: z₁^{M+k} z₂^N − ε e^{it} z₁^M z₂^N
    let w_hi = series::binomial_weight(m_exp + k as u64, n_exp as u64)?;
    let w_lo = series::binomial_weight(m_exp, n_exp as u64)?;
    let gen_phase = Complex64::from_polar(1.0, t);
    let c_hi = v.coeffs[q_hit as usize + 1];
    let c_lo = v.coeffs[q_hit as usize];
    Ok(c_hi * w_hi - c_lo * (epsilon * gen_phase).conj() * w_lo)
}

/// Exact-rational membership residual at t = 0.  The inner product is a
/// two-term rational expression which vanishes identically; the exact
/// backend verifies the cancellation with no rounding at all.
pub fn membership_residual_exact(
    k: u32,
    epsilon: &BigRational,
    r: u32,
    n: u32,
    m_exp: u64,
    n_exp: u32,
) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if r >= k {
        return Err(Error::ResidueOutOfRange { r, k });
    }
    if n_exp != n || m_exp % k as u64 != r as u64 {
        return Ok(BigRational::zero());
    }
    let q_hit = (m_exp - r as u64) / k as u64;
    let pow = |q: u64| -> BigRational {
        let mut acc = BigRational::one();
        for _ in 0..q {
            acc *= epsilon;
        }
        acc
    };
    // chain coefficients x_q = C(m+n, n) ε^q at q_hit and q_hit + 1
    let x_lo = BigRational::from(series::binomial_exact(m_exp + n as u64, n as u64)) * pow(q_hit);
    let x_hi = BigRational::from(series::binomial_exact(m_exp + k as u64 + n as u64, n as u64))
        * pow(q_hit + 1);
    let w_lo = series::binomial_weight_exact(m_exp, n as u64);
    let w_hi = series::binomial_weight_exact(m_exp + k as u64, n as u64);
    Ok(x_hi * w_hi - x_lo * w_lo * epsilon)
}

/// Analysis coefficients ⟨v, β_{r,n}⟩ for every chain meeting the support of
/// a monomial-indexed vector.  Composing with [`synthesize`] reproduces the
/// projection of v onto the truncated fiber.
pub fn chain_coordinates(
    v: &BTreeMap<MonomialIndex, Complex64>,
    k: u32,
    epsilon: f64,
    t: f64,
    trunc: &TruncationSpec,
) -> Result<BTreeMap<ChainIndex, Complex64>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    // chain -> deepest q present in the support
    let mut chains: BTreeMap<ChainIndex, u32> = BTreeMap::new();
    for (m, n) in v.keys() {
        let r = (m % k as u64) as u32;
        let q = ((m - r as u64) / k as u64) as u32;
        let entry = chains.entry(ChainIndex::new(r, *n)).or_insert(0);
        *entry = (*entry).max(q);
    }
    let mut out = BTreeMap::new();
    for (ix, deepest) in chains {
        let spec = TruncationSpec {
            q_max: Some(trunc.q_max.unwrap_or(0).max(deepest)),
            ..*trunc
        };
        let b = beta(k, epsilon, t, ix.r, ix.n, &spec)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (q, (c, w)) in b.coeffs.iter().zip(&b.weights).enumerate() {
            if let Some(x) = v.get(&b.monomial(q as u32)) {
                acc += x * c.conj() * w;
            }
        }
        out.insert(ix, acc);
    }
    Ok(out)
}

/// Synthesis map: Σ coords[(r,n)] β_{r,n}(t) expanded in monomials.
pub fn synthesize(
    coords: &BTreeMap<ChainIndex, Complex64>,
    k: u32,
    epsilon: f64,
    t: f64,
    trunc: &TruncationSpec,
) -> Result<BTreeMap<MonomialIndex, Complex64>> {
    let mut out: BTreeMap<MonomialIndex, Complex64> = BTreeMap::new();
    for (ix, x) in coords {
        let b = beta(k, epsilon, t, ix.r, ix.n, trunc)?;
        for (q, c) in b.coeffs.iter().enumerate() {
            *out.entry(b.monomial(q as u32)).or_insert(Complex64::new(0.0, 0.0)) += x * c;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    const TOL: f64 = 1e-12;

    fn spec() -> TruncationSpec {
        TruncationSpec::default()
    }

    #[test]
    fn alpha_coefficients_match_the_defining_formula() {
        // n = 0 chain: all binomials are 1, coefficients are ε^q.
        let v = alpha(2, 0.5, 0.0, 0, 0, &spec()).unwrap();
        for (q, c) in v.coeffs.iter().enumerate().take(5) {
            assert!((c.re - 0.5f64.powi(q as i32)).abs() < TOL);
            assert_eq!(c.im, 0.0);
        }
        // ε = 0 degenerates to a single monomial with coefficient C(5,2) = 10.
        let v0 = alpha(1, 0.0, 0.0, 3, 2, &spec()).unwrap();
        assert_eq!(v0.coeffs.len(), 1);
        assert_eq!(v0.coeffs[0].re, 10.0);
        assert_eq!(v0.tail_bound, 0.0);
        // q = 1 coefficient at (k=2, ε=0.5, t=π/2, r=1, n=1): C(4,1)·0.5·e^{−iπ/2} = −2i.
        let v1 = alpha(2, 0.5, std::f64::consts::FRAC_PI_2, 1, 1, &spec()).unwrap();
        let c1 = v1.coeffs[1];
        assert!((c1 - Complex64::new(0.0, -2.0)).norm() < TOL, "c1 = {c1}");
        // parameter validation
        assert!(alpha(2, 1.0, 0.0, 0, 0, &spec()).is_err());
        assert!(alpha(2, -0.1, 0.0, 0, 0, &spec()).is_err());
    }

    #[test]
    fn alpha_norm_matches_table_and_is_t_independent() {
        for (k, eps, r, n) in [(1u32, 0.5, 0u32, 0u32), (2, 0.5, 1, 1), (3, 0.4, 2, 9)] {
            let closed = alpha_norm_sq(k, eps, r, n).unwrap();
            let at0 = alpha(k, eps, 0.0, r, n, &spec()).unwrap().norm();
            let at17 = alpha(k, eps, 1.7, r, n, &spec()).unwrap().norm();
            assert!((at0 * at0 - closed).abs() < 1e-10 * closed);
            assert!((at0 - at17).abs() < 1e-14 * at0);
        }
        assert!((alpha_norm_sq(1, 0.5, 0, 0).unwrap() - 4.0 / 3.0).abs() < TOL);
        assert!((alpha_norm_sq(2, 0.5, 1, 1).unwrap() - 32.0 / 9.0).abs() < TOL);
        assert!((alpha_norm_sq(4, 0.0, 2, 5).unwrap() - 21.0).abs() < TOL); // C(7,5)
    }

    #[test]
    fn beta_is_normalized_and_gamma_matches_beta_at_t_zero() {
        let b = beta(1, 0.5, 0.0, 0, 0, &spec()).unwrap();
        assert!((b.coeffs[0].re - 3f64.sqrt() / 2.0).abs() < TOL);
        assert!((b.norm() - 1.0).abs() < 1e-13);
        let g = gamma(1, 0.5, 0.0, 0, 0, &spec()).unwrap();
        for (x, y) in b.coeffs.iter().zip(&g.coeffs) {
            assert!((x - y).norm() < TOL);
        }
    }

    #[test]
    fn chain_recursion_holds_on_stored_tables() {
        let v = alpha(3, 0.6, 1.3, 2, 4, &spec()).unwrap();
        let twist = Complex64::from_polar(0.6, -1.3);
        for q in 0..v.coeffs.len() - 1 {
            let lhs = v.coeffs[q + 1] * v.weights[q + 1];
            let rhs = v.coeffs[q] * v.weights[q] * twist;
            assert!((lhs - rhs).norm() < 1e-15 * (1.0 + rhs.norm()), "q = {q}");
        }
    }

    #[test]
    fn gram_is_identity_on_distinct_chains() {
        let mut indices = Vec::new();
        for r in 0..3 {
            for n in 0..8 {
                indices.push(ChainIndex::new(r, n));
            }
        }
        let g = gram(3, 0.4, 1.0, &indices, &spec()).unwrap();
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (v - Complex64::new(expect, 0.0)).norm() < 1e-10,
                    "entry ({i},{j}) = {v}"
                );
            }
        }
    }

    #[test]
    fn membership_residuals_vanish() {
        // disjoint support
        let r0 = membership_residual(2, 0.5, 0.7, 0, 0, 4, 3, &spec()).unwrap();
        assert_eq!(r0.norm(), 0.0);
        // float backend: cancellation up to rounding
        let r1 = membership_residual(3, 0.4, 2.0, 1, 2, 7, 2, &spec()).unwrap();
        assert!(r1.norm() < 1e-12);
        // exact backend at t = 0, ε = 1/2: identically zero
        let eps = BigRational::new(BigInt::from(1), BigInt::from(2));
        for m_exp in 0..=12u64 {
            for n_exp in 0..=6u32 {
                let r = membership_residual_exact(2, &eps, (m_exp % 2) as u32, n_exp, m_exp, n_exp)
                    .unwrap();
                assert!(r.is_zero(), "nonzero residual at ({m_exp}, {n_exp})");
            }
        }
    }

    #[test]
    fn derivative_norm_cross_checks_against_series() {
        // ‖dα/dt‖² at (k=1, ε=0.5, r=0, n=0) is Σ q² 0.25^q = 20/27.
        let d1 = alpha_derivative(1, 0.5, 0.0, 0, 0, 1, &spec()).unwrap();
        let nsq = d1.norm().powi(2);
        assert!((nsq - 20.0 / 27.0).abs() < 1e-12, "norm² = {nsq}");
        // l = 0 is α itself; ε = 0 kills every derivative.
        let d0 = alpha_derivative(2, 0.3, 0.4, 1, 2, 0, &spec()).unwrap();
        let a = alpha(2, 0.3, 0.4, 1, 2, &spec()).unwrap();
        assert_eq!(d0.coeffs, a.coeffs);
        let dz = alpha_derivative(2, 0.0, 0.4, 1, 2, 1, &spec()).unwrap();
        assert!(dz.norm() == 0.0);
        // general cross-check: ‖dˡα/dtˡ‖² = Σ C(..) q^{2l} ε^{2q}
        for (k, eps, r, n, l) in [(2u32, 0.5, 1u32, 3u32, 1u32), (3, 0.4, 0, 2, 2)] {
            let d = alpha_derivative(k, eps, 0.9, r, n, l, &spec()).unwrap();
            let direct = series::series_sum(
                k,
                Complex64::new(eps * eps, 0.0),
                r,
                n,
                2 * l,
                1e-15,
            )
            .unwrap()
            .value
            .re;
            let table = d.norm().powi(2);
            assert!((table - direct).abs() < 1e-10 * direct, "{table} vs {direct}");
        }
    }

    #[test]
    fn taylor_consistency_of_alpha_in_t() {
        // ‖α(t+h) − α(t) − h dα/dt‖ should shrink like h².
        let k = 2;
        let eps = 0.5;
        let (r, n) = (1, 3);
        let t = 0.8;
        let base = alpha(k, eps, t, r, n, &spec()).unwrap();
        let deriv = alpha_derivative(k, eps, t, r, n, 1, &spec()).unwrap();
        let rem = |h: f64| -> f64 {
            let shifted = alpha(k, eps, t + h, r, n, &spec()).unwrap();
            let mut acc = 0.0;
            for q in 0..base.coeffs.len() {
                let d = shifted.coeffs[q] - base.coeffs[q] - deriv.coeffs[q] * h;
                acc += d.norm_sqr() * base.weights[q];
            }
            acc.sqrt()
        };
        let r2 = rem(1e-2);
        let r3 = rem(1e-3);
        let r4 = rem(1e-4);
        let order_a = (r2 / r3).log10();
        let order_b = (r3 / r4).log10();
        assert!(order_a >= 1.9, "observed order {order_a}");
        assert!(order_b >= 1.9, "observed order {order_b}");
    }

    #[test]
    fn chain_coordinates_analyze_the_fiber() {
        let trunc = spec();
        // v = β_{r,n} gives an indicator table.
        let b = beta(2, 0.5, 0.9, 1, 2, &trunc).unwrap();
        let coords = chain_coordinates(&b.to_monomials(), 2, 0.5, 0.9, &trunc).unwrap();
        for (ix, c) in &coords {
            let expect = if *ix == ChainIndex::new(1, 2) { 1.0 } else { 0.0 };
            assert!((c - Complex64::new(expect, 0.0)).norm() < 1e-12, "{ix:?}");
        }
        // v = z₁ᵏ − ε at t = 0 lies in the submodule: all-zero table.
        let mut v = BTreeMap::new();
        v.insert((2u64, 0u32), Complex64::new(1.0, 0.0));
        v.insert((0u64, 0u32), Complex64::new(-0.5, 0.0));
        let coords = chain_coordinates(&v, 2, 0.5, 0.0, &trunc).unwrap();
        for (ix, c) in &coords {
            assert!(c.norm() < 1e-13, "{ix:?} -> {c}");
        }
        // v = z₁ʳ z₂ⁿ at ε = 0: single entry ω^{1/2} = 1/√C(r+n, n).
        let mut w = BTreeMap::new();
        w.insert((1u64, 2u32), Complex64::new(1.0, 0.0));
        let coords = chain_coordinates(&w, 2, 0.0, 0.0, &trunc).unwrap();
        let c = coords[&ChainIndex::new(1, 2)];
        assert!((c.re - (1.0 / 3.0f64).sqrt()).abs() < 1e-13);
        // synthesis reproduces the projection of a fiber vector
        let coords_b = chain_coordinates(&b.to_monomials(), 2, 0.5, 0.9, &trunc).unwrap();
        let back = synthesize(&coords_b, 2, 0.5, 0.9, &trunc).unwrap();
        for (mn, c) in &back {
            let orig = b.to_monomials().get(mn).copied().unwrap_or(Complex64::new(0.0, 0.0));
            assert!((c - orig).norm() < 1e-12);
        }
    }
}
