//! Parallel-transport frequencies, the diagonal transport law, monodromy
//! phases, and the flatness certificate for the parallel frame.
//!
//! The transport acts diagonally on chains: U_t β_{r,n}(0) = e^{i f_{r,n} t} β_{r,n}(t),
//! where f_{r,n} is the first moment of the chain position q under the
//! weights C(n+r+kq, n) ε^{2q}.  Two evaluation routes are kept side by
//! side: the roots-of-unity closed form and the direct moment ratio; they
//! cross-check each other throughout the tests.
//!
//! Frequency differences converge to k-independent limits as n grows.  At
//! the chain wrap the raw difference jumps by an integer, so all limit
//! comparisons are made modulo 1 (equivalently, on the complex exponentials
//! e^{2πif}); [`wrap_distance`] implements that metric and the
//! `*_step_deviation` functions compute the wrapped deviations without
//! catastrophic cancellation, which keeps the decay visible far below the
//! size of the frequencies themselves.

use std::collections::BTreeMap;

use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::frames::{self, ChainIndex, FrameKind, TruncationSpec};
use crate::series::{self, RootData};

/// Distance between x and y in ℝ/ℤ.
pub fn wrap_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(1.0);
    d.min(1.0 - d)
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

/// Transport frequency f_{r,n} by the roots-of-unity closed form, with the
/// dominant root power factored out so the evaluation stays finite for any
/// chain depth.  Defined as 0 at ε = 0 (the moment numerator vanishes).
pub fn frequency(k: u32, epsilon: f64, r: u32, n: u32) -> Result<f64> {
    validate(k, epsilon, r)?;
    if epsilon == 0.0 {
        return Ok(0.0);
    }
    let root = RootData::new(k, Complex64::new(epsilon * epsilon, 0.0))?;
    let star = root.min_modulus_index();
    let a_star = root.a[star];
    let z_den = root.scaled_zeta_sum(r as i64, n + 1);
    let z_num = root.scaled_zeta_sum(r as i64 - 1, n + 2);
    let c = root.f * (n as f64 + 1.0) / a_star;
    let f = (c * z_num / z_den - r as f64) / k as f64;
    Ok(f.re)
}

/// Oracle route for f_{r,n}: the moment ratio Σ q w_q / Σ w_q summed
/// directly with certified relative tails.
pub fn frequency_series(k: u32, epsilon: f64, r: u32, n: u32, rel_tol: f64) -> Result<f64> {
    let m = series::chain_moments(k, epsilon, r, n, 1, rel_tol)?;
    Ok(m[1])
}

/// Large-n asymptote F n / (k(1−F)) + F / (k(1−F)) − r/k, F = ε^{2/k}.
pub fn frequency_asymptote(k: u32, epsilon: f64, r: u32, n: u32) -> Result<f64> {
    validate(k, epsilon, r)?;
    if epsilon == 0.0 {
        return Err(Error::EpsilonOutOfRange(0.0));
    }
    let f = epsilon.powf(2.0 / k as f64);
    let rate = f / (k as f64 * (1.0 - f));
    Ok(rate * n as f64 + rate - r as f64 / k as f64)
}

/// Table of frequencies over the window {(r, n) : r < k, n ≤ n_max}.
#[derive(Debug, Clone)]
pub struct FrequencyTable {
    pub k: u32,
    pub epsilon: f64,
    pub n_max: u32,
    values: Vec<f64>,
}

impl FrequencyTable {
    pub fn build(k: u32, epsilon: f64, n_max: u32) -> Result<Self> {
        validate(k, epsilon, 0)?;
        let mut values = Vec::with_capacity(k as usize * (n_max as usize + 1));
        for n in 0..=n_max {
            for r in 0..k {
                values.push(frequency(k, epsilon, r, n)?);
            }
        }
        Ok(FrequencyTable {
            k,
            epsilon,
            n_max,
            values,
        })
    }

    pub fn get(&self, r: u32, n: u32) -> f64 {
        self.values[n as usize * self.k as usize + r as usize]
    }

    /// f_{r,n} − f_{r−1,n} with the wrap convention f_{−1,n} := f_{k−1,n}.
    pub fn delta_r(&self, r: u32, n: u32) -> f64 {
        let prev = if r == 0 { self.k - 1 } else { r - 1 };
        self.get(r, n) - self.get(prev, n)
    }

    /// f_{r,n} − f_{r,n−1}; requires n ≥ 1.
    pub fn delta_n(&self, r: u32, n: u32) -> f64 {
        self.get(r, n) - self.get(r, n - 1)
    }
}

/// Frequency-difference tables with their limits: Δr → −1/k and
/// Δn → F/(k(1−F)) as n → ∞ (limits compared modulo 1 at the wrap).
#[derive(Debug, Clone)]
pub struct FrequencyDifferences {
    pub table: FrequencyTable,
    pub limit_r: f64,
    pub limit_n: f64,
}

pub fn frequency_differences(k: u32, epsilon: f64, n_max: u32) -> Result<FrequencyDifferences> {
    if n_max < 2 {
        return Err(Error::InvalidParameter("n_max must be >= 2".into()));
    }
    let table = FrequencyTable::build(k, epsilon, n_max)?;
    let f = epsilon.powf(2.0 / k as f64);
    let limit_n = if epsilon == 0.0 {
        0.0
    } else {
        f / (k as f64 * (1.0 - f))
    };
    Ok(FrequencyDifferences {
        table,
        limit_r: -1.0 / k as f64,
        limit_n,
    })
}

/// Diagonal transport phases at time t on the chain-coordinate side.
#[derive(Debug, Clone)]
pub struct TransportDiagonal {
    pub t: f64,
    pub phases: BTreeMap<ChainIndex, Complex64>,
}

/// Apply U_t in chain coordinates: multiply each coordinate by e^{i f_{r,n} t}.
/// The result is read in the β(t) frame.
pub fn transport_apply(
    k: u32,
    epsilon: f64,
    t: f64,
    v: &BTreeMap<ChainIndex, Complex64>,
) -> Result<BTreeMap<ChainIndex, Complex64>> {
    let mut out = BTreeMap::new();
    for (ix, x) in v {
        let f = frequency(k, epsilon, ix.r, ix.n)?;
        out.insert(*ix, x * Complex64::from_polar(1.0, f * t));
    }
    Ok(out)
}

/// The monodromy diagonal: phases e^{2πi f_{r,n}} over the window n ≤ n_max.
pub fn monodromy_diagonal(k: u32, epsilon: f64, n_max: u32) -> Result<TransportDiagonal> {
    let mut phases = BTreeMap::new();
    let t = 2.0 * std::f64::consts::PI;
    for n in 0..=n_max {
        for r in 0..k {
            let f = frequency(k, epsilon, r, n)?;
            phases.insert(ChainIndex::new(r, n), Complex64::from_polar(1.0, f * t));
        }
    }
    Ok(TransportDiagonal { t, phases })
}

/// Norm of the fiber projection of the termwise time derivative of one
/// frame section.  For the parallel frame γ this is the flatness residual
/// and must vanish up to truncation; for β it equals |f_{r,n}| exactly
/// (the non-flat control), and for α it equals |f_{r,n}|·‖α_{r,n}‖.
pub fn flatness_residual(
    k: u32,
    epsilon: f64,
    t: f64,
    r: u32,
    n: u32,
    kind: FrameKind,
    trunc: &TruncationSpec,
) -> Result<f64> {
    validate(k, epsilon, r)?;
    let b = frames::beta(k, epsilon, t, r, n, trunc)?;
    let alpha_deriv = frames::alpha_derivative(k, epsilon, t, r, n, 1, trunc)?;
    let norm = frames::alpha_norm_sq(k, epsilon, r, n)?.sqrt();
    let f = frequency(k, epsilon, r, n)?;

    // time-derivative table of the requested section, chain position q
    let deriv_at = |q: usize| -> Complex64 {
        match kind {
            FrameKind::Alpha => alpha_deriv.coeffs[q],
            FrameKind::Beta => alpha_deriv.coeffs[q] / norm,
            FrameKind::Gamma => {
                let phase = Complex64::from_polar(1.0, f * t);
                let gamma_q = phase * b.coeffs[q];
                Complex64::new(0.0, f) * gamma_q + phase * alpha_deriv.coeffs[q] / norm
            }
        }
    };
    // cross-chain projections vanish exactly; only ⟨·, β_{r,n}⟩ survives
    let mut proj = Complex64::new(0.0, 0.0);
    for q in 0..b.coeffs.len() {
        proj += deriv_at(q) * b.coeffs[q].conj() * b.weights[q];
    }
    Ok(proj.norm() * b.norm())
}

/// Deviation (f_{r,n} − f_{r+1,n}) − 1/k for an interior step r → r+1
/// (r ≤ k−2), assembled from the exponentially small scaled root tails so
/// no cancellation of the O(n) frequencies occurs.  Real ε ∈ (0, 1) only.
pub fn r_step_deviation(k: u32, epsilon: f64, r: u32, n: u32) -> Result<f64> {
    validate(k, epsilon, r)?;
    if epsilon == 0.0 {
        return Err(Error::EpsilonOutOfRange(0.0));
    }
    if r + 1 >= k {
        return Err(Error::ResidueOutOfRange { r: r + 1, k });
    }
    let root = RootData::new(k, Complex64::new(epsilon * epsilon, 0.0))?;
    let c_n = root.f * (n as f64 + 1.0) / root.a[0];
    let da = root.scaled_zeta_tail(r as i64 - 1, n + 2);
    let db = root.scaled_zeta_tail(r as i64 + 1, n + 1);
    let dc = root.scaled_zeta_tail(r as i64, n + 2);
    let dd = root.scaled_zeta_tail(r as i64, n + 1);
    let numer = da + db - dc - dd + da * db - dc * dd;
    let denom = (Complex64::new(1.0, 0.0) + dd) * (Complex64::new(1.0, 0.0) + db);
    Ok((c_n / k as f64 * numer / denom).re)
}

/// Deviation (f_{r,n} − f_{r,n+1}) + F/(k(1−F)) for the step n → n+1,
/// cancellation-free as in [`r_step_deviation`].  Real ε ∈ (0, 1) only.
pub fn n_step_deviation(k: u32, epsilon: f64, r: u32, n: u32) -> Result<f64> {
    validate(k, epsilon, r)?;
    if epsilon == 0.0 {
        return Err(Error::EpsilonOutOfRange(0.0));
    }
    let root = RootData::new(k, Complex64::new(epsilon * epsilon, 0.0))?;
    let f = root.f;
    let a0 = root.a[0];
    let one = Complex64::new(1.0, 0.0);
    let d = |s: i64, p: u32| root.scaled_zeta_tail(s, p);

    let z_n1 = one + d(r as i64, n + 1);
    let z_n2 = one + d(r as i64, n + 2);
    // 1 − R(r,n) where R = Z(r−1,n+2)/Z(r,n+1)
    let one_minus_r = (d(r as i64, n + 1) - d(r as i64 - 1, n + 2)) / z_n1;
    // R(r,n) − R(r,n+1)
    let numer = d(r as i64 - 1, n + 2) + d(r as i64, n + 2)
        + d(r as i64 - 1, n + 2) * d(r as i64, n + 2)
        - d(r as i64 - 1, n + 3)
        - d(r as i64, n + 1)
        - d(r as i64 - 1, n + 3) * d(r as i64, n + 1);
    let r_diff = numer / (z_n1 * z_n2);
    let c_next = f * (n as f64 + 2.0) / a0;
    let rate = f / a0; // F/(1−F)
    Ok(((rate * one_minus_r + c_next * r_diff) / k as f64).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn frequency_closed_forms() {
        // k = 1: f_{0,n} = F(n+1)/(1−F) with F = ε².
        for n in [0u32, 1, 5, 30] {
            let f = frequency(1, 0.5, 0, n).unwrap();
            let expect = 0.25 * (n as f64 + 1.0) / 0.75;
            assert!((f - expect).abs() < 1e-12 * (1.0 + expect), "n={n}");
        }
        assert!((frequency(1, 0.5, 0, 0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        // ε = 0 is defined as 0.
        assert_eq!(frequency(3, 0.0, 2, 7).unwrap(), 0.0);
        // closed form vs series oracle
        for (k, eps, r, n) in [(2u32, 0.5, 1u32, 4u32), (3, 0.6, 0, 11), (4, 0.3, 3, 2)] {
            let a = frequency(k, eps, r, n).unwrap();
            let b = frequency_series(k, eps, r, n, 1e-14).unwrap();
            assert!((a - b).abs() < 1e-11 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn asymptote_pins_down_large_n() {
        assert!((frequency_asymptote(2, 0.5, 0, 0).unwrap() - 0.5).abs() < 1e-15);
        assert!((frequency_asymptote(2, 0.5, 1, 10).unwrap() - 5.0).abs() < 1e-15);
        // k = 1 asymptote at n = 0 coincides with the exact f_{0,0}.
        let a = frequency_asymptote(1, 0.5, 0, 0).unwrap();
        assert!((a - 1.0 / 3.0).abs() < 1e-15);
        // frozen: f_{1,40} at (k=2, ε=0.5) is 20 to 1e−8
        let f = frequency(2, 0.5, 1, 40).unwrap();
        assert!((f - 20.0).abs() < 1e-8);
    }

    #[test]
    fn transport_is_a_diagonal_isometry_with_group_law() {
        let mut v = BTreeMap::new();
        v.insert(ChainIndex::new(0, 0), Complex64::new(0.3, -0.4));
        v.insert(ChainIndex::new(1, 2), Complex64::new(-1.0, 0.25));
        v.insert(ChainIndex::new(0, 5), Complex64::new(0.0, 2.0));
        let norm = |w: &BTreeMap<ChainIndex, Complex64>| -> f64 {
            w.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
        };
        let moved = transport_apply(2, 0.5, 1.3, &v).unwrap();
        assert!((norm(&moved) - norm(&v)).abs() < 1e-13 * norm(&v));
        // t = 0 is the identity
        let idty = transport_apply(2, 0.5, 0.0, &v).unwrap();
        for (ix, c) in &idty {
            assert_eq!(*c, v[ix]);
        }
        // group law in phases: U_{t1} U_{t2} = U_{t1+t2}
        let a = transport_apply(2, 0.5, 0.7, &moved).unwrap();
        let b = transport_apply(2, 0.5, 2.0, &v).unwrap();
        for (ix, c) in &a {
            assert!((c - b[ix]).norm() < 1e-12);
        }
        // monodromy of the lowest mode at k = 1, ε = 0.5: e^{2πi/3}
        let mono = monodromy_diagonal(1, 0.5, 3).unwrap();
        let phase = mono.phases[&ChainIndex::new(0, 0)];
        let expect = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!((phase - expect).norm() < 1e-12);
        for p in mono.phases.values() {
            assert!((p.norm() - 1.0).abs() < 1e-14);
        }
        // ε = 0: all monodromy phases are 1
        let triv = monodromy_diagonal(2, 0.0, 4).unwrap();
        for p in triv.phases.values() {
            assert!((p - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn difference_tables_approach_their_limits() {
        let d = frequency_differences(2, 0.5, 60).unwrap();
        assert_eq!(d.limit_r, -0.5);
        assert!((d.limit_n - 0.5).abs() < 1e-15);
        // interior raw difference matches the limit directly
        assert!((d.table.delta_r(1, 60) - (-0.5)).abs() < 1e-10);
        // at the wrap the raw difference is off by an integer; mod 1 it matches
        let wrap = d.table.delta_r(0, 60);
        assert!((wrap - 0.5).abs() < 1e-10, "raw wrap difference {wrap}");
        assert!(wrap_distance(wrap, d.limit_r) < 1e-10);
        for r in 0..2 {
            assert!((d.table.delta_n(r, 60) - d.limit_n).abs() < 1e-10);
        }
        // k = 1: Δn is exactly F/(1−F) for every n, and Δr wraps to zero.
        let d1 = frequency_differences(1, 0.5, 10).unwrap();
        for n in 1..=10 {
            assert!((d1.table.delta_n(0, n) - 1.0 / 3.0).abs() < 1e-13);
        }
        assert_eq!(d1.table.delta_r(0, 5), 0.0);
        assert!(wrap_distance(d1.table.delta_r(0, 5), -1.0) < 1e-15);
    }

    #[test]
    fn stable_deviations_match_raw_differences() {
        // where the raw difference still has headroom (small n), the
        // cancellation-free deviations agree with it
        for n in [0u32, 3, 8, 14] {
            let ft = FrequencyTable::build(3, 0.6, n + 2).unwrap();
            for r in 0..2 {
                let raw = ft.get(r, n) - ft.get(r + 1, n) - 1.0 / 3.0;
                let dev = r_step_deviation(3, 0.6, r, n).unwrap();
                assert!(
                    (raw - dev).abs() < 1e-11 * (1.0 + dev.abs()),
                    "r={r} n={n}: raw {raw:e} vs stable {dev:e}"
                );
            }
            let f = 0.6f64.powf(2.0 / 3.0);
            let rate = f / (3.0 * (1.0 - f));
            for r in 0..3 {
                let raw = ft.get(r, n) - ft.get(r, n + 1) + rate;
                let dev = n_step_deviation(3, 0.6, r, n).unwrap();
                assert!(
                    (raw - dev).abs() < 1e-11 * (1.0 + dev.abs()),
                    "r={r} n={n}: raw {raw:e} vs stable {dev:e}"
                );
            }
        }
        // and the stable form keeps decaying geometrically long after the
        // raw difference has hit the rounding floor
        let d40 = r_step_deviation(2, 0.5, 0, 40).unwrap().abs();
        let d80 = r_step_deviation(2, 0.5, 0, 80).unwrap().abs();
        assert!(d80 < d40 * 1e-15, "d40 {d40:e} d80 {d80:e}");
        assert!(d80 > 0.0);
    }

    #[test]
    fn flatness_certificate() {
        let trunc = TruncationSpec::default();
        // γ is flat
        for t in [0.0, 1.0, std::f64::consts::PI] {
            let res = flatness_residual(1, 0.5, t, 0, 0, FrameKind::Gamma, &trunc).unwrap();
            assert!(res < 1e-10, "t={t} residual {res:e}");
        }
        // ε = 0: γ constant, residual exactly 0
        let res0 = flatness_residual(2, 0.0, 0.3, 1, 2, FrameKind::Gamma, &trunc).unwrap();
        assert_eq!(res0, 0.0);
        // non-flat control: β projects to |f|
        let res_beta = flatness_residual(1, 0.5, 0.0, 0, 0, FrameKind::Beta, &trunc).unwrap();
        assert!((res_beta - 1.0 / 3.0).abs() < 1e-10, "{res_beta}");
    }

    proptest! {
        // Eq-of-routes: closed form vs moment ratio over a random box.
        #[test]
        fn prop_frequency_routes_agree(
            k in 1u32..=4,
            eps in 0.05f64..0.8,
            r_seed in 0u32..4,
            n in 0u32..=60,
        ) {
            let r = r_seed % k;
            let a = frequency(k, eps, r, n).unwrap();
            let b = frequency_series(k, eps, r, n, 1e-14).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
            prop_assert!(a >= 0.0);
        }
    }
}
