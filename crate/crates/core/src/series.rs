//! Binomial chain weights and the roots-of-unity series identities.
//!
//! The basic objects are the sums
//!
//! ```text
//!   S_l(k, E, r, n) = Σ_{q ≥ 0} C(n + r + kq, n) E^q q^l ,    |E| < 1,
//! ```
//!
//! which admit closed forms in terms of the k-th roots of unity for
//! l = 0, 1, 2 ([`closed_sum`]) and are summed directly with a certified
//! geometric tail bound for any l ([`series_sum`]).  The direct summation is
//! deliberately independent of the closed forms so the two can cross-check
//! each other.  An exact big-rational variant ([`series_sum_exact`]) backs
//! the exact-arithmetic tests.

use num::complex::Complex64;
use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

/// Hard cap on summation length; hitting it means the tail certificate
/// never became effective for the requested tolerance.
const MAX_TERMS: usize = 20_000_000;

/// Binomial coefficient C(top, bottom) by multiplicative recurrence.
///
/// Returns an error once the value overflows f64 range; never goes through
/// floating-point factorials.
pub fn binomial(top: u64, bottom: u64) -> Result<f64> {
    if bottom > top {
        return Ok(0.0);
    }
    let bottom = bottom.min(top - bottom);
    let mut acc = 1.0_f64;
    for i in 1..=bottom {
        acc *= (top - bottom + i) as f64;
        acc /= i as f64;
        if !acc.is_finite() {
            return Err(Error::Overflow { m: top, n: bottom });
        }
    }
    Ok(acc)
}

/// Exact binomial coefficient C(top, bottom).
pub fn binomial_exact(top: u64, bottom: u64) -> BigInt {
    if bottom > top {
        return BigInt::zero();
    }
    let bottom = bottom.min(top - bottom);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 1..=bottom {
        num *= BigInt::from(top - bottom + i);
        den *= BigInt::from(i);
    }
    num / den
}

/// The monomial weight ω_{m,n} = ‖z₁ᵐz₂ⁿ‖² = 1 / C(m+n, m).
///
/// Lies in (0, 1]; equals 1 whenever m = 0 or n = 0.
pub fn binomial_weight(m: u64, n: u64) -> Result<f64> {
    Ok(1.0 / binomial(m + n, m)?)
}

/// Exact rational monomial weight 1 / C(m+n, m).
pub fn binomial_weight_exact(m: u64, n: u64) -> BigRational {
    BigRational::new(BigInt::one(), binomial_exact(m + n, m))
}

/// Roots-of-unity data for the closed forms: F = E^{1/k} (principal branch,
/// positive real for positive real E), ζ_j = e^{2πij/k} and a_j = 1 − ζ_j F.
#[derive(Debug, Clone)]
pub struct RootData {
    pub k: u32,
    pub e: Complex64,
    pub f: Complex64,
    pub zeta: Vec<Complex64>,
    pub a: Vec<Complex64>,
}

impl RootData {
    pub fn new(k: u32, e: Complex64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        let modulus = e.norm();
        if modulus >= 1.0 {
            return Err(Error::DivergentSeries { modulus });
        }
        let f = if e.im == 0.0 && e.re >= 0.0 {
            Complex64::new(e.re.powf(1.0 / k as f64), 0.0)
        } else {
            e.powf(1.0 / k as f64)
        };
        let zeta: Vec<Complex64> = (0..k)
            .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / k as f64))
            .collect();
        let a: Vec<Complex64> = zeta.iter().map(|z| Complex64::new(1.0, 0.0) - z * f).collect();
        Ok(RootData { k, e, f, zeta, a })
    }

    /// Index of the root factor a_j of smallest modulus (j = 0 for real E ≥ 0).
    pub fn min_modulus_index(&self) -> usize {
        let mut best = 0;
        for (j, aj) in self.a.iter().enumerate() {
            if aj.norm() < self.a[best].norm() {
                best = j;
            }
        }
        best
    }

    /// ζ_j^s for possibly negative s (periodic mod k).
    fn zeta_pow(&self, j: usize, s: i64) -> Complex64 {
        let k = self.k as i64;
        let idx = ((j as i64 * s) % k + k) % k;
        self.zeta[idx as usize]
    }

    /// Scaled root sum Σ_j ζ_j^{−s} (a*/a_j)^p, with a* the smallest-modulus
    /// root factor; the unscaled sum Σ_j ζ_j^{−s} a_j^{−p} equals
    /// a*^{−p} times this value.  All summands here have modulus ≤ 1, so the
    /// scaled form stays representable for any chain depth.
    pub fn scaled_zeta_sum(&self, s: i64, p: u32) -> Complex64 {
        let star = self.min_modulus_index();
        let a_star = self.a[star];
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.k as usize {
            let ratio = a_star / self.a[j];
            acc += self.zeta_pow(j, -s) * ratio.powu(p);
        }
        acc
    }

    /// Same as [`Self::scaled_zeta_sum`] but omitting the dominant j-term, so
    /// the result is the (exponentially small) deviation of the scaled sum
    /// from its leading ζ-power.  Only meaningful when the dominant index is
    /// unique, which holds for real E ∈ (0, 1).
    pub fn scaled_zeta_tail(&self, s: i64, p: u32) -> Complex64 {
        let star = self.min_modulus_index();
        let a_star = self.a[star];
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.k as usize {
            if j == star {
                continue;
            }
            let ratio = a_star / self.a[j];
            acc += self.zeta_pow(j, -s) * ratio.powu(p);
        }
        acc
    }
}

/// Value of a truncated series together with its certificate.
#[derive(Debug, Clone, Copy)]
pub struct SeriesResult {
    pub value: Complex64,
    /// Index of the last term included.
    pub q_used: usize,
    /// Certified upper bound on the modulus of the discarded tail.
    pub tail_bound: f64,
}

/// Exact counterpart of [`SeriesResult`] for rational E.
#[derive(Debug, Clone)]
pub struct ExactSeriesResult {
    pub value: BigRational,
    pub q_used: usize,
    pub tail_bound: BigRational,
}

/// Geometric majorant of all term ratios T_{q'+1}/T_{q'} for q' ≥ q, where
/// T_q = C(n+r+kq, n) |E|^q q^l.  Decreasing in q, so a single evaluation
/// certifies the whole tail beyond q.
fn ratio_majorant(e_mod: f64, k: u32, r: u32, n: u32, l: u32, q: usize) -> f64 {
    let growth = (1.0 + n as f64 / (r as u64 + k as u64 * q as u64 + 1) as f64).powi(k as i32);
    let power = if l == 0 {
        1.0
    } else {
        ((q as f64 + 1.0) / q as f64).powi(l as i32)
    };
    e_mod * growth * power
}

/// Direct summation of Σ_q C(n+r+kq, n) E^q q^l until the certified
/// geometric tail bound drops below `tol` (an absolute bound on the
/// discarded tail).  Supports every l ≥ 0 and any offset r ≥ 0, unlike the
/// closed forms (which need r < k).
pub fn series_sum(
    k: u32,
    e: Complex64,
    r: u32,
    n: u32,
    l: u32,
    tol: f64,
) -> Result<SeriesResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::NonPositiveTolerance(tol));
    }
    let e_mod = e.norm();
    if e_mod >= 1.0 {
        return Err(Error::DivergentSeries { modulus: e_mod });
    }

    // base = C(n+r, n); base_q evolves as C(n+r+kq, n) E^q.
    let base0 = binomial(r as u64 + n as u64, n as u64)?;
    let mut coeff = Complex64::new(base0, 0.0);
    let mut coeff_mod = base0;
    let mut value = Complex64::new(0.0, 0.0);
    // The ratio majorant needs q ≥ 1 when the q^l factor is present.
    let q_min = if l == 0 { 0 } else { 1 };

    for q in 0..MAX_TERMS {
        let power = if l == 0 { 1.0 } else { (q as f64).powi(l as i32) };
        value += coeff * power;
        if !value.is_finite() {
            return Err(Error::Overflow {
                m: r as u64 + k as u64 * q as u64,
                n: n as u64,
            });
        }
        if q >= q_min {
            let rho = ratio_majorant(e_mod, k, r, n, l, q);
            if rho < 1.0 {
                let tail = coeff_mod * power * rho / (1.0 - rho);
                if tail <= tol {
                    return Ok(SeriesResult {
                        value,
                        q_used: q,
                        tail_bound: tail,
                    });
                }
            }
        }
        // advance C(n+r+kq, n) E^q -> next q
        let mut step = 1.0;
        for i in 1..=k as u64 {
            let idx = n as u64 + r as u64 + k as u64 * q as u64 + i;
            step *= idx as f64 / (idx - n as u64) as f64;
        }
        coeff *= e * step;
        coeff_mod *= e_mod * step;
        if !coeff_mod.is_finite() {
            return Err(Error::Overflow {
                m: r as u64 + k as u64 * q as u64,
                n: n as u64,
            });
        }
    }
    Err(Error::TailNotCertified { max_terms: MAX_TERMS })
}

/// Exact-rational variant of [`series_sum`].  The returned partial sum and
/// tail bound are exact; the oracle side of every closed-form cross-check.
pub fn series_sum_exact(
    k: u32,
    e: &BigRational,
    r: u32,
    n: u32,
    l: u32,
    tol: &BigRational,
) -> Result<ExactSeriesResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if !tol.is_positive() {
        return Err(Error::NonPositiveTolerance(0.0));
    }
    let e_abs = e.abs();
    if e_abs >= BigRational::one() {
        return Err(Error::DivergentSeries { modulus: 1.0 });
    }

    let base = BigRational::from(binomial_exact(r as u64 + n as u64, n as u64));
    let mut coeff_e = base.clone(); // C(n+r+kq, n) E^q, signed
    let mut coeff_abs = base; // C(n+r+kq, n) |E|^q
    let mut value = BigRational::zero();
    let q_min = if l == 0 { 0 } else { 1 };

    for q in 0..MAX_TERMS {
        let power = BigInt::from(q).pow(l);
        value += &coeff_e * BigRational::from(power.clone());
        if q >= q_min {
            // exact ratio majorant
            let growth_base = BigRational::one()
                + BigRational::new(
                    BigInt::from(n),
                    BigInt::from(r as u64 + k as u64 * q as u64 + 1),
                );
            let mut rho = e_abs.clone();
            for _ in 0..k {
                rho *= &growth_base;
            }
            if l > 0 {
                let pow_ratio =
                    BigRational::new(BigInt::from(q as u64 + 1), BigInt::from(q as u64));
                for _ in 0..l {
                    rho *= &pow_ratio;
                }
            }
            if rho < BigRational::one() {
                let tail = &coeff_abs * BigRational::from(power) * &rho
                    / (BigRational::one() - &rho);
                if tail <= *tol {
                    return Ok(ExactSeriesResult {
                        value,
                        q_used: q,
                        tail_bound: tail,
                    });
                }
            }
        }
        let mut step_num = BigInt::one();
        let mut step_den = BigInt::one();
        for i in 1..=k as u64 {
            let idx = n as u64 + r as u64 + k as u64 * q as u64 + i;
            step_num *= BigInt::from(idx);
            step_den *= BigInt::from(idx - n as u64);
        }
        let step = BigRational::new(step_num, step_den);
        coeff_e *= e * &step;
        coeff_abs *= &e_abs * &step;
    }
    Err(Error::TailNotCertified { max_terms: MAX_TERMS })
}

/// Closed form of Σ_q C(n+r+kq, n) E^q q^l for l = 0, 1, 2 via the
/// roots-of-unity sums; singular scaling is avoided by factoring out the
/// dominant root power.  E = 0 degenerates to the single q = 0 term and is
/// handled without root data.
pub fn closed_sum(k: u32, e: Complex64, r: u32, n: u32, l: u32) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if r >= k {
        return Err(Error::ResidueOutOfRange { r, k });
    }
    if l > 2 {
        return Err(Error::UnsupportedMomentPower(l));
    }
    let e_mod = e.norm();
    if e_mod >= 1.0 {
        return Err(Error::DivergentSeries { modulus: e_mod });
    }
    if e_mod == 0.0 {
        let only = binomial(r as u64 + n as u64, n as u64)?;
        return Ok(if l == 0 {
            Complex64::new(only, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        });
    }

    let root = RootData::new(k, e)?;
    let star = root.min_modulus_index();
    let a_star = root.a[star];
    let f = root.f;
    let kf = k as f64;
    let rf = r as f64;
    let nf = n as f64;

    // Σ_j ζ^{-r+m} a^{-n-1-m} = a*^{-(n+1+m)} * scaled(r - m, n+1+m)
    let scaled = |m: u32| root.scaled_zeta_sum(r as i64 - m as i64, n + 1 + m);
    let unscale = |m: u32| {
        // a*^{-(n+1+m)}
        a_star.powi(-(n as i32 + 1 + m as i32))
    };

    let f_pow_mr = f.powi(-(r as i32));
    let value = match l {
        0 => f_pow_mr / kf * scaled(0) * unscale(0),
        1 => {
            f_pow_mr / (kf * kf)
                * (scaled(0) * unscale(0) * (-rf) + f * (nf + 1.0) * scaled(1) * unscale(1))
        }
        _ => {
            f_pow_mr / (kf * kf * kf)
                * (scaled(0) * unscale(0) * (rf * rf)
                    + f * ((1.0 - 2.0 * rf) * (nf + 1.0)) * scaled(1) * unscale(1)
                    + f * f * ((nf + 1.0) * (nf + 2.0)) * scaled(2) * unscale(2))
        }
    };
    if !value.is_finite() {
        return Err(Error::Overflow {
            m: r as u64,
            n: n as u64,
        });
    }
    Ok(value)
}

/// The comparison sequence S_l(n) / (n^l (1−F)^{−n}) over n in
/// `n_lo..=n_hi`, with F = E^{1/k}.  The numerators come from the direct
/// summation oracle, never from the closed forms.
pub fn asymptotic_ratio(
    k: u32,
    e: f64,
    r: u32,
    l: u32,
    n_lo: u32,
    n_hi: u32,
    tol: f64,
) -> Result<Vec<f64>> {
    if n_lo > n_hi {
        return Err(Error::EmptyRange);
    }
    if !(e > 0.0 && e < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "asymptotic ratios need real E in (0, 1), got {e}"
        )));
    }
    if l > 0 && n_lo == 0 {
        return Err(Error::InvalidParameter(
            "n range must start at n >= 1 when l >= 1".into(),
        ));
    }
    let f = e.powf(1.0 / k as f64);
    let mut out = Vec::with_capacity((n_hi - n_lo + 1) as usize);
    for n in n_lo..=n_hi {
        let num = series_sum(k, Complex64::new(e, 0.0), r, n, l, tol)?.value.re;
        let denom = (n as f64).powi(l as i32) * (1.0 - f).powi(-(n as i32));
        if !denom.is_finite() || denom == 0.0 {
            return Err(Error::Overflow {
                m: r as u64,
                n: n as u64,
            });
        }
        out.push(num / denom);
    }
    Ok(out)
}

/// Normalized chain moments E[q^p] for p = 0..=max_power under the weights
/// π_q ∝ C(n+r+kq, n) ε^{2q}.  Accumulators are rescaled on the fly so the
/// moments stay finite for any chain depth (the raw sums overflow f64 long
/// before the ratios become inaccurate).  Summation stops once every moment
/// carries a certified relative tail below `rel_tol`.
pub fn chain_moments(
    k: u32,
    epsilon: f64,
    r: u32,
    n: u32,
    max_power: u32,
    rel_tol: f64,
) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if r >= k {
        return Err(Error::ResidueOutOfRange { r, k });
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::NonPositiveTolerance(rel_tol));
    }
    let p_count = max_power as usize + 1;
    if epsilon == 0.0 {
        let mut m = vec![0.0; p_count];
        m[0] = 1.0;
        return Ok(m);
    }
    let e = epsilon * epsilon;
    let mut sums = vec![0.0_f64; p_count];
    let mut w = 1.0_f64; // C(n+r, n) ε^0, rescaled to 1: moments are scale-free
    const RESCALE_ABOVE: f64 = 1e250;

    for q in 0..MAX_TERMS {
        let mut qp = 1.0;
        for s in sums.iter_mut() {
            *s += w * qp;
            qp *= q as f64;
        }
        if sums[0] > RESCALE_ABOVE {
            let inv = 1.0 / sums[0];
            for s in sums.iter_mut() {
                *s *= inv;
            }
            w *= inv;
        }
        if q >= 1 {
            let mut certified = true;
            for (p, s) in sums.iter().enumerate() {
                let rho = ratio_majorant(e, k, r, n, p as u32, q);
                if rho >= 1.0 {
                    certified = false;
                    break;
                }
                let tail = w * (q as f64).powi(p as i32) * rho / (1.0 - rho);
                if tail > rel_tol * s {
                    certified = false;
                    break;
                }
            }
            if certified {
                let s0 = sums[0];
                return Ok(sums.iter().map(|s| s / s0).collect());
            }
        }
        let mut step = 1.0;
        for i in 1..=k as u64 {
            let idx = n as u64 + r as u64 + k as u64 * q as u64 + i;
            step *= idx as f64 / (idx - n as u64) as f64;
        }
        w *= e * step;
    }
    Err(Error::TailNotCertified { max_terms: MAX_TERMS })
}

/// Normalized chain weight profile π_q = C(n+r+kq, n) ε^{2q} / Σ(..) with a
/// certified relative tail below `rel_tol` both in mass and in the
/// `moment_power`-weighted sum (so downstream moment accumulations up to
/// that power inherit the accuracy), extended to at least `min_len` entries
/// when a caller needs explicit (vanishingly small) weights beyond the
/// bulk.  Shared by the moment and Hilbert-Schmidt accounting paths.
pub fn chain_weight_profile(
    k: u32,
    epsilon: f64,
    r: u32,
    n: u32,
    rel_tol: f64,
    min_len: usize,
    moment_power: u32,
) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if r >= k {
        return Err(Error::ResidueOutOfRange { r, k });
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    if epsilon == 0.0 {
        let mut out = vec![0.0; min_len.max(1)];
        out[0] = 1.0;
        return Ok(out);
    }
    let e = epsilon * epsilon;
    let p = moment_power;
    let mut weights = Vec::new();
    let mut w = 1.0_f64;
    let mut total = 0.0_f64;
    let mut weighted_total = 0.0_f64; // Σ w_q q^p
    const RESCALE_ABOVE: f64 = 1e250;

    for q in 0..MAX_TERMS {
        weights.push(w);
        total += w;
        if p > 0 {
            weighted_total += w * (q as f64).powi(p as i32);
        }
        if total > RESCALE_ABOVE {
            let inv = 1.0 / total;
            for x in weights.iter_mut() {
                *x *= inv;
            }
            total *= inv;
            weighted_total *= inv;
            w *= inv;
        }
        if weights.len() >= min_len && (p == 0 || q >= 1) {
            let rho0 = ratio_majorant(e, k, r, n, 0, q);
            let mass_ok = rho0 < 1.0 && w * rho0 / (1.0 - rho0) <= rel_tol * total;
            let moment_ok = if p == 0 {
                true
            } else {
                let rho_p = ratio_majorant(e, k, r, n, p, q);
                rho_p < 1.0
                    && w * (q as f64).powi(p as i32) * rho_p / (1.0 - rho_p)
                        <= rel_tol * weighted_total.max(f64::MIN_POSITIVE)
            };
            if mass_ok && moment_ok {
                let inv = 1.0 / total;
                for x in weights.iter_mut() {
                    *x *= inv;
                }
                return Ok(weights);
            }
        }
        let mut step = 1.0;
        for i in 1..=k as u64 {
            let idx = n as u64 + r as u64 + k as u64 * q as u64 + i;
            step *= idx as f64 / (idx - n as u64) as f64;
        }
        w *= e * step;
    }
    Err(Error::TailNotCertified { max_terms: MAX_TERMS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn binomial_weights_basic() {
        assert_eq!(binomial_weight(0, 0).unwrap(), 1.0);
        assert_eq!(binomial_weight(1, 1).unwrap(), 0.5);
        assert_eq!(binomial_weight(2, 3).unwrap(), 0.1);
        assert_eq!(binomial_weight(7, 0).unwrap(), 1.0);
        assert_eq!(binomial_weight(0, 9).unwrap(), 1.0);
        let exact = binomial_weight_exact(2, 3);
        assert_eq!(exact, BigRational::new(BigInt::from(1), BigInt::from(10)));
    }

    #[test]
    fn binomial_overflow_is_an_error() {
        assert!(binomial(4000, 2000).is_err());
        assert!(binomial(60, 30).is_ok());
    }

    #[test]
    fn root_data_invariants() {
        let root = RootData::new(3, c(0.125)).unwrap();
        assert!((root.f.re - 0.5).abs() < 1e-15 && root.f.im == 0.0);
        // Π ζ_j = (−1)^{k−1}
        let prod: Complex64 = root.zeta.iter().product();
        assert!((prod - c(1.0)).norm() < 1e-14);
        assert_eq!(root.min_modulus_index(), 0);
        let root4 = RootData::new(4, c(0.5)).unwrap();
        let prod4: Complex64 = root4.zeta.iter().product();
        assert!((prod4 - c(-1.0)).norm() < 1e-14);
    }

    #[test]
    fn roots_of_unity_filter() {
        // ψ_q = (1/k) Σ_j ζ_j^{q−r} is the indicator of q ≡ r (mod k).
        for k in 1..=5u32 {
            let root = RootData::new(k, c(0.3)).unwrap();
            for r in 0..k {
                for q in 0..=10 * k {
                    let mut psi = Complex64::new(0.0, 0.0);
                    for j in 0..k as usize {
                        psi += root.zeta_pow(j, q as i64 - r as i64);
                    }
                    psi /= k as f64;
                    let expect = if q % k == r { 1.0 } else { 0.0 };
                    assert!(
                        (psi - c(expect)).norm() < 1e-12,
                        "k={k} r={r} q={q} psi={psi}"
                    );
                }
            }
        }
    }

    #[test]
    fn geometric_series_cases() {
        // k arbitrary, r = 0, n = 0, l = 0 is a plain geometric series in E.
        for k in [1u32, 2, 3] {
            let v = closed_sum(k, c(0.25), 0, 0, 0).unwrap();
            assert!((v - c(4.0 / 3.0)).norm() < 1e-14, "k={k} v={v}");
        }
        // l = 0, k = 1 matches the negative binomial formula (1−E)^{−n−1}.
        for n in [0u32, 1, 5, 17] {
            let v = closed_sum(1, c(0.25), 0, n, 0).unwrap();
            let expect = (1.0 - 0.25_f64).powi(-(n as i32) - 1);
            assert!((v.re - expect).abs() <= 1e-12 * expect);
        }
    }

    #[test]
    fn series_sum_truncates_at_e_zero() {
        let s = series_sum(1, c(0.0), 5, 3, 0, 1e-15).unwrap();
        assert_eq!(s.value.re, 56.0); // C(8,3)
        assert_eq!(s.tail_bound, 0.0);
        let s1 = series_sum(1, c(0.0), 5, 3, 1, 1e-15).unwrap();
        assert_eq!(s1.value.re, 0.0);
    }

    #[test]
    fn series_matches_frozen_rational_value() {
        // Σ_q C(2q+2, 1)·0.25^q = Σ (2q+2)/4^q = 32/9.
        let s = series_sum(2, c(0.25), 1, 1, 0, 1e-15).unwrap();
        assert!((s.value.re - 32.0 / 9.0).abs() < 1e-13);
        assert!(s.tail_bound < 1e-15);
        // The same sum in exact arithmetic.
        let e = BigRational::new(BigInt::from(1), BigInt::from(4));
        let tol = BigRational::new(BigInt::from(1), BigInt::from(10u64.pow(18)));
        let exact = series_sum_exact(2, &e, 1, 1, 0, &tol).unwrap();
        let diff = (&exact.value - BigRational::new(BigInt::from(32), BigInt::from(9))).abs();
        assert!(diff <= exact.tail_bound, "diff {diff} tail {}", exact.tail_bound);
    }

    #[test]
    fn closed_sum_agrees_with_series_oracle() {
        let s = series_sum(3, c(0.1), 1, 2, 1, 1e-15).unwrap();
        let v = closed_sum(3, c(0.1), 1, 2, 1).unwrap();
        assert!((v - s.value).norm() <= s.tail_bound + 1e-12 * v.norm());
        assert!(closed_sum(2, c(0.25), 0, 0, 3).is_err());
        assert!(closed_sum(2, c(1.5), 0, 0, 0).is_err());
    }

    #[test]
    fn closed_sum_complex_e() {
        let e = Complex64::new(0.2, 0.35);
        for l in 0..=2 {
            let s = series_sum(3, e, 2, 4, l, 1e-15).unwrap();
            let v = closed_sum(3, e, 2, 4, l).unwrap();
            assert!(
                (v - s.value).norm() <= s.tail_bound + 1e-12 * v.norm(),
                "l={l} closed={v} series={}",
                s.value
            );
        }
    }

    #[test]
    fn asymptotic_ratio_geometric_case() {
        // k = 1: Σ = (1−E)^{−n−1}, so the ratio is constantly (1−E)^{−1}.
        let seq = asymptotic_ratio(1, 0.25, 0, 0, 10, 50, 1e-15).unwrap();
        for v in &seq {
            assert!((v - 4.0 / 3.0).abs() < 1e-12);
        }
        // k = 2: converges to the dominant-root constant (1/2)(1−F)^{−1} = 1.
        let seq2 = asymptotic_ratio(2, 0.25, 0, 0, 50, 200, 1e-15).unwrap();
        let last = seq2.last().unwrap();
        assert!((last - 1.0).abs() < 1e-12);
        // l = 2 sequence converges (limit value not asserted).
        let seq3 = asymptotic_ratio(2, 0.25, 1, 2, 50, 120, 1e-15).unwrap();
        let tail_incr = (seq3[69] - seq3[68]).abs();
        assert!(tail_incr < 1e-3, "increment {tail_incr}");
    }

    #[test]
    fn chain_moments_match_series_ratios() {
        for (k, eps, r, n) in [(1u32, 0.5, 0u32, 0u32), (2, 0.5, 1, 7), (3, 0.4, 2, 11)] {
            let m = chain_moments(k, eps, r, n, 2, 1e-14).unwrap();
            let e = c(eps * eps);
            let s0 = series_sum(k, e, r, n, 0, 1e-14).unwrap().value.re;
            let s1 = series_sum(k, e, r, n, 1, 1e-14).unwrap().value.re;
            let s2 = series_sum(k, e, r, n, 2, 1e-14).unwrap().value.re;
            assert!((m[1] - s1 / s0).abs() < 1e-11 * (1.0 + m[1]));
            assert!((m[2] - s2 / s0).abs() < 1e-11 * (1.0 + m[2]));
        }
    }

    #[test]
    fn chain_weight_profile_is_normalized() {
        let pi = chain_weight_profile(2, 0.5, 1, 9, 1e-13, 0, 0).unwrap();
        let total: f64 = pi.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let m = chain_moments(2, 0.5, 1, 9, 1, 1e-13).unwrap();
        let mean: f64 = pi.iter().enumerate().map(|(q, p)| q as f64 * p).sum();
        assert!((mean - m[1]).abs() < 1e-10);
        // min_len extension pads with the true (tiny) weights
        let long = chain_weight_profile(2, 0.5, 1, 9, 1e-13, pi.len() + 40, 0).unwrap();
        assert!(long.len() >= pi.len() + 40);
        assert!((long.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    proptest! {
        // Closed form vs direct summation across the admissible parameter box.
        #[test]
        fn prop_closed_vs_series(
            k in 1u32..=5,
            e in 0.01f64..0.8,
            r_seed in 0u32..5,
            n in 0u32..=50,
            l in 0u32..=2,
        ) {
            let r = r_seed % k;
            let closed = closed_sum(k, c(e), r, n, l).unwrap();
            let series = series_sum(k, c(e), r, n, l, 1e-15).unwrap();
            let budget = series.tail_bound + 1e-12 * closed.norm();
            prop_assert!((closed - series.value).norm() <= budget);
        }

        // The certified tail bound really bounds the truncation error:
        // summing further can move the value by at most the recorded bound.
        #[test]
        fn prop_tail_bound_is_a_certificate(
            k in 1u32..=4,
            e in 0.05f64..0.7,
            n in 0u32..=20,
            l in 0u32..=3,
        ) {
            let coarse = series_sum(k, c(e), 0, n, l, 1e-6).unwrap();
            let fine = series_sum(k, c(e), 0, n, l, 1e-15).unwrap();
            prop_assert!(
                (coarse.value - fine.value).norm() <= coarse.tail_bound + fine.tail_bound + 1e-12 * fine.value.norm()
            );
        }
    }
}
