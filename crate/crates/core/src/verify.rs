//! The cross-validation suite: sixteen numbered checks covering every
//! closed form, limit, and scaling law the library implements, each with a
//! pinned tolerance.  The suite is fully deterministic — random draws use a
//! fixed-seed ChaCha stream and no wall-clock data enters the report — so
//! identical runs render byte-identical reports (which check 16 asserts).
//!
//! Runtime budgets are enforced where a check carries one, but only the
//! boolean outcome is reported to keep the output reproducible.

use std::collections::BTreeMap;
use std::time::Instant;

use num::complex::Complex64;
use num::{BigInt, BigRational, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::frames::{self, ChainIndex, FrameKind, TruncationSpec};
use crate::general::{self, GmChainStart, MatchVerdict};
use crate::series;
use crate::sobolev;
use crate::toeplitz::{self, ShiftOp};
use crate::transport;

/// Outcome of one numbered check.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

impl CheckResult {
    fn new(id: u32, name: &'static str, passed: bool, details: String) -> Self {
        CheckResult {
            id,
            name,
            passed,
            details,
        }
    }
}

/// Run every check in order.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        criterion_01(),
        criterion_02(),
        criterion_03(),
        criterion_04(),
        criterion_05(),
        criterion_06(),
        criterion_07(),
        criterion_08(),
        criterion_09(),
        criterion_10(),
        criterion_11(),
        criterion_12(),
        criterion_13(),
        criterion_14(),
        criterion_15(),
        criterion_16(),
    ]
}

/// One pass/fail line per check.
pub fn render_report(results: &[CheckResult]) -> String {
    let mut out = String::new();
    for r in results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{tag}  {:>2}  {:<34}  {}\n", r.id, r.name, r.details));
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    out.push_str(&format!(
        "{} of {} checks passed\n",
        results.len() - failed,
        results.len()
    ));
    out
}

fn budget_ok(start: Instant, secs: f64) -> bool {
    start.elapsed().as_secs_f64() < secs
}

/// 1: closed forms vs the summation oracle on random draws.
pub fn criterion_01() -> CheckResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xda01);
    let mut max_rel = 0.0f64;
    let mut ok = true;
    for _ in 0..100 {
        let k = rng.random_range(1u32..=5);
        let e = rng.random_range(0.0f64..0.8);
        let r = rng.random_range(0..k);
        let n = rng.random_range(0u32..=50);
        let l = rng.random_range(0u32..=2);
        let closed = match series::closed_sum(k, Complex64::new(e, 0.0), r, n, l) {
            Ok(v) => v,
            Err(err) => {
                return CheckResult::new(1, "closed sum vs series oracle", false, err.to_string())
            }
        };
        let direct = series::series_sum(k, Complex64::new(e, 0.0), r, n, l, 1e-15).unwrap();
        let scale = closed.norm().max(1e-300);
        let rel = (closed - direct.value).norm() / scale;
        max_rel = max_rel.max(rel);
        ok &= rel <= 1e-10;
    }
    let in_budget = budget_ok(start, 5.0);
    CheckResult::new(
        1,
        "closed sum vs series oracle",
        ok && in_budget,
        format!(
            "100 draws, max relative deviation {max_rel:.3e} (tol 1e-10), within 5 s budget: {in_budget}"
        ),
    )
}

/// 2: normalized asymptotic ratios are Cauchy with small late increments.
pub fn criterion_02() -> CheckResult {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [0u32, 1] {
        for l in [0u32, 1, 2] {
            let seq = match series::asymptotic_ratio(2, 0.25, r, l, 50, 200, 1e-15) {
                Ok(s) => s,
                Err(err) => {
                    return CheckResult::new(2, "asymptotic ratio increments", false, err.to_string())
                }
            };
            // entries are n = 50..=200; increments past n = 100
            let mut worst = 0.0f64;
            for i in 50..seq.len() - 1 {
                worst = worst.max((seq[i + 1] - seq[i]).abs());
            }
            ok &= worst < 1e-6;
            parts.push(format!("(r={r},l={l}): {worst:.3e}"));
        }
    }
    CheckResult::new(
        2,
        "asymptotic ratio increments",
        ok,
        format!("max increments past n=100 (tol 1e-6): {}", parts.join(", ")),
    )
}

/// 3: Gram matrix of β is the identity on the truncated window.
pub fn criterion_03() -> CheckResult {
    let start = Instant::now();
    let trunc = TruncationSpec::default();
    let mut indices = Vec::new();
    for r in 0..3 {
        for n in 0..=40 {
            indices.push(ChainIndex::new(r, n));
        }
    }
    let gram = match frames::gram(3, 0.4, 1.0, &indices, &trunc) {
        Ok(g) => g,
        Err(err) => return CheckResult::new(3, "frame orthonormality", false, err.to_string()),
    };
    let mut max_dev = 0.0f64;
    for (i, row) in gram.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            max_dev = max_dev.max((v - Complex64::new(expect, 0.0)).norm());
        }
    }
    let in_budget = budget_ok(start, 5.0);
    CheckResult::new(
        3,
        "frame orthonormality",
        max_dev < 1e-10 && in_budget,
        format!(
            "{} chains, max |Gram - I| = {max_dev:.3e} (tol 1e-10), within 5 s budget: {in_budget}",
            indices.len()
        ),
    )
}

/// 4: exact-backend membership residuals vanish identically.
pub fn criterion_04() -> CheckResult {
    let eps = BigRational::new(BigInt::from(1), BigInt::from(2));
    let mut nonzero = 0u32;
    for m_exp in 0..=30u64 {
        for n_exp in 0..=20u32 {
            let r = (m_exp % 2) as u32;
            let res = frames::membership_residual_exact(2, &eps, r, n_exp, m_exp, n_exp).unwrap();
            if !res.is_zero() {
                nonzero += 1;
            }
        }
    }
    CheckResult::new(
        4,
        "exact submodule membership",
        nonzero == 0,
        format!("31x21 generator pairings at eps = 1/2, t = 0: {nonzero} nonzero residuals"),
    )
}

/// 5: frequency closed form vs moment-ratio oracle, and the exact k = 1 law.
pub fn criterion_05() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0xda05);
    let mut max_rel = 0.0f64;
    let mut ok = true;
    for _ in 0..100 {
        let k = rng.random_range(1u32..=4);
        let eps = rng.random_range(0.05f64..0.8);
        let r = rng.random_range(0..k);
        let n = rng.random_range(0u32..=60);
        let a = transport::frequency(k, eps, r, n).unwrap();
        let b = transport::frequency_series(k, eps, r, n, 1e-14).unwrap();
        let rel = (a - b).abs() / a.abs().max(1e-300);
        max_rel = max_rel.max(rel);
        ok &= rel <= 1e-10;
    }
    let mut max_k1 = 0.0f64;
    for eps in [0.3f64, 0.5, 0.7] {
        let f_big = eps * eps;
        for n in 0..=40u32 {
            let expect = f_big * (n as f64 + 1.0) / (1.0 - f_big);
            let got = transport::frequency(1, eps, 0, n).unwrap();
            let rel = (got - expect).abs() / expect;
            max_k1 = max_k1.max(rel);
            ok &= rel <= 1e-12;
        }
    }
    CheckResult::new(
        5,
        "frequency route consistency",
        ok,
        format!(
            "100 draws max rel {max_rel:.3e} (tol 1e-10); k=1 exact law max rel {max_k1:.3e} (tol 1e-12)"
        ),
    )
}

/// 6: asymptote gap below 1e-8 for all n >= 40 at (k=2, eps=0.5).
pub fn criterion_06() -> CheckResult {
    let mut max_gap = 0.0f64;
    for r in 0..2 {
        for n in 40..=200u32 {
            let f = transport::frequency(2, 0.5, r, n).unwrap();
            let a = transport::frequency_asymptote(2, 0.5, r, n).unwrap();
            max_gap = max_gap.max((f - a).abs());
        }
    }
    CheckResult::new(
        6,
        "asymptote gap",
        max_gap < 1e-8,
        format!("max |f - asymptote| over r<2, 40<=n<=200: {max_gap:.3e} (tol 1e-8)"),
    )
}

/// 7: difference limits at n = 200, compared modulo 1 at the chain wrap.
pub fn criterion_07() -> CheckResult {
    let d = transport::frequency_differences(2, 0.5, 200).unwrap();
    let mut max_r = 0.0f64;
    let mut max_n = 0.0f64;
    for r in 0..2 {
        max_r = max_r.max(transport::wrap_distance(d.table.delta_r(r, 200), -0.5));
        max_n = max_n.max((d.table.delta_n(r, 200) - 0.5).abs());
    }
    CheckResult::new(
        7,
        "difference limits",
        max_r < 1e-8 && max_n < 1e-8,
        format!(
            "|delta_r + 1/2| mod 1: {max_r:.3e}, |delta_n - 1/2|: {max_n:.3e} (tol 1e-8)"
        ),
    )
}

/// 8: transport unitarity on random vectors and flatness of gamma.
pub fn criterion_08() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0xda08);
    let mut max_norm_dev = 0.0f64;
    for _ in 0..20 {
        let mut v = BTreeMap::new();
        for _ in 0..8 {
            let ix = ChainIndex::new(rng.random_range(0..2u32), rng.random_range(0..=20u32));
            let val = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            v.insert(ix, val);
        }
        let t = rng.random_range(0.0..10.0);
        let before: f64 = v.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let after: f64 = transport::transport_apply(2, 0.5, t, &v)
            .unwrap()
            .values()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        max_norm_dev = max_norm_dev.max((after - before).abs() / before);
    }
    let trunc = TruncationSpec::default();
    let mut max_flat = 0.0f64;
    for t in [0.0, 1.0, std::f64::consts::PI] {
        for r in 0..2 {
            for n in 0..=20 {
                let res =
                    transport::flatness_residual(2, 0.5, t, r, n, FrameKind::Gamma, &trunc).unwrap();
                max_flat = max_flat.max(res);
            }
        }
    }
    CheckResult::new(
        8,
        "unitarity and flatness",
        max_norm_dev < 1e-12 && max_flat < 1e-9,
        format!(
            "20 vectors max norm deviation {max_norm_dev:.3e} (tol 1e-12); \
             flatness residual max {max_flat:.3e} (tol 1e-9)"
        ),
    )
}

/// 9: weighted-shift closed forms vs raw inner products.
pub fn criterion_09() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0xda09);
    let trunc = TruncationSpec {
        n_max: 45,
        ..TruncationSpec::default()
    };
    let mut max_dev = 0.0f64;
    let mut done = 0;
    while done < 50 {
        let k = rng.random_range(1u32..=4);
        let eps = rng.random_range(0.05f64..0.7);
        let r = rng.random_range(0..k);
        let n = rng.random_range(0u32..=40);
        let op = ShiftOp::ALL[rng.random_range(0..4usize)];
        // interior indices only: wrap steps and vanishing images are skipped
        let interior = match op {
            ShiftOp::T1 => r + 1 < k,
            ShiftOp::T1Adj => r >= 1,
            ShiftOp::T2 => true,
            ShiftOp::T2Adj => n >= 1,
        };
        if !interior {
            continue;
        }
        let (_, entry) = toeplitz::matrix_entry(k, eps, 0.0, op, ChainIndex::new(r, n), &trunc)
            .unwrap()
            .unwrap();
        let weight = toeplitz::shift_weight(k, eps, op, r, n).unwrap();
        let dev = (entry - weight).norm();
        max_dev = max_dev.max(dev);
        done += 1;
    }
    let mut max_t2 = 0.0f64;
    let expect = (1.0f64 - 0.25).sqrt();
    for n in 0..=100u32 {
        let w = toeplitz::shift_weight(1, 0.5, ShiftOp::T2, 0, n).unwrap();
        max_t2 = max_t2.max((w.re - expect).abs().max(w.im.abs()));
    }
    CheckResult::new(
        9,
        "weighted shift closed forms",
        max_dev < 1e-10 && max_t2 < 1e-12,
        format!(
            "50 interior draws max |entry - weight| = {max_dev:.3e} (tol 1e-10); \
             k=1 T2 vs sqrt(1-eps^2) max {max_t2:.3e} (tol 1e-12)"
        ),
    )
}

/// 10: monodromy conjugation identities at t = 0.
pub fn criterion_10() -> CheckResult {
    let trunc = TruncationSpec {
        n_max: 60,
        ..TruncationSpec::default()
    };
    let mut max_interior = 0.0f64;
    let mut max_wrap = 0.0f64;
    for op in ShiftOp::ALL {
        let entries = toeplitz::conjugation_residual(2, 0.5, op, &trunc).unwrap();
        for e in entries {
            if e.interior {
                max_interior = max_interior.max(e.deviation);
            } else {
                max_wrap = max_wrap.max(e.deviation);
            }
        }
    }
    CheckResult::new(
        10,
        "conjugation identities",
        max_interior < 1e-10,
        format!(
            "four shifts, n<=60: interior max {max_interior:.3e} (tol 1e-10), wrap max {max_wrap:.3e}"
        ),
    )
}

/// 11: compactness profiles decrease and reach 1e-6 by n = 200.
pub fn criterion_11() -> CheckResult {
    let mut ok = true;
    let mut parts = Vec::new();
    for op in ShiftOp::ALL {
        let d = toeplitz::compactness_profile(2, 0.5, op, 200).unwrap();
        let mut monotone = true;
        for n in 20..200 {
            if d[n + 1] > d[n] {
                monotone = false;
            }
        }
        ok &= monotone && d[200] < 1e-6;
        parts.push(format!(
            "{}: d(200)={:.3e} monotone(n>=20)={monotone}",
            op.label(),
            d[200]
        ));
    }
    CheckResult::new(
        11,
        "compactness decay profiles",
        ok,
        format!("{} (tol 1e-6)", parts.join("; ")),
    )
}

/// 12: dispersion growth exponent and its two evaluation routes.
pub fn criterion_12() -> CheckResult {
    let fit = sobolev::nonsmooth_slope(2, 0.5, 0, 100, 1000, 25).unwrap();
    let slope_ok = fit.slope > 0.48 && fit.slope < 0.52;
    let mut max_rel = 0.0f64;
    for n in [100u32, 215, 464, 1000] {
        let r = sobolev::nonsmooth_ratio(2, 0.5, 0, n).unwrap();
        max_rel = max_rel.max((r.three_term - r.central).abs() / r.central);
    }
    CheckResult::new(
        12,
        "dispersion exponent",
        slope_ok && max_rel < 1e-10,
        format!(
            "log-log slope {:.4} +/- {:.4} (window [0.48, 0.52]); route agreement {max_rel:.3e} (tol 1e-10)",
            fit.slope, fit.ci95
        ),
    )
}

/// 13: Hilbert-Schmidt ladders converge and diverge in the right regimes.
pub fn criterion_13() -> CheckResult {
    let tail = |ladder: &[sobolev::LadderRow]| -> f64 {
        let last = ladder.last().unwrap();
        let at300 = ladder[300].partial_sum;
        // measured tail in the window plus a crude extension bound from the
        // final increment (the increments are decreasing out there)
        (last.partial_sum - at300) + last.increment * last.n as f64 / 3.0
    };
    let smooth = sobolev::hs_ladder(2, 0.5, 4.0, 1, 400, 1e-12).unwrap();
    let tail_smooth = tail(&smooth);
    let mut decreasing = true;
    for n in 300..400 {
        if smooth[n + 1].increment > smooth[n].increment {
            decreasing = false;
        }
    }
    let diverging = sobolev::hs_ladder(2, 0.5, -2.0, 1, 400, 1e-12).unwrap();
    let div_ok = diverging[400].increment > diverging[100].increment
        && diverging[400].increment > 1.0;
    let b1 = sobolev::hs_ladder(2, 0.5, 5.5, 1, 400, 1e-12).unwrap();
    let b2 = sobolev::hs_ladder(2, 0.5, 5.5, 2, 400, 1e-12).unwrap();
    let tail_b1 = tail(&b1);
    let tail_b2 = tail(&b2);
    let ok = tail_smooth < 1e-4 && decreasing && div_ok && tail_b1 < 1e-4 && tail_b2 < 1e-4;
    CheckResult::new(
        13,
        "Hilbert-Schmidt ladders",
        ok,
        format!(
            "s=4 j=1 tail past n=300: {tail_smooth:.3e} (tol 1e-4, decreasing: {decreasing}); \
             s=-2 j=1 increments grow: {div_ok}; s=5.5 tails j=1 {tail_b1:.3e}, j=2 {tail_b2:.3e}"
        ),
    )
}

/// 14: Taylor remainders scale quadratically in h.
pub fn criterion_14() -> CheckResult {
    let rem = |h: f64| sobolev::taylor_remainder(2, 0.5, 0.4, h, 4.0, 1, 250, 1e-10).unwrap();
    let r1 = rem(1e-1);
    let r2 = rem(1e-2);
    let r3 = rem(1e-3);
    let order_a = (r1 / r2).log10();
    let order_b = (r2 / r3).log10();
    let ok = order_a >= 1.9 && order_b >= 1.9;
    CheckResult::new(
        14,
        "Taylor remainder order",
        ok,
        format!("observed orders {order_a:.3} and {order_b:.3} (floor 1.9)"),
    )
}

/// 15: z1z2 chain frequencies against the pre-verified closed form.
pub fn criterion_15() -> CheckResult {
    // (i) generating-function identity by brute force
    let mut max_id = 0.0f64;
    for d in 0..=10u64 {
        for x in [0.01f64, 0.04, 0.09, 0.16, 0.2] {
            let mut brute = 0.0;
            let mut term = 1.0;
            for q in 0..2000u64 {
                brute += term;
                let num = (d + 2 * q + 1) as f64 * (d + 2 * q + 2) as f64;
                let den = (q + 1) as f64 * (d + q + 1) as f64;
                term *= x * num / den;
                if term < 1e-300 {
                    break;
                }
            }
            let s = (1.0 - 4.0 * x).sqrt();
            let closed = ((1.0 - s) / (2.0 * x)).powi(d as i32) / s;
            max_id = max_id.max((closed - brute).abs() / brute);
        }
    }
    // (ii) series frequencies vs closed form for |d| <= 50 at eps = 0.3
    let mut max_f = 0.0f64;
    for d in 0..=50u64 {
        let closed = general::z1z2_frequency_closed(0.3, d as i64).unwrap();
        let plus = general::gm_frequency(1, 1, 0.3, GmChainStart { m: d, n: 0 }, 1e-12).unwrap();
        let minus = general::gm_frequency(1, 1, 0.3, GmChainStart { m: 0, n: d }, 1e-12).unwrap();
        max_f = max_f.max((plus - closed).abs().max((minus - closed).abs()));
    }
    // (iii) per-step difference and the factor-2 report
    let step = general::z1z2_frequency_closed(0.3, 7).unwrap()
        - general::z1z2_frequency_closed(0.3, 6).unwrap();
    let step_ok = (step - 0.125).abs() < 1e-10;
    let report = general::phase_report(1, 1, 0.3, 30).unwrap();
    let report_ok = (report.paper_exponent.unwrap() - 0.25).abs() < 1e-12
        && (report.derived_exponent.unwrap() - 0.125).abs() < 1e-12
        && report.paper_equals_twice_derived == Some(true)
        && report.match_verdict == MatchVerdict::DerivedPerStep;
    let ok = max_id < 1e-12 && max_f < 1e-8 && step_ok && report_ok;
    CheckResult::new(
        15,
        "z1z2 chains and phase report",
        ok,
        format!(
            "identity max rel {max_id:.3e} (tol 1e-12); |d|<=50 frequency gap {max_f:.3e} (tol 1e-8); \
             per-step 0.125 ok: {step_ok}; factor-2 report ok: {report_ok}"
        ),
    )
}

/// 16: determinism — the randomized checks and serialized artifacts
/// reproduce byte-for-byte.
pub fn criterion_16() -> CheckResult {
    let a1 = criterion_01();
    let a2 = criterion_01();
    let b1 = criterion_05();
    let b2 = criterion_05();
    let table1 = transport_csv_sample();
    let table2 = transport_csv_sample();
    let json1 = serde_json::to_string(&general::phase_report(1, 1, 0.3, 20).unwrap()).unwrap();
    let json2 = serde_json::to_string(&general::phase_report(1, 1, 0.3, 20).unwrap()).unwrap();
    let ok = a1.details == a2.details
        && b1.details == b2.details
        && table1 == table2
        && json1 == json2;
    CheckResult::new(
        16,
        "deterministic reports",
        ok,
        format!(
            "randomized checks reproduce: {}; CSV bytes reproduce: {}; JSON bytes reproduce: {}",
            a1.details == a2.details && b1.details == b2.details,
            table1 == table2,
            json1 == json2
        ),
    )
}

fn transport_csv_sample() -> String {
    crate::cli::transport_table(2, 0.5, 12).unwrap().render()
}
