//! Command-line front end: one subcommand per module, CSV or JSON output,
//! deterministic byte-for-byte rendering for identical configurations.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::complex::Complex64;
use num::{BigInt, BigRational};

use crate::error::{Error, Result};
use crate::export::{fmt_f64, fmt_opt, CsvTable};
use crate::frames::{self, ChainIndex, FrameKind, TruncationSpec};
use crate::general;
use crate::series;
use crate::sobolev;
use crate::toeplitz::{self, ShiftOp};
use crate::transport;
use crate::verify;

#[derive(Debug, Parser)]
#[command(
    name = "da-perturb",
    version,
    about = "Frames, transport, Toeplitz shifts and Sobolev smoothness for perturbed principal submodules",
    long_about = None
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Float,
    Exact,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OpArg {
    T1,
    T1adj,
    T2,
    T2adj,
}

impl From<OpArg> for ShiftOp {
    fn from(v: OpArg) -> ShiftOp {
        match v {
            OpArg::T1 => ShiftOp::T1,
            OpArg::T1adj => ShiftOp::T1Adj,
            OpArg::T2 => ShiftOp::T2,
            OpArg::T2adj => ShiftOp::T2Adj,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Alpha,
    Beta,
    Gamma,
}

impl From<KindArg> for FrameKind {
    fn from(v: KindArg) -> FrameKind {
        match v {
            KindArg::Alpha => FrameKind::Alpha,
            KindArg::Beta => FrameKind::Beta,
            KindArg::Gamma => FrameKind::Gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SobolevView {
    Weights,
    Ladder,
    Nonsmooth,
    Taylor,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ToeplitzView {
    Matrix,
    Weights,
    Conjugation,
    Profile,
}

#[derive(Debug, Args)]
pub struct OutputOpts {
    /// Output format (CSV table or JSON mirror with metadata header)
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the artifact to this path instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TruncOpts {
    /// z2-degree window bound
    #[arg(long, default_value_t = 20)]
    pub n_max: u32,
    /// z1-degree window bound (where columns are monomial-indexed)
    #[arg(long, default_value_t = 40)]
    pub m_max: u64,
    /// Fixed chain depth; derived from --tail-tol when absent
    #[arg(long)]
    pub q_max: Option<u32>,
    /// Tail tolerance governing derived chain depths
    #[arg(long, default_value_t = 1e-14)]
    pub tail_tol: f64,
    /// Scalar backend (exact applies where rational arithmetic is defined)
    #[arg(long, value_enum, default_value_t = BackendArg::Float)]
    pub backend: BackendArg,
}

impl TruncOpts {
    fn to_spec(&self) -> TruncationSpec {
        TruncationSpec {
            q_max: self.q_max,
            tail_tol: self.tail_tol,
            n_max: self.n_max,
            m_max: self.m_max,
            backend: match self.backend {
                BackendArg::Float => frames::Backend::Float,
                BackendArg::Exact => frames::Backend::Exact,
            },
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chain moment series: closed form vs direct summation with certified tails
    Sum {
        #[arg(long)]
        k: u32,
        /// Series argument E (|E| < 1); accepts decimals or p/q rationals
        #[arg(long = "E")]
        e: String,
        #[arg(long, default_value_t = 0)]
        r: u32,
        #[arg(long, default_value_t = 0)]
        n: u32,
        /// Moment power (closed form available for l = 0, 1, 2 only)
        #[arg(long, default_value_t = 0)]
        l: u32,
        #[arg(long, default_value_t = 1e-15)]
        tail_tol: f64,
        #[arg(long, value_enum, default_value_t = BackendArg::Float)]
        backend: BackendArg,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Frame tables, Gram deviations and submodule-membership residuals
    Frame {
        #[arg(long)]
        k: u32,
        /// Perturbation size in [0, 1); accepts decimals or p/q rationals
        #[arg(long, default_value = "0.5")]
        epsilon: String,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// Restrict to one chain (requires --n); emits the vector itself as JSON
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, value_enum, default_value_t = KindArg::Beta)]
        kind: KindArg,
        #[command(flatten)]
        trunc: TruncOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Transport frequencies, difference tables, asymptotes and flatness
    Transport {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value = "0.5")]
        epsilon: String,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// Emit flatness residuals of the parallel frame instead of frequencies
        #[arg(long, default_value_t = false)]
        flatness: bool,
        #[command(flatten)]
        trunc: TruncOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Shift matrices, closed-form weights, conjugation residuals, decay profiles
    Toeplitz {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value = "0.5")]
        epsilon: String,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, value_enum, default_value_t = OpArg::T1)]
        op: OpArg,
        #[arg(long, value_enum, default_value_t = ToeplitzView::Matrix)]
        view: ToeplitzView,
        #[command(flatten)]
        trunc: TruncOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Besov-Sobolev weights, Hilbert-Schmidt ladders, dispersion and Taylor checks
    Sobolev {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value = "0.5")]
        epsilon: String,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// Scale order s of the target space (s > -3)
        #[arg(long, default_value_t = 4.0)]
        s_target: f64,
        /// Entrywise t-derivative order
        #[arg(long, default_value_t = 1)]
        j: u32,
        #[arg(long, value_enum, default_value_t = SobolevView::Ladder)]
        view: SobolevView,
        #[arg(long, default_value_t = 0)]
        r: u32,
        #[command(flatten)]
        trunc: TruncOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Generalized z1^k z2^l chains: frequencies and the phase report
    General {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long, default_value = "0.3")]
        epsilon: String,
        /// Deepest chain start along each axis
        #[arg(long, default_value_t = 20)]
        d_max: u64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Run the full cross-validation suite and print a pass/fail table
    Verify {
        #[command(flatten)]
        output: OutputOpts,
    },
}

/// Parse a scalar given as a decimal ("0.5") or a ratio ("1/2"); returns
/// the f64 value and, when the text is exactly representable, the rational.
pub fn parse_scalar(text: &str) -> Result<(f64, Option<BigRational>)> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let num: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad rational numerator: {p}")))?;
        let den: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad rational denominator: {q}")))?;
        if den == BigInt::from(0) {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        let ratio = BigRational::new(num, den);
        let value = ratio_to_f64(&ratio);
        return Ok((value, Some(ratio)));
    }
    let value: f64 = text
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad scalar: {text}")))?;
    // a plain decimal (no exponent) is exactly a rational
    let exact = if !text.contains(['e', 'E']) {
        decimal_to_rational(text)
    } else {
        None
    };
    Ok((value, exact))
}

fn decimal_to_rational(text: &str) -> Option<BigRational> {
    let negative = text.starts_with('-');
    let digits = text.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.chars().chain(frac_part.chars()).any(|c| !c.is_ascii_digit()) {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let num: BigInt = joined.parse().ok()?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    let mut ratio = BigRational::new(num, den);
    if negative {
        ratio = -ratio;
    }
    Some(ratio)
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    let num = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let den = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    num / den
}

/// Result of one CLI run: the rendered artifact plus the process exit code.
#[derive(Debug)]
pub struct RunOutput {
    pub text: String,
    pub exit_code: i32,
}

pub fn run(cli: &Cli) -> Result<RunOutput> {
    match &cli.command {
        Command::Sum {
            k,
            e,
            r,
            n,
            l,
            tail_tol,
            backend,
            output,
        } => {
            let (e_val, e_exact) = parse_scalar(e)?;
            let table = sum_table(*k, e_val, e_exact.as_ref(), *r, *n, *l, *tail_tol, *backend)?;
            let config = serde_json::json!({
                "subcommand": "sum", "k": k, "E": e, "r": r, "n": n, "l": l,
                "tail_tol": tail_tol, "backend": format!("{backend:?}").to_lowercase(),
            });
            Ok(RunOutput {
                text: render(&table, output, &config),
                exit_code: 0,
            })
        }
        Command::Frame {
            k,
            epsilon,
            t,
            r,
            n,
            kind,
            trunc,
            output,
        } => {
            let (eps, eps_exact) = parse_scalar(epsilon)?;
            let spec = trunc.to_spec();
            let config = serde_json::json!({
                "subcommand": "frame", "k": k, "epsilon": epsilon, "t": t,
                "kind": format!("{kind:?}").to_lowercase(),
                "n_max": spec.n_max, "m_max": spec.m_max, "tail_tol": spec.tail_tol,
            });
            if let (Some(r), Some(n)) = (r, n) {
                // single-chain mode: emit the frame vector itself
                let v = match FrameKind::from(*kind) {
                    FrameKind::Alpha => frames::alpha(*k, eps, *t, *r, *n, &spec)?,
                    FrameKind::Beta => frames::beta(*k, eps, *t, *r, *n, &spec)?,
                    FrameKind::Gamma => frames::gamma(*k, eps, *t, *r, *n, &spec)?,
                };
                let text = match output.format {
                    Format::Json => {
                        let mut s = serde_json::to_string_pretty(&v.to_json()).expect("json");
                        s.push('\n');
                        s
                    }
                    Format::Csv => {
                        let mut table = CsvTable::new(vec!["m", "n", "re", "im"]);
                        for (q, c) in v.coeffs.iter().enumerate() {
                            let (m, nn) = v.monomial(q as u32);
                            table.push(vec![
                                m.to_string(),
                                nn.to_string(),
                                fmt_f64(c.re),
                                fmt_f64(c.im),
                            ]);
                        }
                        table.render()
                    }
                };
                return Ok(RunOutput { text, exit_code: 0 });
            }
            let table = frame_table(*k, eps, eps_exact.as_ref(), *t, (*kind).into(), &spec)?;
            Ok(RunOutput {
                text: render(&table, output, &config),
                exit_code: 0,
            })
        }
        Command::Transport {
            k,
            epsilon,
            t,
            flatness,
            trunc,
            output,
        } => {
            let (eps, _) = parse_scalar(epsilon)?;
            let spec = trunc.to_spec();
            let config = serde_json::json!({
                "subcommand": "transport", "k": k, "epsilon": epsilon, "t": t,
                "flatness": flatness, "n_max": spec.n_max,
            });
            let table = if *flatness {
                flatness_table(*k, eps, *t, &spec)?
            } else {
                transport_table(*k, eps, spec.n_max)?
            };
            Ok(RunOutput {
                text: render(&table, output, &config),
                exit_code: 0,
            })
        }
        Command::Toeplitz {
            k,
            epsilon,
            t,
            op,
            view,
            trunc,
            output,
        } => {
            let (eps, _) = parse_scalar(epsilon)?;
            let spec = trunc.to_spec();
            let op: ShiftOp = (*op).into();
            let config = serde_json::json!({
                "subcommand": "toeplitz", "k": k, "epsilon": epsilon, "t": t,
                "op": op.label(), "view": format!("{view:?}").to_lowercase(),
                "n_max": spec.n_max,
            });
            let table = match view {
                ToeplitzView::Matrix => toeplitz_matrix_table(*k, eps, *t, op, &spec)?,
                ToeplitzView::Weights => toeplitz_weights_table(*k, eps, op, &spec)?,
                ToeplitzView::Conjugation => toeplitz_conjugation_table(*k, eps, op, &spec)?,
                ToeplitzView::Profile => toeplitz_profile_table(*k, eps, op, spec.n_max)?,
            };
            Ok(RunOutput {
                text: render(&table, output, &config),
                exit_code: 0,
            })
        }
        Command::Sobolev {
            k,
            epsilon,
            t,
            s_target,
            j,
            view,
            r,
            trunc,
            output,
        } => {
            let (eps, _) = parse_scalar(epsilon)?;
            let spec = trunc.to_spec();
            let config = serde_json::json!({
                "subcommand": "sobolev", "k": k, "epsilon": epsilon, "t": t,
                "s_target": s_target, "j": j, "r": r,
                "view": format!("{view:?}").to_lowercase(),
                "n_max": spec.n_max, "m_max": spec.m_max,
            });
            let table = match view {
                SobolevView::Weights => sobolev_weights_table(*s_target, &spec)?,
                SobolevView::Ladder => sobolev_ladder_table(*k, eps, *s_target, *j, spec.n_max)?,
                SobolevView::Nonsmooth => sobolev_nonsmooth_table(*k, eps, *r, spec.n_max)?,
                SobolevView::Taylor => sobolev_taylor_table(*k, eps, *t, *s_target, *j, spec.n_max)?,
            };
            Ok(RunOutput {
                text: render(&table, output, &config),
                exit_code: 0,
            })
        }
        Command::General {
            k,
            l,
            epsilon,
            d_max,
            output,
        } => {
            let (eps, _) = parse_scalar(epsilon)?;
            match output.format {
                Format::Json => {
                    let report = general::phase_report(*k, *l, eps, *d_max)?;
                    let mut text = serde_json::to_string_pretty(&serde_json::json!({
                        "version": env!("CARGO_PKG_VERSION"),
                        "report": report,
                    }))
                    .expect("json");
                    text.push('\n');
                    Ok(RunOutput { text, exit_code: 0 })
                }
                Format::Csv => {
                    let table = general_table(*k, *l, eps, *d_max)?;
                    let config = serde_json::json!({
                        "subcommand": "general", "k": k, "l": l,
                        "epsilon": epsilon, "d_max": d_max,
                    });
                    Ok(RunOutput {
                        text: render(&table, output, &config),
                        exit_code: 0,
                    })
                }
            }
        }
        Command::Verify { output } => {
            let results = verify::run_all();
            let all_passed = results.iter().all(|r| r.passed);
            let text = match output.format {
                Format::Csv => verify::render_report(&results),
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&serde_json::json!({
                        "version": env!("CARGO_PKG_VERSION"),
                        "results": results,
                    }))
                    .expect("json");
                    s.push('\n');
                    s
                }
            };
            Ok(RunOutput {
                text,
                exit_code: if all_passed { 0 } else { 1 },
            })
        }
    }
}

fn render(table: &CsvTable, output: &OutputOpts, config: &serde_json::Value) -> String {
    match output.format {
        Format::Csv => table.render(),
        Format::Json => table.render_json(config),
    }
}

#[allow(clippy::too_many_arguments)]
fn sum_table(
    k: u32,
    e: f64,
    e_exact: Option<&BigRational>,
    r: u32,
    n: u32,
    l: u32,
    tail_tol: f64,
    backend: BackendArg,
) -> Result<CsvTable> {
    let mut table = CsvTable::new(vec![
        "k",
        "E",
        "r",
        "n",
        "l",
        "closed_re",
        "closed_im",
        "series_re",
        "series_im",
        "q_used",
        "tail_bound",
        "abs_dev",
        "series_exact",
    ]);
    let closed = if l <= 2 {
        Some(series::closed_sum(k, Complex64::new(e, 0.0), r, n, l)?)
    } else {
        None
    };
    let (series_value, q_used, tail, exact_text) = match backend {
        BackendArg::Float => {
            let s = series::series_sum(k, Complex64::new(e, 0.0), r, n, l, tail_tol)?;
            (s.value, s.q_used, s.tail_bound, String::new())
        }
        BackendArg::Exact => {
            let e_rat = e_exact.ok_or_else(|| {
                Error::InvalidParameter(
                    "exact backend needs E as a ratio or finite decimal".into(),
                )
            })?;
            // exact tolerance 10^{-d} matching the requested float tolerance
            let digits = (-tail_tol.log10()).ceil().clamp(1.0, 60.0) as u32;
            let tol = BigRational::new(BigInt::from(1), BigInt::from(10u64).pow(digits));
            let s = series::series_sum_exact(k, e_rat, r, n, l, &tol)?;
            let value = Complex64::new(ratio_to_f64(&s.value), 0.0);
            (value, s.q_used, ratio_to_f64(&s.tail_bound), s.value.to_string())
        }
    };
    let abs_dev = closed.map(|c| (c - series_value).norm());
    table.push(vec![
        k.to_string(),
        fmt_f64(e),
        r.to_string(),
        n.to_string(),
        l.to_string(),
        fmt_opt(closed.map(|c| c.re)),
        fmt_opt(closed.map(|c| c.im)),
        fmt_f64(series_value.re),
        fmt_f64(series_value.im),
        q_used.to_string(),
        fmt_f64(tail),
        fmt_opt(abs_dev),
        exact_text,
    ]);
    Ok(table)
}

fn frame_table(
    k: u32,
    eps: f64,
    eps_exact: Option<&BigRational>,
    t: f64,
    kind: FrameKind,
    spec: &TruncationSpec,
) -> Result<CsvTable> {
    let mut table = CsvTable::new(vec![
        "k",
        "epsilon",
        "t",
        "r",
        "n",
        "kind",
        "q_max",
        "norm",
        "tail_bound",
        "max_gram_dev",
        "max_membership_residual",
    ]);
    let mut indices = Vec::new();
    for n in 0..=spec.n_max {
        for r in 0..k {
            indices.push(ChainIndex::new(r, n));
        }
    }
    let gram = frames::gram(k, eps, t, &indices, spec)?;
    let kind_name = match kind {
        FrameKind::Alpha => "alpha",
        FrameKind::Beta => "beta",
        FrameKind::Gamma => "gamma",
    };
    let exact_mode = spec.backend == frames::Backend::Exact && t == 0.0 && eps_exact.is_some();
    for (i, ix) in indices.iter().enumerate() {
        let v = match kind {
            FrameKind::Alpha => frames::alpha(k, eps, t, ix.r, ix.n, spec)?,
            FrameKind::Beta => frames::beta(k, eps, t, ix.r, ix.n, spec)?,
            FrameKind::Gamma => frames::gamma(k, eps, t, ix.r, ix.n, spec)?,
        };
        let mut gram_dev = 0.0f64;
        for (j, g) in gram[i].iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            gram_dev = gram_dev.max((g - Complex64::new(expect, 0.0)).norm());
        }
        let mut membership = 0.0f64;
        let mut m_exp = ix.r as u64;
        while m_exp <= spec.m_max {
            if exact_mode {
                let res = frames::membership_residual_exact(
                    k,
                    eps_exact.unwrap(),
                    ix.r,
                    ix.n,
                    m_exp,
                    ix.n,
                )?;
                membership = membership.max(ratio_to_f64(&res).abs());
            } else {
                let res = frames::membership_residual(k, eps, t, ix.r, ix.n, m_exp, ix.n, spec)?;
                membership = membership.max(res.norm());
            }
            m_exp += k as u64;
        }
        table.push(vec![
            k.to_string(),
            fmt_f64(eps),
            fmt_f64(t),
            ix.r.to_string(),
            ix.n.to_string(),
            kind_name.to_string(),
            v.q_max().to_string(),
            fmt_f64(v.norm()),
            fmt_f64(v.tail_bound),
            fmt_f64(gram_dev),
            fmt_f64(membership),
        ]);
    }
    Ok(table)
}

/// The pinned transport CSV: (k, epsilon, r, n, f, delta_r, delta_n, asymptote, gap).
pub fn transport_table(k: u32, eps: f64, n_max: u32) -> Result<CsvTable> {
    let mut table = CsvTable::new(vec![
        "k",
        "epsilon",
        "r",
        "n",
        "f",
        "delta_r",
        "delta_n",
        "asymptote",
        "gap",
    ]);
    let freq = transport::FrequencyTable::build(k, eps, n_max)?;
    for n in 0..=n_max {
        for r in 0..k {
            let f = freq.get(r, n);
            let delta_r = freq.delta_r(r, n);
            let delta_n = if n >= 1 { Some(freq.delta_n(r, n)) } else { None };
            let asymptote = if eps > 0.0 {
                Some(transport::frequency_asymptote(k, eps, r, n)?)
            } else {
                None
            };
            let gap = asymptote.map(|a| (f - a).abs());
            table.push(vec![
                k.to_string(),
                fmt_f64(eps),
                r.to_string(),
                n.to_string(),
                fmt_f64(f),
                fmt_f64(delta_r),
                fmt_opt(delta_n),
                fmt_opt(asymptote),
                fmt_opt(gap),
            ]);
        }
    }
    Ok(table)
}

fn flatness_table(k: u32, eps: f64, t: f64, spec: &TruncationSpec) -> Result<CsvTable> {
    let mut table = CsvTable::new(vec!["k", "epsilon", "t", "r", "n", "residual"]);
    for n in 0..=spec.n_max {
        for r in 0..k {
            let res = transport::flatness_residual(k, eps, t, r, n, FrameKind::Gamma, spec)?;
            table.push(vec![
                k.to_string(),
                fmt_f64(eps),
                fmt_f64(t),
                r.to_string(),
                n.to_string(),
                fmt_f64(res),
            ]);
        }
    }
    Ok(table)
}

fn toeplitz_matrix_table(
    k: u32,
    eps: f64,
    t: f64,
    op: ShiftOp,
    spec: &TruncationSpec,
) -> Result<CsvTable> {
    let mut table = CsvTable::new(vec!["row_r", "row_n", "col_r", "col_n", "re", "im"]);
    let m = toeplitz::toeplitz_matrix(k, eps, t, op, spec)?;
    for ((row, col), v) in &m.entries {
        table.push(vec![
            row.r.to_string(),
            row.n.to_string(),
            col.r.to_string(),
            col.n.to_string(),
            fmt_f64(v.re),
            fmt_f64(v.im),
        ]);
    }
    Ok(table)
}

fn toeplitz_weights_table(k: u32, eps: f64, op: ShiftOp, spec: &TruncationSpec) -> Result<CsvTable> {
    let mut table = CsvTable::new(vec![
        "k", "epsilon", "op", "r", "n", "weight_re", "weight_im", "entry_re", "entry_im",
        "deviation",
    ]);
    let m = toeplitz::toeplitz_matrix(k, eps, 0.0, op, spec)?;
    for n in 0..=spec.n_max {
        for r in 0..k {
            let col = ChainIndex::new(r, n);
            let w = toeplitz::shift_weight(k, eps, op, r, n)?;
            let entry = op
                .target(k, col)
                .filter(|row| row.n <= spec.n_max)
                .and_then(|row| m.entry(row, col));
            let dev = entry.map(|e| (e - w).norm());
            table.push(vec![
                k.to_string(),
                fmt_f64(eps),
                op.label().to_string(),
                r.to_string(),
                n.to_string(),
                fmt_f64(w.re),
                fmt_f64(w.im),
                fmt_opt(entry.map(|e| e.re)),
                fmt_opt(entry.map(|e| e.im)),
                fmt_opt(dev),
            ]);
        }
    }
    Ok(table)
}

fn toeplitz_conjugation_table(
    k: u32,
    eps: f64,
    op: ShiftOp,
    spec: &TruncationSpec,
) -> Result<CsvTable> {
    let mut table = CsvTable::new(vec![
        "row_r", "row_n", "col_r", "col_n", "residual", "interior",
    ]);
    for e in toeplitz::conjugation_residual(k, eps, op, spec)? {
        table.push(vec![
            e.row.r.to_string(),
            e.row.n.to_string(),
            e.col.r.to_string(),
            e.col.n.to_string(),
            fmt_f64(e.deviation),
            e.interior.to_string(),
        ]);
    }
    Ok(table)
}

fn toeplitz_profile_table(k: u32, eps: f64, op: ShiftOp, n_max: u32) -> Result<CsvTable> {
    let mut table = CsvTable::new(vec!["k", "epsilon", "op", "n", "d"]);
    let profile = toeplitz::compactness_profile(k, eps, op, n_max)?;
    for (n, d) in profile.iter().enumerate() {
        table.push(vec![
            k.to_string(),
            fmt_f64(eps),
            op.label().to_string(),
            n.to_string(),
            fmt_f64(*d),
        ]);
    }
    Ok(table)
}

fn sobolev_weights_table(s: f64, spec: &TruncationSpec) -> Result<CsvTable> {
    let mut table = CsvTable::new(vec!["s", "m", "n", "weight"]);
    for n in 0..=spec.n_max as u64 {
        for m in 0..=spec.m_max {
            table.push(vec![
                fmt_f64(s),
                m.to_string(),
                n.to_string(),
                fmt_f64(sobolev::besov_weight(s, m, n)?),
            ]);
        }
    }
    Ok(table)
}

fn sobolev_ladder_table(k: u32, eps: f64, s: f64, j: u32, n_max: u32) -> Result<CsvTable> {
    let mut table = CsvTable::new(vec!["n", "increment", "partial_sum"]);
    for row in sobolev::hs_ladder(k, eps, s, j, n_max, 1e-12)? {
        table.push(vec![
            row.n.to_string(),
            fmt_f64(row.increment),
            fmt_f64(row.partial_sum),
        ]);
    }
    Ok(table)
}

fn sobolev_nonsmooth_table(k: u32, eps: f64, r: u32, n_max: u32) -> Result<CsvTable> {
    let mut table = CsvTable::new(vec!["n", "ratio_central", "ratio_three_term"]);
    let n_hi = n_max.max(10);
    let mut n = 1u32;
    while n <= n_hi {
        let ratio = sobolev::nonsmooth_ratio(k, eps, r, n)?;
        table.push(vec![
            n.to_string(),
            fmt_f64(ratio.central),
            fmt_f64(ratio.three_term),
        ]);
        n = (n * 2).max(n + 1);
    }
    Ok(table)
}

fn sobolev_taylor_table(k: u32, eps: f64, t: f64, s: f64, j: u32, n_max: u32) -> Result<CsvTable> {
    let mut table = CsvTable::new(vec!["h", "remainder", "order_vs_previous"]);
    let mut previous: Option<(f64, f64)> = None;
    for h in [1e-1, 1e-2, 1e-3] {
        let rem = sobolev::taylor_remainder(k, eps, t, h, s, j, n_max.min(250), 1e-10)?;
        let order = previous.map(|(ph, pr)| (pr / rem).ln() / (ph / h).ln());
        table.push(vec![fmt_f64(h), fmt_f64(rem), fmt_opt(order)]);
        previous = Some((h, rem));
    }
    Ok(table)
}

fn general_table(k: u32, l: u32, eps: f64, d_max: u64) -> Result<CsvTable> {
    let mut table = CsvTable::new(vec!["k", "l", "epsilon", "m0", "n0", "f"]);
    let tol = 1e-12;
    let mut starts: Vec<general::GmChainStart> = Vec::new();
    for d in 0..=d_max {
        starts.push(general::GmChainStart { m: d, n: 0 });
        if d > 0 {
            starts.push(general::GmChainStart { m: 0, n: d });
        }
    }
    starts.sort();
    for s in starts {
        let f = general::gm_frequency(k, l, eps, s, tol)?;
        table.push(vec![
            k.to_string(),
            l.to_string(),
            fmt_f64(eps),
            s.m.to_string(),
            s.n.to_string(),
            fmt_f64(f),
        ]);
    }
    Ok(table)
}

/// Used by the flatness view and chain-coordinate smoke tests.
pub fn chain_norm(v: &BTreeMap<ChainIndex, Complex64>) -> f64 {
    v.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}
