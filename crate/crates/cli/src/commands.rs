use std::io::Write;
use std::path::Path;

use complex_sturm::boundary::{classify, dissipativity_certificate, BoundaryFunctional, BoundarySpec, Certificate, TailOptions};
use complex_sturm::greens::{build_kernel, GreensKernel, KernelKind};
use complex_sturm::ivp::{solve_ivp, IvpOptions, Source};
use complex_sturm::par::{self, Exec};
use complex_sturm::potential::{parse_potential, Endpoint, Potential};
use complex_sturm::spectra::fd::{fd_oracle_build, fd_richardson};
use complex_sturm::spectra::{find_eigenvalues_with, resolvent_kernel, Eigenvalue, Realization, Region, SearchBudget};
use complex_sturm::weyl::{disks_csv, trichotomy_with};
use complex_sturm::{Complex64 as C, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{Bc, Bcs, Cli, Command, Output, Problem};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 2,
            CliError::Usage(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::NonIntegerExponent { .. }
            | Error::InvalidArgument(_)
            | Error::OutOfSpan { .. }
            | Error::NotRegular
            | Error::NotSemiregular
            | Error::Unsupported(_) => CliError::Usage(e.to_string()),
            _ => CliError::Domain(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type Res<T> = std::result::Result<T, CliError>;

/// Applies COMPLEX_STURM_THREADS; a value of 1 selects the sequential path.
pub fn configure_threads() -> std::result::Result<Exec, String> {
    let Ok(v) = std::env::var("COMPLEX_STURM_THREADS") else {
        return Ok(Exec::Auto);
    };
    let n: usize = v.trim().parse().map_err(|_| format!("COMPLEX_STURM_THREADS={v:?} is not a positive integer"))?;
    if n == 0 {
        return Err("COMPLEX_STURM_THREADS must be at least 1".into());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    Ok(if n == 1 { Exec::Sequential } else { Exec::Auto })
}

pub fn run(cli: Cli, exec: Exec) -> Res<()> {
    match cli.command {
        Command::Classify { problem, lambda, out } => {
            let p = potential(&problem)?;
            let report = classify(&p, lambda, &TailOptions::default(), exec)?;
            emit_json(&out, &report)
        }
        Command::Solve { problem, lambda, d, p0, p1, span, rhs, out } => {
            let p = potential(&problem)?;
            let iv = p.interval();
            let span = match span {
                Some(s) => s,
                None if iv.a.is_finite() && iv.b.is_finite() => (iv.a, iv.b),
                None => return Err(CliError::Usage("--span is required on an infinite interval".into())),
            };
            let d = d.unwrap_or_else(|| iv.anchor().clamp(span.0, span.1));
            let g = match rhs {
                Some(src) => {
                    let q = parse_potential(&src, iv)?;
                    Some(Source::new(move |x| q.eval(x)))
                }
                None => None,
            };
            let f = solve_ivp(&p, lambda, d, p0, p1, g.as_ref(), span, &IvpOptions::default())?;
            let mut buf = Vec::new();
            f.write_csv(&mut buf)?;
            emit(&out, &buf)
        }
        Command::Greens { problem, kind, lambda, bc, window, grid, out } => {
            let p = potential(&problem)?;
            if grid < 2 {
                return Err(CliError::Usage("--grid must be at least 2".into()));
            }
            let kind = KernelKind::parse(&kind)?;
            let k = kernel(&p, kind, lambda, &bc, window)?;
            let (klo, khi) = k.span();
            let (lo, hi) = match window {
                Some((lo, hi)) => (lo.max(klo), hi.min(khi)),
                None => (klo, khi),
            };
            if !(lo < hi) {
                return Err(CliError::Usage(format!("window does not meet the kernel span [{klo}, {khi}]")));
            }
            let xs: Vec<f64> = (0..grid).map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64).collect();
            let rows = par::map_range(exec, grid, |i| xs.iter().map(|y| k.eval(xs[i], *y)).collect::<complex_sturm::Result<Vec<C>>>());
            let mut buf = Vec::new();
            writeln!(buf, "x,y,re_g,im_g")?;
            for (i, row) in rows.into_iter().enumerate() {
                for (y, g) in xs.iter().zip(row?) {
                    writeln!(buf, "{},{},{},{}", xs[i], y, g.re, g.im)?;
                }
            }
            emit(&out, &buf)
        }
        Command::Spectrum { problem, bc, region, max_roots, max_evals, oracle_n, out } => {
            let r = realization(potential(&problem)?, &bc)?;
            let region = Region::new(region[0], region[1], region[2], region[3])?;
            let ev = find_eigenvalues_with(&r, region, SearchBudget { max_evals, max_roots }, exec)?;
            let oracle = match oracle_n {
                Some(n) => Some(fd_oracle_build(&r, n)?),
                None => None,
            };
            let entries: Vec<SpectrumEntry> = ev
                .into_iter()
                .map(|e| {
                    let nearest = match &oracle {
                        Some(m) => Some(m.eigenvalues_near(e.lambda, 1)?[0]),
                        None => None,
                    };
                    Ok(SpectrumEntry { eigenvalue: e, oracle: nearest })
                })
                .collect::<Res<_>>()?;
            emit_json(&out, &entries)
        }
        Command::Weyl { problem, lambda, trace, out } => {
            let p = potential(&problem)?;
            let report = trichotomy_with(&p, lambda, &TailOptions::default(), exec)?;
            if let Some(path) = trace {
                write_file(&path, disks_csv(&report.disks).as_bytes())?;
            }
            emit_json(&out, &report)
        }
        Command::Dissipativity { problem, bc, oracle_n, samples, out } => {
            let p = potential(&problem)?;
            let spec = boundary_spec(&p, &bc)?;
            let certificate = dissipativity_certificate(&p, &spec)?;
            let numerical_range = match oracle_n {
                Some(n) => {
                    let r = with_cutoffs(Realization::new(p, spec)?, &bc)?;
                    let m = fd_oracle_build(&r, n)?;
                    Some(RangeSummary::new(n, &m.numerical_range(samples, &mut ChaCha8Rng::seed_from_u64(out.seed))))
                }
                None => None,
            };
            emit_json(&out, &DissipativityOutput { certificate, numerical_range })
        }
        Command::Oracle { problem, bc, oracle_n, count, target, richardson, samples, out } => {
            let r = realization(potential(&problem)?, &bc)?;
            let m = fd_oracle_build(&r, oracle_n)?;
            let eigenvalues = if richardson {
                fd_richardson(&r, &[oracle_n, 2 * oracle_n, 4 * oracle_n], target, count)?
            } else {
                m.eigenvalues_near(target, count)?
            };
            let numerical_range = (samples > 0).then(|| RangeSummary::new(oracle_n, &m.numerical_range(samples, &mut ChaCha8Rng::seed_from_u64(out.seed))));
            emit_json(&out, &OracleOutput { n: oracle_n, window: m.window, richardson, flags: m.flags.clone(), eigenvalues, numerical_range })
        }
    }
}

#[derive(Serialize)]
struct SpectrumEntry {
    #[serde(flatten)]
    eigenvalue: Eigenvalue,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<C>,
}

#[derive(Serialize)]
struct RangeSummary {
    n: usize,
    samples: usize,
    max_im: f64,
    min_im: f64,
}

impl RangeSummary {
    fn new(n: usize, zs: &[C]) -> RangeSummary {
        let max_im = zs.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
        let min_im = zs.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
        RangeSummary { n, samples: zs.len(), max_im, min_im }
    }
}

#[derive(Serialize)]
struct DissipativityOutput {
    certificate: Certificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    numerical_range: Option<RangeSummary>,
}

#[derive(Serialize)]
struct OracleOutput {
    n: usize,
    window: (f64, f64),
    richardson: bool,
    flags: Vec<String>,
    eigenvalues: Vec<C>,
    #[serde(skip_serializing_if = "Option::is_none")]
    numerical_range: Option<RangeSummary>,
}

fn potential(p: &Problem) -> Res<Potential> {
    Ok(parse_potential(&p.potential, p.interval)?)
}

fn boundary_spec(p: &Potential, bc: &Bcs) -> Res<BoundarySpec> {
    let one = |e: Endpoint, b: Bc| -> Res<Option<BoundaryFunctional>> {
        match b {
            Bc::Max => Ok(None),
            Bc::Vector(a0, a1) => Ok(Some(BoundaryFunctional::regular(p, e, a0, a1)?)),
        }
    };
    Ok(BoundarySpec::new(one(Endpoint::A, bc.bc_a)?, one(Endpoint::B, bc.bc_b)?)?)
}

fn with_cutoffs(mut r: Realization, bc: &Bcs) -> Res<Realization> {
    if let Some(t) = bc.cutoff_a {
        r = r.with_cutoff(Endpoint::A, t)?;
    }
    if let Some(t) = bc.cutoff_b {
        r = r.with_cutoff(Endpoint::B, t)?;
    }
    Ok(r)
}

fn realization(p: Potential, bc: &Bcs) -> Res<Realization> {
    let spec = boundary_spec(&p, bc)?;
    with_cutoffs(Realization::new(p, spec)?, bc)
}

fn kernel(p: &Potential, kind: KernelKind, lambda: C, bc: &Bcs, window: Option<(f64, f64)>) -> Res<GreensKernel> {
    if kind == KernelKind::TwoSided {
        return Ok(resolvent_kernel(&realization(p.clone(), bc)?, lambda)?);
    }
    let iv = p.interval();
    let span = match window {
        Some(w) => w,
        None if iv.a.is_finite() && iv.b.is_finite() => (iv.a, iv.b),
        None => return Err(CliError::Usage("--window is required on an infinite interval".into())),
    };
    // Any basis gives the same kernel for these kinds; take the one with W(v,u) = 1 at d.
    let d = match kind {
        KernelKind::AtD(d) => d,
        _ => iv.anchor().clamp(span.0, span.1),
    };
    let opts = IvpOptions::default();
    let u = solve_ivp(p, lambda, d, C::new(0.0, 0.0), C::new(1.0, 0.0), None, span, &opts)?;
    let v = solve_ivp(p, lambda, d, C::new(1.0, 0.0), C::new(0.0, 0.0), None, span, &opts)?;
    Ok(build_kernel(kind, &u, &v)?)
}

fn write_file(path: &Path, bytes: &[u8]) -> Res<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn emit(out: &Output, bytes: &[u8]) -> Res<()> {
    match &out.out {
        Some(path) => write_file(path, bytes),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: &Output, value: &T) -> Res<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    text.push('\n');
    emit(out, text.as_bytes())
}
