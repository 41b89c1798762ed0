use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use complex_sturm::potential::{parse_expr, Interval};
use complex_sturm::Complex64 as C;

/// Numerics for −f″ + V f = λ f with complex V.
#[derive(Parser, Debug)]
#[command(name = "complex-sturm", version, arg_required_else_help = true)]
pub struct Cli {
    /// JSON object whose keys replace flags; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Boundary indices and L² solution counts at both endpoints.
    Classify {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value = "i", value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: C,
        #[command(flatten)]
        out: Output,
    },
    /// One solution of (L−λ)f = g from Cauchy data at d, as CSV.
    Solve {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: C,
        /// Initial point; defaults to the interval anchor.
        #[arg(long, allow_hyphen_values = true)]
        d: Option<f64>,
        #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
        p0: C,
        #[arg(long, default_value = "1", value_parser = parse_complex, allow_hyphen_values = true)]
        p1: C,
        #[arg(long, value_parser = parse_pair, value_name = "LO,HI", allow_hyphen_values = true)]
        span: Option<(f64, f64)>,
        /// Right-hand side g as an expression in x.
        #[arg(long, allow_hyphen_values = true)]
        rhs: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Sampled Green's kernel as CSV (x, y, Re G, Im G).
    Greens {
        #[command(flatten)]
        problem: Problem,
        /// two_sided, forward, backward, bisolution or at_d:<d>.
        #[arg(long, default_value = "two_sided")]
        kind: String,
        #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: C,
        #[command(flatten)]
        bc: Bcs,
        /// Sampling window; required on infinite intervals.
        #[arg(long, value_parser = parse_pair, value_name = "LO,HI", allow_hyphen_values = true)]
        window: Option<(f64, f64)>,
        /// Samples per axis.
        #[arg(long, default_value_t = 21)]
        grid: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Eigenvalues of L with the given boundary conditions inside a rectangle.
    Spectrum {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        bc: Bcs,
        #[arg(long, value_parser = parse_region, value_name = "RE0,RE1,IM0,IM1", allow_hyphen_values = true)]
        region: [f64; 4],
        #[arg(long, default_value_t = 64)]
        max_roots: usize,
        #[arg(long, default_value_t = 40_000)]
        max_evals: usize,
        /// Also report the nearest finite-difference eigenvalue at this grid size.
        #[arg(long)]
        oracle_n: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Weyl disk trace and trichotomy at the right endpoint.
    Weyl {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value = "i", value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: C,
        /// Write the disk trace (d, Re c, Im c, r) as CSV here.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Maximal dissipativity certificate, optionally checked on the FD matrix.
    Dissipativity {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        bc: Bcs,
        #[arg(long)]
        oracle_n: Option<usize>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Finite-difference eigenvalues and numerical range.
    Oracle {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        bc: Bcs,
        #[arg(long, default_value_t = 200)]
        oracle_n: usize,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
        target: C,
        /// Extrapolate over n, 2n, 4n.
        #[arg(long)]
        richardson: bool,
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Problem {
    /// Expression in x, e.g. "x^2 - 1.5i*x".
    #[arg(long, allow_hyphen_values = true)]
    pub potential: String,
    /// a,b with inf allowed, e.g. "0,pi" or "-inf,inf".
    #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
    pub interval: Interval,
}

#[derive(Args, Debug, Clone)]
pub struct Bcs {
    /// d, n, r:re,im/re,im or max.
    #[arg(long, default_value = "max", value_parser = parse_bc, allow_hyphen_values = true)]
    pub bc_a: Bc,
    #[arg(long, default_value = "max", value_parser = parse_bc, allow_hyphen_values = true)]
    pub bc_b: Bc,
    /// Decay start point near a when a carries no condition.
    #[arg(long, allow_hyphen_values = true)]
    pub cutoff_a: Option<f64>,
    /// Decay start point near b when b carries no condition.
    #[arg(long, allow_hyphen_values = true)]
    pub cutoff_b: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Regular vector (α₀, α₁) for α₀f′ − α₁f = 0, or no condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bc {
    Max,
    Vector(C, C),
}

fn constant(s: &str) -> Result<C, String> {
    let e = parse_expr(s.trim()).map_err(|e| e.to_string())?;
    if e.depends_on_x() {
        return Err(format!("{s:?} depends on x"));
    }
    let z = e.eval(0.0);
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// "re,im" or a constant expression such as "2-1.5i".
pub fn parse_complex(s: &str) -> Result<C, String> {
    match s.split_once(',') {
        Some((re, im)) => Ok(C::new(real(re)?, real(im)?)),
        None => constant(s),
    }
}

fn real(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "+inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let z = constant(s)?;
    if z.im != 0.0 {
        return Err(format!("{s:?} is not real"));
    }
    Ok(z.re)
}

fn reals(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s.split(',').map(real).collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let v = reals(s, 2)?;
    if !(v[0] < v[1]) {
        return Err(format!("{s:?}: need lo < hi"));
    }
    Ok((v[0], v[1]))
}

pub fn parse_interval(s: &str) -> Result<Interval, String> {
    let v = reals(s, 2)?;
    Interval::new(v[0], v[1]).map_err(|e| e.to_string())
}

pub fn parse_region(s: &str) -> Result<[f64; 4], String> {
    let v = reals(s, 4)?;
    if !(v[0] < v[1] && v[2] < v[3]) || v.iter().any(|x| !x.is_finite()) {
        return Err(format!("{s:?}: need finite re0 < re1 and im0 < im1"));
    }
    Ok([v[0], v[1], v[2], v[3]])
}

pub fn parse_bc(s: &str) -> Result<Bc, String> {
    let z = C::new(0.0, 0.0);
    let one = C::new(1.0, 0.0);
    match s.trim() {
        "max" => Ok(Bc::Max),
        "d" => Ok(Bc::Vector(z, one)),
        "n" => Ok(Bc::Vector(one, z)),
        t => {
            let body = t.strip_prefix("r:").ok_or_else(|| format!("unknown boundary condition {s:?}"))?;
            let (a0, a1) = body.split_once('/').ok_or_else(|| format!("{s:?}: expected r:re,im/re,im"))?;
            let (a0, a1) = (parse_complex(a0)?, parse_complex(a1)?);
            if a0.norm() == 0.0 && a1.norm() == 0.0 {
                return Err(format!("{s:?}: the vector must be nonzero"));
            }
            Ok(Bc::Vector(a0, a1))
        }
    }
}

/// Splices the keys of a `--config` JSON object into argv after the
/// subcommand, so that flags given on the command line override them.
pub fn merge_config(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let mut rest = argv.clone();
    let path = if let Some(p) = rest[pos].strip_prefix("--config=") {
        let p = p.to_string();
        rest.remove(pos);
        p
    } else {
        if pos + 1 >= rest.len() {
            return Err("--config needs a file".into());
        }
        rest.remove(pos);
        rest.remove(pos)
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{path}: {e}"))?;
    let json: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
    let obj = json.as_object().ok_or_else(|| format!("{path}: expected a JSON object"))?;
    let mut flags = Vec::new();
    let mut command = None;
    for (k, v) in obj {
        if k == "command" {
            command = Some(v.as_str().ok_or("config: command must be a string")?.to_string());
            continue;
        }
        let flag = format!("--{}", k.replace('_', "-"));
        if rest.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}="))) {
            continue;
        }
        match v {
            serde_json::Value::Bool(true) => flags.push(flag),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::String(s) => flags.extend([flag, s.clone()]),
            serde_json::Value::Number(n) => flags.extend([flag, n.to_string()]),
            serde_json::Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|i| match i {
                        serde_json::Value::String(s) => Ok(s.clone()),
                        serde_json::Value::Number(n) => Ok(n.to_string()),
                        _ => Err(format!("config: unsupported value in {k}")),
                    })
                    .collect::<Result<_, _>>()?;
                flags.extend([flag, parts.join(",")]);
            }
            serde_json::Value::Object(_) => return Err(format!("config: unsupported value for {k}")),
        }
    }
    // Flags given on the command line stay last so they take precedence.
    const COMMANDS: [&str; 8] = ["classify", "solve", "greens", "spectrum", "weyl", "dissipativity", "oracle", "help"];
    let sub_pos = rest.iter().skip(1).position(|a| COMMANDS.contains(&a.as_str())).map(|p| p + 1);
    let mut out = vec![rest[0].clone()];
    let tail: Vec<String> = match (sub_pos, command) {
        (Some(p), _) => {
            out.extend(rest[1..=p].iter().cloned());
            rest[p + 1..].to_vec()
        }
        (None, Some(c)) => {
            out.push(c);
            rest[1..].to_vec()
        }
        (None, None) => return Err("config: no subcommand given".into()),
    };
    out.extend(flags);
    out.extend(tail);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand() {
        assert_eq!(parse_bc("d").unwrap(), Bc::Vector(C::new(0.0, 0.0), C::new(1.0, 0.0)));
        assert_eq!(parse_bc("r:1,0/0,1").unwrap(), Bc::Vector(C::new(1.0, 0.0), C::new(0.0, 1.0)));
        assert_eq!(parse_bc("r:1/2i").unwrap(), Bc::Vector(C::new(1.0, 0.0), C::new(0.0, 2.0)));
        assert!(parse_bc("r:0/0").is_err());
        assert!(parse_bc("q").is_err());
        assert_eq!(parse_complex("2-1.5i").unwrap(), C::new(2.0, -1.5));
        assert!(parse_complex("x").is_err());
        let iv = parse_interval("-inf,pi").unwrap();
        assert_eq!((iv.a, iv.b), (f64::NEG_INFINITY, std::f64::consts::PI));
        assert!(parse_interval("1,0").is_err());
        assert!(parse_region("0,1,1,0").is_err());
    }

    #[test]
    fn config_merges_before_flags() {
        let dir = std::env::temp_dir().join(format!("cs-config-{}", std::process::id()));
        std::fs::write(&dir, r#"{"command": "spectrum", "potential": "0", "region": [0.5, 10, -1, 1], "bc_a": "d"}"#).unwrap();
        let argv = vec!["cs".to_string(), "--config".into(), dir.display().to_string(), "--bc-a".into(), "n".into()];
        let merged = merge_config(argv).unwrap();
        assert_eq!(merged[1], "spectrum");
        let last_bc = merged.iter().rposition(|a| a == "--bc-a").unwrap();
        assert_eq!(merged[last_bc + 1], "n");
        assert!(merged.windows(2).any(|w| w[0] == "--region" && w[1] == "0.5,10,-1,1"));
        std::fs::remove_file(dir).unwrap();
    }
}
