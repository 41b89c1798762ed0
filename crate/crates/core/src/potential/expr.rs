use std::fmt::Write;

use num_complex::Complex64 as C;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, z: C) -> C {
        match self {
            Func::Sqrt => z.sqrt(),
            Func::Exp => z.exp(),
            Func::Log => z.ln(),
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Abs => C::new(z.norm(), 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(C),
    X,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
    /// `pieces.len() == breaks.len() + 1`; piece `k` applies on `[breaks[k-1], breaks[k])`.
    Piecewise { pieces: Vec<Expr>, breaks: Vec<f64> },
}

impl Expr {
    pub fn eval(&self, x: f64) -> C {
        self.eval_sel(x, x)
    }

    /// Evaluates at `x`, picking piecewise branches by `sel`.
    pub fn eval_sel(&self, x: f64, sel: f64) -> C {
        match self {
            Expr::Const(c) => *c,
            Expr::X => C::new(x, 0.0),
            Expr::Neg(a) => -a.eval_sel(x, sel),
            Expr::Add(a, b) => a.eval_sel(x, sel) + b.eval_sel(x, sel),
            Expr::Sub(a, b) => a.eval_sel(x, sel) - b.eval_sel(x, sel),
            Expr::Mul(a, b) => a.eval_sel(x, sel) * b.eval_sel(x, sel),
            Expr::Div(a, b) => a.eval_sel(x, sel) / b.eval_sel(x, sel),
            Expr::Pow(a, n) => a.eval_sel(x, sel).powi(*n),
            Expr::Call(f, a) => f.apply(a.eval_sel(x, sel)),
            Expr::Piecewise { pieces, breaks } => {
                let k = breaks.partition_point(|b| *b <= sel);
                pieces[k].eval_sel(x, sel)
            }
        }
    }

    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::X | Expr::Piecewise { .. } => true,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.depends_on_x(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on_x() || b.depends_on_x()
            }
        }
    }

    /// Replaces an x-free node by its value when that value is finite.
    pub fn folded(self) -> Expr {
        if matches!(self, Expr::Const(_)) || self.depends_on_x() {
            return self;
        }
        let v = self.eval(0.0);
        if v.re.is_finite() && v.im.is_finite() {
            Expr::Const(v)
        } else {
            self
        }
    }

    pub fn breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            Expr::Const(_) | Expr::X => {}
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.breakpoints(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.breakpoints(out);
                b.breakpoints(out);
            }
            Expr::Piecewise { pieces, breaks } => {
                out.extend_from_slice(breaks);
                for p in pieces {
                    p.breakpoints(out);
                }
            }
        }
    }

    /// Fully parenthesized text that parses back to the same tree.
    pub fn unparse(&self) -> String {
        let mut s = String::new();
        self.write(&mut s);
        s
    }

    fn write(&self, s: &mut String) {
        match self {
            Expr::Const(c) => {
                let _ = write!(s, "({:?}+{:?}i)", c.re, c.im);
            }
            Expr::X => s.push('x'),
            Expr::Neg(a) => {
                s.push_str("(-");
                a.write(s);
                s.push(')');
            }
            Expr::Add(a, b) => bin(s, a, "+", b),
            Expr::Sub(a, b) => bin(s, a, "-", b),
            Expr::Mul(a, b) => bin(s, a, "*", b),
            Expr::Div(a, b) => bin(s, a, "/", b),
            Expr::Pow(a, n) => {
                s.push('(');
                a.write(s);
                let _ = write!(s, "^{n})");
            }
            Expr::Call(f, a) => {
                s.push_str(f.name());
                s.push('(');
                a.write(s);
                s.push(')');
            }
            Expr::Piecewise { pieces, breaks } => {
                s.push_str("piecewise(");
                pieces[0].write(s);
                for (b, p) in breaks.iter().zip(&pieces[1..]) {
                    let _ = write!(s, ",{b:?},");
                    p.write(s);
                }
                s.push(')');
            }
        }
    }
}

fn bin(s: &mut String, a: &Expr, op: &str, b: &Expr) {
    s.push('(');
    a.write(s);
    s.push_str(op);
    b.write(s);
    s.push(')');
}
