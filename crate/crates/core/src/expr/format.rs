use std::fmt::{self, Write};

use super::Expr;

/// Shortest decimal that reads back to the same `f64`; integral values are
/// printed without a fractional part.
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Sum(terms) => {
                for (i, term) in terms.iter().enumerate() {
                    match (i, negated(term)) {
                        (0, Some(pos)) => write_negated(f, &pos)?,
                        (0, None) => write!(f, "{term}")?,
                        (_, Some(pos)) => write!(f, " - {pos}")?,
                        (_, None) => write!(f, " + {term}")?,
                    }
                }
                Ok(())
            }
            Expr::Product(ops) => {
                if let Some(pos) = negated(self) {
                    if matches!(ops[0], Expr::Constant(c) if c == -1.0) {
                        return write_negated(f, &pos);
                    }
                }
                for (i, op) in ops.iter().enumerate() {
                    if i > 0 {
                        f.write_char('*')?;
                    }
                    match op {
                        Expr::Sum(_) => write!(f, "({op})")?,
                        _ => write!(f, "{op}")?,
                    }
                }
                Ok(())
            }
            _ => write_atom(f, self),
        }
    }
}

fn write_atom(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Constant(v) => f.write_str(&format_number(*v)),
        Expr::Parameter(name) => f.write_str(name),
        Expr::Time => f.write_char('t'),
        Expr::Deriv(0) => f.write_char('x'),
        Expr::Deriv(k) => write!(f, "d(x,{k})"),
        Expr::Power(base, n) => {
            let bare = match base.as_ref() {
                Expr::Constant(v) => *v >= 0.0,
                Expr::Parameter(_) | Expr::Time | Expr::Deriv(_) | Expr::Call(..) => true,
                _ => false,
            };
            if bare {
                write!(f, "{base}^{n}")
            } else {
                write!(f, "({base})^{n}")
            }
        }
        Expr::Call(func, arg) => write!(f, "{func}({arg})"),
        Expr::Sum(_) | Expr::Product(_) => write!(f, "{e}"),
    }
}

/// `-e` as a term, for terms whose canonical form carries a negative sign.
fn negated(term: &Expr) -> Option<Expr> {
    match term {
        Expr::Constant(v) if *v < 0.0 => Some(Expr::constant(-v)),
        Expr::Product(ops) => match ops[0] {
            Expr::Constant(c) if c < 0.0 => {
                let mut rest = ops.clone();
                if c == -1.0 {
                    rest.remove(0);
                } else {
                    rest[0] = Expr::constant(-c);
                }
                Some(if rest.len() == 1 {
                    rest.pop().unwrap()
                } else {
                    Expr::Product(rest)
                })
            }
            _ => None,
        },
        _ => None,
    }
}

/// Writes `-pos` so that it reads back unambiguously: bare atoms and
/// constants-times-something keep a plain prefix, anything else is wrapped.
fn write_negated(f: &mut fmt::Formatter<'_>, pos: &Expr) -> fmt::Result {
    match pos {
        Expr::Constant(_) | Expr::Parameter(_) | Expr::Time | Expr::Deriv(_) | Expr::Call(..) => {
            write!(f, "-{pos}")
        }
        Expr::Product(ops) if matches!(ops[0], Expr::Constant(_)) => write!(f, "-{pos}"),
        _ => write!(f, "-({pos})"),
    }
}
