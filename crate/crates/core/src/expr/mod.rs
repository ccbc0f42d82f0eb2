//! Symbolic real-valued expressions.
//!
//! Expressions are closed under `+ - * / ^`, unary negation and the
//! function set {sin, cos, sqrt, abs, exp, log, min, max}. They are
//! parsed from text ([`Expr::parse`]), printed back in a form that
//! re-parses to the same tree ([`std::fmt::Display`]), evaluated
//! directly against named bindings ([`Expr::eval`]) or compiled to a
//! flat stack program for hot loops ([`Program`]).
//!
//! Evaluation is total wherever every subexpression is defined;
//! division by zero, `log` of a non-positive value, `sqrt` of a
//! negative value and non-finite intermediate results are reported as
//! [`EvalError`]s rather than propagated as NaN/inf.

mod parse;
mod program;

pub use parse::ParseError;
pub use program::{CompileError, Program};

use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Binary arithmetic operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Built-in functions. `Min` and `Max` are binary, the rest unary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sqrt,
    Abs,
    Exp,
    Log,
    Min,
    Max,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Runtime evaluation failure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} applied outside its domain")]
    Domain(&'static str),
    #[error("expression produced a non-finite value")]
    NonFinite,
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
}

impl Expr {
    /// Parse an expression from text. Errors carry the byte offset of
    /// the offending token.
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        parse::parse(text)
    }

    /// Evaluate against named variable bindings.
    pub fn eval(&self, bindings: &HashMap<String, f64>) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(c) => *c,
            Expr::Var(name) => *bindings
                .get(name)
                .ok_or_else(|| EvalError::UnboundVariable(name.clone()))?,
            Expr::Neg(inner) => -inner.eval(bindings)?,
            Expr::Bin(op, lhs, rhs) => {
                let a = lhs.eval(bindings)?;
                let b = rhs.eval(bindings)?;
                apply_bin(*op, a, b)?
            }
            Expr::Call(f, args) => {
                let mut vals = [0.0; 2];
                for (slot, arg) in vals.iter_mut().zip(args) {
                    *slot = arg.eval(bindings)?;
                }
                apply_func(*f, &vals[..args.len()])?
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// The set of free variable names.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(name) => {
                out.insert(name.clone());
            }
            Expr::Neg(inner) => inner.collect_variables(out),
            Expr::Bin(_, lhs, rhs) => {
                lhs.collect_variables(out);
                rhs.collect_variables(out);
            }
            Expr::Call(_, args) => {
                for a in args {
                    a.collect_variables(out);
                }
            }
        }
    }

    /// Replace variables by expressions. Variables absent from the map
    /// are left untouched.
    pub fn substitute(&self, map: &HashMap<String, Expr>) -> Expr {
        match self {
            Expr::Num(c) => Expr::Num(*c),
            Expr::Var(name) => match map.get(name) {
                Some(replacement) => replacement.clone(),
                None => Expr::Var(name.clone()),
            },
            Expr::Neg(inner) => Expr::Neg(Box::new(inner.substitute(map))),
            Expr::Bin(op, lhs, rhs) => Expr::Bin(
                *op,
                Box::new(lhs.substitute(map)),
                Box::new(rhs.substitute(map)),
            ),
            Expr::Call(f, args) => {
                Expr::Call(*f, args.iter().map(|a| a.substitute(map)).collect())
            }
        }
    }

    /// Compile to a stack program over an ordered variable list.
    pub fn compile(&self, vars: &[String]) -> Result<Program, CompileError> {
        Program::compile(self, vars)
    }
}

fn apply_bin(op: BinOp, a: f64, b: f64) -> Result<f64, EvalError> {
    let v = match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => {
            if b == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            a / b
        }
        BinOp::Pow => a.powf(b),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn apply_func(f: Func, args: &[f64]) -> Result<f64, EvalError> {
    let v = match f {
        Func::Sin => args[0].sin(),
        Func::Cos => args[0].cos(),
        Func::Sqrt => {
            if args[0] < 0.0 {
                return Err(EvalError::Domain("sqrt"));
            }
            args[0].sqrt()
        }
        Func::Abs => args[0].abs(),
        Func::Exp => args[0].exp(),
        Func::Log => {
            if args[0] <= 0.0 {
                return Err(EvalError::Domain("log"));
            }
            args[0].ln()
        }
        Func::Min => args[0].min(args[1]),
        Func::Max => args[0].max(args[1]),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

// Printing is fully parenthesized so that the output re-parses to the
// identical tree regardless of operator precedence.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{}", c),
            Expr::Var(name) => write!(f, "{}", name),
            Expr::Neg(inner) => write!(f, "(-{})", inner),
            Expr::Bin(op, lhs, rhs) => write!(f, "({} {} {})", lhs, op.symbol(), rhs),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bind(pairs: &[(&str, f64)]) -> HashMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn parses_and_evaluates_quadratic_utility() {
        let e = Expr::parse("3-2*x^2-y^2-3*z^2").unwrap();
        let v = e
            .eval(&bind(&[("x", 0.0), ("y", 0.0), ("z", 0.0)]))
            .unwrap();
        assert_eq!(v, 3.0);
    }

    #[test]
    fn evaluates_restricted_utility_at_unit_x() {
        let e = Expr::parse("3-3*x^2-4*z^2-2*x*z").unwrap();
        let v = e.eval(&bind(&[("x", 1.0), ("z", 0.0)])).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn single_variable_is_an_expression() {
        let e = Expr::parse("x").unwrap();
        assert_eq!(e.eval(&bind(&[("x", 5.0)])).unwrap(), 5.0);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let e = Expr::parse("1/x").unwrap();
        assert_eq!(
            e.eval(&bind(&[("x", 0.0)])),
            Err(EvalError::DivisionByZero)
        );
    }

    #[test]
    fn log_of_non_positive_is_a_domain_error() {
        let e = Expr::parse("log(x)").unwrap();
        assert_eq!(e.eval(&bind(&[("x", 0.0)])), Err(EvalError::Domain("log")));
        assert_eq!(
            e.eval(&bind(&[("x", -1.0)])),
            Err(EvalError::Domain("log"))
        );
    }

    #[test]
    fn sqrt_of_negative_is_a_domain_error() {
        let e = Expr::parse("sqrt(x)").unwrap();
        assert_eq!(
            e.eval(&bind(&[("x", -4.0)])),
            Err(EvalError::Domain("sqrt"))
        );
    }

    #[test]
    fn unknown_function_is_rejected_with_offset() {
        let err = Expr::parse("2*tan(x)").unwrap_err();
        assert!(err.to_string().contains("tan"), "got: {err}");
        assert_eq!(err.offset(), 2);
    }

    #[test]
    fn wrong_arity_is_rejected() {
        assert!(Expr::parse("min(x)").is_err());
        assert!(Expr::parse("sin(x, y)").is_err());
    }

    #[test]
    fn syntax_error_carries_byte_offset() {
        let err = Expr::parse("1 + * 2").unwrap_err();
        assert_eq!(err.offset(), 4);
    }

    #[test]
    fn functions_evaluate() {
        let e = Expr::parse("min(2, max(1, 3)) + abs(0-2) + sqrt(9)").unwrap();
        assert_eq!(e.eval(&HashMap::new()).unwrap(), 2.0 + 2.0 + 3.0);
    }

    #[test]
    fn unary_minus_binds_to_the_atom() {
        // Per the grammar, `-x^2` is `(-x)^2`.
        let e = Expr::parse("-x^2").unwrap();
        assert_eq!(e.eval(&bind(&[("x", 3.0)])).unwrap(), 9.0);
    }

    #[test]
    fn display_reparses_to_same_tree() {
        for text in [
            "3-2*x^2-y^2-3*z^2",
            "min(x, y) * max(x, -y)",
            "sin(t)*cos(p) / (1 + t^2)",
            "-(x + 1) - -y",
            "2 ^ -3",
        ] {
            let e = Expr::parse(text).unwrap();
            let printed = e.to_string();
            let reparsed = Expr::parse(&printed)
                .unwrap_or_else(|err| panic!("`{printed}` failed to reparse: {err}"));
            assert_eq!(e, reparsed, "round trip changed `{text}` -> `{printed}`");
        }
    }

    #[test]
    fn substitute_composes_expressions() {
        let u = Expr::parse("x^2 + y").unwrap();
        let mut map = HashMap::new();
        map.insert("x".to_string(), Expr::parse("cos(t)").unwrap());
        map.insert("y".to_string(), Expr::parse("sin(t)").unwrap());
        let composed = u.substitute(&map);
        let v = composed.eval(&bind(&[("t", 0.0)])).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn variables_are_collected() {
        let e = Expr::parse("3-2*x^2-y^2-3*z^2").unwrap();
        let vars: Vec<_> = e.variables().into_iter().collect();
        assert_eq!(vars, vec!["x".to_string(), "y".to_string(), "z".to_string()]);
    }
}
