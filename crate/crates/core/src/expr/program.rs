//! Flat stack programs compiled from expression trees.
//!
//! Grid scans evaluate the same expression millions of times; walking
//! the boxed tree and hashing variable names per node is the dominant
//! cost. A [`Program`] resolves variables to slot indices once and
//! evaluates with a reusable value stack.

use super::{apply_bin, apply_func, BinOp, EvalError, Expr, Func};

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Var(usize),
    Bin(BinOp),
    Neg,
    Call(Func),
}

/// Compile failure: the expression uses a variable outside the
/// declared list.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown variable `{0}`")]
pub struct CompileError(pub String);

/// A compiled expression over a fixed, ordered variable list.
#[derive(Debug, Clone)]
pub struct Program {
    ops: Vec<Op>,
    n_vars: usize,
    max_depth: usize,
}

impl Program {
    pub fn compile(expr: &Expr, vars: &[String]) -> Result<Program, CompileError> {
        let mut ops = Vec::new();
        emit(expr, vars, &mut ops)?;
        let max_depth = stack_depth(&ops);
        Ok(Program {
            ops,
            n_vars: vars.len(),
            max_depth,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Evaluate with a caller-provided stack buffer (cleared on entry).
    /// Hot loops should allocate the buffer once and reuse it.
    pub fn run_with(&self, args: &[f64], stack: &mut Vec<f64>) -> Result<f64, EvalError> {
        debug_assert_eq!(args.len(), self.n_vars);
        stack.clear();
        stack.reserve(self.max_depth);
        for op in &self.ops {
            match op {
                Op::Const(c) => stack.push(*c),
                Op::Var(slot) => stack.push(args[*slot]),
                Op::Neg => {
                    let a = stack.pop().expect("stack underflow");
                    stack.push(-a);
                }
                Op::Bin(op) => {
                    let b = stack.pop().expect("stack underflow");
                    let a = stack.pop().expect("stack underflow");
                    stack.push(apply_bin(*op, a, b)?);
                }
                Op::Call(f) => {
                    if f.arity() == 1 {
                        let a = stack.pop().expect("stack underflow");
                        stack.push(apply_func(*f, &[a])?);
                    } else {
                        let b = stack.pop().expect("stack underflow");
                        let a = stack.pop().expect("stack underflow");
                        stack.push(apply_func(*f, &[a, b])?);
                    }
                }
            }
        }
        let v = stack.pop().expect("program left an empty stack");
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Convenience wrapper allocating a fresh stack.
    pub fn run(&self, args: &[f64]) -> Result<f64, EvalError> {
        let mut stack = Vec::with_capacity(self.max_depth);
        self.run_with(args, &mut stack)
    }
}

fn emit(expr: &Expr, vars: &[String], ops: &mut Vec<Op>) -> Result<(), CompileError> {
    match expr {
        Expr::Num(c) => ops.push(Op::Const(*c)),
        Expr::Var(name) => {
            let slot = vars
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| CompileError(name.clone()))?;
            ops.push(Op::Var(slot));
        }
        Expr::Neg(inner) => {
            emit(inner, vars, ops)?;
            ops.push(Op::Neg);
        }
        Expr::Bin(op, lhs, rhs) => {
            emit(lhs, vars, ops)?;
            emit(rhs, vars, ops)?;
            ops.push(Op::Bin(*op));
        }
        Expr::Call(f, args) => {
            for a in args {
                emit(a, vars, ops)?;
            }
            ops.push(Op::Call(*f));
        }
    }
    Ok(())
}

fn stack_depth(ops: &[Op]) -> usize {
    let mut depth = 0usize;
    let mut max = 0usize;
    for op in ops {
        match op {
            Op::Const(_) | Op::Var(_) => depth += 1,
            Op::Neg => {}
            Op::Bin(_) => depth -= 1,
            Op::Call(f) => depth -= f.arity() - 1,
        }
        max = max.max(depth);
    }
    max
}
