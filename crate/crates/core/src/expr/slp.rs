//! Straight-line programs: single-assignment instruction lists.
//!
//! Text format, one instruction per line, temps numbered from 1:
//!
//! ```text
//! t1 = add x1 x2
//! t2 = sub x1 x2
//! t3 = abs t2
//! t4 = sub t1 t3
//! t5 = halve t4
//! result t5
//! ```

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::cse::Interner;
use super::{max_cmp, min_cmp, Expr, ExprRef};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpCode {
    Add,
    Sub,
    Abs,
    Halve,
    Min,
    Max,
}

impl OpCode {
    pub fn arity(self) -> usize {
        match self {
            OpCode::Abs | OpCode::Halve => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OpCode::Add => "add",
            OpCode::Sub => "sub",
            OpCode::Abs => "abs",
            OpCode::Halve => "halve",
            OpCode::Min => "min",
            OpCode::Max => "max",
        }
    }

    fn from_name(s: &str) -> Option<OpCode> {
        Some(match s {
            "add" => OpCode::Add,
            "sub" => OpCode::Sub,
            "abs" => OpCode::Abs,
            "halve" => OpCode::Halve,
            "min" => OpCode::Min,
            "max" => OpCode::Max,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operand {
    /// 1-based input `x_i`.
    Input(usize),
    Const(f64),
    /// 1-based temp `t_k`.
    Temp(usize),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Input(i) => write!(f, "x{i}"),
            Operand::Const(c) => write!(f, "{c}"),
            Operand::Temp(k) => write!(f, "t{k}"),
        }
    }
}

impl FromStr for Operand {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let index = |rest: &str| rest.parse::<usize>().ok().filter(|&i| i >= 1);
        if let Some(rest) = s.strip_prefix('x') {
            index(rest)
                .map(Operand::Input)
                .ok_or(format!("bad input {s:?}"))
        } else if let Some(rest) = s.strip_prefix('t') {
            index(rest)
                .map(Operand::Temp)
                .ok_or(format!("bad temp {s:?}"))
        } else {
            match s.parse::<f64>() {
                Ok(c) if c.is_finite() => Ok(Operand::Const(c)),
                _ => Err(format!("bad operand {s:?}")),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub dest: usize,
    pub op: OpCode,
    pub args: Vec<Operand>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledProgram {
    pub instructions: Vec<Instruction>,
    pub result: Operand,
}

/// Flattens an arithmetic-form expression into a program.
///
/// Structurally equal subexpressions become one temp. Instructions follow a
/// left-to-right post-order walk.
pub fn emit_slp(expr: &ExprRef) -> Result<CompiledProgram> {
    let mut found = None;
    super::visit(expr, &mut |e| {
        if matches!(e, Expr::Min(..) | Expr::Max(..)) {
            found.get_or_insert(e.name());
        }
    });
    if let Some(name) = found {
        return Err(Error::MinMaxPresent(name));
    }
    Ok(CompiledProgram::compile(expr))
}

impl CompiledProgram {
    /// Like [`emit_slp`] but keeps min/max as comparison instructions.
    pub fn compile(expr: &ExprRef) -> CompiledProgram {
        let mut interner = Interner::default();
        let root = interner.intern(expr);
        let mut operand_of: HashMap<usize, Operand> = HashMap::new();
        let mut instructions = Vec::new();
        let result = flatten(root, &interner, &mut operand_of, &mut instructions);
        CompiledProgram {
            instructions,
            result,
        }
    }

    pub fn uses_minmax(&self) -> bool {
        self.instructions
            .iter()
            .any(|i| matches!(i.op, OpCode::Min | OpCode::Max))
    }

    /// Runs the program with `inputs[i - 1]` bound to `x_i`.
    pub fn interpret(&self, inputs: &[f64]) -> Result<f64> {
        let mut temps = Vec::with_capacity(self.instructions.len());
        self.interpret_into(inputs, &mut temps)
    }

    /// As [`interpret`](Self::interpret), reusing `temps` as scratch.
    pub fn interpret_into(&self, inputs: &[f64], temps: &mut Vec<f64>) -> Result<f64> {
        temps.clear();
        let read = |o: &Operand, temps: &[f64]| -> Result<f64> {
            match *o {
                Operand::Input(i) => inputs.get(i - 1).copied().ok_or(Error::MissingVariable(i)),
                Operand::Const(c) => Ok(c),
                Operand::Temp(k) => temps.get(k - 1).copied().ok_or(Error::Parse {
                    offset: 0,
                    message: format!("t{k} used before definition"),
                }),
            }
        };
        for ins in &self.instructions {
            let a = read(&ins.args[0], temps)?;
            let v = match ins.op {
                OpCode::Abs => a.abs(),
                OpCode::Halve => a / 2.0,
                op => {
                    let b = read(&ins.args[1], temps)?;
                    match op {
                        OpCode::Add => a + b,
                        OpCode::Sub => a - b,
                        OpCode::Min => min_cmp(a, b),
                        _ => max_cmp(a, b),
                    }
                }
            };
            if !v.is_finite() {
                return Err(Error::NonFiniteIntermediate {
                    node: format!("t{}", ins.dest),
                });
            }
            temps.push(v);
        }
        read(&self.result, temps)
    }

    /// Parses the line format written by `Display`.
    pub fn parse(src: &str) -> Result<CompiledProgram> {
        let mut instructions = Vec::new();
        let mut result = None;
        let mut offset = 0;
        for line in src.split_inclusive('\n') {
            let at = offset;
            offset += line.len();
            let fail = |message: String| Error::Parse {
                offset: at,
                message,
            };
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            if result.is_some() {
                return Err(fail("instruction after result".into()));
            }
            let tokens: Vec<&str> = text.split_whitespace().collect();
            let operand = |s: &str, defined: usize| -> Result<Operand> {
                let o: Operand = s.parse().map_err(fail)?;
                match o {
                    Operand::Temp(k) if k > defined => {
                        Err(fail(format!("t{k} used before definition")))
                    }
                    _ => Ok(o),
                }
            };
            match tokens.as_slice() {
                ["result", arg] => result = Some(operand(arg, instructions.len())?),
                [dest, "=", op, args @ ..] => {
                    let expected = instructions.len() + 1;
                    if *dest != format!("t{expected}") {
                        return Err(fail(format!("expected destination t{expected}")));
                    }
                    let op =
                        OpCode::from_name(op).ok_or_else(|| fail(format!("unknown op {op:?}")))?;
                    if args.len() != op.arity() {
                        return Err(fail(format!("{} takes {} operands", op.name(), op.arity())));
                    }
                    let args = args
                        .iter()
                        .map(|a| operand(a, instructions.len()))
                        .collect::<Result<Vec<_>>>()?;
                    instructions.push(Instruction {
                        dest: expected,
                        op,
                        args,
                    });
                }
                _ => return Err(fail(format!("unrecognized line {text:?}"))),
            }
        }
        let result = result.ok_or(Error::Parse {
            offset,
            message: "missing result line".into(),
        })?;
        Ok(CompiledProgram {
            instructions,
            result,
        })
    }
}

impl fmt::Display for CompiledProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ins in &self.instructions {
            write!(f, "t{} = {}", ins.dest, ins.op.name())?;
            for a in &ins.args {
                write!(f, " {a}")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "result {}", self.result)
    }
}

fn flatten(
    id: usize,
    interner: &Interner,
    operand_of: &mut HashMap<usize, Operand>,
    out: &mut Vec<Instruction>,
) -> Operand {
    if let Some(&o) = operand_of.get(&id) {
        return o;
    }
    let node = interner.nodes[id].clone();
    let mut arg = |child: &ExprRef, out: &mut Vec<Instruction>| {
        let child_id = interner_id(interner, child);
        flatten(child_id, interner, operand_of, out)
    };
    let (op, args) = match &*node {
        Expr::Var(i) => return Operand::Input(*i),
        Expr::Const(c) => return Operand::Const(*c),
        Expr::Abs(a) => (OpCode::Abs, vec![arg(a, out)]),
        Expr::Halve(a) => (OpCode::Halve, vec![arg(a, out)]),
        Expr::Add(a, b) => (OpCode::Add, vec![arg(a, out), arg(b, out)]),
        Expr::Sub(a, b) => (OpCode::Sub, vec![arg(a, out), arg(b, out)]),
        Expr::Min(a, b) => (OpCode::Min, vec![arg(a, out), arg(b, out)]),
        Expr::Max(a, b) => (OpCode::Max, vec![arg(a, out), arg(b, out)]),
    };
    let dest = out.len() + 1;
    out.push(Instruction { dest, op, args });
    let o = Operand::Temp(dest);
    operand_of.insert(id, o);
    o
}

/// Canonical nodes' children are themselves canonical, so they are found
/// through the address map.
fn interner_id(interner: &Interner, child: &ExprRef) -> usize {
    interner
        .id_of(child)
        .expect("children of interned nodes are interned")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{build_selection_expr, eval_expr, ExprForm};
    use crate::sequence::Rank;

    fn build(len: usize, n: usize, form: ExprForm) -> ExprRef {
        build_selection_expr(len, Rank::new(n, len).unwrap(), form).unwrap()
    }

    #[test]
    fn min_of_two_program() {
        let p = emit_slp(&build(2, 1, ExprForm::Arithmetic)).unwrap();
        let ops: Vec<_> = p.instructions.iter().map(|i| i.op).collect();
        assert_eq!(
            ops,
            [
                OpCode::Add,
                OpCode::Sub,
                OpCode::Abs,
                OpCode::Sub,
                OpCode::Halve
            ]
        );
        assert_eq!(
            p.to_string(),
            "t1 = add x1 x2\nt2 = sub x1 x2\nt3 = abs t2\nt4 = sub t1 t3\nt5 = halve t4\nresult t5\n"
        );
        assert_eq!(p.interpret(&[1.0, 2.0]), Ok(1.0));
    }

    #[test]
    fn variable_program_is_empty() {
        let p = emit_slp(&Expr::var(1)).unwrap();
        assert!(p.instructions.is_empty());
        assert_eq!(p.result, Operand::Input(1));
        assert_eq!(p.to_string(), "result x1\n");
        assert_eq!(p.interpret(&[42.0]), Ok(42.0));
    }

    #[test]
    fn rejects_minmax() {
        assert_eq!(
            emit_slp(&build(3, 2, ExprForm::MinMax)),
            Err(Error::MinMaxPresent("min"))
        );
    }

    #[test]
    fn single_assignment_and_shared_temps() {
        let e = build(4, 2, ExprForm::Arithmetic);
        let p = emit_slp(&e).unwrap();
        for ins in &p.instructions {
            for a in &ins.args {
                if let Operand::Temp(k) = a {
                    assert!(*k < ins.dest);
                }
            }
        }
        let (_, m) = crate::expr::cse(&e);
        // every non-leaf distinct node is exactly one instruction
        let leaves = 4;
        assert_eq!(p.instructions.len() as u64, m.node_count_dag - leaves);
    }

    #[test]
    fn interpretation_matches_eval() {
        let e = build(5, 3, ExprForm::Arithmetic);
        let p = emit_slp(&e).unwrap();
        let xs = [3.0, -8.0, 0.5, 11.0, 2.0];
        assert_eq!(p.interpret(&xs), eval_expr(&e, &xs));
        let mm = build(5, 3, ExprForm::MinMax);
        let q = CompiledProgram::compile(&mm);
        assert!(q.uses_minmax());
        assert_eq!(q.interpret(&xs), eval_expr(&mm, &xs));
    }

    #[test]
    fn text_round_trip() {
        let p = emit_slp(&build(4, 3, ExprForm::Arithmetic)).unwrap();
        assert_eq!(CompiledProgram::parse(&p.to_string()), Ok(p));
        let with_const = "t1 = add x1 -0.5\nt2 = halve t1\nresult t2\n";
        let q = CompiledProgram::parse(with_const).unwrap();
        assert_eq!(q.to_string(), with_const);
        assert_eq!(q.interpret(&[2.5]), Ok(1.0));
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "",
            "t1 = add x1 x2\n",
            "t2 = add x1 x2\nresult t2",
            "t1 = add x1\nresult t1",
            "t1 = abs t1\nresult t1",
            "t1 = neg x1\nresult t1",
            "result x1\nt1 = abs x1",
            "t1 = abs x0\nresult t1",
            "result t3",
        ] {
            assert!(CompiledProgram::parse(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn missing_input() {
        let p = emit_slp(&build(3, 1, ExprForm::Arithmetic)).unwrap();
        assert_eq!(p.interpret(&[1.0, 2.0]), Err(Error::MissingVariable(3)));
    }
}
