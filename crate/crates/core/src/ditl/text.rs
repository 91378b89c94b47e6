//! Parenthesized textual form of programs and formulas.
//!
//! ```text
//! program := (tick ACTION) | (test formula)
//!          | (assign OBJ ATTR term) | (dassign OBJ ATTR term)
//!          | (seq program*) | (choice program program) | (star program N)
//! formula := true | false | (ec OBJ OBJ) | (dc OBJ OBJ) | (at OBJ OBJ)
//!          | (eq term term TOL) | (leq term term)
//!          | (not formula) | (and formula formula) | (or formula formula)
//!          | (dia program formula)
//! term    := NUMBER | (vec X Y Z) | (loc OBJ) | (rot OBJ) | (vel OBJ)
//!          | (+ term term) | (- term term) | (* term term)
//! ```
//!
//! `;` starts a comment running to the end of the line.

use crate::kinematics::{ObjectId, Vec3};

use super::{Attr, Attribute, DitlError, Formula, Program, Term};

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn offset(&self) -> usize {
        match self {
            Sexp::Atom(_, o) | Sexp::List(_, o) => *o,
        }
    }
}

fn err(offset: usize, message: impl Into<String>) -> DitlError {
    DitlError::Syntax {
        offset,
        message: message.into(),
    }
}

fn read_all(src: &str) -> Result<Vec<Sexp>, DitlError> {
    let bytes = src.as_bytes();
    let mut pos = 0;
    let mut stack: Vec<(Vec<Sexp>, usize)> = Vec::new();
    let mut top = Vec::new();
    while pos < bytes.len() {
        let c = bytes[pos];
        match c {
            b';' => {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            }
            c if c.is_ascii_whitespace() => pos += 1,
            b'(' => {
                stack.push((Vec::new(), pos));
                pos += 1;
            }
            b')' => {
                let (items, start) = stack.pop().ok_or_else(|| err(pos, "unbalanced `)`"))?;
                let list = Sexp::List(items, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => top.push(list),
                }
                pos += 1;
            }
            _ => {
                let start = pos;
                while pos < bytes.len()
                    && !bytes[pos].is_ascii_whitespace()
                    && !matches!(bytes[pos], b'(' | b')' | b';')
                {
                    pos += 1;
                }
                let atom = Sexp::Atom(src[start..pos].to_string(), start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(atom),
                    None => top.push(atom),
                }
            }
        }
    }
    if let Some((_, start)) = stack.pop() {
        return Err(err(start, "unclosed `(`"));
    }
    Ok(top)
}

fn read_one(src: &str) -> Result<Sexp, DitlError> {
    let mut all = read_all(src)?;
    match all.len() {
        1 => Ok(all.pop().expect("one item")),
        0 => Err(err(0, "empty input")),
        _ => Err(err(all[1].offset(), "more than one top-level form")),
    }
}

fn head(items: &[Sexp], at: usize) -> Result<&str, DitlError> {
    match items.first() {
        Some(Sexp::Atom(h, _)) => Ok(h),
        _ => Err(err(at, "expected an operator")),
    }
}

fn arity(items: &[Sexp], n: usize, at: usize, op: &str) -> Result<(), DitlError> {
    if items.len() == n + 1 {
        Ok(())
    } else {
        Err(err(at, format!("`{op}` takes {n} argument(s), got {}", items.len() - 1)))
    }
}

fn atom(s: &Sexp) -> Result<&str, DitlError> {
    match s {
        Sexp::Atom(a, _) => Ok(a),
        Sexp::List(_, o) => Err(err(*o, "expected an atom")),
    }
}

fn number(s: &Sexp) -> Result<f64, DitlError> {
    let a = atom(s)?;
    a.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| err(s.offset(), format!("`{a}` is not a number")))
}

fn object(s: &Sexp) -> Result<ObjectId, DitlError> {
    let a = atom(s)?;
    if a.is_empty() || !a.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
        return Err(err(s.offset(), format!("`{a}` is not an object name")));
    }
    Ok(ObjectId::new(a))
}

fn attribute(s: &Sexp) -> Result<Attribute, DitlError> {
    match atom(s)? {
        "loc" => Ok(Attribute::Loc),
        "rot" => Ok(Attribute::Rot),
        "vel" => Ok(Attribute::Vel),
        other => Err(err(s.offset(), format!("unknown attribute `{other}`"))),
    }
}

fn term(s: &Sexp) -> Result<Term, DitlError> {
    let (items, at) = match s {
        Sexp::Atom(..) => return Ok(Term::Scalar(number(s)?)),
        Sexp::List(items, at) => (items, *at),
    };
    let op = head(items, at)?;
    match op {
        "vec" => {
            arity(items, 3, at, op)?;
            Ok(Term::Vector(Vec3::new(number(&items[1])?, number(&items[2])?, number(&items[3])?)))
        }
        "loc" | "rot" | "vel" => {
            arity(items, 1, at, op)?;
            Ok(Term::Attr(Attr {
                object: object(&items[1])?,
                attribute: attribute(&items[0])?,
            }))
        }
        "+" | "-" | "*" => {
            arity(items, 2, at, op)?;
            let (a, b) = (term(&items[1])?, term(&items[2])?);
            Ok(match op {
                "+" => Term::sum(a, b),
                "-" => Term::diff(a, b),
                _ => Term::scale(a, b),
            })
        }
        other => Err(err(at, format!("unknown term operator `{other}`"))),
    }
}

fn formula(s: &Sexp) -> Result<Formula, DitlError> {
    let (items, at) = match s {
        Sexp::Atom(a, o) => {
            return match a.as_str() {
                "true" => Ok(Formula::True),
                "false" => Ok(Formula::False),
                other => Err(err(*o, format!("unknown formula `{other}`"))),
            }
        }
        Sexp::List(items, at) => (items, *at),
    };
    let op = head(items, at)?;
    match op {
        "ec" | "dc" | "at" => {
            arity(items, 2, at, op)?;
            let (a, b) = (object(&items[1])?, object(&items[2])?);
            Ok(match op {
                "ec" => Formula::Ec(a, b),
                "dc" => Formula::Dc(a, b),
                _ => Formula::At(a, b),
            })
        }
        "eq" => {
            arity(items, 3, at, op)?;
            Ok(Formula::Eq(term(&items[1])?, term(&items[2])?, number(&items[3])?))
        }
        "leq" => {
            arity(items, 2, at, op)?;
            Ok(Formula::Leq(term(&items[1])?, term(&items[2])?))
        }
        "not" => {
            arity(items, 1, at, op)?;
            Ok(Formula::not(formula(&items[1])?))
        }
        "and" | "or" => {
            arity(items, 2, at, op)?;
            let (a, b) = (formula(&items[1])?, formula(&items[2])?);
            Ok(if op == "and" { Formula::and(a, b) } else { Formula::or(a, b) })
        }
        "dia" => {
            arity(items, 2, at, op)?;
            Ok(Formula::diamond(program(&items[1])?, formula(&items[2])?))
        }
        other => Err(err(at, format!("unknown formula operator `{other}`"))),
    }
}

fn program(s: &Sexp) -> Result<Program, DitlError> {
    let Sexp::List(items, at) = s else {
        return Err(err(s.offset(), "expected a parenthesized program"));
    };
    let at = *at;
    let op = head(items, at)?;
    match op {
        "tick" => {
            arity(items, 1, at, op)?;
            let label = atom(&items[1])?;
            Ok(Program::Tick(label.parse().map_err(|m: String| err(items[1].offset(), m))?))
        }
        "test" => {
            arity(items, 1, at, op)?;
            Ok(Program::Test(formula(&items[1])?))
        }
        "assign" | "dassign" => {
            arity(items, 3, at, op)?;
            let attr = Attr {
                object: object(&items[1])?,
                attribute: attribute(&items[2])?,
            };
            let t = term(&items[3])?;
            Ok(if op == "assign" {
                Program::Assign(attr, t)
            } else {
                Program::DirectedAssign(attr, t)
            })
        }
        "seq" => Ok(Program::Seq(items[1..].iter().map(program).collect::<Result<_, _>>()?)),
        "choice" => {
            arity(items, 2, at, op)?;
            Ok(Program::choice(program(&items[1])?, program(&items[2])?))
        }
        "star" => {
            arity(items, 2, at, op)?;
            let n = atom(&items[2])?;
            let bound: u32 = n
                .parse()
                .ok()
                .filter(|&b| b > 0)
                .ok_or_else(|| err(items[2].offset(), format!("star bound `{n}` must be a positive integer")))?;
            Ok(Program::star(program(&items[1])?, bound))
        }
        other => Err(err(at, format!("unknown program operator `{other}`"))),
    }
}

/// Parses and checks a program in the textual form.
pub fn parse_program(src: &str) -> Result<Program, DitlError> {
    let p = program(&read_one(src)?)?;
    p.check()?;
    Ok(p)
}

pub fn parse_formula(src: &str) -> Result<Formula, DitlError> {
    let f = formula(&read_one(src)?)?;
    f.check()?;
    Ok(f)
}
