use std::fmt;

use crate::kinematics::{ObjectId, Vec3, WorldState};
use crate::lexicon::Action;

use super::DitlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Attribute {
    /// Position, metres.
    Loc,
    /// Accumulated rotation, radians.
    Rot,
    /// Velocity, metres per second.
    Vel,
}

impl Attribute {
    pub fn dim(self) -> Dim {
        match self {
            Attribute::Rot => Dim::Scalar,
            Attribute::Loc | Attribute::Vel => Dim::Vector,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Attribute::Loc => "loc",
            Attribute::Rot => "rot",
            Attribute::Vel => "vel",
        }
    }
}

/// An assignable location: one attribute of one object.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Attr {
    pub object: ObjectId,
    pub attribute: Attribute,
}

impl Attr {
    pub fn new(object: &str, attribute: Attribute) -> Self {
        Self {
            object: ObjectId::new(object),
            attribute,
        }
    }

    pub fn read(&self, s: &WorldState) -> Result<Value, DitlError> {
        let b = s.body(&self.object)?;
        Ok(match self.attribute {
            Attribute::Loc => Value::Vector(b.position),
            Attribute::Rot => Value::Scalar(b.rotation),
            Attribute::Vel => Value::Vector(b.velocity),
        })
    }

    pub fn write(&self, s: &mut WorldState, v: Value) -> Result<(), DitlError> {
        let b = s.body_mut(&self.object)?;
        match (self.attribute, v) {
            (Attribute::Loc, Value::Vector(p)) => b.position = p,
            (Attribute::Vel, Value::Vector(p)) => b.velocity = p,
            (Attribute::Rot, Value::Scalar(x)) => b.rotation = x,
            (a, v) => {
                return Err(DitlError::Dimension(format!(
                    "cannot assign {:?} to {}",
                    v.dim(),
                    a.as_str()
                )))
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Scalar,
    Vector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Scalar(f64),
    Vector(Vec3),
}

impl Value {
    pub fn dim(&self) -> Dim {
        match self {
            Value::Scalar(_) => Dim::Scalar,
            Value::Vector(_) => Dim::Vector,
        }
    }

    /// Absolute difference for scalars, Euclidean distance for vectors.
    pub fn distance(&self, other: &Value) -> Result<f64, DitlError> {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => Ok((a - b).abs()),
            (Value::Vector(a), Value::Vector(b)) => Ok((a - b).norm()),
            _ => Err(DitlError::Dimension("comparing a scalar with a vector".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Scalar(f64),
    Vector(Vec3),
    Attr(Attr),
    Sum(Box<Term>, Box<Term>),
    Diff(Box<Term>, Box<Term>),
    /// Product with at least one scalar side.
    Scale(Box<Term>, Box<Term>),
}

impl Term {
    pub fn attr(object: &str, attribute: Attribute) -> Self {
        Term::Attr(Attr::new(object, attribute))
    }

    pub fn sum(a: Term, b: Term) -> Self {
        Term::Sum(Box::new(a), Box::new(b))
    }

    pub fn diff(a: Term, b: Term) -> Self {
        Term::Diff(Box::new(a), Box::new(b))
    }

    pub fn scale(a: Term, b: Term) -> Self {
        Term::Scale(Box::new(a), Box::new(b))
    }

    pub fn dim(&self) -> Result<Dim, DitlError> {
        match self {
            Term::Scalar(_) => Ok(Dim::Scalar),
            Term::Vector(_) => Ok(Dim::Vector),
            Term::Attr(a) => Ok(a.attribute.dim()),
            Term::Sum(a, b) | Term::Diff(a, b) => {
                let (da, db) = (a.dim()?, b.dim()?);
                if da == db {
                    Ok(da)
                } else {
                    Err(DitlError::Dimension(format!("adding {da:?} and {db:?}: {self}")))
                }
            }
            Term::Scale(a, b) => match (a.dim()?, b.dim()?) {
                (Dim::Vector, Dim::Vector) => {
                    Err(DitlError::Dimension(format!("product of two vectors: {self}")))
                }
                (Dim::Scalar, Dim::Scalar) => Ok(Dim::Scalar),
                _ => Ok(Dim::Vector),
            },
        }
    }

    pub fn eval(&self, s: &WorldState) -> Result<Value, DitlError> {
        use Value::*;
        Ok(match self {
            Term::Scalar(x) => Scalar(*x),
            Term::Vector(v) => Vector(*v),
            Term::Attr(a) => a.read(s)?,
            Term::Sum(a, b) => match (a.eval(s)?, b.eval(s)?) {
                (Scalar(x), Scalar(y)) => Scalar(x + y),
                (Vector(x), Vector(y)) => Vector(x + y),
                _ => return Err(DitlError::Dimension(format!("{self}"))),
            },
            Term::Diff(a, b) => match (a.eval(s)?, b.eval(s)?) {
                (Scalar(x), Scalar(y)) => Scalar(x - y),
                (Vector(x), Vector(y)) => Vector(x - y),
                _ => return Err(DitlError::Dimension(format!("{self}"))),
            },
            Term::Scale(a, b) => match (a.eval(s)?, b.eval(s)?) {
                (Scalar(x), Scalar(y)) => Scalar(x * y),
                (Scalar(k), Vector(v)) | (Vector(v), Scalar(k)) => Vector(v * k),
                _ => return Err(DitlError::Dimension(format!("{self}"))),
            },
        })
    }

    fn objects<'a>(&'a self, out: &mut Vec<&'a ObjectId>) {
        match self {
            Term::Scalar(_) | Term::Vector(_) => {}
            Term::Attr(a) => out.push(&a.object),
            Term::Sum(a, b) | Term::Diff(a, b) | Term::Scale(a, b) => {
                a.objects(out);
                b.objects(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    /// Externally connected: touching within the contact tolerance.
    Ec(ObjectId, ObjectId),
    /// Disconnected: separated by more than the contact tolerance.
    Dc(ObjectId, ObjectId),
    /// Located at: touching or overlapping.
    At(ObjectId, ObjectId),
    Eq(Term, Term, f64),
    Leq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// Some run of the program ends in a state satisfying the formula.
    Diamond(Box<Program>, Box<Formula>),
}

impl Formula {
    pub fn ec(a: &str, b: &str) -> Self {
        Formula::Ec(a.into(), b.into())
    }

    pub fn dc(a: &str, b: &str) -> Self {
        Formula::Dc(a.into(), b.into())
    }

    pub fn at(a: &str, b: &str) -> Self {
        Formula::At(a.into(), b.into())
    }

    pub fn at_ids(a: &ObjectId, b: &ObjectId) -> Self {
        Formula::At(a.clone(), b.clone())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn diamond(p: Program, f: Formula) -> Self {
        Formula::Diamond(Box::new(p), Box::new(f))
    }

    pub fn has_diamond(&self) -> bool {
        match self {
            Formula::Diamond(..) => true,
            Formula::Not(f) => f.has_diamond(),
            Formula::And(a, b) | Formula::Or(a, b) => a.has_diamond() || b.has_diamond(),
            _ => false,
        }
    }

    /// Structural checks: positive tolerances and consistent dimensions.
    pub fn check(&self) -> Result<(), DitlError> {
        match self {
            Formula::True | Formula::False | Formula::Ec(..) | Formula::Dc(..) | Formula::At(..) => Ok(()),
            Formula::Eq(a, b, tol) => {
                if !(tol.is_finite() && *tol > 0.0) {
                    return Err(DitlError::Dimension(format!("tolerance must be > 0 in {self}")));
                }
                if a.dim()? != b.dim()? {
                    return Err(DitlError::Dimension(format!("{self}")));
                }
                Ok(())
            }
            Formula::Leq(a, b) => match (a.dim()?, b.dim()?) {
                (Dim::Scalar, Dim::Scalar) => Ok(()),
                _ => Err(DitlError::Dimension(format!("leq needs scalars: {self}"))),
            },
            Formula::Not(f) => f.check(),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.check()?;
                b.check()
            }
            Formula::Diamond(p, f) => {
                p.check()?;
                f.check()
            }
        }
    }

    /// Every object id the formula mentions.
    pub fn objects(&self) -> Vec<&ObjectId> {
        let mut out = Vec::new();
        self.collect_objects(&mut out);
        out
    }

    fn collect_objects<'a>(&'a self, out: &mut Vec<&'a ObjectId>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Ec(a, b) | Formula::Dc(a, b) | Formula::At(a, b) => {
                out.push(a);
                out.push(b);
            }
            Formula::Eq(a, b, _) | Formula::Leq(a, b) => {
                a.objects(out);
                b.objects(out);
            }
            Formula::Not(f) => f.collect_objects(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_objects(out);
                b.collect_objects(out);
            }
            Formula::Diamond(p, f) => {
                p.collect_objects(out);
                f.collect_objects(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Program {
    Assign(Attr, Term),
    /// Assignment that fails unless the new value differs from the old.
    DirectedAssign(Attr, Term),
    Test(Formula),
    Tick(Action),
    /// Sequential composition; the empty sequence is the identity.
    Seq(Vec<Program>),
    Choice(Box<Program>, Box<Program>),
    /// Zero up to `bound` iterations.
    Star(Box<Program>, u32),
}

impl Program {
    pub fn seq(items: Vec<Program>) -> Self {
        Program::Seq(items)
    }

    pub fn choice(a: Program, b: Program) -> Self {
        Program::Choice(Box::new(a), Box::new(b))
    }

    pub fn star(p: Program, bound: u32) -> Self {
        Program::Star(Box::new(p), bound)
    }

    /// `while not goal do body; goal?`
    pub fn while_not(goal: Formula, body: Program, bound: u32) -> Self {
        Program::seq(vec![
            Program::star(
                Program::seq(vec![Program::Test(Formula::not(goal.clone())), body]),
                bound,
            ),
            Program::Test(goal),
        ])
    }

    pub fn check(&self) -> Result<(), DitlError> {
        match self {
            Program::Assign(a, t) | Program::DirectedAssign(a, t) => {
                if a.attribute.dim() != t.dim()? {
                    return Err(DitlError::Dimension(format!("{self}")));
                }
                Ok(())
            }
            Program::Test(f) => f.check(),
            Program::Tick(_) => Ok(()),
            Program::Seq(ps) => ps.iter().try_for_each(Program::check),
            Program::Choice(a, b) => {
                a.check()?;
                b.check()
            }
            Program::Star(p, bound) => {
                if *bound == 0 {
                    return Err(DitlError::Dimension("star bound must be positive".into()));
                }
                p.check()
            }
        }
    }

    pub fn choice_count(&self) -> usize {
        match self {
            Program::Choice(a, b) => 1 + a.choice_count() + b.choice_count(),
            Program::Seq(ps) => ps.iter().map(Program::choice_count).sum(),
            Program::Star(p, _) => p.choice_count(),
            _ => 0,
        }
    }

    fn collect_objects<'a>(&'a self, out: &mut Vec<&'a ObjectId>) {
        match self {
            Program::Assign(a, t) | Program::DirectedAssign(a, t) => {
                out.push(&a.object);
                t.objects(out);
            }
            Program::Test(f) => f.collect_objects(out),
            Program::Tick(_) => {}
            Program::Seq(ps) => ps.iter().for_each(|p| p.collect_objects(out)),
            Program::Choice(a, b) => {
                a.collect_objects(out);
                b.collect_objects(out);
            }
            Program::Star(p, _) => p.collect_objects(out),
        }
    }

    pub fn objects(&self) -> Vec<&ObjectId> {
        let mut out = Vec::new();
        self.collect_objects(&mut out);
        out
    }
}

/// A temporally traced run: states `s0..sn`, labels `a1..an`, and the
/// time map that stamps state `i` with `t0 + i*dt` and transition `i` with
/// `[t(i-1), t(i))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dt: f64,
    pub states: Vec<WorldState>,
    pub labels: Vec<Action>,
}

impl Trace {
    pub fn initial(dt: f64, s0: WorldState) -> Self {
        Self {
            dt,
            states: vec![s0],
            labels: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn tick_count(&self) -> usize {
        self.labels.len()
    }

    pub fn first(&self) -> &WorldState {
        &self.states[0]
    }

    pub fn last(&self) -> &WorldState {
        self.states.last().expect("trace has an initial state")
    }

    pub fn instant(&self, i: usize) -> f64 {
        self.states[0].time + i as f64 * self.dt
    }

    /// Interval of transition `i` (1-based, leading into state `i`).
    pub fn interval(&self, i: usize) -> (f64, f64) {
        assert!(i >= 1 && i <= self.labels.len(), "no transition {i}");
        (self.instant(i - 1), self.instant(i))
    }

    /// Exact bit-level identity of the run.
    pub fn bit_key(&self) -> Vec<u64> {
        let mut key = vec![self.dt.to_bits(), self.states.len() as u64];
        key.extend(self.labels.iter().map(|a| *a as u64));
        for s in &self.states {
            s.bit_key(&mut key);
        }
        key
    }
}

// ---- textual form ----

fn write_num(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        write!(f, "{x:.1}")
    } else {
        write!(f, "{x:?}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Scalar(x) => write_num(f, *x),
            Term::Vector(v) => {
                f.write_str("(vec ")?;
                write_num(f, v.x)?;
                f.write_str(" ")?;
                write_num(f, v.y)?;
                f.write_str(" ")?;
                write_num(f, v.z)?;
                f.write_str(")")
            }
            Term::Attr(a) => write!(f, "({} {})", a.attribute.as_str(), a.object),
            Term::Sum(a, b) => write!(f, "(+ {a} {b})"),
            Term::Diff(a, b) => write!(f, "(- {a} {b})"),
            Term::Scale(a, b) => write!(f, "(* {a} {b})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Ec(a, b) => write!(f, "(ec {a} {b})"),
            Formula::Dc(a, b) => write!(f, "(dc {a} {b})"),
            Formula::At(a, b) => write!(f, "(at {a} {b})"),
            Formula::Eq(a, b, tol) => {
                write!(f, "(eq {a} {b} ")?;
                write_num(f, *tol)?;
                f.write_str(")")
            }
            Formula::Leq(a, b) => write!(f, "(leq {a} {b})"),
            Formula::Not(x) => write!(f, "(not {x})"),
            Formula::And(a, b) => write!(f, "(and {a} {b})"),
            Formula::Or(a, b) => write!(f, "(or {a} {b})"),
            Formula::Diamond(p, x) => write!(f, "(dia {p} {x})"),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::Assign(a, t) => write!(f, "(assign {} {} {t})", a.object, a.attribute.as_str()),
            Program::DirectedAssign(a, t) => {
                write!(f, "(dassign {} {} {t})", a.object, a.attribute.as_str())
            }
            Program::Test(x) => write!(f, "(test {x})"),
            Program::Tick(a) => write!(f, "(tick {a})"),
            Program::Seq(ps) => {
                f.write_str("(seq")?;
                for p in ps {
                    write!(f, " {p}")?;
                }
                f.write_str(")")
            }
            Program::Choice(a, b) => write!(f, "(choice {a} {b})"),
            Program::Star(p, n) => write!(f, "(star {p} {n})"),
        }
    }
}
