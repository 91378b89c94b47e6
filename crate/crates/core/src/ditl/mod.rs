//! Dynamic interval temporal logic: programs over world states, their
//! traced execution, the full bounded unfolding of their transition
//! system, and compilation of motion events into programs.
//!
//! Programs are built from assignments, tests, atomic ticks, sequence,
//! binary choice and bounded iteration. Tests and assignments take no
//! time; every tick advances the clock by one fixed step and appends a
//! state to the trace, labelled with its action.

mod ast;
mod compile;
mod enumerate;
mod exec;
mod text;

pub use ast::{Attr, Attribute, Dim, Formula, Program, Term, Trace, Value};
pub use compile::{compile_event, CompileConfig};
pub use enumerate::enumerate_traces;
pub use exec::execute;
pub use text::{parse_formula, parse_program};

use thiserror::Error;

use crate::kinematics::{self, ContactRelation, KinematicParams, KinematicsError, ObjectId, Vec3, WorldState};
use crate::lexicon::Action;
use crate::scene::Scene;

/// Default cap on explored nodes for enumeration and search.
pub const DEFAULT_NODE_CAP: usize = 1_000_000;

/// Default tolerance for directed assignment.
pub const DEFAULT_ASSIGN_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DitlError {
    #[error("UnboundObjectError: no object `{0}` in the state")]
    UnboundObject(ObjectId),
    #[error("DimensionError: {0}")]
    Dimension(String),
    #[error("NoSuccessfulRun: every alternative failed{}{}",
        if *budget_exhausted { " (tick budget exhausted)" } else { "" },
        deepest_failure.as_ref().map(|d| format!("; deepest failing test: {d}")).unwrap_or_default())]
    NoSuccessfulRun {
        deepest_failure: Option<String>,
        budget_exhausted: bool,
    },
    #[error("ExplosionGuard: explored more than {cap} nodes")]
    ExplosionGuard { cap: usize },
    #[error("IncompatiblePathError: {0}")]
    IncompatiblePath(String),
    #[error("ProgramSyntaxError: {message} at byte {offset}")]
    Syntax { offset: usize, message: String },
    #[error(transparent)]
    Kinematics(KinematicsError),
}

impl From<KinematicsError> for DitlError {
    fn from(e: KinematicsError) -> Self {
        match e {
            KinematicsError::UnboundObject(id) => DitlError::UnboundObject(id),
            other => DitlError::Kinematics(other),
        }
    }
}

/// What a Tick acts on and how: the theme, its heading, and the
/// integrator parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TickContext {
    pub theme: ObjectId,
    pub direction: Vec3,
    pub params: KinematicParams,
    pub assign_tol: f64,
    pub node_cap: usize,
}

impl TickContext {
    pub fn new(theme: ObjectId, direction: Vec3, params: KinematicParams) -> Self {
        Self {
            theme,
            direction,
            params,
            assign_tol: DEFAULT_ASSIGN_TOL,
            node_cap: DEFAULT_NODE_CAP,
        }
    }

    pub fn from_scene(scene: &Scene) -> Self {
        Self::new(scene.theme.clone(), scene.direction, scene.params)
    }

    pub fn step(&self, s: &WorldState, action: Action) -> Result<WorldState, DitlError> {
        Ok(kinematics::tick(s, action, &self.theme, &self.direction, &self.params)?)
    }
}

/// Truth value of a formula in a state. `undetermined` is set when a
/// diamond ran out of tick budget before finding a witness; the value is
/// then the conservative `false` for that diamond.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub undetermined: bool,
}

impl Verdict {
    fn of(holds: bool) -> Self {
        Self {
            holds,
            undetermined: false,
        }
    }
}

/// Evaluates `f` in state `s`. Diamonds search for a run of at most
/// `budget` ticks.
pub fn eval_formula(f: &Formula, s: &WorldState, ctx: &TickContext, budget: u32) -> Result<Verdict, DitlError> {
    for id in f.objects() {
        s.body(id)?;
    }
    eval(f, s, ctx, budget)
}

fn eval(f: &Formula, s: &WorldState, ctx: &TickContext, budget: u32) -> Result<Verdict, DitlError> {
    let eps = ctx.params.contact_eps;
    Ok(match f {
        Formula::True => Verdict::of(true),
        Formula::False => Verdict::of(false),
        Formula::Ec(a, b) => Verdict::of(kinematics::relation_in(s, a, b, eps)? == ContactRelation::Ec),
        Formula::Dc(a, b) => Verdict::of(kinematics::relation_in(s, a, b, eps)? == ContactRelation::Dc),
        Formula::At(a, b) => {
            Verdict::of(kinematics::surface_distance(s.body(a)?, s.body(b)?)? <= eps)
        }
        Formula::Eq(a, b, tol) => Verdict::of(a.eval(s)?.distance(&b.eval(s)?)? <= *tol),
        Formula::Leq(a, b) => match (a.eval(s)?, b.eval(s)?) {
            (Value::Scalar(x), Value::Scalar(y)) => Verdict::of(x <= y),
            _ => return Err(DitlError::Dimension(format!("leq needs scalars: {f}"))),
        },
        Formula::Not(x) => {
            let v = eval(x, s, ctx, budget)?;
            Verdict {
                holds: !v.holds,
                undetermined: v.undetermined,
            }
        }
        Formula::And(a, b) => {
            let va = eval(a, s, ctx, budget)?;
            if !va.holds {
                return Ok(va);
            }
            let vb = eval(b, s, ctx, budget)?;
            Verdict {
                holds: vb.holds,
                undetermined: va.undetermined || vb.undetermined,
            }
        }
        Formula::Or(a, b) => {
            let va = eval(a, s, ctx, budget)?;
            if va.holds {
                return Ok(va);
            }
            let vb = eval(b, s, ctx, budget)?;
            Verdict {
                holds: vb.holds,
                undetermined: va.undetermined || vb.undetermined,
            }
        }
        Formula::Diamond(p, goal) => {
            let probe = Program::seq(vec![(**p).clone(), Program::Test((**goal).clone())]);
            let outcome = exec::search(&probe, s, ctx, budget, &mut || true)?;
            let found = outcome.trace.is_some();
            Verdict {
                holds: found,
                undetermined: !found && outcome.budget_cut,
            }
        }
    })
}

#[cfg(test)]
mod tests;
