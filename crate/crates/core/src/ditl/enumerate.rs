//! Exhaustive bounded unfolding of a program's transition system.
//!
//! This is a big-step, set-at-a-time interpreter, written independently of
//! the backtracking machine in `exec`: every construct maps a set of partial
//! runs to the set of runs it can produce. Runs share prefixes through
//! reference-counted nodes so branching does not copy history.

use std::collections::HashSet;
use std::rc::Rc;

use crate::kinematics::WorldState;
use crate::lexicon::Action;

use super::{eval_formula, DitlError, Program, TickContext, Trace};

struct Node {
    state: WorldState,
    /// Label of the transition into this state; `None` for the initial state.
    label: Option<Action>,
    parent: Option<Rc<Node>>,
    ticks: u32,
}

impl Drop for Node {
    // Unlink iteratively so long chains do not recurse on drop.
    fn drop(&mut self) {
        let mut next = self.parent.take();
        while let Some(rc) = next {
            match Rc::try_unwrap(rc) {
                Ok(mut node) => next = node.parent.take(),
                Err(_) => break,
            }
        }
    }
}

type Run = Rc<Node>;

struct Unfolder<'a> {
    ctx: &'a TickContext,
    budget: u32,
    created: usize,
}

impl Unfolder<'_> {
    fn count(&mut self, n: usize) -> Result<(), DitlError> {
        self.created += n;
        if self.created > self.ctx.node_cap {
            Err(DitlError::ExplosionGuard {
                cap: self.ctx.node_cap,
            })
        } else {
            Ok(())
        }
    }

    fn unfold(&mut self, p: &Program, runs: Vec<Run>) -> Result<Vec<Run>, DitlError> {
        if runs.is_empty() {
            return Ok(runs);
        }
        match p {
            Program::Tick(action) => {
                let mut out = Vec::with_capacity(runs.len());
                for run in runs {
                    if run.ticks >= self.budget {
                        continue;
                    }
                    self.count(1)?;
                    let state = self.ctx.step(&run.state, *action)?;
                    out.push(Rc::new(Node {
                        state,
                        label: Some(*action),
                        ticks: run.ticks + 1,
                        parent: Some(run),
                    }));
                }
                Ok(out)
            }
            Program::Test(f) => {
                let mut out = Vec::with_capacity(runs.len());
                for run in runs {
                    let remaining = self.budget - run.ticks;
                    if eval_formula(f, &run.state, self.ctx, remaining)?.holds {
                        out.push(run);
                    }
                }
                Ok(out)
            }
            Program::Assign(attr, term) | Program::DirectedAssign(attr, term) => {
                let directed = matches!(p, Program::DirectedAssign(..));
                let mut out = Vec::with_capacity(runs.len());
                for run in runs {
                    let new = term.eval(&run.state)?;
                    if directed && new.distance(&attr.read(&run.state)?)? <= self.ctx.assign_tol {
                        continue;
                    }
                    self.count(1)?;
                    let mut state = run.state.clone();
                    attr.write(&mut state, new)?;
                    out.push(Rc::new(Node {
                        state,
                        label: run.label,
                        ticks: run.ticks,
                        parent: run.parent.clone(),
                    }));
                }
                Ok(dedupe(out))
            }
            Program::Seq(ps) => ps.iter().try_fold(runs, |acc, q| self.unfold(q, acc)),
            Program::Choice(a, b) => {
                let mut left = self.unfold(a, runs.clone())?;
                let right = self.unfold(b, runs)?;
                left.extend(right);
                Ok(dedupe(left))
            }
            Program::Star(body, bound) => {
                let mut all = runs.clone();
                let mut frontier = runs;
                for _ in 0..*bound {
                    let next = dedupe(self.unfold(body, frontier.clone())?);
                    if next.is_empty() || same_runs(&next, &frontier) {
                        break;
                    }
                    self.count(next.len())?;
                    all.extend(next.iter().cloned());
                    frontier = next;
                }
                Ok(dedupe(all))
            }
        }
    }
}

/// Identity of a run relative to shared history: parent node, label and
/// the exact bits of the head state.
fn run_key(run: &Run) -> (usize, Option<Action>, Vec<u64>) {
    let parent = run.parent.as_ref().map_or(0, |p| Rc::as_ptr(p) as usize);
    let mut bits = Vec::new();
    run.state.bit_key(&mut bits);
    (parent, run.label, bits)
}

fn dedupe(runs: Vec<Run>) -> Vec<Run> {
    let mut seen = HashSet::with_capacity(runs.len());
    runs.into_iter().filter(|r| seen.insert(run_key(r))).collect()
}

fn same_runs(a: &[Run], b: &[Run]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| run_key(x) == run_key(y))
}

fn to_trace(run: &Run, dt: f64) -> Trace {
    let mut states = Vec::new();
    let mut labels = Vec::new();
    let mut cursor: Option<&Node> = Some(run);
    while let Some(node) = cursor {
        states.push(node.state.clone());
        if let Some(l) = node.label {
            labels.push(l);
        }
        cursor = node.parent.as_deref();
    }
    states.reverse();
    labels.reverse();
    Trace { dt, states, labels }
}

/// Every successful run of `p` from `s0` within `budget` ticks, without
/// duplicates, ordered shorter-first and left-biased among equal lengths.
pub fn enumerate_traces(p: &Program, s0: &WorldState, ctx: &TickContext, budget: u32) -> Result<Vec<Trace>, DitlError> {
    let root = Rc::new(Node {
        state: s0.clone(),
        label: None,
        parent: None,
        ticks: 0,
    });
    let mut unfolder = Unfolder {
        ctx,
        budget,
        created: 1,
    };
    let runs = unfolder.unfold(p, vec![root])?;
    let mut seen = HashSet::new();
    let mut traces: Vec<Trace> = runs
        .iter()
        .map(|r| to_trace(r, ctx.params.dt))
        .filter(|t| seen.insert(t.bit_key()))
        .collect();
    traces.sort_by_key(Trace::tick_count);
    Ok(traces)
}
