//! Depth-first execution with chronological backtracking.
//!
//! The machine keeps a continuation stack of pending work and a stack of
//! choice points. Choice and iteration push a choice point holding the
//! alternative not taken; a failed test (or an exhausted tick budget)
//! pops the most recent one. States are only ever appended, so a choice
//! point saves the trace length plus a copy of the current state, which
//! zero-time assignments may have rewritten.

use crate::kinematics::WorldState;
use crate::lexicon::Action;
use crate::rng::SplitMix64;

use super::{eval_formula, DitlError, Program, TickContext, Trace, Value};

#[derive(Debug, Clone, Copy)]
enum Item<'p> {
    Prog(&'p Program),
    Loop { body: &'p Program, remaining: u32 },
}

#[derive(Debug)]
enum Alt<'p> {
    Run(&'p Program),
    Exit,
    Iterate { body: &'p Program, remaining: u32 },
}

struct ChoicePoint<'p> {
    stack: Vec<Item<'p>>,
    len: usize,
    current: WorldState,
    alt: Alt<'p>,
}

pub(crate) struct SearchOutcome {
    pub trace: Option<Trace>,
    pub budget_cut: bool,
    pub deepest_failure: Option<String>,
}

/// Runs `p` from `s0`, resolving each choice and each loop continuation
/// with `first_listed()`: `true` tries the left branch of a choice, or
/// leaving a loop, before the other alternative.
pub(crate) fn search(
    p: &Program,
    s0: &WorldState,
    ctx: &TickContext,
    budget: u32,
    first_listed: &mut dyn FnMut() -> bool,
) -> Result<SearchOutcome, DitlError> {
    let mut stack: Vec<Item<'_>> = vec![Item::Prog(p)];
    let mut states: Vec<WorldState> = vec![s0.clone()];
    let mut labels: Vec<Action> = Vec::new();
    let mut points: Vec<ChoicePoint<'_>> = Vec::new();
    let mut budget_cut = false;
    let mut deepest: Option<(usize, String)> = None;
    let mut nodes = 0usize;

    let note_failure = |depth: usize, what: String, deepest: &mut Option<(usize, String)>| {
        if deepest.as_ref().is_none_or(|(d, _)| depth > *d) {
            *deepest = Some((depth, what));
        }
    };

    loop {
        nodes += 1;
        if nodes > ctx.node_cap {
            return Err(DitlError::ExplosionGuard { cap: ctx.node_cap });
        }
        let Some(item) = stack.pop() else {
            return Ok(SearchOutcome {
                trace: Some(Trace {
                    dt: ctx.params.dt,
                    states,
                    labels,
                }),
                budget_cut,
                deepest_failure: deepest.map(|d| d.1),
            });
        };

        let ok = match item {
            Item::Prog(Program::Tick(action)) => {
                if labels.len() >= budget as usize {
                    budget_cut = true;
                    false
                } else {
                    let next = ctx.step(states.last().expect("nonempty"), *action)?;
                    states.push(next);
                    labels.push(*action);
                    true
                }
            }
            Item::Prog(Program::Test(f)) => {
                let remaining = budget.saturating_sub(labels.len() as u32);
                let v = eval_formula(f, states.last().expect("nonempty"), ctx, remaining)?;
                if !v.holds {
                    note_failure(labels.len(), f.to_string(), &mut deepest);
                }
                v.holds
            }
            Item::Prog(Program::Assign(attr, term)) => {
                let current = states.last_mut().expect("nonempty");
                let v = term.eval(current)?;
                attr.write(current, v)?;
                true
            }
            Item::Prog(Program::DirectedAssign(attr, term)) => {
                let current = states.last_mut().expect("nonempty");
                let new: Value = term.eval(current)?;
                let old = attr.read(current)?;
                if new.distance(&old)? <= ctx.assign_tol {
                    note_failure(
                        labels.len(),
                        format!("directed assignment to {} {} left it unchanged", attr.object, attr.attribute.as_str()),
                        &mut deepest,
                    );
                    false
                } else {
                    attr.write(current, new)?;
                    true
                }
            }
            Item::Prog(Program::Seq(ps)) => {
                stack.extend(ps.iter().rev().map(Item::Prog));
                true
            }
            Item::Prog(Program::Choice(a, b)) => {
                let (first, second) = if first_listed() { (a, b) } else { (b, a) };
                points.push(ChoicePoint {
                    stack: stack.clone(),
                    len: states.len(),
                    current: states.last().expect("nonempty").clone(),
                    alt: Alt::Run(second),
                });
                stack.push(Item::Prog(first));
                true
            }
            Item::Prog(Program::Star(body, bound)) => {
                stack.push(Item::Loop {
                    body,
                    remaining: *bound,
                });
                true
            }
            Item::Loop { body, remaining } => {
                if remaining > 0 {
                    let exit_first = first_listed();
                    points.push(ChoicePoint {
                        stack: stack.clone(),
                        len: states.len(),
                        current: states.last().expect("nonempty").clone(),
                        alt: if exit_first {
                            Alt::Iterate { body, remaining }
                        } else {
                            Alt::Exit
                        },
                    });
                    if !exit_first {
                        stack.push(Item::Loop {
                            body,
                            remaining: remaining - 1,
                        });
                        stack.push(Item::Prog(body));
                    }
                }
                true
            }
        };

        if !ok {
            let Some(cp) = points.pop() else {
                return Ok(SearchOutcome {
                    trace: None,
                    budget_cut,
                    deepest_failure: deepest.map(|d| d.1),
                });
            };
            stack = cp.stack;
            states.truncate(cp.len);
            labels.truncate(cp.len - 1);
            *states.last_mut().expect("nonempty") = cp.current;
            match cp.alt {
                Alt::Run(q) => stack.push(Item::Prog(q)),
                Alt::Exit => {}
                Alt::Iterate { body, remaining } => {
                    stack.push(Item::Loop {
                        body,
                        remaining: remaining - 1,
                    });
                    stack.push(Item::Prog(body));
                }
            }
        }
    }
}

/// One successful run of `p` from `s0`. Choice branches and loop
/// continuations are ordered by coin flips from `rng`; on failure the run
/// backtracks into the remaining alternatives in that order.
pub fn execute(
    p: &Program,
    s0: &WorldState,
    ctx: &TickContext,
    rng: &mut SplitMix64,
    budget: u32,
) -> Result<Trace, DitlError> {
    let outcome = search(p, s0, ctx, budget, &mut || rng.next_bool())?;
    outcome.trace.ok_or(DitlError::NoSuccessfulRun {
        deepest_failure: outcome.deepest_failure,
        budget_exhausted: outcome.budget_cut,
    })
}
