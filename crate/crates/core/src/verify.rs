//! Model checking of a finished trace against the event it is meant to
//! depict.
//!
//! Four checks run on every trace, always in this order:
//!
//! * `contact_profile`: the theme's relation to the floor in every state
//!   reached by a tick matches the verb's floor-contact profile. Timeless
//!   steps add no states, so the initial state is never checked.
//! * `rotation_coupling`: net rotation against distance travelled.
//! * `path`: the goal or source tests implied by the preposition or path verb.
//! * `integrity`: no two bodies overlap and the time stamps are uniform.
//!
//! # Acceptance matrix
//!
//! A trace of the bare sentence "the ball V-ed" checked against the frame
//! of "the ball W-ed" (same scene ids) gives:
//!
//! | trace \ frame | roll     | slide    | bounce   | fly      | move |
//! |---------------|----------|----------|----------|----------|------|
//! | roll          | pass     | rotation | contact  | contact  | pass |
//! | slide         | rotation | pass     | contact  | contact  | pass |
//! | bounce        | contact  | contact  | pass     | contact  | pass |
//! | fly           | contact  | contact  | contact  | pass     | pass |
//!
//! `move` constrains neither contact nor rotation, so it accepts every
//! manner trace. Bounce and fly traces also fail rotation coupling under
//! `roll`, since they travel without turning, and a roll trace fails the
//! no-rotation clause of `fly` as well as its contact clause.

use serde::Serialize;
use thiserror::Error;

use crate::ditl::{eval_formula, DitlError, Formula, TickContext, Trace};
use crate::kinematics::{self, ContactRelation, ObjectId, Vec3, WorldState};
use crate::lexicon::{FloorContact, Lexicon, PathKind, Prep, RotationCoupling, VerbClass};
use crate::parser::EventFrame;
use crate::scene::Scene;

/// Tolerance on |rotation − distance / radius| for rolling.
pub const ARC_LENGTH_TOL: f64 = 1e-4;
/// Largest net rotation accepted from a verb that must not rotate.
pub const NO_ROTATION_TOL: f64 = 1e-9;
/// Tolerance on the uniform time map, seconds.
pub const TIME_TOL: f64 = 1e-9;

pub const CHECK_NAMES: [&str; 4] = ["contact_profile", "rotation_coupling", "path", "integrity"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("TraceSceneMismatch: {0}")]
    TraceSceneMismatch(String),
    #[error("DiamondNotAllowed: {0}")]
    DiamondNotAllowed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub offending_frame: Option<usize>,
    pub detail: String,
}

impl Check {
    fn pass(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed: true,
            offending_frame: None,
            detail: detail.into(),
        }
    }

    fn fail(name: &'static str, frame: Option<usize>, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed: false,
            offending_frame: frame,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    /// Length of the theme's polyline through every state, metres.
    pub path_length: f64,
    /// Final minus initial accumulated rotation, radians.
    pub net_rotation: f64,
    /// Maximal runs of floor contact among post-tick states.
    pub contact_intervals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub overall: bool,
    pub checks: Vec<Check>,
    pub metrics: Metrics,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn mismatch(msg: impl Into<String>) -> VerifyError {
    VerifyError::TraceSceneMismatch(msg.into())
}

fn theme_pos(s: &WorldState, theme: &ObjectId) -> Vec3 {
    s.body(theme).expect("checked bound").position
}

fn relation(s: &WorldState, a: &ObjectId, b: &ObjectId, eps: f64) -> Result<ContactRelation, VerifyError> {
    kinematics::relation_in(s, a, b, eps).map_err(|e| mismatch(e.to_string()))
}

fn distance(s: &WorldState, a: &ObjectId, b: &ObjectId) -> Result<f64, VerifyError> {
    let (a, b) = (s.body(a), s.body(b));
    match (a, b) {
        (Ok(a), Ok(b)) => kinematics::surface_distance(a, b).map_err(|e| mismatch(e.to_string())),
        (Err(e), _) | (_, Err(e)) => Err(mismatch(e.to_string())),
    }
}

/// Checks that the trace is structurally a run over the scene's objects.
fn check_shape(trace: &Trace, scene: &Scene) -> Result<(), VerifyError> {
    if trace.states.is_empty() {
        return Err(mismatch("trace has no states"));
    }
    if trace.labels.len() + 1 != trace.states.len() {
        return Err(mismatch(format!(
            "{} labels for {} states",
            trace.labels.len(),
            trace.states.len()
        )));
    }
    let mut expected: Vec<&str> = scene.world.bodies.iter().map(|b| b.id.as_str()).collect();
    expected.sort_unstable();
    for (i, s) in trace.states.iter().enumerate() {
        let mut ids: Vec<&str> = s.bodies.iter().map(|b| b.id.as_str()).collect();
        ids.sort_unstable();
        if ids != expected {
            return Err(mismatch(format!("state {i} has objects {ids:?}, scene has {expected:?}")));
        }
    }
    Ok(())
}

fn contact_profile(
    rels: &[ContactRelation],
    profile: FloorContact,
    ticks: usize,
) -> Check {
    const NAME: &str = "contact_profile";
    let require_all = |want: ContactRelation| match rels.iter().position(|r| *r != want) {
        Some(k) => Check::fail(NAME, Some(k + 1), format!("floor relation {} at frame {}, expected {want}", rels[k], k + 1)),
        None => Check::pass(NAME, format!("{want} with the floor in all {ticks} ticked states")),
    };
    match profile {
        FloorContact::AlwaysEc => require_all(ContactRelation::Ec),
        FloorContact::AlwaysDc => require_all(ContactRelation::Dc),
        FloorContact::Alternating => {
            if ticks == 0 {
                return Check::pass(NAME, "no ticks; nothing to alternate");
            }
            let runs = ec_runs(rels);
            if runs >= 2 {
                Check::pass(NAME, format!("{runs} separate floor contacts"))
            } else {
                Check::fail(NAME, None, format!("{runs} floor contact run(s); need at least 2 separated by flight"))
            }
        }
        FloorContact::Unconstrained => Check::pass(NAME, "unconstrained"),
    }
}

fn ec_runs(rels: &[ContactRelation]) -> usize {
    let mut runs = 0;
    let mut inside = false;
    for r in rels {
        let ec = *r == ContactRelation::Ec;
        if ec && !inside {
            runs += 1;
        }
        inside = ec;
    }
    runs
}

fn rotation_coupling(coupling: RotationCoupling, metrics: &Metrics, radius: Option<f64>) -> Check {
    const NAME: &str = "rotation_coupling";
    let Metrics {
        path_length: d,
        net_rotation: rot,
        ..
    } = *metrics;
    match coupling {
        RotationCoupling::Unconstrained => Check::pass(NAME, "unconstrained"),
        RotationCoupling::None => {
            if rot.abs() <= NO_ROTATION_TOL {
                Check::pass(NAME, format!("net rotation {rot:e} rad"))
            } else {
                Check::fail(NAME, None, format!("net rotation {rot} rad, expected none"))
            }
        }
        RotationCoupling::ArcLength => match radius {
            None => Check::fail(NAME, None, "theme has no rolling radius"),
            Some(r) => {
                let err = (rot - d / r).abs();
                if err <= ARC_LENGTH_TOL {
                    Check::pass(NAME, format!("rotation {rot} rad matches arc {d} m / {r} m"))
                } else {
                    Check::fail(NAME, None, format!("rotation {rot} rad but arc {d} m / {r} m = {} rad", d / r))
                }
            }
        },
    }
}

/// What the path component demands of the run.
enum PathRule {
    None,
    Goal(ObjectId),
    Source(ObjectId),
    Towards(ObjectId),
    Displaced,
}

fn path_rule(frame: &EventFrame, class: VerbClass, kind: Option<PathKind>, scene: &Scene) -> Result<PathRule, VerifyError> {
    let ground = || {
        scene
            .ground
            .clone()
            .ok_or_else(|| mismatch("frame names a ground the scene does not have"))
    };
    Ok(match (class, kind, frame.prep()) {
        (VerbClass::Path, Some(PathKind::Arrive), _) => PathRule::Goal(ground()?),
        (VerbClass::Path, Some(PathKind::Leave), None) => PathRule::Displaced,
        (VerbClass::Path, Some(PathKind::Leave), Some(_)) => PathRule::Source(ground()?),
        (_, _, None) => PathRule::None,
        (_, _, Some(Prep::To | Prep::At)) => PathRule::Goal(ground()?),
        (_, _, Some(Prep::From)) => PathRule::Source(ground()?),
        (_, _, Some(Prep::Towards)) => PathRule::Towards(ground()?),
    })
}

fn path_check(rule: &PathRule, trace: &Trace, theme: &ObjectId, eps: f64) -> Result<Check, VerifyError> {
    const NAME: &str = "path";
    let last = trace.len() - 1;
    let ticks = trace.tick_count();
    let at = |s: &WorldState, g: &ObjectId| distance(s, theme, g).map(|d| d <= eps);
    Ok(match rule {
        PathRule::None => Check::pass(NAME, "no path component"),
        PathRule::Goal(g) => {
            if !at(trace.last(), g)? {
                Check::fail(NAME, Some(last), format!("final state not at {g}"))
            } else if ticks == 0 {
                Check::pass(NAME, format!("zero motion: {theme} already at {g}"))
            } else if at(trace.first(), g)? {
                Check::fail(NAME, Some(0), format!("initial state already at {g}"))
            } else {
                Check::pass(NAME, format!("reached {g} after {ticks} ticks"))
            }
        }
        PathRule::Source(g) => {
            if !at(trace.first(), g)? {
                Check::fail(NAME, Some(0), format!("initial state not at {g}"))
            } else if at(trace.last(), g)? {
                Check::fail(NAME, Some(last), format!("final state still at {g}"))
            } else {
                Check::pass(NAME, format!("left {g}"))
            }
        }
        PathRule::Towards(g) => {
            let (d0, d1) = (distance(trace.first(), theme, g)?, distance(trace.last(), theme, g)?);
            if d1 <= d0 {
                Check::pass(NAME, format!("gap to {g} went from {d0} m to {d1} m"))
            } else {
                Check::fail(NAME, Some(last), format!("gap to {g} grew from {d0} m to {d1} m"))
            }
        }
        PathRule::Displaced => {
            let moved = (theme_pos(trace.last(), theme) - theme_pos(trace.first(), theme)).norm();
            if ticks == 0 || moved > eps {
                Check::pass(NAME, format!("displaced {moved} m"))
            } else {
                Check::fail(NAME, Some(last), format!("displaced only {moved} m"))
            }
        }
    })
}

fn integrity(trace: &Trace, scene: &Scene) -> Check {
    const NAME: &str = "integrity";
    let eps = scene.params.contact_eps;
    if (trace.dt - scene.params.dt).abs() > TIME_TOL {
        return Check::fail(NAME, None, format!("trace step {} s, scene step {} s", trace.dt, scene.params.dt));
    }
    let t0 = trace.first().time;
    for (i, s) in trace.states.iter().enumerate() {
        let expected = t0 + i as f64 * trace.dt;
        if (s.time - expected).abs() > TIME_TOL {
            return Check::fail(NAME, Some(i), format!("time {} at frame {i}, expected {expected}", s.time));
        }
        for (j, a) in s.bodies.iter().enumerate() {
            for b in &s.bodies[j + 1..] {
                if let Ok(d) = kinematics::surface_distance(a, b) {
                    if ContactRelation::from_distance(d, eps) == ContactRelation::Po {
                        return Check::fail(NAME, Some(i), format!("{} and {} overlap by {} m", a.id, b.id, -d));
                    }
                }
            }
        }
    }
    Check::pass(NAME, format!("{} states, no overlap, uniform clock", trace.len()))
}

/// Verifies `trace` against the constraints of `frame` in `scene`.
pub fn verify_trace(trace: &Trace, frame: &EventFrame, scene: &Scene, lex: &Lexicon) -> Result<VerificationReport, VerifyError> {
    check_shape(trace, scene)?;
    let verb = lex.lookup_verb(&frame.verb).map_err(|e| mismatch(e.to_string()))?;
    let theme = &scene.theme;
    let eps = scene.params.contact_eps;

    let rels = trace.states[1..]
        .iter()
        .map(|s| relation(s, theme, &scene.floor, eps))
        .collect::<Result<Vec<_>, _>>()?;
    let path_length = trace
        .states
        .windows(2)
        .map(|w| (theme_pos(&w[1], theme) - theme_pos(&w[0], theme)).norm())
        .sum();
    let rot = |s: &WorldState| s.body(theme).expect("checked bound").rotation;
    let metrics = Metrics {
        path_length,
        net_rotation: rot(trace.last()) - rot(trace.first()),
        contact_intervals: ec_runs(&rels),
    };

    let rule = path_rule(frame, verb.class, verb.path_kind, scene)?;
    let checks = vec![
        contact_profile(&rels, verb.profile.floor_contact, trace.tick_count()),
        rotation_coupling(verb.profile.rotation_coupling, &metrics, scene.theme_body().shape.rolling_radius()),
        path_check(&rule, trace, theme, eps)?,
        integrity(trace, scene),
    ];
    Ok(VerificationReport {
        overall: checks.iter().all(|c| c.passed),
        checks,
        metrics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Initially,
    Finally,
    Throughout,
}

/// Result of lifting a state formula to a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct FormulaCheck {
    pub passed: bool,
    pub offending_frame: Option<usize>,
    /// Set when evaluation itself failed, for example on an unbound object.
    pub detail: Option<String>,
}

/// Evaluates a diamond-free `f` at the first, last or every state.
pub fn check_formula_on_trace(trace: &Trace, f: &Formula, mode: Mode, contact_eps: f64) -> Result<FormulaCheck, VerifyError> {
    if f.has_diamond() {
        return Err(VerifyError::DiamondNotAllowed(f.to_string()));
    }
    let mut ctx = TickContext::new(ObjectId::new(""), Vec3::zeros(), Default::default());
    ctx.params.contact_eps = contact_eps;
    let indices: Vec<usize> = match mode {
        Mode::Initially => vec![0],
        Mode::Finally => vec![trace.len() - 1],
        Mode::Throughout => (0..trace.len()).collect(),
    };
    for i in indices {
        match eval_formula(f, &trace.states[i], &ctx, 0) {
            Ok(v) if v.holds => {}
            Ok(_) => {
                return Ok(FormulaCheck {
                    passed: false,
                    offending_frame: Some(i),
                    detail: None,
                })
            }
            Err(e @ (DitlError::UnboundObject(_) | DitlError::Dimension(_) | DitlError::Kinematics(_))) => {
                return Ok(FormulaCheck {
                    passed: false,
                    offending_frame: Some(i),
                    detail: Some(e.to_string()),
                })
            }
            Err(e) => return Err(mismatch(e.to_string())),
        }
    }
    Ok(FormulaCheck {
        passed: true,
        offending_frame: None,
        detail: None,
    })
}
