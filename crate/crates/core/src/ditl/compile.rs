use crate::kinematics::ObjectId;
use crate::lexicon::{Lexicon, PathKind, Prep, VerbClass};
use crate::parser::EventFrame;
use crate::scene::role_ids;

use super::{DitlError, Formula, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileConfig {
    /// Bound on every goal-directed loop.
    pub max_frames: u32,
    /// Length of a motion with no goal, normally drawn from the seed.
    pub bare_frames: u32,
}

fn ticks(action: crate::lexicon::Action, n: u32) -> Program {
    Program::seq(vec![Program::Tick(action); n as usize])
}

/// Translates a parsed event into the program whose runs are its models.
///
/// Manner and generic verbs iterate their own tick; path verbs tick `move`
/// and bracket the motion with tests on the ground:
///
/// | frame              | program                                        |
/// |--------------------|------------------------------------------------|
/// | V                  | V^n                                            |
/// | V to G             | (¬at(θ,G)? ; V)^≤max ; at(θ,G)?                |
/// | V from G           | at(θ,G)? ; V^n ; ¬at(θ,G)?                     |
/// | V towards G        | V^n (heading fixed towards G by the scene)     |
/// | arrive at G        | ¬at(θ,G)? ; (¬at(θ,G)? ; move)^≤max ; at(θ,G)? |
/// | leave (from G)     | [at(θ,G)?] ; move^n ; [¬at(θ,G)?]              |
pub fn compile_event(frame: &EventFrame, lex: &Lexicon, cfg: &CompileConfig) -> Result<Program, DitlError> {
    let verb = lex
        .lookup_verb(&frame.verb)
        .map_err(|e| DitlError::IncompatiblePath(e.to_string()))?;
    let (theme, ground) = role_ids(frame, lex).map_err(|e| DitlError::IncompatiblePath(e.to_string()))?;
    let prep = frame.prep();
    if let Some(p) = prep {
        if !verb.allows(p) {
            return Err(DitlError::IncompatiblePath(format!(
                "`{}` does not combine with `{p}`",
                verb.lemma
            )));
        }
    }
    let incompatible = |what: &str| DitlError::IncompatiblePath(format!("`{}` {what}", verb.lemma));
    let at = |g: &ObjectId| Formula::at_ids(&theme, g);
    let action = verb.action();

    let program = match verb.class {
        VerbClass::Manner | VerbClass::Generic => match (prep, ground.as_ref()) {
            (None, _) => ticks(action, cfg.bare_frames),
            (Some(Prep::To), Some(g)) => Program::while_not(at(g), Program::Tick(action), cfg.max_frames),
            (Some(Prep::From), Some(g)) => Program::seq(vec![
                Program::Test(at(g)),
                ticks(action, cfg.bare_frames),
                Program::Test(Formula::not(at(g))),
            ]),
            (Some(Prep::Towards), Some(_)) => ticks(action, cfg.bare_frames),
            (Some(p), _) => return Err(incompatible(&format!("has no reading with `{p}`"))),
        },
        VerbClass::Path => match (verb.path_kind, prep, ground.as_ref()) {
            (Some(PathKind::Arrive), Some(Prep::At | Prep::To), Some(g)) => {
                let mut steps = vec![Program::Test(Formula::not(at(g)))];
                steps.push(Program::while_not(at(g), Program::Tick(action), cfg.max_frames));
                Program::seq(steps)
            }
            (Some(PathKind::Arrive), None, _) => return Err(incompatible("needs a ground to arrive at")),
            (Some(PathKind::Leave), None, _) => ticks(action, cfg.bare_frames),
            (Some(PathKind::Leave), Some(Prep::From), Some(g)) => Program::seq(vec![
                Program::Test(at(g)),
                ticks(action, cfg.bare_frames),
                Program::Test(Formula::not(at(g))),
            ]),
            (None, ..) => return Err(incompatible("is a path verb without a path kind")),
            (Some(kind), Some(p), _) => {
                return Err(incompatible(&format!("({kind:?}) has no reading with `{p}`")))
            }
        },
    };
    Ok(program)
}
