//! The whole path from a sentence to a verified trace.

use crate::ditl::{compile_event, execute, CompileConfig, Program, TickContext, Trace};
use crate::error::Error;
use crate::lexicon::Lexicon;
use crate::parser::{parse_text, EventFrame};
use crate::rng::SeedStreams;
use crate::scene::{build_scene, Scene, SceneConfig};
use crate::verify::{verify_trace, VerificationReport};

/// A finished simulation and everything needed to reproduce or check it.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub sentence: String,
    pub config: SceneConfig,
    pub frame: EventFrame,
    pub scene: Scene,
    pub program: Program,
    pub trace: Trace,
}

impl Simulation {
    pub fn verify(&self, lex: &Lexicon) -> Result<VerificationReport, Error> {
        Ok(verify_trace(&self.trace, &self.frame, &self.scene, lex)?)
    }
}

/// Parses `sentence`, builds its scene, compiles it and executes the
/// program with choices drawn from the seed's choice stream.
pub fn simulate(sentence: &str, lex: &Lexicon, cfg: &SceneConfig) -> Result<Simulation, Error> {
    let frame = parse_text(sentence, lex)?;
    let scene = build_scene(&frame, lex, cfg)?;
    let program = compile_event(
        &frame,
        lex,
        &CompileConfig {
            max_frames: cfg.max_frames,
            bare_frames: scene.resolved.bare_frames,
        },
    )?;
    let ctx = TickContext::from_scene(&scene);
    let mut choices = SeedStreams::new(cfg.seed).choice;
    let trace = execute(&program, &scene.world, &ctx, &mut choices, cfg.max_frames)?;
    Ok(Simulation {
        sentence: sentence.to_string(),
        config: cfg.clone(),
        frame,
        scene,
        program,
        trace,
    })
}
