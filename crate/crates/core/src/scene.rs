//! Minimal-model construction: the mentioned objects plus the floor, placed
//! by fixed rules, with underspecified parameters drawn from the seed.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{surface_distance, Body, KinematicParams, KinematicsError, ObjectId, Vec3, WorldState};
use crate::lexicon::{Action, Lexicon, LexiconError, NounEntry, Prep, Shape};
use crate::parser::EventFrame;
use crate::rng::SeedStreams;

pub const FLOOR_ID: &str = "floor";

/// Coordinate convention recorded in trace headers.
pub const COORDINATES: &str = "y-up right-handed, goal along +x";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("ImmobileThemeError: `{0}` is immobile and cannot be the theme of a motion event")]
    ImmobileTheme(String),
    #[error("UnknownWordError: `{0}`")]
    UnknownWord(String),
    #[error("ConfigError: {0}")]
    InvalidConfig(String),
    #[error("SceneInvariantError: {0}")]
    Invariant(String),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

impl From<LexiconError> for SceneError {
    fn from(e: LexiconError) -> Self {
        match e {
            LexiconError::UnknownWord(w) => SceneError::UnknownWord(w),
            other => SceneError::InvalidConfig(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub dt: f64,
    pub speed: f64,
    pub ground_distance: f64,
    pub contact_eps: f64,
    pub gravity: f64,
    pub restitution: f64,
    pub hop_height: f64,
    pub min_bare_frames: u32,
    pub max_bare_frames: u32,
    pub max_frames: u32,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        let k = KinematicParams::default();
        Self {
            dt: k.dt,
            speed: k.speed,
            ground_distance: 5.0,
            contact_eps: k.contact_eps,
            gravity: k.gravity,
            restitution: k.restitution,
            hop_height: k.hop_height,
            min_bare_frames: 30,
            max_bare_frames: 300,
            max_frames: 10_000,
            seed: 0,
        }
    }
}

impl SceneConfig {
    pub fn from_json(src: &str) -> Result<Self, SceneError> {
        let cfg: SceneConfig =
            serde_json::from_str(src).map_err(|e| SceneError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(SceneError::InvalidConfig(format!("{name} must be > 0, got {v}")))
            }
        };
        positive("dt", self.dt)?;
        positive("speed", self.speed)?;
        positive("contact_eps", self.contact_eps)?;
        positive("gravity", self.gravity)?;
        positive("ground_distance", self.ground_distance)?;
        if !(self.restitution > 0.0 && self.restitution <= 1.0) {
            return Err(SceneError::InvalidConfig(format!(
                "restitution must lie in (0, 1], got {}",
                self.restitution
            )));
        }
        if !(self.hop_height.is_finite() && self.hop_height >= 0.0) {
            return Err(SceneError::InvalidConfig("hop_height must be >= 0".into()));
        }
        if self.min_bare_frames > self.max_bare_frames {
            return Err(SceneError::InvalidConfig(format!(
                "min_bare_frames {} exceeds max_bare_frames {}",
                self.min_bare_frames, self.max_bare_frames
            )));
        }
        if self.max_frames == 0 {
            return Err(SceneError::InvalidConfig("max_frames must be >= 1".into()));
        }
        Ok(())
    }

    pub fn kinematics(&self) -> KinematicParams {
        KinematicParams {
            dt: self.dt,
            speed: self.speed,
            contact_eps: self.contact_eps,
            gravity: self.gravity,
            restitution: self.restitution,
            hop_height: self.hop_height,
        }
    }
}

/// Values the sentence leaves open, fixed by the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedParams {
    /// Number of ticks of a verb without a goal.
    pub bare_frames: u32,
    /// Heading of motion without a ground, radians from +x towards +z.
    pub direction_angle: f64,
}

/// Draws the bare duration from the duration stream and the heading from
/// the scene stream, in that order.
pub fn sample_underspecified(cfg: &SceneConfig, streams: &mut SeedStreams) -> ResolvedParams {
    let bare_frames = streams
        .duration
        .range_inclusive(cfg.min_bare_frames, cfg.max_bare_frames);
    let direction_angle = streams.scene.next_f64() * TAU;
    ResolvedParams {
        bare_frames,
        direction_angle,
    }
}

/// Object ids for the frame's roles. The theme keeps its lemma; a ground
/// with the same lemma gets a `2` suffix; a plane ground is the floor.
pub fn role_ids(frame: &EventFrame, lex: &Lexicon) -> Result<(ObjectId, Option<ObjectId>), SceneError> {
    let theme = ObjectId::new(&frame.theme);
    let ground = match frame.ground() {
        None => None,
        Some(g) => {
            let entry = lex.lookup_noun(g)?;
            Some(if matches!(entry.shape, Shape::Plane { .. }) {
                ObjectId::new(FLOOR_ID)
            } else if g == frame.theme {
                ObjectId::new(&format!("{g}2"))
            } else {
                ObjectId::new(g)
            })
        }
    };
    Ok((theme, ground))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub world: WorldState,
    pub theme: ObjectId,
    pub ground: Option<ObjectId>,
    pub floor: ObjectId,
    /// Horizontal unit vector of motion.
    pub direction: Vec3,
    pub resolved: ResolvedParams,
    pub params: KinematicParams,
}

impl Scene {
    pub fn theme_body(&self) -> &Body {
        self.world.body(&self.theme).expect("theme is bound")
    }
}

fn airborne_height(noun: &NounEntry) -> f64 {
    noun.default_altitude
        .unwrap_or(noun.shape.rest_height() + 1.0)
}

/// Builds the minimal scene for `frame`.
pub fn build_scene(frame: &EventFrame, lex: &Lexicon, cfg: &SceneConfig) -> Result<Scene, SceneError> {
    cfg.validate()?;
    let verb = lex.lookup_verb(&frame.verb)?;
    let theme_noun = lex.lookup_noun(&frame.theme)?;
    if !theme_noun.mobile {
        return Err(SceneError::ImmobileTheme(theme_noun.lemma.clone()));
    }
    let resolved = sample_underspecified(cfg, &mut SeedStreams::new(cfg.seed));
    let (theme_id, ground_id) = role_ids(frame, lex)?;

    let theme_y = if verb.action() == Action::Fly {
        airborne_height(theme_noun)
    } else {
        theme_noun.shape.rest_height()
    };
    let mut theme = Body::new(theme_id.as_str(), theme_noun.shape, true, Vec3::new(0.0, theme_y, 0.0));
    let floor_body = Body::new(
        FLOOR_ID,
        Shape::Plane {
            normal: crate::lexicon::Axis::PosY,
        },
        false,
        Vec3::zeros(),
    );

    let random_heading = Vec3::new(resolved.direction_angle.cos(), 0.0, resolved.direction_angle.sin());
    let mut bodies = vec![floor_body];
    let direction = match (&frame.path, &ground_id) {
        (Some(path), Some(gid)) if gid.as_str() != FLOOR_ID => {
            let gnoun = lex.lookup_noun(&path.ground)?;
            let gx = cfg.ground_distance;
            let ground = Body::new(
                gid.as_str(),
                gnoun.shape,
                gnoun.mobile,
                Vec3::new(gx, gnoun.shape.rest_height(), 0.0),
            );
            let direction = if path.prep == Prep::From {
                let g_half = gnoun.shape.half_extents().map_or(0.0, |h| h[0]);
                let t_half = theme_noun.shape.half_extents().map_or(0.0, |h| h[0]);
                theme.position.x = gx - g_half - t_half;
                -Vec3::x()
            } else {
                Vec3::x()
            };
            bodies.push(theme);
            bodies.push(ground);
            direction
        }
        _ => {
            bodies.push(theme);
            random_heading
        }
    };

    let scene = Scene {
        world: WorldState::new(bodies),
        theme: theme_id,
        ground: ground_id,
        floor: ObjectId::new(FLOOR_ID),
        direction,
        resolved,
        params: cfg.kinematics(),
    };
    check_scene(&scene, cfg)?;
    Ok(scene)
}

fn check_scene(scene: &Scene, cfg: &SceneConfig) -> Result<(), SceneError> {
    if scene.world.floor().is_none() {
        return Err(SceneError::Invariant("no floor".into()));
    }
    if !scene.theme_body().mobile {
        return Err(SceneError::ImmobileTheme(scene.theme.to_string()));
    }
    let bodies = &scene.world.bodies;
    for (i, a) in bodies.iter().enumerate() {
        for b in &bodies[i + 1..] {
            if a.is_plane() && b.is_plane() {
                continue;
            }
            let d = surface_distance(a, b)?;
            if d < -cfg.contact_eps {
                return Err(SceneError::Invariant(format!(
                    "`{}` and `{}` interpenetrate by {}",
                    a.id, b.id, -d
                )));
            }
        }
    }
    Ok(())
}
