//! Fixed-timestep kinematic interpretation of atomic actions, plus the
//! metric and contact predicates the logic layer is evaluated against.
//!
//! Conventions: y is up, the frame is right-handed, the floor is the plane
//! y = 0. Horizontal motion is constant-speed; only `bounce` has a vertical
//! degree of freedom, integrated in closed form under constant gravity.

use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{Action, Axis, Shape, ShapeKind};

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("UnsupportedShapePair: {0:?} vs {1:?}")]
    UnsupportedShapePair(ShapeKind, ShapeKind),
    #[error("ImmobileThemeError: `{0}` cannot move")]
    ImmobileTheme(ObjectId),
    #[error("UnboundObjectError: no object `{0}` in the world")]
    UnboundObject(ObjectId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectId(Arc<str>);

impl ObjectId {
    pub fn new(name: &str) -> Self {
        Self(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ObjectId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub id: ObjectId,
    pub shape: Shape,
    pub mobile: bool,
    /// Centre for spheres, centroid for boxes, a point on the plane for planes.
    pub position: Vec3,
    /// Accumulated rotation about the rolling axis (up × direction), radians.
    pub rotation: f64,
    pub velocity: Vec3,
}

impl Body {
    pub fn new(id: &str, shape: Shape, mobile: bool, position: Vec3) -> Self {
        Self {
            id: ObjectId::new(id),
            shape,
            mobile,
            position,
            rotation: 0.0,
            velocity: Vec3::zeros(),
        }
    }

    pub fn is_plane(&self) -> bool {
        matches!(self.shape, Shape::Plane { .. })
    }
}

/// One snapshot of the world: the state of the LTS at frame `frame`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub frame: u64,
    pub time: f64,
    pub bodies: Vec<Body>,
}

impl WorldState {
    pub fn new(bodies: Vec<Body>) -> Self {
        Self {
            frame: 0,
            time: 0.0,
            bodies,
        }
    }

    pub fn body(&self, id: &ObjectId) -> Result<&Body, KinematicsError> {
        self.bodies
            .iter()
            .find(|b| &b.id == id)
            .ok_or_else(|| KinematicsError::UnboundObject(id.clone()))
    }

    pub fn body_mut(&mut self, id: &ObjectId) -> Result<&mut Body, KinematicsError> {
        self.bodies
            .iter_mut()
            .find(|b| &b.id == id)
            .ok_or_else(|| KinematicsError::UnboundObject(id.clone()))
    }

    /// The supporting floor: the first plane whose normal is +y.
    pub fn floor(&self) -> Option<&Body> {
        self.bodies.iter().find(|b| {
            matches!(
                b.shape,
                Shape::Plane {
                    normal: Axis::PosY
                }
            )
        })
    }

    /// Exact bit pattern of every dynamic quantity, for hashing and
    /// bit-level equality.
    pub fn bit_key(&self, out: &mut Vec<u64>) {
        out.push(self.frame);
        out.push(self.time.to_bits());
        for b in &self.bodies {
            out.extend(b.position.iter().map(|x| x.to_bits()));
            out.push(b.rotation.to_bits());
            out.extend(b.velocity.iter().map(|x| x.to_bits()));
        }
    }
}

/// Parameters of the fixed-step integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicParams {
    pub dt: f64,
    pub speed: f64,
    pub contact_eps: f64,
    pub gravity: f64,
    pub restitution: f64,
    /// Minimum rebound height that keeps a bounce going; 0 disables it.
    pub hop_height: f64,
}

impl Default for KinematicParams {
    fn default() -> Self {
        Self {
            dt: 1.0 / 60.0,
            speed: 1.0,
            contact_eps: 1e-3,
            gravity: 9.81,
            restitution: 0.8,
            hop_height: 0.1,
        }
    }
}

/// Qualitative contact relation between two bodies. `Po` means the bodies
/// overlap, which only an integration fault can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContactRelation {
    #[serde(rename = "EC")]
    Ec,
    #[serde(rename = "DC")]
    Dc,
    #[serde(rename = "PO")]
    Po,
}

impl ContactRelation {
    pub fn from_distance(distance: f64, contact_eps: f64) -> Self {
        if distance < -contact_eps {
            ContactRelation::Po
        } else if distance <= contact_eps {
            ContactRelation::Ec
        } else {
            ContactRelation::Dc
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ContactRelation::Ec => "EC",
            ContactRelation::Dc => "DC",
            ContactRelation::Po => "PO",
        }
    }
}

impl fmt::Display for ContactRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn axis_vector(axis: Axis) -> (usize, f64) {
    match axis {
        Axis::PosX => (0, 1.0),
        Axis::NegX => (0, -1.0),
        Axis::PosY => (1, 1.0),
        Axis::NegY => (1, -1.0),
        Axis::PosZ => (2, 1.0),
        Axis::NegZ => (2, -1.0),
    }
}

/// Signed distance from `p` to an axis-aligned box; negative inside.
fn box_sdf(p: &Vec3, center: &Vec3, half: &[f64; 3]) -> f64 {
    let q: [f64; 3] = std::array::from_fn(|i| (p[i] - center[i]).abs() - half[i]);
    let outside = q.iter().map(|x| x.max(0.0).powi(2)).sum::<f64>().sqrt();
    let inside = q[0].max(q[1]).max(q[2]).min(0.0);
    outside + inside
}

/// Signed surface distance between two bodies; negative means penetration.
pub fn surface_distance(a: &Body, b: &Body) -> Result<f64, KinematicsError> {
    surface_distance_at(a, &a.position, b)
}

/// [`surface_distance`] with `a` moved to `a_pos`.
fn surface_distance_at(a: &Body, a_pos: &Vec3, b: &Body) -> Result<f64, KinematicsError> {
    use Shape::*;
    let unsupported = || KinematicsError::UnsupportedShapePair(a.shape.kind(), b.shape.kind());
    match (a.shape, b.shape) {
        (Plane { .. }, Plane { .. }) => Err(unsupported()),
        (Plane { normal }, _) => {
            // Symmetric: measure b against the plane.
            let (axis, sign) = axis_vector(normal);
            let half = b.shape.half_extents().ok_or_else(unsupported)?;
            Ok(sign * (b.position[axis] - a_pos[axis]) - half[axis])
        }
        (_, Plane { normal }) => {
            let (axis, sign) = axis_vector(normal);
            let half = a.shape.half_extents().ok_or_else(unsupported)?;
            Ok(sign * (a_pos[axis] - b.position[axis]) - half[axis])
        }
        (Sphere { radius: ra }, Sphere { radius: rb }) => {
            Ok((a_pos - b.position).norm() - ra - rb)
        }
        (Sphere { radius }, Box { .. }) => {
            let half = b.shape.half_extents().ok_or_else(unsupported)?;
            Ok(box_sdf(a_pos, &b.position, &half) - radius)
        }
        (Box { .. }, Sphere { radius }) => {
            let half = a.shape.half_extents().ok_or_else(unsupported)?;
            Ok(box_sdf(&b.position, a_pos, &half) - radius)
        }
        (Box { .. }, Box { .. }) => {
            let ha = a.shape.half_extents().ok_or_else(unsupported)?;
            let hb = b.shape.half_extents().ok_or_else(unsupported)?;
            let gaps: [f64; 3] =
                std::array::from_fn(|i| (a_pos[i] - b.position[i]).abs() - ha[i] - hb[i]);
            if gaps.iter().all(|&g| g <= 0.0) {
                Ok(gaps[0].max(gaps[1]).max(gaps[2]))
            } else {
                Ok(gaps.iter().map(|g| g.max(0.0).powi(2)).sum::<f64>().sqrt())
            }
        }
    }
}

pub fn contact_relation(a: &Body, b: &Body, contact_eps: f64) -> Result<ContactRelation, KinematicsError> {
    Ok(ContactRelation::from_distance(surface_distance(a, b)?, contact_eps))
}

/// Relation between two bodies of `world` looked up by id.
pub fn relation_in(
    world: &WorldState,
    a: &ObjectId,
    b: &ObjectId,
    contact_eps: f64,
) -> Result<ContactRelation, KinematicsError> {
    contact_relation(world.body(a)?, world.body(b)?, contact_eps)
}

/// Largest fraction `f` in [0, 1] such that moving `body` from `start` by
/// `f * step` keeps it out of `obstacle`. Returns 1 when the full step
/// does not penetrate.
fn clamp_fraction(body: &Body, start: &Vec3, step: &Vec3, obstacle: &Body) -> Result<f64, KinematicsError> {
    if surface_distance_at(body, &(start + step), obstacle)? >= 0.0 {
        return Ok(1.0);
    }
    if surface_distance_at(body, start, obstacle)? < 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if surface_distance_at(body, &(start + step * mid), obstacle)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // A body already resting against the obstacle would otherwise creep by
    // rounding error on every step.
    Ok(if lo < 1e-9 { 0.0 } else { lo })
}

/// Applies a pending translation of `theme`, stopping it in contact with
/// `goal` if the translation would cross the goal's surface. Horizontal
/// velocity is zeroed when clamping happens.
pub fn resolve_goal_contact(
    world: &WorldState,
    theme: &ObjectId,
    goal: &ObjectId,
    translation: Vec3,
) -> Result<WorldState, KinematicsError> {
    let goal_body = world.body(goal)?.clone();
    let mut next = world.clone();
    let body = next.body_mut(theme)?;
    let start = body.position;
    let f = clamp_fraction(body, &start, &translation, &goal_body)?;
    body.position = start + translation * f;
    if f < 1.0 {
        body.velocity.x = 0.0;
        body.velocity.z = 0.0;
    }
    Ok(next)
}

/// Advances the world by one fixed step of `action` applied to `theme`
/// moving along the horizontal unit vector `dir`.
///
/// Every action translates horizontally at `speed`; any other finite body in
/// the way stops the theme in contact. Per action:
/// - roll: height clamped to resting, rotation grows by distance / radius
/// - slide: height clamped to resting, no rotation
/// - move, fly: height held
/// - bounce: ballistic height; on reaching the floor the body is clamped to
///   contact and rebounds with `restitution` times its impact speed, but never
///   lower than the speed that reaches `hop_height`
pub fn tick(
    world: &WorldState,
    action: Action,
    theme: &ObjectId,
    dir: &Vec3,
    params: &KinematicParams,
) -> Result<WorldState, KinematicsError> {
    let floor_y = world.floor().map(|f| f.position.y);
    let obstacles: Vec<Body> = world
        .bodies
        .iter()
        .filter(|b| &b.id != theme && !b.is_plane())
        .cloned()
        .collect();

    let mut next = world.clone();
    next.frame += 1;
    next.time = next.frame as f64 * params.dt;

    let body = next.body_mut(theme)?;
    if !body.mobile {
        return Err(KinematicsError::ImmobileTheme(theme.clone()));
    }
    let dt = params.dt;
    let rest_y = floor_y.map(|y| y + body.shape.rest_height());

    let (new_y, new_vy) = match action {
        Action::Roll | Action::Slide => (rest_y.unwrap_or(body.position.y), 0.0),
        Action::Move | Action::Fly => (body.position.y, 0.0),
        Action::Bounce => ballistic_step(body.position.y, body.velocity.y, rest_y, params),
    };

    let horizontal = Vec3::new(dir.x, 0.0, dir.z) * (params.speed * dt);
    let start = Vec3::new(body.position.x, new_y, body.position.z);
    let mut fraction = 1.0_f64;
    for obstacle in &obstacles {
        fraction = fraction.min(clamp_fraction(body, &start, &horizontal, obstacle)?);
    }
    let moved = horizontal * fraction;
    body.position = start + moved;
    body.velocity = if fraction < 1.0 {
        Vec3::new(0.0, new_vy, 0.0)
    } else {
        Vec3::new(horizontal.x / dt, new_vy, horizontal.z / dt)
    };
    if action == Action::Roll {
        if let Some(r) = body.shape.rolling_radius() {
            body.rotation += moved.norm() / r;
        }
    }
    Ok(next)
}

/// Closed-form vertical motion over one step under constant gravity, with
/// the floor collision resolved at the step end.
fn ballistic_step(y: f64, vy: f64, rest_y: Option<f64>, p: &KinematicParams) -> (f64, f64) {
    let dt = p.dt;
    let g = p.gravity;
    let y1 = y + vy * dt - 0.5 * g * dt * dt;
    let v1 = vy - g * dt;
    match rest_y {
        Some(contact) if y1 < contact => {
            let height = (y - contact).max(0.0);
            let impact = (vy * vy + 2.0 * g * height).sqrt();
            let hop = (2.0 * g * p.hop_height).sqrt();
            (contact, (p.restitution * impact).max(hop))
        }
        _ => (y1, v1),
    }
}
