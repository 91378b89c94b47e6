//! Noun and verb knowledge.
//!
//! Nouns carry just enough geometry to instantiate a body; verbs carry the
//! class, the atomic action they iterate and the contact/rotation profile a
//! trace of that verb must exhibit. The builtin lexicon covers one verb per
//! profile plus the two path verbs; a JSON document can extend or override it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LexiconError {
    #[error("LexiconFormatError: {field}: {message}{}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Format {
        line: Option<usize>,
        field: String,
        message: String,
    },
    #[error("DuplicateEntryError: {kind} `{lemma}` defined more than once")]
    DuplicateEntry { kind: &'static str, lemma: String },
    #[error("UnknownWordError: `{0}`")]
    UnknownWord(String),
}

/// Axis a plane's normal points along. Only `+y` is used by the scene
/// builder; the others are accepted so lexica can describe walls as planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "+x")]
    PosX,
    #[serde(rename = "-x")]
    NegX,
    #[serde(rename = "+y")]
    PosY,
    #[serde(rename = "-y")]
    NegY,
    #[serde(rename = "+z")]
    PosZ,
    #[serde(rename = "-z")]
    NegZ,
}

/// Geometry of a noun. Boxes are axis-aligned with `depth` along x (the
/// motion axis), `height` along y and `width` along z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Sphere { radius: f64 },
    Box { width: f64, height: f64, depth: f64 },
    Plane { normal: Axis },
}

impl Shape {
    pub fn kind(&self) -> ShapeKind {
        match self {
            Shape::Sphere { .. } => ShapeKind::Sphere,
            Shape::Box { .. } => ShapeKind::Box,
            Shape::Plane { .. } => ShapeKind::Plane,
        }
    }

    /// Half extents `(x, y, z)` for finite shapes.
    pub fn half_extents(&self) -> Option<[f64; 3]> {
        match *self {
            Shape::Sphere { radius } => Some([radius; 3]),
            Shape::Box {
                width,
                height,
                depth,
            } => Some([depth / 2.0, height / 2.0, width / 2.0]),
            Shape::Plane { .. } => None,
        }
    }

    /// Centre height of the shape when resting on a floor at y = 0.
    pub fn rest_height(&self) -> f64 {
        self.half_extents().map_or(0.0, |h| h[1])
    }

    /// Radius used for the rolling arc-length identity. Boxes roll over
    /// their half height.
    pub fn rolling_radius(&self) -> Option<f64> {
        match *self {
            Shape::Sphere { radius } => Some(radius),
            Shape::Box { height, .. } => Some(height / 2.0),
            Shape::Plane { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Sphere,
    Box,
    Plane,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NounEntry {
    pub lemma: String,
    pub shape: Shape,
    pub mobile: bool,
    pub default_altitude: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerbClass {
    Manner,
    Path,
    Generic,
}

/// Atomic action iterated by a motion verb; the label of a Tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Roll,
    Slide,
    Bounce,
    Fly,
    Move,
}

impl Action {
    pub const ALL: [Action; 5] = [
        Action::Roll,
        Action::Slide,
        Action::Bounce,
        Action::Fly,
        Action::Move,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Roll => "roll",
            Action::Slide => "slide",
            Action::Bounce => "bounce",
            Action::Fly => "fly",
            Action::Move => "move",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Action::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown action `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FloorContact {
    #[serde(rename = "always_EC")]
    AlwaysEc,
    #[serde(rename = "always_DC")]
    AlwaysDc,
    #[serde(rename = "alternating")]
    Alternating,
    /// No contact requirement (generic motion).
    #[serde(rename = "unconstrained")]
    Unconstrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationCoupling {
    ArcLength,
    None,
    Unconstrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MannerProfile {
    pub floor_contact: FloorContact,
    pub rotation_coupling: RotationCoupling,
}

impl MannerProfile {
    /// The fixed profile every verb iterating `action` must carry.
    pub fn for_action(action: Action) -> Self {
        let (floor_contact, rotation_coupling) = match action {
            Action::Roll => (FloorContact::AlwaysEc, RotationCoupling::ArcLength),
            Action::Slide => (FloorContact::AlwaysEc, RotationCoupling::None),
            Action::Bounce => (FloorContact::Alternating, RotationCoupling::Unconstrained),
            Action::Fly => (FloorContact::AlwaysDc, RotationCoupling::None),
            Action::Move => (FloorContact::Unconstrained, RotationCoupling::Unconstrained),
        };
        Self {
            floor_contact,
            rotation_coupling,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Arrive,
    Leave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prep {
    To,
    From,
    Towards,
    At,
}

impl Prep {
    pub const ALL: [Prep; 4] = [Prep::To, Prep::From, Prep::Towards, Prep::At];

    pub fn as_str(self) -> &'static str {
        match self {
            Prep::To => "to",
            Prep::From => "from",
            Prep::Towards => "towards",
            Prep::At => "at",
        }
    }

    pub fn from_token(tok: &str) -> Option<Prep> {
        Prep::ALL.into_iter().find(|p| p.as_str() == tok)
    }
}

impl fmt::Display for Prep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerbEntry {
    pub lemma: String,
    pub past_forms: Vec<String>,
    pub class: VerbClass,
    #[serde(default)]
    pub tick_action: Option<Action>,
    pub profile: MannerProfile,
    #[serde(default)]
    pub path_kind: Option<PathKind>,
    pub allowed_preps: Vec<Prep>,
}

impl VerbEntry {
    /// The action a compiled program ticks with. Path verbs move generically.
    pub fn action(&self) -> Action {
        self.tick_action.unwrap_or(Action::Move)
    }

    pub fn allows(&self, prep: Prep) -> bool {
        self.allowed_preps.contains(&prep)
    }

    fn validate(&self, at: &str) -> Result<(), LexiconError> {
        let bad = |field: &str, message: &str| LexiconError::Format {
            line: None,
            field: format!("{at}.{field}"),
            message: message.to_string(),
        };
        check_lemma(&self.lemma).map_err(|m| bad("lemma", &m))?;
        if self.past_forms.is_empty() {
            return Err(bad("past_forms", "must be nonempty"));
        }
        for form in &self.past_forms {
            check_lemma(form).map_err(|m| bad("past_forms", &m))?;
        }
        match self.class {
            VerbClass::Manner | VerbClass::Generic => {
                let Some(action) = self.tick_action else {
                    return Err(bad("tick_action", "manner and generic verbs need a tick action"));
                };
                if self.profile != MannerProfile::for_action(action) {
                    return Err(bad(
                        "profile",
                        &format!("does not match the fixed profile of `{action}`"),
                    ));
                }
            }
            VerbClass::Path => {
                if self.path_kind.is_none() {
                    return Err(bad("path_kind", "path verbs need a path kind"));
                }
            }
        }
        Ok(())
    }
}

fn check_lemma(s: &str) -> Result<(), String> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_lowercase()) {
        Err(format!("`{s}` is not a lowercase alphabetic token"))
    } else {
        Ok(())
    }
}

/// Immutable after construction; lookups are by lemma (nouns) or by any
/// surface form (verbs).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Lexicon {
    nouns: BTreeMap<String, NounEntry>,
    verbs: BTreeMap<String, VerbEntry>,
}

impl Lexicon {
    pub fn nouns(&self) -> impl Iterator<Item = &NounEntry> {
        self.nouns.values()
    }

    pub fn verbs(&self) -> impl Iterator<Item = &VerbEntry> {
        self.verbs.values()
    }

    pub fn len(&self) -> usize {
        self.nouns.len() + self.verbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lookup_noun(&self, lemma: &str) -> Result<&NounEntry, LexiconError> {
        self.nouns
            .get(&lemma.to_ascii_lowercase())
            .ok_or_else(|| LexiconError::UnknownWord(lemma.to_string()))
    }

    pub fn lookup_verb(&self, lemma: &str) -> Result<&VerbEntry, LexiconError> {
        self.verbs
            .get(lemma)
            .ok_or_else(|| LexiconError::UnknownWord(lemma.to_string()))
    }

    /// Finds the verb whose lemma or one of whose past forms equals
    /// `surface`, ignoring case.
    pub fn lookup_verb_by_form(&self, surface: &str) -> Result<&VerbEntry, LexiconError> {
        let folded = surface.to_ascii_lowercase();
        self.verbs
            .values()
            .find(|v| v.lemma == folded || v.past_forms.contains(&folded))
            .ok_or_else(|| LexiconError::UnknownWord(surface.to_string()))
    }

    pub fn has_noun(&self, lemma: &str) -> bool {
        self.nouns.contains_key(lemma)
    }

    pub fn has_verb_form(&self, surface: &str) -> bool {
        self.lookup_verb_by_form(surface).is_ok()
    }

    /// Serializes to the documented JSON lexicon schema.
    pub fn to_json(&self) -> String {
        let doc = Document {
            nouns: self.nouns.values().map(RawNoun::from).collect(),
            verbs: self.verbs.values().cloned().collect(),
        };
        serde_json::to_string_pretty(&doc).expect("lexicon serializes")
    }

    fn insert_noun(&mut self, n: NounEntry) {
        self.nouns.insert(n.lemma.clone(), n);
    }

    fn insert_verb(&mut self, v: VerbEntry) {
        self.verbs.insert(v.lemma.clone(), v);
    }

    /// Every surface form maps to one verb.
    fn check_forms_unique(&self) -> Result<(), LexiconError> {
        let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
        for v in self.verbs.values() {
            for form in std::iter::once(&v.lemma).chain(&v.past_forms) {
                if let Some(other) = seen.insert(form, &v.lemma) {
                    if other != v.lemma {
                        return Err(LexiconError::DuplicateEntry {
                            kind: "verb form",
                            lemma: form.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn noun(lemma: &str, shape: Shape, mobile: bool, default_altitude: Option<f64>) -> NounEntry {
    NounEntry {
        lemma: lemma.into(),
        shape,
        mobile,
        default_altitude,
    }
}

fn manner_verb(lemma: &str, past: &str, class: VerbClass, action: Action) -> VerbEntry {
    VerbEntry {
        lemma: lemma.into(),
        past_forms: vec![past.into()],
        class,
        tick_action: Some(action),
        profile: MannerProfile::for_action(action),
        path_kind: None,
        allowed_preps: vec![Prep::To, Prep::From, Prep::Towards],
    }
}

fn path_verb(lemma: &str, past: &str, kind: PathKind, prep: Prep) -> VerbEntry {
    VerbEntry {
        lemma: lemma.into(),
        past_forms: vec![past.into()],
        class: VerbClass::Path,
        tick_action: None,
        profile: MannerProfile::for_action(Action::Move),
        path_kind: Some(kind),
        allowed_preps: vec![prep],
    }
}

/// The lexicon every run starts from.
pub fn builtin_lexicon() -> Lexicon {
    let mut lex = Lexicon::default();
    for n in [
        noun("ball", Shape::Sphere { radius: 0.5 }, true, None),
        noun(
            "block",
            Shape::Box {
                width: 1.0,
                height: 1.0,
                depth: 1.0,
            },
            true,
            None,
        ),
        noun("bird", Shape::Sphere { radius: 0.2 }, true, Some(1.5)),
        noun(
            "wall",
            Shape::Box {
                width: 4.0,
                height: 2.0,
                depth: 0.2,
            },
            false,
            None,
        ),
        noun("floor", Shape::Plane { normal: Axis::PosY }, false, None),
    ] {
        lex.insert_noun(n);
    }
    for v in [
        manner_verb("roll", "rolled", VerbClass::Manner, Action::Roll),
        manner_verb("slide", "slid", VerbClass::Manner, Action::Slide),
        manner_verb("bounce", "bounced", VerbClass::Manner, Action::Bounce),
        manner_verb("fly", "flew", VerbClass::Manner, Action::Fly),
        manner_verb("move", "moved", VerbClass::Generic, Action::Move),
        path_verb("arrive", "arrived", PathKind::Arrive, Prep::At),
        path_verb("leave", "left", PathKind::Leave, Prep::From),
    ] {
        lex.insert_verb(v);
    }
    lex
}

// ---- document schema ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    nouns: Vec<RawNoun>,
    #[serde(default)]
    verbs: Vec<VerbEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawDimensions {
    Lengths(Vec<f64>),
    Normal(Axis),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoun {
    lemma: String,
    shape: ShapeKind,
    dimensions: RawDimensions,
    mobile: bool,
    #[serde(default)]
    default_altitude: Option<f64>,
}

impl From<&NounEntry> for RawNoun {
    fn from(n: &NounEntry) -> Self {
        let dimensions = match n.shape {
            Shape::Sphere { radius } => RawDimensions::Lengths(vec![radius]),
            Shape::Box {
                width,
                height,
                depth,
            } => RawDimensions::Lengths(vec![width, height, depth]),
            Shape::Plane { normal } => RawDimensions::Normal(normal),
        };
        RawNoun {
            lemma: n.lemma.clone(),
            shape: n.shape.kind(),
            dimensions,
            mobile: n.mobile,
            default_altitude: n.default_altitude,
        }
    }
}

impl RawNoun {
    fn into_entry(self, at: &str) -> Result<NounEntry, LexiconError> {
        let bad = |field: &str, message: String| LexiconError::Format {
            line: None,
            field: format!("{at}.{field}"),
            message,
        };
        check_lemma(&self.lemma).map_err(|m| bad("lemma", m))?;
        let shape = match (self.shape, self.dimensions) {
            (ShapeKind::Sphere, RawDimensions::Lengths(d)) if d.len() == 1 => {
                Shape::Sphere { radius: d[0] }
            }
            (ShapeKind::Box, RawDimensions::Lengths(d)) if d.len() == 3 => Shape::Box {
                width: d[0],
                height: d[1],
                depth: d[2],
            },
            (ShapeKind::Plane, RawDimensions::Normal(normal)) => Shape::Plane { normal },
            (kind, _) => {
                return Err(bad(
                    "dimensions",
                    format!(
                        "{kind:?} expects {}",
                        match kind {
                            ShapeKind::Sphere => "[radius]",
                            ShapeKind::Box => "[width, height, depth]",
                            ShapeKind::Plane => "a normal axis such as \"+y\"",
                        }
                    ),
                ))
            }
        };
        if let Some(ext) = shape.half_extents() {
            if !ext.iter().all(|&e| e.is_finite() && e > 0.0) {
                return Err(bad("dimensions", "must be strictly positive".into()));
            }
        }
        if matches!(shape, Shape::Plane { .. }) && self.mobile {
            return Err(bad("mobile", "plane entries are immobile".into()));
        }
        if let Some(alt) = self.default_altitude {
            if !(alt.is_finite() && alt > 0.0) {
                return Err(bad("default_altitude", "must be strictly positive".into()));
            }
        }
        Ok(NounEntry {
            lemma: self.lemma,
            shape,
            mobile: self.mobile,
            default_altitude: self.default_altitude,
        })
    }
}

/// Parses a lexicon document and layers it over the builtin lexicon.
pub fn load_lexicon(source: &str) -> Result<Lexicon, LexiconError> {
    let doc: Document = serde_json::from_str(source).map_err(|e| LexiconError::Format {
        line: Some(e.line()),
        field: "document".into(),
        message: e.to_string(),
    })?;

    let mut lex = builtin_lexicon();
    let mut seen_nouns = std::collections::BTreeSet::new();
    for (i, raw) in doc.nouns.into_iter().enumerate() {
        let entry = raw.into_entry(&format!("nouns[{i}]"))?;
        if !seen_nouns.insert(entry.lemma.clone()) {
            return Err(LexiconError::DuplicateEntry {
                kind: "noun",
                lemma: entry.lemma,
            });
        }
        lex.insert_noun(entry);
    }
    let mut seen_verbs = std::collections::BTreeSet::new();
    for (i, v) in doc.verbs.into_iter().enumerate() {
        v.validate(&format!("verbs[{i}]"))?;
        if !seen_verbs.insert(v.lemma.clone()) {
            return Err(LexiconError::DuplicateEntry {
                kind: "verb",
                lemma: v.lemma,
            });
        }
        lex.insert_verb(v);
    }
    lex.check_forms_unique()?;
    Ok(lex)
}
