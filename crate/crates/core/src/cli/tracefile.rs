//! On-disk trace files, version "1".
//!
//! A trace file is a header followed by one record per state. In `jsonl`
//! the header is the first line and each record is one JSON object per
//! line. In `csv` the header JSON follows a `# ` prefix on the first line,
//! then a column-name row, then one row per state.
//!
//! Every float is written as `{:.16e}` (17 significant digits), which
//! round-trips exactly and makes both formats byte-identical for equal
//! runs. See `docs/trace-format.md` for the field list.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ditl::Trace;
use crate::error::Error;
use crate::kinematics::{relation_in, ContactRelation, Vec3, WorldState};
use crate::lexicon::Action;
use crate::pipeline::Simulation;
use crate::scene::{Scene, SceneConfig, COORDINATES};
use crate::verify::VerifyError;

pub const VERSION: &str = "1";
const FORMAT_NAME: &str = "mosim-trace";
const COLLISION: &str = "horizontal motion clamped at first contact; roll and slide held at resting height";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceFormatError {
    #[error("TraceFormatError: unsupported version {found:?}, expected \"1\"")]
    Version { found: String },
    #[error("TraceFormatError: line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("TraceFormatError: header declares {declared} records, found {found}")]
    RecordCount { declared: usize, found: usize },
    #[error("TraceFormatError: non-finite value in {0}")]
    NonFinite(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    /// Guesses the format from file content: csv files start with `#`.
    pub fn sniff(content: &str) -> Format {
        if content.starts_with('#') {
            Format::Csv
        } else {
            Format::Jsonl
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bindings {
    pub theme: String,
    pub ground: Option<String>,
    pub floor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub format: String,
    pub version: String,
    pub sentence: String,
    pub seed: u64,
    pub dt: f64,
    pub config: SceneConfig,
    pub bindings: Bindings,
    /// Body ids in the order every record lists them.
    pub objects: Vec<String>,
    pub coordinates: String,
    pub collision: String,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyRecord {
    pub id: String,
    pub position: [f64; 3],
    pub rotation: f64,
    pub velocity: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    pub index: usize,
    pub time: f64,
    /// Action of the incoming transition; absent for the initial state.
    pub label: Option<Action>,
    /// Theme against the floor.
    pub floor_contact: ContactRelation,
    /// Theme against the ground, when there is one.
    pub goal_contact: Option<ContactRelation>,
    pub bodies: Vec<BodyRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub header: Header,
    pub records: Vec<Record>,
}

/// JSON formatter that writes every float with 17 significant digits.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
}

fn to_json_line<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    out
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn malformed(line: usize, message: impl Into<String>) -> TraceFormatError {
    TraceFormatError::Malformed {
        line,
        message: message.into(),
    }
}

impl TraceFile {
    pub fn from_simulation(sim: &Simulation) -> Result<Self, Error> {
        let scene = &sim.scene;
        let eps = scene.params.contact_eps;
        let mut records = Vec::with_capacity(sim.trace.len());
        for (i, s) in sim.trace.states.iter().enumerate() {
            let floor_contact =
                relation_in(s, &scene.theme, &scene.floor, eps).map_err(crate::ditl::DitlError::from)?;
            let goal_contact = match &scene.ground {
                Some(g) => Some(relation_in(s, &scene.theme, g, eps).map_err(crate::ditl::DitlError::from)?),
                None => None,
            };
            records.push(Record {
                index: i,
                time: s.time,
                label: if i == 0 { None } else { Some(sim.trace.labels[i - 1]) },
                floor_contact,
                goal_contact,
                bodies: s
                    .bodies
                    .iter()
                    .map(|b| BodyRecord {
                        id: b.id.to_string(),
                        position: arr(&b.position),
                        rotation: b.rotation,
                        velocity: arr(&b.velocity),
                    })
                    .collect(),
            });
        }
        let file = TraceFile {
            header: Header {
                format: FORMAT_NAME.into(),
                version: VERSION.into(),
                sentence: sim.sentence.clone(),
                seed: sim.config.seed,
                dt: sim.trace.dt,
                config: sim.config.clone(),
                bindings: Bindings {
                    theme: scene.theme.to_string(),
                    ground: scene.ground.as_ref().map(ToString::to_string),
                    floor: scene.floor.to_string(),
                },
                objects: scene.world.bodies.iter().map(|b| b.id.to_string()).collect(),
                coordinates: COORDINATES.into(),
                collision: COLLISION.into(),
                records: records.len(),
            },
            records,
        };
        file.check_finite()?;
        Ok(file)
    }

    fn check_finite(&self) -> Result<(), TraceFormatError> {
        for r in &self.records {
            let floats = std::iter::once(r.time).chain(
                r.bodies
                    .iter()
                    .flat_map(|b| b.position.into_iter().chain([b.rotation]).chain(b.velocity)),
            );
            if floats.into_iter().any(|x| !x.is_finite()) {
                return Err(TraceFormatError::NonFinite(format!("record {}", r.index)));
            }
        }
        Ok(())
    }

    pub fn write(&self, format: Format, w: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Jsonl => self.write_jsonl(w),
            Format::Csv => self.write_csv(w),
        }
    }

    pub fn to_bytes(&self, format: Format) -> Vec<u8> {
        let mut out = Vec::new();
        self.write(format, &mut out).expect("writing to memory cannot fail");
        out
    }

    fn write_jsonl(&self, w: &mut dyn Write) -> io::Result<()> {
        w.write_all(&to_json_line(&self.header))?;
        w.write_all(b"\n")?;
        for r in &self.records {
            w.write_all(&to_json_line(r))?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = ["index", "time", "label", "floor_contact", "goal_contact"]
            .map(String::from)
            .to_vec();
        for id in &self.header.objects {
            for field in ["x", "y", "z", "rot", "vx", "vy", "vz"] {
                cols.push(format!("{id}.{field}"));
            }
        }
        cols
    }

    fn write_csv(&self, w: &mut dyn Write) -> io::Result<()> {
        w.write_all(b"# ")?;
        w.write_all(&to_json_line(&self.header))?;
        w.write_all(b"\n")?;
        let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        csv.write_record(self.columns())?;
        for r in &self.records {
            let mut row = vec![
                r.index.to_string(),
                fmt_f64(r.time),
                r.label.map(|a| a.as_str().to_string()).unwrap_or_default(),
                r.floor_contact.as_str().to_string(),
                r.goal_contact.map(|c| c.as_str().to_string()).unwrap_or_default(),
            ];
            for b in &r.bodies {
                row.extend(b.position.iter().map(|x| fmt_f64(*x)));
                row.push(fmt_f64(b.rotation));
                row.extend(b.velocity.iter().map(|x| fmt_f64(*x)));
            }
            csv.write_record(&row)?;
        }
        csv.flush()
    }

    /// Reads either format, detected from the content.
    pub fn parse(content: &str) -> Result<Self, TraceFormatError> {
        match Format::sniff(content) {
            Format::Jsonl => Self::parse_jsonl(content),
            Format::Csv => Self::parse_csv(content),
        }
    }

    fn parse_header(line: &str) -> Result<Header, TraceFormatError> {
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| malformed(1, format!("header: {e}")))?;
        match value.get("version").and_then(|v| v.as_str()) {
            Some(VERSION) => {}
            Some(other) => return Err(TraceFormatError::Version { found: other.into() }),
            None => return Err(malformed(1, "header has no version")),
        }
        let header: Header = serde_json::from_value(value).map_err(|e| malformed(1, format!("header: {e}")))?;
        if header.format != FORMAT_NAME {
            return Err(malformed(1, format!("unknown format {:?}", header.format)));
        }
        Ok(header)
    }

    fn parse_jsonl(content: &str) -> Result<Self, TraceFormatError> {
        let mut lines = content.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or_else(|| malformed(1, "empty file"))?;
        let header = Self::parse_header(first)?;
        let records = lines
            .map(|(i, l)| serde_json::from_str::<Record>(l).map_err(|e| malformed(i + 1, e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::validated(header, records, 2)
    }

    fn parse_csv(content: &str) -> Result<Self, TraceFormatError> {
        let (first, rest) = content.split_once('\n').ok_or_else(|| malformed(1, "no data after header"))?;
        let header = Self::parse_header(first.trim_start_matches('#').trim())?;
        let mut reader = csv::ReaderBuilder::new().from_reader(rest.as_bytes());
        let skeleton = TraceFile {
            header: header.clone(),
            records: Vec::new(),
        };
        let expected = skeleton.columns();
        let found: Vec<String> = reader
            .headers()
            .map_err(|e| malformed(2, e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        if found != expected {
            return Err(malformed(2, format!("columns {found:?}, expected {expected:?}")));
        }
        let mut records = Vec::new();
        for (k, row) in reader.records().enumerate() {
            let line = k + 3;
            let row = row.map_err(|e| malformed(line, e.to_string()))?;
            records.push(Self::csv_record(&header, &row).map_err(|m| malformed(line, m))?);
        }
        Self::validated(header, records, 3)
    }

    fn csv_record(header: &Header, row: &csv::StringRecord) -> Result<Record, String> {
        let float = |i: usize| -> Result<f64, String> {
            let s = row.get(i).ok_or("missing field")?;
            s.parse::<f64>().map_err(|_| format!("bad number {s:?}"))
        };
        let relation = |s: &str| -> Result<ContactRelation, String> {
            serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("bad relation {s:?}"))
        };
        let field = |i: usize| row.get(i).unwrap_or("");
        let index = field(0).parse::<usize>().map_err(|_| format!("bad index {:?}", field(0)))?;
        let label = match field(2) {
            "" => None,
            s => Some(s.parse::<Action>()?),
        };
        let goal_contact = match field(4) {
            "" => None,
            s => Some(relation(s)?),
        };
        let mut bodies = Vec::new();
        for (n, id) in header.objects.iter().enumerate() {
            let base = 5 + 7 * n;
            bodies.push(BodyRecord {
                id: id.clone(),
                position: [float(base)?, float(base + 1)?, float(base + 2)?],
                rotation: float(base + 3)?,
                velocity: [float(base + 4)?, float(base + 5)?, float(base + 6)?],
            });
        }
        Ok(Record {
            index,
            time: float(1)?,
            label,
            floor_contact: relation(field(3))?,
            goal_contact,
            bodies,
        })
    }

    fn validated(header: Header, records: Vec<Record>, first_line: usize) -> Result<Self, TraceFormatError> {
        if records.len() != header.records {
            return Err(TraceFormatError::RecordCount {
                declared: header.records,
                found: records.len(),
            });
        }
        for (i, r) in records.iter().enumerate() {
            let line = first_line + i;
            if r.index != i {
                return Err(malformed(line, format!("index {} out of sequence", r.index)));
            }
            if (i == 0) != r.label.is_none() {
                return Err(malformed(line, "only the initial record lacks a label"));
            }
            let ids: Vec<&str> = r.bodies.iter().map(|b| b.id.as_str()).collect();
            if ids != header.objects.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(malformed(line, format!("bodies {ids:?} differ from header objects")));
            }
        }
        let file = TraceFile { header, records };
        file.check_finite()?;
        Ok(file)
    }

    /// Rebuilds the trace over `scene`, whose bodies supply the shapes and
    /// must carry exactly the ids in the file.
    pub fn to_trace(&self, scene: &Scene) -> Result<Trace, Error> {
        let mut scene_ids: Vec<&str> = scene.world.bodies.iter().map(|b| b.id.as_str()).collect();
        let mut file_ids: Vec<&str> = self.header.objects.iter().map(String::as_str).collect();
        scene_ids.sort_unstable();
        file_ids.sort_unstable();
        if scene_ids != file_ids {
            return Err(VerifyError::TraceSceneMismatch(format!(
                "trace has objects {file_ids:?}, sentence describes {scene_ids:?}"
            ))
            .into());
        }
        let states = self
            .records
            .iter()
            .map(|r| {
                let mut s: WorldState = scene.world.clone();
                s.frame = r.index as u64;
                s.time = r.time;
                for b in &r.bodies {
                    let body = s.body_mut(&b.id.as_str().into()).expect("ids checked");
                    body.position = Vec3::from(b.position);
                    body.rotation = b.rotation;
                    body.velocity = Vec3::from(b.velocity);
                }
                s
            })
            .collect();
        Ok(Trace {
            dt: self.header.dt,
            states,
            labels: self.records.iter().filter_map(|r| r.label).collect(),
        })
    }
}
