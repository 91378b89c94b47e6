//! Controlled-English motion sentences compiled into dynamic interval
//! temporal logic programs, executed over a fixed-step kinematic world, and
//! model-checked against the verb's contact and rotation profile.
//!
//! The usual entry point is [`pipeline::simulate`] followed by
//! [`pipeline::Simulation::verify`].

pub mod cli;
pub mod ditl;
pub mod error;
pub mod kinematics;
pub mod lexicon;
pub mod parser;
pub mod pipeline;
pub mod rng;
pub mod scene;
pub mod verify;

pub use error::Error;
