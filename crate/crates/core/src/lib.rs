//! Trait Modulation Keys: Big-Five personality steering for conversational
//! agents, with the psychometric validation battery and the statistics used
//! to analyse user-agent personality alignment.

pub mod cli;
pub mod gateway;
pub mod harness;
pub mod keypack;
pub mod model;
pub mod prompt;
pub mod psychometrics;
pub mod session;
pub mod study;
pub mod stats;
