//! Two-stage soft/hard coded modulation: constellations with a soft stage on
//! the least significant index bits and a hard-decided stage on the rest,
//! channel models, mutual-information tools, front-end detection, channel
//! codes for both stages, the two-parameter ring decoder, and the simulation
//! harness behind the `twostage` command-line tool.

pub mod adbp;
pub mod channel;
pub mod constellation;
pub mod detection;
pub mod fec;
pub mod harness;
pub mod infotheory;
pub mod special;
