//! Input formats, result documents, spectra and the command line for qLR runs.

pub mod checks;
pub mod config;
pub mod document;
pub mod fixtures;
pub mod io;
pub mod oracle;
pub mod pipeline;
pub mod resources;
pub mod spectrum;
