pub mod commands;
pub mod config;
pub mod experiment;
pub mod synth;
