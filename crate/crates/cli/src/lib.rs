//! Verification harness behind the `thetavoa` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod runner;
pub mod suites;

pub use error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    SpecialFunctions,
    ThetaClassical,
    Combinatorics,
    Npoint,
    MainTheorem,
    All,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::SpecialFunctions => "special-functions",
            Suite::ThetaClassical => "theta-classical",
            Suite::Combinatorics => "combinatorics",
            Suite::Npoint => "npoint",
            Suite::MainTheorem => "main-theorem",
            Suite::All => "all",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Expansion {
    Eta,
    G2,
    ThetaSeries,
}

impl Expansion {
    pub fn name(&self) -> &'static str {
        match self {
            Expansion::Eta => "eta",
            Expansion::G2 => "g2",
            Expansion::ThetaSeries => "theta-series",
        }
    }
}
