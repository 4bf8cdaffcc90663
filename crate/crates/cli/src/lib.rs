//! Configuration, result tables and scenario commands for the `chiral` binary.

pub mod commands;
pub mod config;
pub mod table;

pub use commands::{
    run_dichroism, run_fig2, run_qfi, run_simulate, run_sucrose, run_validate, SucroseReport,
};
pub use config::ScenarioConfig;
pub use table::{Cell, Format, ResultTable};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("config serialization error: {0}")]
    Serialize(#[from] toml::ser::Error),

    #[error(transparent)]
    Model(#[from] chiral_metrology::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("table error: {0}")]
    Table(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;
