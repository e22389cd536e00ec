use std::path::PathBuf;

use thiserror::Error;

/// CLI failures. Every message names the module and stage it came from.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cli/config: {path}:{line}:{column}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("cli/config: {0}")]
    Config(String),

    #[error("{module}/{stage}: {source}")]
    Core {
        module: &'static str,
        stage: &'static str,
        #[source]
        source: meandim::Error,
    },

    #[error("cli/{stage}: {path}: {source}")]
    Io {
        stage: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cli/output: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Config(_) => EXIT_VALIDATION,
            CliError::Io { stage: "config", .. } => EXIT_VALIDATION,
            CliError::Core { source, .. } => match source {
                meandim::Error::Invalid(_) | meandim::Error::Precondition(_) => EXIT_VALIDATION,
                meandim::Error::Capacity { .. } => EXIT_CAPACITY,
                meandim::Error::Numeric(_) | meandim::Error::Rejected(_) => EXIT_NUMERIC,
            },
            CliError::Io { .. } | CliError::Output(_) => EXIT_NUMERIC,
        }
    }
}

/// Tags a core error with the module and stage that raised it.
pub(crate) fn at(module: &'static str, stage: &'static str) -> impl Fn(meandim::Error) -> CliError {
    move |source| CliError::Core { module, stage, source }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let core = |source| CliError::Core { module: "m", stage: "s", source };
        assert_eq!(core(meandim::Error::Invalid("x".into())).exit_code(), EXIT_VALIDATION);
        assert_eq!(core(meandim::Error::Numeric("x".into())).exit_code(), EXIT_NUMERIC);
        assert_eq!(core(meandim::Error::Rejected("x".into())).exit_code(), EXIT_NUMERIC);
        let cap = meandim::Error::Capacity { what: "w".into(), needed: 2, limit: 1, knob: "exact_points" };
        let e = core(cap);
        assert_eq!(e.exit_code(), EXIT_CAPACITY);
        assert!(e.to_string().starts_with("m/s: ") && e.to_string().contains("exact_points"));
    }
}
