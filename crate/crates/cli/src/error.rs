use std::fmt;

/// Failures grouped by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or arguments (exit 1).
    Usage(String),
    /// Unreadable or inconsistent input data (exit 2).
    Data(String),
    /// Training or sampling produced non-finite values (exit 3).
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<gmrbm::Error> for CliError {
    fn from(e: gmrbm::Error) -> Self {
        use gmrbm::Error as E;
        let msg = e.to_string();
        match e {
            E::Usage(_) | E::Capacity { .. } => CliError::Usage(msg),
            E::NonFinite { .. } => CliError::Numerical(msg),
            E::Dimension(_) | E::ZeroVariance { .. } | E::Parse { .. } | E::Magic(_) | E::Io(_) => CliError::Data(msg),
        }
    }
}
