use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Lib(#[from] fairpca::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use fairpca::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Lib(e) => match e {
                E::Dimension { .. } | E::InvalidSpec(_) => EXIT_CONFIG,
                E::Numerical(_) => EXIT_NUMERICAL,
                E::InvalidInput(_)
                | E::DegenerateAttribute { .. }
                | E::DegenerateInput(_)
                | E::Schema(_)
                | E::Parse { .. }
                | E::Format(_)
                | E::Io(_)
                | E::Csv(_) => EXIT_DATA,
            },
        }
    }

    /// Standard output closed early (e.g. piped into `head`).
    pub fn is_broken_pipe(&self) -> bool {
        let io = match self {
            CliError::Lib(fairpca::Error::Io(e)) => Some(e),
            CliError::Lib(fairpca::Error::Csv(e)) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e),
                _ => None,
            },
            _ => None,
        };
        io.is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
    }

    /// Message for standard error, with the admissible maximum for dimension errors.
    pub fn report(&self) -> String {
        match self {
            CliError::Lib(fairpca::Error::Dimension {
                msg,
                max: Some(max),
            }) => {
                format!("{msg} (largest achievable k is {max})")
            }
            other => other.to_string(),
        }
    }
}
