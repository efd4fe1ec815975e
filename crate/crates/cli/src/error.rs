use versekit::incremental::CacheError;
use versekit::map::MapError;
use versekit::reach::ReachError;
use versekit::scenario::ScenarioError;

/// A failure reported on stderr as `CODE: message`, one line per message.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub messages: Vec<String>,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> CliError {
        CliError {
            code,
            messages: vec![message.into()],
        }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
        CliError::new("E_IO", format!("{}: {e}", path.display()))
    }

    pub fn lines(&self) -> Vec<String> {
        self.messages.iter().map(|m| format!("{}: {m}", self.code)).collect()
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> CliError {
        match e {
            ScenarioError::Io { .. } => CliError::new("E_IO", e.to_string()),
            ScenarioError::Config { .. } => CliError::new("E_CONFIG", e.to_string()),
            ScenarioError::Dsl { .. } => CliError::new("E_DSL", e.to_string()),
            ScenarioError::Map(MapError::Schema { .. }) => CliError::new("E_CONFIG", e.to_string()),
            ScenarioError::Map(_) => CliError::new("E_MAP", e.to_string()),
            ScenarioError::Agent { .. } => CliError::new("E_AGENT", e.to_string()),
            ScenarioError::Invalid(v) => CliError {
                code: "E_VALIDATE",
                messages: v,
            },
            ScenarioError::Duplicate(_) | ScenarioError::Dimension { .. } | ScenarioError::UnknownAgent(_) => {
                CliError::new("E_VALIDATE", e.to_string())
            }
        }
    }
}

impl From<ReachError> for CliError {
    fn from(e: ReachError) -> CliError {
        CliError::new("E_ENGINE", e.to_string())
    }
}

impl From<CacheError> for CliError {
    fn from(e: CacheError) -> CliError {
        CliError::new("E_CACHE", e.to_string())
    }
}
