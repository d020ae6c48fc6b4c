use thiserror::Error;

/// CLI-level failure with a stable exit code and a JSON rendering.
///
/// Exit codes: 2 for unusable input files, 3 for out-of-range
/// parameters, 4 for numerical breakdowns.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{message}")]
    Input {
        message: String,
        /// Byte offset in the offending file, when known.
        offset: Option<u64>,
    },

    #[error("{0}")]
    Parameter(String),

    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input {
            message: message.into(),
            offset: None,
        }
    }

    pub fn input_at(message: impl Into<String>, offset: u64) -> Self {
        CliError::Input {
            message: message.into(),
            offset: Some(offset),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => 2,
            CliError::Parameter(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Input { .. } => "input-error",
            CliError::Parameter(_) => "parameter-error",
            CliError::Numerical(_) => "numerical-error",
        }
    }

    /// Single JSON object with sorted keys describing the failure.
    pub fn to_json(&self) -> String {
        let mut obj = serde_json::Map::new();
        obj.insert("error".into(), serde_json::Value::String(self.to_string()));
        obj.insert("kind".into(), serde_json::Value::String(self.kind().into()));
        if let CliError::Input {
            offset: Some(off), ..
        } = self
        {
            obj.insert("offset".into(), serde_json::Value::from(*off));
        }
        serde_json::Value::Object(obj).to_string()
    }
}

impl From<lgg_core::Error> for CliError {
    fn from(err: lgg_core::Error) -> Self {
        match err {
            lgg_core::Error::InvalidInput(m) => CliError::Input {
                message: m,
                offset: None,
            },
            lgg_core::Error::InvalidParameter(m) => CliError::Parameter(m),
            lgg_core::Error::NumericalFailure(m) => CliError::Numerical(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::input(format!("io error: {err}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(CliError::input("x").exit_code(), 2);
        assert_eq!(CliError::Parameter("x".into()).exit_code(), 3);
        assert_eq!(CliError::Numerical("x".into()).exit_code(), 4);
    }

    #[test]
    fn json_rendering_is_sorted_and_carries_offsets() {
        let err = CliError::input_at("broken header", 12);
        let json = err.to_json();
        assert_eq!(
            json,
            r#"{"error":"broken header","kind":"input-error","offset":12}"#
        );
        let err = CliError::Numerical("diverged".into());
        assert_eq!(err.to_json(), r#"{"error":"diverged","kind":"numerical-error"}"#);
    }

    #[test]
    fn core_errors_map_to_kinds() {
        let input: CliError = lgg_core::Error::InvalidInput("a".into()).into();
        assert_eq!(input.exit_code(), 2);
        let param: CliError = lgg_core::Error::InvalidParameter("b".into()).into();
        assert_eq!(param.exit_code(), 3);
        let num: CliError = lgg_core::Error::NumericalFailure("c".into()).into();
        assert_eq!(num.exit_code(), 4);
    }
}
