//! Self-describing reports: every output carries the tool version, the seed
//! and the full configuration it was produced from.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::CliError;

pub const TOOL: &str = "spincert";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
pub struct Report<'a, C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: &'a C,
    pub results: &'a R,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl<'a, C: Serialize, R: Serialize> Report<'a, C, R> {
    pub fn new(command: &'static str, seed: u64, config: &'a C, results: &'a R, wall_time_s: Option<f64>) -> Self {
        Self { tool: TOOL, version: VERSION, command, seed, config, results, wall_time_s }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// `#`-prefixed provenance lines for CSV outputs.
    pub fn csv_preamble(&self, notices: &[String]) -> Result<String, CliError> {
        let config = serde_json::to_string(self.config).map_err(|e| CliError::Io(e.to_string()))?;
        let mut s = format!(
            "# tool: {} {}\n# command: {}\n# seed: {}\n# config: {config}\n",
            self.tool, self.version, self.command, self.seed
        );
        for n in notices {
            s.push_str(&format!("# notice: {n}\n"));
        }
        if let Some(t) = self.wall_time_s {
            s.push_str(&format!("# wall_time_s: {t}\n"));
        }
        Ok(s)
    }
}

pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| CliError::Io(format!("cannot write to standard output: {e}")))
        }
    }
}
