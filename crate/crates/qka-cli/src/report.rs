//! Machine-readable run reports.
//!
//! Reports are JSON by default (CSV for aggregate tables) and contain no
//! timestamps or environment data, so identical invocations produce
//! byte-identical bodies.

use serde::Serialize;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default directory for `--output` paths.
pub const OUTPUT_DIR_ENV: &str = "QKA_OUTPUT_DIR";

#[derive(Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

/// Report envelope shared by every subcommand.
#[derive(Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub command: &'static str,
    pub config: C,
    pub results: R,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn new(command: &'static str, config: C, results: R) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: ToolInfo {
                name: "qka",
                version: env!("CARGO_PKG_VERSION"),
            },
            command,
            config,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report types serialize")
    }
}

/// Resolve an output path against the default output directory when the
/// path is relative and the environment variable is set.
pub fn resolve_output_path(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Emit the report body to stdout and optionally to a file.
pub fn emit(body: &str, output: Option<&Path>) -> Result<(), String> {
    println!("{body}");
    if let Some(path) = output {
        let resolved = resolve_output_path(path);
        if let Some(parent) = resolved.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)
                    .map_err(|e| format!("cannot create {}: {e}", parent.display()))?;
            }
        }
        std::fs::write(&resolved, format!("{body}\n"))
            .map_err(|e| format!("cannot write {}: {e}", resolved.display()))?;
        eprintln!("report written to {}", resolved.display());
    }
    Ok(())
}

/// Minimal CSV writer for the aggregate tables; fields never contain commas
/// or quotes.
pub fn csv_lines(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    // No trailing blank line: the final newline terminates the last row.
    out.pop();
    out
}
