//! Optional `key = value` run configuration; command-line flags take precedence.

use std::path::Path;

use crate::error::{AppError, AppResult};

/// Entries in file order. Keys are long flag names without the dashes;
/// `#` starts a comment.
pub fn read_config(path: &Path) -> AppResult<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_config(&text, &path.display().to_string())
}

pub fn parse_config(text: &str, name: &str) -> AppResult<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| AppError::parse(name, i + 1, format!("expected 'key = value', found '{line}'")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(AppError::parse(name, i + 1, format!("invalid key '{k}'")));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(AppError::parse(name, i + 1, format!("duplicate key '{k}'")));
        }
        out.push((k.replace('_', "-"), v.to_string()));
    }
    Ok(out)
}
