//! Line-oriented JSON plumbing. Inputs accept `-` for stdin; file outputs
//! go through a same-directory temp file and rename, so a crash mid-write
//! never leaves a truncated file under the target name.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::CliError;

pub const STDIN: &str = "-";

pub fn display_path(path: &str) -> &str {
    if path == STDIN {
        "<stdin>"
    } else {
        path
    }
}

pub fn read_input(path: &str) -> Result<String, CliError> {
    if path == STDIN {
        let mut buf = String::new();
        io::stdin()
            .read_to_string(&mut buf)
            .map_err(|source| CliError::Io { path: "<stdin>".into(), source })?;
        Ok(buf)
    } else {
        fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
    }
}

/// One record per non-blank line, tagged with its 1-based line number so
/// downstream invariant errors can still point at the source line.
pub fn parse_jsonl<T: DeserializeOwned>(
    path: &str,
    text: &str,
) -> Result<Vec<(usize, T)>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|source| CliError::Parse {
            path: display_path(path).to_owned(),
            line: i + 1,
            source,
        })?;
        out.push((i + 1, record));
    }
    Ok(out)
}

pub fn to_jsonl<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row).expect("wire rows serialize"));
        out.push('\n');
    }
    out
}

/// Writes to the path, or to stdout when none is given.
pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
        Some(p) => {
            let err = |source| CliError::Io { path: p.display().to_string(), source };
            let mut tmp = p.as_os_str().to_owned();
            tmp.push(".tmp");
            fs::write(&tmp, text).map_err(err)?;
            fs::rename(&tmp, p).map_err(err)
        }
    }
}
