pub mod equivalence;
pub mod simulate;
pub mod tables;
pub mod tte;
pub mod zcheck;

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

/// Writes pretty JSON to `out`, or to stdout.
pub fn emit_json<S: Serialize>(value: &S, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    emit_text(&(text + "\n"), out)
}

pub fn emit_text(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn reject_flag(name: &str, present: bool, command: &str) -> Result<()> {
    if present {
        bail!("--{name} is not used by {command}");
    }
    Ok(())
}
