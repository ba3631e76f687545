use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use serde_json::{json, Value};

use crate::config::{Format, Globals};

/// Run metadata plus the command result.
pub fn envelope(command: &str, config: &Value, seed: u64, wall_time: Duration, result: Value) -> Value {
    json!({
        "tool": "lossphase",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "seed": seed,
        "wall_time_ms": wall_time.as_secs_f64() * 1e3,
        "result": result,
    })
}

/// `<path>.<suffix>` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = OsString::from(path.as_os_str());
    name.push(".");
    name.push(suffix);
    PathBuf::from(name)
}

pub fn write_bytes(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Writes the artifact in the requested format.
///
/// JSON writes the envelope. CSV writes `csv` and puts the envelope in
/// `<output>.meta.json`, or on stderr when writing to stdout.
pub fn emit(globals: &Globals, default_format: Format, envelope: &Value, csv: Option<Vec<u8>>) -> anyhow::Result<()> {
    let format = globals.format.unwrap_or(default_format);
    let output = globals.output.as_deref();
    match (format, csv) {
        (Format::Csv, Some(bytes)) => {
            write_bytes(output, &bytes)?;
            match output {
                Some(p) => {
                    let mut meta = serde_json::to_vec_pretty(envelope)?;
                    meta.push(b'\n');
                    write_bytes(Some(&sibling(p, "meta.json")), &meta)
                }
                None => {
                    eprintln!("{}", serde_json::to_string(envelope)?);
                    Ok(())
                }
            }
        }
        _ => {
            let mut bytes = serde_json::to_vec_pretty(envelope)?;
            bytes.push(b'\n');
            write_bytes(output, &bytes)
        }
    }
}

/// Serializes rows with a header derived from the row type.
pub fn csv_bytes<R: serde::Serialize>(rows: impl IntoIterator<Item = R>) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
}
