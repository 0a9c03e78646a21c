//! Atomic file output. JSON documents carry the run configuration under
//! `run_config`; CSV files carry it as a leading `# run_config: {...}` line.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    // Temp files are created owner-only; outputs should get ordinary permissions.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Serializes `body` and adds the `run_config` key. Objects keep their own
/// fields at top level so maps stay readable as diffeomorphism files; other
/// values are wrapped under `result`.
pub fn json_document(cfg: &RunConfig, body: &impl Serialize) -> Result<Value> {
    let mut value = serde_json::to_value(body)?;
    match value.as_object_mut() {
        Some(map) => {
            map.insert("run_config".into(), cfg.echo());
        }
        None => value = serde_json::json!({ "run_config": cfg.echo(), "result": value }),
    }
    Ok(value)
}

pub fn write_json(path: &Path, cfg: &RunConfig, body: &impl Serialize) -> Result<()> {
    let doc = json_document(cfg, body)?;
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn write_csv<R: Serialize>(path: &Path, cfg: &RunConfig, header: &[&str], rows: &[R]) -> Result<()> {
    let mut buf = format!("# run_config: {}\n", serde_json::to_string(&cfg.echo())?).into_bytes();
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut buf);
        w.write_record(header)?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    write_atomic(path, &buf)?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    Ok(())
}
