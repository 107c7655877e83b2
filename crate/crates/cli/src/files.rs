use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nokholo_core::fixtures;
use nokholo_core::lattice::SurfaceData;

use crate::CliError;

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let name = path.file_name().ok_or_else(|| CliError::Usage(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::Io(format!("{}: {e}", path.display())));
    }
    Ok(())
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Resolves a surface argument: an existing path, then a file in
/// `$NOKHOLO_FIXTURES`, then a bundled fixture of that name.
pub fn load_surface(arg: &str) -> Result<SurfaceData, CliError> {
    let text = surface_text(arg)?;
    Ok(SurfaceData::from_json_str(&text)?)
}

fn surface_text(arg: &str) -> Result<String, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        return read(path);
    }
    if let Some(dir) = std::env::var_os("NOKHOLO_FIXTURES") {
        let candidate = Path::new(&dir).join(arg);
        if candidate.is_file() {
            return read(&candidate);
        }
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    fixtures::bundled(&name)
        .map(str::to_string)
        .ok_or_else(|| CliError::Usage(format!("surface {arg:?} not found (no such file or fixture)")))
}

pub fn to_json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
