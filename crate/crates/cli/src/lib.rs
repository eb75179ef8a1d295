//! File formats and command implementations behind the `resolat` binary.

use std::io::Write as _;
use std::path::Path;

pub mod commands;
pub mod designfile;
pub mod touchstone;

/// Writes via a sibling temp file and rename so readers never observe a
/// truncated file.
pub(crate) fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let stem = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{stem}.tmp{}", std::process::id()));
    let mut file = std::fs::File::create(&tmp)?;
    let result = file.write_all(bytes).and_then(|_| file.flush());
    drop(file);
    match result {
        Ok(()) => std::fs::rename(&tmp, path),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}
