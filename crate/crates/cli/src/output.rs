//! CSV rendering and atomic file writes.

use crate::Failure;
use flowlab_core::FlowSample;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

pub const HEADER: &str = "t,a,b,x,y,u,v,J,omega,K";

/// Shortest round-trip decimal for every number.
pub fn csv(rows: impl IntoIterator<Item = FlowSample>) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for s in rows {
        let vals = [s.t, s.a, s.b, s.x, s.y, s.u, s.v, s.jacobian, s.omega, s.k];
        for (i, v) in vals.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:?}");
        }
        out.push('\n');
    }
    out
}

/// Writes to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Io(format!("cannot write {}: {e}", path.display()));
    let name = path
        .file_name()
        .ok_or_else(|| Failure::Io(format!("{} is not a file path", path.display())))?;
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(io)
}
