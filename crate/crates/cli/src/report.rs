use std::io::Write;
use std::path::Path;

use pprop::algebra::FinAlgebra;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algebra_sha256: Option<String>,
}

impl Header {
    pub fn new(command: &str, seed: u64, alg: Option<&FinAlgebra>) -> Self {
        Header {
            tool: "pprop",
            version: VERSION,
            command: command.to_string(),
            seed,
            algebra_sha256: alg.map(algebra_hash),
        }
    }
}

/// Hash of the canonical serialization, so reformatted inputs agree.
pub fn algebra_hash(alg: &FinAlgebra) -> String {
    hex::encode(Sha256::digest(alg.to_json().as_bytes()))
}

pub fn render(header: &Header, result: Value) -> String {
    let mut text = serde_json::to_string_pretty(&json!({ "header": header, "result": result }))
        .expect("report serializes");
    text.push('\n');
    text
}

/// Writes to `out` through a temporary file in the same directory, or to
/// stdout.
pub fn emit(out: Option<&Path>, text: &str) -> std::io::Result<()> {
    match out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| e.error)?;
            Ok(())
        }
    }
}
