use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::args::Global;

/// Manifest schema version.
pub const MANIFEST_VERSION: u32 = 1;

/// What a command produced: a human summary and named output documents.
#[derive(Default)]
pub struct Outcome {
    pub summary: Vec<String>,
    pub documents: Vec<(String, Vec<u8>)>,
    pub params: Value,
}

impl Outcome {
    pub fn line(&mut self, s: impl Into<String>) {
        self.summary.push(s.into());
    }

    pub fn json(&mut self, name: &str, v: &Value) {
        let mut text = serde_json::to_string_pretty(v).expect("JSON values always serialise");
        text.push('\n');
        self.documents.push((name.to_string(), text.into_bytes()));
    }

    pub fn text(&mut self, name: &str, s: String) {
        self.documents.push((name.to_string(), s.into_bytes()));
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Prints the summary, then either writes the documents with a manifest or
/// echoes the documents matching `--format`.
pub fn emit(out: &Outcome, global: &Global, argv: &[String], start: Instant) -> std::io::Result<()> {
    for l in &out.summary {
        println!("{l}");
    }
    let Some(dir) = &global.out_dir else {
        let ext = format!(".{}", global.format.as_str());
        for (name, bytes) in &out.documents {
            if name.ends_with(&ext) {
                print!("{}", String::from_utf8_lossy(bytes));
            }
        }
        return Ok(());
    };
    std::fs::create_dir_all(dir)?;
    let mut digests = serde_json::Map::new();
    for (name, bytes) in &out.documents {
        std::fs::write(dir.join(name), bytes)?;
        digests.insert(
            name.clone(),
            json!({ "sha256": hex(&Sha256::digest(bytes)), "bytes": bytes.len() }),
        );
    }
    let manifest = json!({
        "schema_version": MANIFEST_VERSION,
        "tool": "colphase",
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": argv,
        "parameters": out.params,
        "seed": global.seed,
        "precision_bits": global.precision_bits,
        "tol": global.tol,
        "budget": global.budget,
        "wall_time_seconds": start.elapsed().as_secs_f64(),
        "outputs": Value::Object(digests),
    });
    write_json(&dir.join("manifest.json"), &manifest)
}

fn write_json(path: &Path, v: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(v).expect("JSON values always serialise");
    text.push('\n');
    std::fs::write(path, text)
}
