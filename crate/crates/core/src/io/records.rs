//! NDJSON diagnostics: one self-describing record per line.
//!
//! Every record carries `kind`, `version` and `run_id`. The first record is
//! the header, whose `timestamp` is the only field that differs between
//! identical runs; the last is the summary.

use std::io::{BufRead, Write};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const KIND_HEADER: &str = "header";
pub const KIND_SUMMARY: &str = "summary";

/// 64-bit FNV-1a digest, printed as 16 hex digits.
pub fn digest(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

pub struct Emitter<W: Write> {
    out: W,
    run_id: String,
    count: u64,
}

impl<W: Write> Emitter<W> {
    pub fn new(out: W, run_id: impl Into<String>) -> Self {
        Self {
            out,
            run_id: run_id.into(),
            count: 0,
        }
    }

    pub fn run_id(&self) -> &str {
        &self.run_id
    }

    /// Records written so far.
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Writes `payload`'s fields after the common ones; the payload must
    /// serialize to an object.
    pub fn emit(&mut self, kind: &str, payload: &impl Serialize) -> Result<()> {
        let body = serde_json::to_value(payload).map_err(|e| Error::Format(e.to_string()))?;
        let Value::Object(fields) = body else {
            return Err(Error::invalid(format!("record `{kind}` payload is not an object")));
        };
        let mut rec = Map::new();
        rec.insert("kind".into(), Value::from(kind));
        rec.insert("version".into(), Value::from(SCHEMA_VERSION));
        rec.insert("run_id".into(), Value::from(self.run_id.clone()));
        for (k, v) in fields {
            rec.insert(k, v);
        }
        let line = serde_json::to_string(&Value::Object(rec)).map_err(|e| Error::Format(e.to_string()))?;
        writeln!(self.out, "{line}").map_err(|source| Error::Io {
            path: "<diagnostics stream>".into(),
            source,
        })?;
        self.count += 1;
        Ok(())
    }

    pub fn into_inner(mut self) -> Result<W> {
        self.out.flush().map_err(|source| Error::Io {
            path: "<diagnostics stream>".into(),
            source,
        })?;
        Ok(self.out)
    }
}

/// Parses a stream, checking that every record has the current schema version.
pub fn read_records(input: impl BufRead) -> Result<Vec<Value>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: "<diagnostics stream>".into(),
            source,
        })?;
        let v: Value = serde_json::from_str(&line).map_err(|e| Error::Format(format!("record {}: {e}", i + 1)))?;
        match v.get("version").and_then(Value::as_u64) {
            Some(ver) if ver == SCHEMA_VERSION as u64 => {}
            found => {
                return Err(Error::VersionSkew {
                    found: format!("{found:?}"),
                    expected: SCHEMA_VERSION.to_string(),
                })
            }
        }
        out.push(v);
    }
    Ok(out)
}
