//! Result envelopes and where they are written.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use rydlat::{Error, Result};
use serde::Serialize;

use crate::config::RunConfig;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RYDLAT_OUT_DIR";

#[derive(Debug, Serialize)]
pub struct Header<'a> {
    pub program: &'static str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    /// Wall-clock seconds; the only field that differs between identical runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub header: Header<'a>,
    pub payload: &'a T,
}

/// Analytic-vs-numeric comparison row printed by `--verify`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub name: String,
    pub analytic: f64,
    pub numeric: f64,
    pub ratio: f64,
}

impl VerifyRow {
    pub fn new(name: impl Into<String>, analytic: f64, numeric: f64) -> Self {
        Self {
            name: name.into(),
            analytic,
            numeric,
            ratio: numeric / analytic,
        }
    }
}

pub fn verify_table(rows: &[VerifyRow]) -> String {
    let mut s = format!(
        "{:<28} {:>13} {:>13} {:>8}\n",
        "check", "analytic", "numeric", "ratio"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<28} {:>13.4e} {:>13.4e} {:>8.4}",
            r.name, r.analytic, r.numeric, r.ratio
        );
    }
    s
}

/// Simple CSV builder with full-precision numbers.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
        }
    }

    /// Row with a leading text label.
    pub fn labeled(&mut self, label: &str, values: &[f64]) {
        self.text.push_str(label);
        for v in values {
            let _ = write!(self.text, ",{v:.17e}");
        }
        self.text.push('\n');
    }

    pub fn row(&mut self, values: &[f64]) {
        let line: Vec<String> = values.iter().map(|v| format!("{v:.17e}")).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub fn json_document<T: Serialize>(
    config: &RunConfig,
    payload: &T,
    timestamp: bool,
) -> Result<String> {
    let created_unix = timestamp.then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    let doc = Envelope {
        header: Header {
            program: "rydlat",
            version: env!("CARGO_PKG_VERSION"),
            config,
            created_unix,
        },
        payload,
    };
    let mut s = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::Domain(format!("cannot serialize output: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Output path: explicit path, else `$RYDLAT_OUT_DIR/<command>.<ext>`, else stdout.
pub fn destination(config: &RunConfig) -> Option<PathBuf> {
    if let Some(p) = &config.output.path {
        return Some(p.clone());
    }
    let dir = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty())?;
    let ext = config.output.format.extension();
    Some(PathBuf::from(dir).join(format!("{}.{ext}", config.command)))
}

pub fn emit(config: &RunConfig, text: &str) -> Result<()> {
    match destination(config) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| {
                    Error::Parameter(format!("cannot create {}: {e}", parent.display()))
                })?;
            }
            std::fs::write(&path, text)
                .map_err(|e| Error::Parameter(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut out = std::io::stdout().lock();
            // A closed pipe is not an error worth reporting.
            let _ = out.write_all(text.as_bytes());
        }
    }
    Ok(())
}
