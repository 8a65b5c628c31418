//! Report envelope, exit codes and file output.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use genrob_core::Error;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NOT_APPLICABLE: u8 = 2;
pub const EXIT_WITNESS_REGIME: u8 = 3;
pub const EXIT_VERIFICATION: u8 = 4;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::FreeState(_) | Error::InfiniteRobustness => EXIT_NOT_APPLICABLE,
            Error::WitnessRegime(_) => EXIT_WITNESS_REGIME,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Inputs that identify a run: command, normalized arguments and the raw
/// contents of every input file.
#[derive(Serialize)]
pub struct Config {
    pub command: String,
    pub args: BTreeMap<String, Value>,
    pub inputs: BTreeMap<String, String>,
}

impl Config {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            args: BTreeMap::new(),
            inputs: BTreeMap::new(),
        }
    }

    pub fn arg(mut self, key: &str, v: impl Serialize) -> Self {
        self.args.insert(key.into(), serde_json::to_value(v).expect("serializable argument"));
        self
    }

    pub fn input(mut self, key: &str, text: &str) -> Self {
        self.inputs.insert(key.into(), text.into());
        self
    }

    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    config_hash: String,
    result: &'a R,
}

pub fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

pub fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Writes the enveloped report to `dir/name` and echoes it on stdout.
pub fn emit<R: Serialize>(dir: &Path, name: &str, config: &Config, seed: u64, result: &R) -> Result<(), Failure> {
    let env = Envelope {
        command: &config.command,
        version: VERSION,
        seed,
        config_hash: config.hash(),
        result,
    };
    let mut text = serde_json::to_string_pretty(&env).expect("report serializes");
    text.push('\n');
    write_file(dir, name, &text)?;
    print!("{text}");
    Ok(())
}

/// JSON-safe float: non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else if x > 0.0 {
        Value::String("inf".into())
    } else if x < 0.0 {
        Value::String("-inf".into())
    } else {
        Value::String("nan".into())
    }
}
