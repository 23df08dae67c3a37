use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use endomorph_core::Error;

/// What a command produced: machine-readable results, the human text,
/// and whether a check came out negative.
pub struct Output {
    pub results: Value,
    pub text: String,
    pub negative: bool,
    pub degeneracy: Vec<String>,
    /// Seconds per named phase, kept out of `results`.
    pub phases: Vec<(String, f64)>,
}

impl Output {
    pub fn new(results: impl Serialize, text: impl Into<String>) -> Self {
        Output {
            results: serde_json::to_value(results).expect("results serialize"),
            text: text.into(),
            negative: false,
            degeneracy: Vec::new(),
            phases: Vec::new(),
        }
    }

    pub fn negative(mut self, negative: bool) -> Self {
        self.negative = negative;
        self
    }

    pub fn flag(mut self, note: impl Into<String>) -> Self {
        self.degeneracy.push(note.into());
        self
    }
}

#[derive(Default)]
pub struct Inputs {
    hasher: Sha256,
    count: usize,
}

impl Inputs {
    pub fn add(&mut self, label: &str, text: &str) {
        self.hasher.update(label.as_bytes());
        self.hasher.update([0]);
        self.hasher.update((text.len() as u64).to_le_bytes());
        self.hasher.update(text.as_bytes());
        self.count += 1;
    }

    pub fn digest(&self) -> String {
        self.hasher.clone().finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_guard() {
        3
    } else if e.is_input() || matches!(e, Error::Interpretation(_)) {
        2
    } else if matches!(e, Error::Refused(_)) {
        1
    } else {
        4
    }
}

pub fn render(command: &[String], inputs: &Inputs, out: &Output, seconds: f64) -> String {
    let phases: serde_json::Map<String, Value> = out.phases.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let v = json!({
        "command": command,
        "inputs_digest": inputs.digest(),
        "results": out.results,
        "negative": out.negative,
        "degeneracy": out.degeneracy,
        "timing": { "seconds": seconds, "phases": phases },
    });
    serde_json::to_string_pretty(&v).expect("report serializes")
}

pub fn render_error(command: &[String], inputs: &Inputs, e: &Error) -> String {
    let v = json!({
        "command": command,
        "inputs_digest": inputs.digest(),
        "error": { "kind": kind(e), "message": e.to_string(), "exit": exit_code(e) },
    });
    serde_json::to_string_pretty(&v).expect("report serializes")
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::Invalid(_) => "invalid",
        Error::Signature(_) => "signature",
        Error::Arity { .. } => "arity",
        Error::Unbound(_) => "unbound",
        Error::Guard { .. } => "guard",
        Error::Interpretation(_) => "interpretation",
        Error::Refused(_) => "refused",
        Error::Internal(_) => "internal",
    }
}
