use std::time::Instant;

use serde_json::{json, Map, Value};

/// Provenance block embedded in every JSON document the CLI prints.
pub struct RunManifest {
    command: &'static str,
    params: Map<String, Value>,
    seed: Option<u64>,
    started: Instant,
    record_time: bool,
}

impl RunManifest {
    pub fn new(command: &'static str, record_time: bool) -> Self {
        RunManifest {
            command,
            params: Map::new(),
            seed: None,
            started: Instant::now(),
            record_time,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    fn to_json(&self) -> Value {
        let wall = self
            .record_time
            .then(|| self.started.elapsed().as_secs_f64());
        json!({
            "command": self.command,
            "params": self.params,
            "seed": self.seed,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_seconds": wall,
        })
    }

    /// `{"manifest": ..., "result": ...}`, pretty printed.
    pub fn wrap(&self, result: Value) -> String {
        let doc = json!({ "manifest": self.to_json(), "result": result });
        serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
    }
}
