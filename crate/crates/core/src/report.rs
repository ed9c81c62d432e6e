use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::scalar::{Backend, Residual};

/// Outcome of one identity check.
///
/// For ordinary checks `pass` holds exactly when the residual is below `tol`
/// (or exactly zero). Negative controls invert this: they pass when the
/// deliberately broken identity is detected as broken.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub backend: Backend,
    pub params: Value,
    pub residual: Residual,
    pub tol: f64,
    pub pass: bool,
    pub elapsed_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub details: Map<String, Value>,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, backend: Backend, residual: Residual, tol: f64) -> Self {
        CheckReport {
            check: check.into(),
            backend,
            params: match backend {
                Backend::Exact => Value::String("symbolic".into()),
                Backend::Numeric => Value::Null,
            },
            pass: residual.passes(tol),
            residual,
            tol,
            elapsed_ms: 0,
            seed: None,
            details: Map::new(),
        }
    }

    pub fn detail(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    pub fn since(mut self, start: Instant) -> Self {
        self.elapsed_ms = start.elapsed().as_millis() as u64;
        self
    }

    pub fn with_params(mut self, params: Value, seed: Option<u64>) -> Self {
        self.params = params;
        self.seed = seed;
        self
    }

    /// Reinterprets the report as a negative control.
    pub fn expect_failure(mut self) -> Self {
        self.check = format!("negative-control:{}", self.check);
        self.pass = !self.residual.passes(self.tol);
        self.details
            .insert("expected".into(), Value::String("fail".into()));
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_follows_residual() {
        let r = CheckReport::new("a", Backend::Numeric, Residual::Numeric(1e-12), 1e-9);
        assert!(r.pass);
        let r = CheckReport::new("a", Backend::Numeric, Residual::Numeric(1e-3), 1e-9);
        assert!(!r.pass);
        assert!(r.clone().expect_failure().pass);
        let e = CheckReport::new("b", Backend::Exact, Residual::ExactZero, 1e-9);
        assert!(e.pass);
        assert!(e.to_json_line().contains("\"exact-zero\""));
        assert!(e.to_json_line().contains("\"symbolic\""));
    }
}
