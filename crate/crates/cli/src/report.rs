use folchar_core::ClassRep;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub task: String,
    pub label: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub details: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub manifest: String,
    pub quadrature_nodes: usize,
    pub seed: u64,
    /// Global sign σ of the twist formula.
    pub sigma: i64,
    pub dtheta_pow_sign_rule: &'static str,
    pub tasks: Vec<TaskReport>,
    pub passed: usize,
    pub failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One line per task.
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        for t in &self.tasks {
            let status = match t.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
            };
            out.push_str(&format!("[{status}] {} {}", t.task, t.label));
            if let Some(m) = &t.message {
                out.push_str(&format!(": {m}"));
            }
            out.push('\n');
        }
        out.push_str(&format!("{} passed, {} failed\n", self.passed, self.failed));
        out
    }
}

pub fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn class_rep(rep: &ClassRep) -> Value {
    json!({
        "kind": rep.kind.name(),
        "q": rep.q,
        "category": rep.category.name(),
        "degree": rep.degree(),
        "c_power": rep.c_power,
        "m": rep.twist_index,
        "rep": rep.rep.render(),
    })
}
