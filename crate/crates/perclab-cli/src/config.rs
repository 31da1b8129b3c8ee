//! Flat run configuration: JSON file with a schema version, overridden
//! field-by-field by command-line flags. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub p: f64,
    pub master_seed: u64,
    pub trials: u64,
    pub margin: i64,
    /// 0 = rayon default
    pub workers: usize,
    pub out_dir: String,
    pub direction: Vec<f64>,
    pub n_list: Vec<i64>,
    /// three anchor points, real coordinates
    pub anchors: Vec<Vec<f64>>,
    pub eta: f64,
    pub cap_k: f64,
    pub m_scale: f64,
    pub r_window: f64,
    pub delta: f64,
    pub alphas: Vec<f64>,
    pub beta: f64,
    /// lift the subcritical ceiling on p
    pub override_guard: bool,
    /// strip width for the exact renewal / mass-gap strips
    pub strip_width: i64,
    pub lengths: Vec<i64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            p: 0.3,
            master_seed: 1,
            trials: 100_000,
            margin: 8,
            workers: 0,
            out_dir: "out".into(),
            direction: vec![1.0, 0.0],
            n_list: vec![4, 6, 8, 10, 12],
            anchors: vec![
                vec![0.25, 0.0],
                vec![-0.125, 0.1875],
                vec![-0.125, -0.1875],
            ],
            eta: 0.6,
            cap_k: 1.0,
            m_scale: 3.0,
            r_window: 2.0,
            delta: 0.5,
            alphas: vec![0.75],
            beta: 0.3,
            override_guard: false,
            strip_width: 2,
            lengths: vec![2, 3, 4, 5],
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(format!("p = {} outside [0, 1]", self.p));
        }
        if !(0.0 < self.eta && self.eta < 1.0) {
            return Err(format!("eta = {} outside (0, 1)", self.eta));
        }
        if self.cap_k <= 0.0 {
            return Err(format!("cap_k = {} must be positive", self.cap_k));
        }
        for &a in &self.alphas {
            if !(0.5 < a && a < 1.0) {
                return Err(format!("alpha = {a} outside (1/2, 1)"));
            }
        }
        if !(0.0 < self.beta && self.beta < 0.5) {
            return Err(format!("beta = {} outside (0, 1/2)", self.beta));
        }
        if self.delta <= 0.0 {
            return Err(format!("delta = {} must be positive", self.delta));
        }
        if self.margin < 0 {
            return Err("margin must be nonnegative".into());
        }
        if self.anchors.len() != 3 {
            return Err("exactly three anchors required".into());
        }
        Ok(())
    }

    pub fn load(path: &str) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {path}: {e}"))?;
        serde_json::from_str(&text).map_err(|e| format!("bad config {path}: {e}"))
    }
}
