//! Run configuration: a JSON file with flag overrides.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Version of the defaults table below.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub domain: String,
    pub n: usize,
    pub q: usize,
    pub seed: u64,
    /// Finite-difference step relative to `|zeta - z|`.
    pub h: f64,
    /// Exhaustion parameter for quadrature grids.
    pub eps: f64,
    /// Diagonal cutoff of the Levi polynomial; the model default when absent.
    pub delta: Option<f64>,
    /// The t-grid is `2^-k` for `k` in `t_min_exp..=t_max_exp`.
    pub t_min_exp: i32,
    pub t_max_exp: i32,
    pub suites: Vec<String>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            domain: "ball".into(),
            n: 3,
            q: 1,
            seed: 0,
            h: 1e-4,
            eps: 0.1,
            delta: None,
            t_min_exp: 3,
            t_max_exp: 10,
            suites: Vec::new(),
            out: PathBuf::from("hlk-out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n < 2 {
            return Err(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.h > 0.0) {
            return Err(format!("h must be positive, got {}", self.h));
        }
        if !(self.eps >= 0.0) {
            return Err(format!("eps must be nonnegative, got {}", self.eps));
        }
        if self.t_min_exp > self.t_max_exp {
            return Err(format!("empty t-grid {}..={}", self.t_min_exp, self.t_max_exp));
        }
        Ok(())
    }

    pub fn ts(&self) -> Vec<f64> {
        hlkernels::verify::t_grid(self.t_min_exp, self.t_max_exp)
    }
}
