//! Flat `key = value` parameter files layered over the built-in defaults.
//!
//! ```text
//! # rollouts and horizon
//! k = 2048
//! horizon = 50
//! w_rep = 0.7
//! ```

use serde::Deserialize;

use super::PlannerConfig;
use crate::error::{Error, Result};
use crate::params::{DrpaParams, PassageRule};
use crate::sampling::NlnParams;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub k: Option<usize>,
    pub horizon: Option<usize>,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub noise_var_v: Option<f64>,
    pub noise_var_omega: Option<f64>,
    pub dt: Option<f64>,
    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub w_obst: Option<f64>,
    pub w_guidance: Option<f64>,
    pub tau_monitor: Option<usize>,
    pub r_thres: Option<f64>,
    pub d_vt: Option<f64>,
    pub d_margin: Option<f64>,
    pub w_rep: Option<f64>,
    pub goal_tolerance: Option<f64>,
    pub passage_rule: Option<PassageRule>,
    pub mu_ln: Option<f64>,
    pub sigma_ln: Option<f64>,
}

impl ParamsFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Overrides the fields present in the file, then re-validates.
    pub fn apply(&self, cfg: &mut PlannerConfig) -> Result<()> {
        let m = &mut cfg.mppi;
        macro_rules! set {
            ($src:ident => $dst:expr) => {
                if let Some(v) = self.$src {
                    $dst = v;
                }
            };
        }
        set!(k => m.num_rollouts);
        set!(horizon => m.horizon);
        set!(lambda => m.lambda);
        set!(gamma => m.gamma);
        set!(noise_var_v => m.noise_variance[0]);
        set!(noise_var_omega => m.noise_variance[1]);
        set!(dt => m.dt);
        set!(v_min => m.v_bounds.lo);
        set!(v_max => m.v_bounds.hi);
        set!(omega_min => m.omega_bounds.lo);
        set!(omega_max => m.omega_bounds.hi);
        set!(w_obst => m.w_obst);
        set!(w_guidance => m.w_guidance);

        if let Some(d) = cfg.drpa.as_mut() {
            apply_drpa(self, d);
        }
        if let Some(n) = cfg.nln.as_mut() {
            apply_nln(self, n);
        }
        cfg.validate()
    }
}

fn apply_drpa(file: &ParamsFile, d: &mut DrpaParams) {
    if let Some(v) = file.tau_monitor {
        d.tau_monitor = v;
    }
    if let Some(v) = file.r_thres {
        d.r_thres = v;
    }
    if let Some(v) = file.d_vt {
        d.d_vt = v;
    }
    if let Some(v) = file.d_margin {
        d.d_margin = v;
    }
    if let Some(v) = file.w_rep {
        d.w_rep = v;
    }
    if let Some(v) = file.goal_tolerance {
        d.goal_tolerance = v;
    }
    if let Some(v) = file.passage_rule {
        d.passage_rule = v;
    }
}

fn apply_nln(file: &ParamsFile, n: &mut NlnParams) {
    if let Some(v) = file.mu_ln {
        n.mu_ln = [v, v];
    }
    if let Some(v) = file.sigma_ln {
        n.sigma_ln = [v, v];
    }
}
