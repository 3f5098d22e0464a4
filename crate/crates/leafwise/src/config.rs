//! Flat `key = value` suite configuration. Every key has a default;
//! unknown keys are errors, so typos cannot silently fall back.

use std::fmt;

use crate::milnor::PolyName;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

macro_rules! suite_config {
    ($($field:ident : $ty:ty = $default:expr , $key:literal ;)*) => {
        /// Everything a suite run depends on: geometry constants, sample
        /// budgets, tolerances and the seed. Field order is the canonical
        /// key order in serialized form.
        #[derive(Debug, Clone)]
        pub struct SuiteConfig {
            pub polynomial: PolyName,
            $(pub $field: $ty,)*
        }

        impl Default for SuiteConfig {
            fn default() -> Self {
                SuiteConfig {
                    polynomial: PolyName::E6,
                    $($field: $default,)*
                }
            }
        }

        impl SuiteConfig {
            fn set_key(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
                match key {
                    "polynomial" => {
                        self.polynomial = value
                            .parse()
                            .map_err(|e| ConfigError(format!("key `polynomial`: {e}")))?;
                    }
                    $($key => {
                        self.$field = value.parse::<$ty>().map_err(|_| {
                            ConfigError(format!(
                                "key `{}`: cannot parse `{}` as {}",
                                $key, value, stringify!($ty)
                            ))
                        })?;
                    })*
                    other => {
                        return Err(ConfigError(format!("unknown key `{other}`")));
                    }
                }
                Ok(())
            }

            /// Canonical serialization; parses back to an identical config.
            pub fn canonical_text(&self) -> String {
                let mut out = String::new();
                out.push_str(&format!("polynomial = {}\n", self.polynomial));
                $(out.push_str(&format!("{} = {}\n", $key, self.$field));)*
                out
            }
        }
    };
}

suite_config! {
    seed: u64 = 7, "seed";
    out_dir: String = String::from("out"), "out_dir";
    // geometry and construction constants
    epsilon: f64 = 0.1, "epsilon";
    r0: f64 = 0.01, "r0";
    r1: f64 = 0.02, "r1";
    r2: f64 = 0.035, "r2";
    rstar: f64 = 0.05, "rstar";
    mu: f64 = 0.05, "mu";
    lambda_kt: f64 = 10.0, "lambda_kt";
    t0: f64 = 0.0, "t0";
    t1: f64 = 1.0, "t1";
    t2: f64 = 2.0, "t2";
    t3: f64 = 3.0, "t3";
    c0: f64 = 0.0, "c0";
    rho_bar_star: f64 = std::f64::consts::E * std::f64::consts::E, "rho_bar_star";
    varrho: f64 = std::f64::consts::E, "varrho";
    flow_step: f64 = 1e-3, "flow_step";
    order_step: f64 = 0.1, "order_step";
    reproject_every: usize = 10, "reproject_every";
    // sample budgets
    samples_nil: usize = 1000, "samples_nil";
    samples_kt: usize = 10000, "samples_kt";
    euler_grid: usize = 512, "euler_grid";
    samples_regularity: usize = 10000, "samples_regularity";
    samples_liouville: usize = 1000, "samples_liouville";
    samples_symplectization: usize = 100, "samples_symplectization";
    samples_convergence: usize = 1000, "samples_convergence";
    samples_reembedding: usize = 1000, "samples_reembedding";
    samples_volume: usize = 10000, "samples_volume";
    samples_tameness: usize = 1000, "samples_tameness";
    samples_gluing: usize = 1000, "samples_gluing";
    cutoff_grid: usize = 10000, "cutoff_grid";
    csv_points: usize = 601, "csv_points";
    // tolerances and floors
    tol_structure: f64 = 1e-10, "tol_structure";
    tol_euler: f64 = 1e-6, "tol_euler";
    tol_closedness: f64 = 1e-8, "tol_closedness";
    tol_deck: f64 = 1e-10, "tol_deck";
    tol_liouville: f64 = 1e-12, "tol_liouville";
    tol_symplectization: f64 = 1e-6, "tol_symplectization";
    tol_convergence_slope: f64 = 0.3, "tol_convergence_slope";
    tol_overlap: f64 = 1e-10, "tol_overlap";
    tol_equivariance: f64 = 1e-10, "tol_equivariance";
    tol_volume: f64 = 1e-9, "tol_volume";
    tol_tameness: f64 = 1e-10, "tol_tameness";
    tol_gluing: f64 = 1e-9, "tol_gluing";
    regularity_floor: f64 = 1e-4, "regularity_floor";
    margin_min: f64 = 0.05, "margin_min";
    pfaffian_floor_factor: f64 = 0.9, "pfaffian_floor_factor";
    reembed_threshold: f64 = 0.05, "reembed_threshold";
    parallel: bool = false, "parallel";
}

impl SuiteConfig {
    pub fn parse(text: &str) -> Result<SuiteConfig, ConfigError> {
        let mut cfg = SuiteConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            cfg.set_key(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.mu <= 0.0 {
            return Err(ConfigError("mu must be positive".into()));
        }
        if self.lambda_kt == 0.0 {
            return Err(ConfigError("lambda_kt must be nonzero".into()));
        }
        if !(self.t0 < self.t1 && self.t1 < self.t2 && self.t2 < self.t3) {
            return Err(ConfigError(format!(
                "breakpoints must be ordered: t0 < t1 < t2 < t3, got ({}, {}, {}, {})",
                self.t0, self.t1, self.t2, self.t3
            )));
        }
        if !(0.0 < self.r0 && self.r0 < self.r1 && self.r1 < self.r2 && self.r2 < self.rstar) {
            return Err(ConfigError(format!(
                "radii must be ordered: 0 < r0 < r1 < r2 < rstar, got ({}, {}, {}, {})",
                self.r0, self.r1, self.r2, self.rstar
            )));
        }
        if self.epsilon <= 0.0 || self.epsilon >= 1.0 {
            return Err(ConfigError("epsilon must lie in (0, 1)".into()));
        }
        if self.rho_bar_star <= 1.0 {
            return Err(ConfigError("rho_bar_star must exceed 1".into()));
        }
        let tolerances = [
            ("tol_structure", self.tol_structure),
            ("tol_euler", self.tol_euler),
            ("tol_closedness", self.tol_closedness),
            ("tol_deck", self.tol_deck),
            ("tol_liouville", self.tol_liouville),
            ("tol_symplectization", self.tol_symplectization),
            ("tol_convergence_slope", self.tol_convergence_slope),
            ("tol_overlap", self.tol_overlap),
            ("tol_equivariance", self.tol_equivariance),
            ("tol_volume", self.tol_volume),
            ("tol_tameness", self.tol_tameness),
            ("tol_gluing", self.tol_gluing),
            ("regularity_floor", self.regularity_floor),
            ("margin_min", self.margin_min),
        ];
        for (name, v) in tolerances {
            if v <= 0.0 {
                return Err(ConfigError(format!("{name} must be positive, got {v}")));
            }
        }
        if self.flow_step <= 0.0 || self.order_step <= 0.0 {
            return Err(ConfigError("integration steps must be positive".into()));
        }
        Ok(())
    }
}
