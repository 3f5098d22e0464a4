//! Deterministic suite runner: seeded sampling helpers, check registry,
//! report bundle assembly and the volume-coefficient CSV profile.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::SuiteConfig;
use crate::report::VerificationReport;
use crate::Result;

/// Derive an independent, reproducible stream for a named check from the
/// suite seed. The label hash picks the ChaCha stream, so checks never
/// share a sample sequence and reordering checks cannot change results.
pub fn sample_rng(seed: u64, label: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(h);
    rng
}

/// Uniform point of [0, scale)^dim.
pub fn uniform_point(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random::<f64>() * scale).collect()
}

/// Uniform draw from [lo, hi).
pub fn uniform_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + rng.random::<f64>() * (hi - lo)
}

/// Everything one `verify` invocation produces.
#[derive(Debug)]
pub struct SuiteOutcome {
    pub reports: Vec<VerificationReport>,
    pub all_passed: bool,
    /// Stable-keyed report text; byte-identical for identical configs.
    pub report_text: String,
    /// Volume-coefficient profile (CSV).
    pub profile_csv: String,
}

/// Check names accepted by `--only`, in execution order.
pub const CHECK_NAMES: &[&str] = &[
    "nil",
    "regularity",
    "liouville",
    "convergence",
    "reembedding",
    "cutoffs",
    "volume",
    "tameness",
    "gluing",
];

pub fn run_suite(cfg: &SuiteConfig, only: Option<&str>) -> Result<SuiteOutcome> {
    let checks = crate::suite_checks::collect_checks(cfg, only)?;
    let mut reports = Vec::new();
    for c in checks {
        reports.extend(c);
    }
    let all_passed = reports.iter().all(|r| r.passed);
    let profile_csv = crate::suite_checks::volume_profile_csv(cfg)?;
    let report_text = render_report(cfg, &reports, all_passed);
    Ok(SuiteOutcome {
        reports,
        all_passed,
        report_text,
        profile_csv,
    })
}

pub fn profile_volume(cfg: &SuiteConfig) -> Result<String> {
    crate::suite_checks::volume_profile_csv(cfg)
}

fn render_report(cfg: &SuiteConfig, reports: &[VerificationReport], all_passed: bool) -> String {
    let mut out = String::new();
    out.push_str("leafwise verification report\n\n[config]\n");
    for line in cfg.canonical_text().lines() {
        // execution strategy is not a semantic input; keeping it out of
        // the bundle preserves byte-identity between serial and parallel
        if line.starts_with("parallel =") {
            continue;
        }
        out.push_str(&format!("config.{line}\n"));
    }
    out.push('\n');
    for r in reports {
        r.write_block(&mut out);
    }
    out.push_str(&format!("summary.checks = {}\n", reports.len()));
    out.push_str(&format!(
        "summary.passed = {}\n",
        reports.iter().filter(|r| r.passed).count()
    ));
    out.push_str(&format!("summary.all_passed = {all_passed}\n"));
    out
}
