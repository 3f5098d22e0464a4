//! Per-check verification records with a stable, diffable text encoding.

/// Canonical float encoding: 17 significant digits, scientific.
/// Shared by the report writer and the CSV profile so identical runs
/// produce byte-identical bundles.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// One verification record: what was checked, against which threshold, and
/// with what residual. `passed` is `max_residual < threshold` AND every
/// extra requirement registered through [`VerificationReport::require`].
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub check: String,
    /// The identity or property under test, spelled out (this is the
    /// citation-grade description that survives into the report file).
    pub statement: String,
    pub samples: usize,
    pub max_residual: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Extra key/value detail, preserved in insertion order.
    pub notes: Vec<(String, String)>,
    /// Wall time in seconds; surfaced on the console only, never written
    /// into the report bundle (bundles must be byte-identical across runs).
    pub wall_seconds: f64,
}

impl VerificationReport {
    pub fn new(
        check: &str,
        statement: &str,
        samples: usize,
        max_residual: f64,
        threshold: f64,
    ) -> VerificationReport {
        VerificationReport {
            check: check.to_string(),
            statement: statement.to_string(),
            samples,
            max_residual,
            threshold,
            passed: max_residual < threshold,
            notes: Vec::new(),
            wall_seconds: 0.0,
        }
    }

    /// Margin to the threshold: 1 − residual/threshold (1 = residual 0).
    pub fn margin(&self) -> f64 {
        1.0 - self.max_residual / self.threshold
    }

    /// Register an additional pass condition (positivity flags and the like).
    pub fn require(&mut self, ok: bool, label: &str) {
        self.notes
            .push((format!("requirement.{label}"), ok.to_string()));
        if !ok {
            self.passed = false;
        }
    }

    pub fn note_f64(&mut self, key: &str, value: f64) {
        self.notes.push((key.to_string(), fmt_f64(value)));
    }

    pub fn note_str(&mut self, key: &str, value: &str) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn note_usize(&mut self, key: &str, value: usize) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    /// Parse back a float note (test convenience).
    pub fn note_value(&self, key: &str) -> Option<f64> {
        self.notes
            .iter()
            .find(|(k, _)| k == key)
            .and_then(|(_, v)| v.parse().ok())
    }

    /// Stable text block, one `key = value` per line.
    pub fn write_block(&self, out: &mut String) {
        out.push_str(&format!("[check {}]\n", self.check));
        out.push_str(&format!("statement = {}\n", self.statement));
        out.push_str(&format!("samples = {}\n", self.samples));
        out.push_str(&format!("max_residual = {}\n", fmt_f64(self.max_residual)));
        out.push_str(&format!("threshold = {}\n", fmt_f64(self.threshold)));
        out.push_str(&format!("margin = {}\n", fmt_f64(self.margin())));
        out.push_str(&format!("passed = {}\n", self.passed));
        for (k, v) in &self.notes {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out.push('\n');
    }

    /// One console line; this is where wall time is allowed to appear.
    pub fn console_line(&self) -> String {
        format!(
            "[{}] {:<22} residual {:.3e} vs {:.1e}  ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.check,
            self.max_residual,
            self.threshold,
            self.wall_seconds
        )
    }
}
