//! Structured verification reports and the deterministic number formatting
//! shared by the JSON and CSV outputs.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::model::ModelParameters;

/// One identity or property check: what was measured against what gate.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// A check that failed before any residual could be computed.
    pub fn failed(name: impl Into<String>, tolerance: f64, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            residual: f64::INFINITY,
            tolerance,
            passed: false,
            note: Some(note.into()),
        }
    }
}

/// Model parameters in report form: every complex number as an `re+imi`
/// string with 12 significant digits.
#[derive(Debug, Clone, Serialize)]
pub struct ParamsRecord {
    pub n: usize,
    pub eta: String,
    pub theta: Vec<String>,
    pub boundary: String,
    pub a_minus: String,
    pub a_plus: String,
    pub b_minus: String,
    pub b_plus: String,
    pub f_minus: String,
    pub f_plus: String,
}

impl From<&ModelParameters> for ParamsRecord {
    fn from(p: &ModelParameters) -> Self {
        Self {
            n: p.n,
            eta: format_complex(p.eta),
            theta: p.theta.iter().map(|t| format_complex(*t)).collect(),
            boundary: p.boundary.to_string(),
            a_minus: format_complex(p.a_minus),
            a_plus: format_complex(p.a_plus),
            b_minus: format_complex(p.b_minus),
            b_plus: format_complex(p.b_plus),
            f_minus: format_complex(p.f_minus),
            f_plus: format_complex(p.f_plus),
        }
    }
}

/// Record of a verification job. Serializes byte-identically for identical
/// (parameters, seed); wall time is reported on stdout, never here.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub job: String,
    pub seed: u64,
    pub parameters: ParamsRecord,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(job: impl Into<String>, seed: u64, p: &ModelParameters, checks: Vec<Check>) -> Self {
        let mut tolerances = BTreeMap::new();
        for c in &checks {
            // one recorded tolerance per check family (prefix before '/')
            let family = c.name.split('/').next().unwrap_or(&c.name).to_string();
            tolerances.entry(family).or_insert(c.tolerance);
        }
        let passed = checks.iter().all(|c| c.passed);
        Self {
            schema: 1,
            job: job.into(),
            seed,
            parameters: ParamsRecord::from(p),
            tolerances,
            checks,
            passed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

/// Format a float with 12 significant digits, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (11 - mag).clamp(0, 17) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Complex number as `re+imi` / `re-imi` with 12 significant digits.
pub fn format_complex(z: C64) -> String {
    let re = format_sig(z.re);
    let im = format_sig(z.im.abs());
    if z.im < 0.0 {
        format!("{re}-{im}i")
    } else {
        format!("{re}+{im}i")
    }
}

/// Parse the `re+imi` form produced by `format_complex`, plus the plain
/// forms "1.5", "2i", "-3.1e-2", and the token "inf".
pub fn parse_complex(s: &str) -> Option<C64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if s == "inf" {
        return Some(C64::new(f64::INFINITY, 0.0));
    }
    if let Some(body) = s.strip_suffix('i') {
        // split between real and imaginary part: the last +/- that is not
        // part of an exponent and not the leading sign
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let ch = bytes[k] as char;
            if (ch == '+' || ch == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re: f64 = body[..k].parse().ok()?;
                let im_str = &body[k..];
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str.parse().ok()?
                };
                Some(C64::new(re, im))
            }
            None => {
                let im: f64 = if body == "-" {
                    -1.0
                } else if body.is_empty() || body == "+" {
                    1.0
                } else {
                    body.parse().ok()?
                };
                Some(C64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = s.parse().ok()?;
        Some(C64::new(re, 0.0))
    }
}
