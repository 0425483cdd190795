//! Flat key-value configuration with [model] / [job] / [tolerances]
//! sections. Chosen over a structured format so golden configs diff
//! cleanly; unknown keys are rejected with their line number.

use std::path::PathBuf;

use num_complex::Complex64 as C64;

use gl11::model::{Boundary, ModelParameters};
use gl11::report::parse_complex;
use gl11::suites::Tolerances;

#[derive(Debug, Clone)]
pub struct FileConfig {
    pub params: ModelParameters,
    pub theta: Option<Vec<C64>>,
    pub kind: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub tolerances: Tolerances,
}

impl Default for FileConfig {
    fn default() -> Self {
        Self {
            params: ModelParameters::periodic(3, C64::new(1.0, 0.0)),
            theta: None,
            kind: None,
            seed: None,
            out: None,
            format: None,
            tolerances: Tolerances::default(),
        }
    }
}

fn bad(line_no: usize, msg: impl std::fmt::Display) -> String {
    format!("config line {line_no}: {msg}")
}

fn parse_c(line_no: usize, key: &str, value: &str) -> Result<C64, String> {
    parse_complex(value).ok_or_else(|| bad(line_no, format!("cannot parse {key} = '{value}' as a complex number")))
}

/// Parse the configuration text. An empty file (no keys at all) is an
/// error; the caller maps parse failures to exit status 2.
pub fn parse_config(text: &str) -> Result<FileConfig, String> {
    let mut cfg = FileConfig::default();
    let mut section = String::new();
    let mut any_key = false;
    // boundary parameters arrive in arbitrary order; remember what was set
    let mut boundary_set = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| bad(line_no, "unterminated section header"))?;
            match name {
                "model" | "job" | "tolerances" => section = name.to_string(),
                other => return Err(bad(line_no, format!("unknown section [{other}]"))),
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(line_no, "expected key = value"))?;
        let key = key.trim();
        let value = value.trim();
        any_key = true;
        match (section.as_str(), key) {
            ("model", "n") => {
                let n: usize = value
                    .parse()
                    .map_err(|_| bad(line_no, format!("bad site count '{value}'")))?;
                if n == 0 {
                    return Err(bad(line_no, "site count must be positive"));
                }
                let theta_len = cfg.params.theta.len();
                cfg.params.n = n;
                if theta_len != n {
                    cfg.params.theta = vec![C64::new(0.0, 0.0); n];
                }
            }
            ("model", "eta") => cfg.params.eta = parse_c(line_no, key, value)?,
            ("model", "boundary") => {
                cfg.params.boundary = match value {
                    "periodic" => Boundary::Periodic,
                    "open" => Boundary::Open,
                    other => return Err(bad(line_no, format!("unknown boundary '{other}'"))),
                };
                boundary_set = true;
            }
            ("model", "theta") => {
                let mut theta = Vec::new();
                for part in value.split(',') {
                    theta.push(parse_c(line_no, key, part.trim())?);
                }
                cfg.theta = Some(theta);
            }
            ("model", "a_plus") => cfg.params.a_plus = parse_c(line_no, key, value)?,
            ("model", "a_minus") => cfg.params.a_minus = parse_c(line_no, key, value)?,
            ("model", "b_plus") => cfg.params.b_plus = parse_c(line_no, key, value)?,
            ("model", "b_minus") => cfg.params.b_minus = parse_c(line_no, key, value)?,
            ("model", "f_plus") => cfg.params.f_plus = parse_c(line_no, key, value)?,
            ("model", "f_minus") => cfg.params.f_minus = parse_c(line_no, key, value)?,
            ("job", "kind") => cfg.kind = Some(value.to_string()),
            ("job", "seed") => {
                cfg.seed = Some(
                    value
                        .parse()
                        .map_err(|_| bad(line_no, format!("bad seed '{value}'")))?,
                )
            }
            ("job", "out") => cfg.out = Some(PathBuf::from(value)),
            ("job", "format") => match value {
                "json" | "csv" => cfg.format = Some(value.to_string()),
                other => return Err(bad(line_no, format!("unknown format '{other}'"))),
            },
            ("tolerances", name) => {
                let v: f64 = value
                    .parse()
                    .map_err(|_| bad(line_no, format!("bad tolerance '{value}'")))?;
                if !(v > 0.0) {
                    return Err(bad(line_no, "tolerances must be positive"));
                }
                match name {
                    "identity" => cfg.tolerances.identity = v,
                    "membership" => cfg.tolerances.membership = v,
                    "certification" => cfg.tolerances.certification = v,
                    "table" => cfg.tolerances.table = v,
                    other => return Err(bad(line_no, format!("unknown tolerance '{other}'"))),
                }
            }
            ("", k) => return Err(bad(line_no, format!("key '{k}' outside any section"))),
            (s, k) => return Err(bad(line_no, format!("unknown key '{k}' in section [{s}]"))),
        }
    }
    if !any_key {
        return Err("empty configuration".to_string());
    }
    // defaults for Grassmann coefficients on open chains mirror the library
    if boundary_set && cfg.params.boundary == Boundary::Open {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        for c in [
            &mut cfg.params.b_minus,
            &mut cfg.params.b_plus,
            &mut cfg.params.f_minus,
            &mut cfg.params.f_plus,
        ] {
            if *c == zero {
                *c = one;
            }
        }
    }
    if let Some(theta) = &cfg.theta {
        if theta.len() != cfg.params.n {
            return Err(format!(
                "theta lists {} values for {} sites",
                theta.len(),
                cfg.params.n
            ));
        }
        cfg.params.theta = theta.clone();
    }
    Ok(cfg)
}
