//! INI-style configuration text.
//!
//! ```text
//! # comment
//! [loop]
//! f_ref = 25e6
//! t_pul = 2e-9
//! [noise]
//! enabled = false
//! ```
//!
//! Keys are the field names listed in [`crate::model::FIELDS`] and must
//! appear under their own section. Values are SI; scientific notation is
//! accepted. Missing keys keep their defaults.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::model::{field_info, FieldKind, SimConfig, Value, Violation, FIELDS};
use crate::{Error, Result};

const SECTIONS: [&str; 5] = ["loop", "vco", "fll", "noise", "run"];

/// A parsed configuration together with the line each key was set on.
#[derive(Debug, Clone)]
pub struct ParsedConfig {
    pub config: SimConfig,
    lines: HashMap<&'static str, usize>,
}

impl ParsedConfig {
    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.lines.get(key).copied()
    }

    /// Formats a violation with the line of the offending key, when known.
    pub fn describe(&self, v: &Violation) -> String {
        match v.key.and_then(|k| self.line_of(k)) {
            Some(line) => format!("line {line}: {v}"),
            None => v.to_string(),
        }
    }

    /// Validates the configuration; violations are reported with line numbers.
    pub fn validated(self) -> Result<SimConfig> {
        let violations = self.config.validate();
        if violations.is_empty() {
            return Ok(self.config);
        }
        let located = violations
            .into_iter()
            .map(|v| Violation {
                message: self.describe(&v),
                key: None,
            })
            .collect();
        Err(Error::InvalidConfig(located))
    }
}

pub fn parse(text: &str) -> Result<ParsedConfig> {
    let mut config = SimConfig::default();
    let mut lines = HashMap::new();
    let mut section: Option<&str> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(format!("malformed section header `{line}`")))?
                .trim();
            section = Some(
                SECTIONS
                    .iter()
                    .copied()
                    .find(|s| *s == name)
                    .ok_or_else(|| err(format!("unknown section [{name}]; expected one of {SECTIONS:?}")))?,
            );
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section.ok_or_else(|| err(format!("`{key}` appears before any section header")))?;
        let field = field_info(key).ok_or_else(|| err(format!("unknown key `{key}`")))?;
        if field.section != sec {
            return Err(err(format!("`{key}` belongs in [{}], not [{sec}]", field.section)));
        }
        if lines.insert(field.key, line_no).is_some() {
            return Err(err(format!("duplicate key `{key}`")));
        }
        let parsed = parse_value(field.kind, value).map_err(|m| err(format!("`{key}`: {m}")))?;
        config.set(key, parsed).map_err(err)?;
    }

    Ok(ParsedConfig { config, lines })
}

pub fn load(path: &Path) -> Result<ParsedConfig> {
    let text = std::fs::read_to_string(path)?;
    parse(&text)
}

/// Renders a configuration that [`parse`] reads back unchanged.
pub fn to_ini(cfg: &SimConfig) -> String {
    let mut out = String::new();
    for section in SECTIONS {
        let _ = writeln!(out, "[{section}]");
        for f in FIELDS.iter().filter(|f| f.section == section) {
            if f.key == "fll_start_code" && cfg.fll_start_code.is_none() {
                let _ = writeln!(out, "# fll_start_code = {}", cfg.max_code());
                continue;
            }
            let v = cfg.get(f.key).expect("every field has a getter");
            let _ = writeln!(out, "{} = {}", f.key, v);
        }
        out.push('\n');
    }
    out
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_value(kind: FieldKind, s: &str) -> std::result::Result<Value, String> {
    match kind {
        FieldKind::Real => s
            .parse::<f64>()
            .map(Value::Real)
            .map_err(|_| format!("expected a real number, got `{s}`")),
        FieldKind::Integer => {
            if let Ok(v) = s.parse::<i64>() {
                return Ok(Value::Int(v));
            }
            match s.parse::<f64>() {
                Ok(v) if v.fract() == 0.0 && v.abs() < 9.0e15 => Ok(Value::Int(v as i64)),
                _ => Err(format!("expected an integer, got `{s}`")),
            }
        }
        FieldKind::Bool => match s.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(Value::Bool(true)),
            "false" | "no" | "off" | "0" => Ok(Value::Bool(false)),
            _ => Err(format!("expected true or false, got `{s}`")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(parse("").unwrap().config, SimConfig::default());
    }

    #[test]
    fn sections_and_scientific_notation() {
        let p = parse(
            "# test\n[loop]\nf_ref = 2.5E7\nt_pul = 3e-9 ; trailing\n\n[fll]\nfll_window_N = 20\n[noise]\nenabled = true\n",
        )
        .unwrap();
        assert_eq!(p.config.f_ref, 25e6);
        assert_eq!(p.config.t_pul, 3e-9);
        assert_eq!(p.config.fll_window_n, 20);
        assert!(p.config.noise.enabled);
        assert_eq!(p.line_of("t_pul"), Some(4));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("[loop]\nf_ref = 25e6\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = parse("[vco]\nf_ref = 25e6\n").unwrap_err();
        assert!(e.to_string().contains("belongs in [loop]"), "{e}");
        let e = parse("[loop]\nmult_M = 2.5\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse("f_ref = 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = parse("[loop]\nt_pul = 1e-9\nt_pul = 2e-9\n").unwrap_err();
        assert!(e.to_string().contains("duplicate"));
    }

    #[test]
    fn validation_messages_cite_the_line() {
        let e = parse("[loop]\n\nt_pul = 50e-9\n").unwrap().validated().unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 3") && msg.contains("t_pul < 1/f_ref"), "{msg}");
    }

    #[test]
    fn render_round_trips() {
        let mut cfg = SimConfig {
            t_pul: 1.2345678901234567e-9,
            seed: 987654321,
            ..Default::default()
        };
        cfg.noise.enabled = true;
        assert_eq!(parse(&to_ini(&cfg)).unwrap().config, cfg);
        cfg.fll_start_code = Some(12);
        assert_eq!(parse(&to_ini(&cfg)).unwrap().config, cfg);
    }
}
