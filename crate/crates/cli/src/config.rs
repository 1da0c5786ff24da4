//! Plain-text key-value configuration files.
//!
//! Grammar (one entry per line; `;` separates multiple entries on a line):
//!
//! ```text
//! # comment to end of line
//! gamma = 0.9
//! dist = "weibull"; scale = 1.0; shape = 5.0
//! n_list = [50, 100, 500, 1000]
//! g = [2.0, 0.2; 0.2, 2.0]        # matrix literal, rows separated by ';'
//! [community]                     # opens a community block (multiclass)
//! size = 0.7
//! dist = "exponential"; rate = 1.0
//! ```
//!
//! Values are numbers, bare words, `"quoted strings"`, or bracketed
//! vector/matrix literals. Keys use snake_case and match the long flag names
//! of the owning subcommand; command-line flags always win over file entries.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    top: HashMap<String, String>,
    communities: Vec<HashMap<String, String>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        let mut section: Option<usize> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim().to_string();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') && !line.contains('=') {
                let name = line[1..line.len() - 1].trim();
                if name != "community" {
                    bail!("line {}: unknown section [{name}]", lineno + 1);
                }
                cfg.communities.push(HashMap::new());
                section = Some(cfg.communities.len() - 1);
                continue;
            }
            for entry in split_entries(&line) {
                let entry = entry.trim();
                if entry.is_empty() {
                    continue;
                }
                let (key, value) = entry
                    .split_once('=')
                    .ok_or_else(|| anyhow!("line {}: expected key = value, got {entry:?}", lineno + 1))?;
                let key = key.trim().to_string();
                let value = unquote(value.trim()).to_string();
                if key.is_empty() {
                    bail!("line {}: empty key", lineno + 1);
                }
                match section {
                    Some(i) => cfg.communities[i].insert(key, value),
                    None => cfg.top.insert(key, value),
                };
            }
        }
        Ok(cfg)
    }

    pub fn communities(&self) -> &[HashMap<String, String>] {
        &self.communities
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.top.get(key).cloned()
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        parse_f64(&self.top, key)
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        match self.top.get(key) {
            None => Ok(None),
            Some(v) => Ok(Some(v.parse::<u64>().map_err(|_| {
                anyhow!("config key {key}: expected a nonnegative integer, got {v:?}")
            })?)),
        }
    }

    /// Vector literal `[a, b, c]` or a bare comma-separated list.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.top.get(key) {
            None => Ok(None),
            Some(v) => parse_f64_list(v)
                .map(Some)
                .with_context(|| format!("config key {key}")),
        }
    }

    pub fn u64_list(&self, key: &str) -> Result<Option<Vec<u64>>> {
        match self.top.get(key) {
            None => Ok(None),
            Some(v) => strip_brackets(v)
                .split(',')
                .map(|tok| {
                    let tok = tok.trim();
                    tok.parse::<u64>()
                        .map_err(|_| anyhow!("config key {key}: bad integer {tok:?}"))
                })
                .collect::<Result<Vec<u64>>>()
                .map(Some),
        }
    }

    /// Matrix literal `[a, b; c, d]` (rows separated by `;`).
    pub fn matrix(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>> {
        let Some(v) = self.top.get(key) else {
            return Ok(None);
        };
        let inner = strip_brackets(v);
        let mut rows = Vec::new();
        for row in inner.split(';') {
            rows.push(
                parse_f64_list(row).with_context(|| format!("config key {key}, row {row:?}"))?,
            );
        }
        Ok(Some(rows))
    }
}

pub fn parse_f64(map: &HashMap<String, String>, key: &str) -> Result<Option<f64>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => Ok(Some(v.parse::<f64>().map_err(|_| {
            anyhow!("config key {key}: expected a number, got {v:?}")
        })?)),
    }
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    strip_brackets(text)
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<f64>()
                .map_err(|_| anyhow!("bad number {tok:?}"))
        })
        .collect()
}

fn strip_brackets(s: &str) -> &str {
    let s = s.trim();
    s.strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .unwrap_or(s)
        .trim()
}

fn unquote(s: &str) -> &str {
    s.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(s)
}

fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Splits on `;` outside quotes and brackets, so matrix literals survive.
fn split_entries(line: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut in_quotes = false;
    let mut cur = String::new();
    for c in line.chars() {
        match c {
            '"' => {
                in_quotes = !in_quotes;
                cur.push(c);
            }
            '[' if !in_quotes => {
                depth += 1;
                cur.push(c);
            }
            ']' if !in_quotes => {
                depth -= 1;
                cur.push(c);
            }
            ';' if !in_quotes && depth == 0 => {
                parts.push(std::mem::take(&mut cur));
            }
            _ => cur.push(c),
        }
    }
    parts.push(cur);
    parts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalars_lists_and_sections() {
        let cfg = ConfigFile::parse(
            r#"
# a comment
gamma = 0.9
dist = "weibull"; scale = 1.0; shape = 5.0
n_list = [50, 100, 500]
g = [2.0, 0.2; 0.2, 2.0]

[community]
size = 0.7
dist = "exponential"; rate = 1.0

[community]
size = 0.3  # trailing comment
rate = 1.0
"#,
        )
        .unwrap();
        assert_eq!(cfg.f64("gamma").unwrap(), Some(0.9));
        assert_eq!(cfg.string("dist").as_deref(), Some("weibull"));
        assert_eq!(cfg.f64("shape").unwrap(), Some(5.0));
        assert_eq!(cfg.u64_list("n_list").unwrap().unwrap(), vec![50, 100, 500]);
        assert_eq!(
            cfg.matrix("g").unwrap().unwrap(),
            vec![vec![2.0, 0.2], vec![0.2, 2.0]]
        );
        assert_eq!(cfg.communities().len(), 2);
        assert_eq!(cfg.communities()[0].get("size").unwrap(), "0.7");
        assert_eq!(cfg.communities()[1].get("rate").unwrap(), "1.0");
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(ConfigFile::parse("[unknown]\n").is_err());
        assert!(ConfigFile::parse("just a token\n").is_err());
        assert!(ConfigFile::parse("gamma = abc\n").unwrap().f64("gamma").is_err());
    }
}
