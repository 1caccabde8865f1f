use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::{Error, Result};

/// Every recognised key with its default. Empty defaults mean "unset".
const DEFAULTS: &[(&str, &str)] = &[
    ("command", "propagate"),
    ("bank", "gabor"),
    ("lambda", "1"),
    ("sigma", "0.5"),
    // (x, y, theta) grid
    ("x_half", "1.5"),
    ("y_half", "3"),
    ("xy_step", "0.1"),
    ("theta_half", "1.5"),
    ("theta_step", "0.15"),
    ("origin_x", "0"),
    ("origin_y", "0"),
    ("origin_theta", "0"),
    // propagation
    ("nonlinearity", "rectifier"),
    ("tau", "0"),
    ("steps", "4"),
    ("truncate", "true"),
    ("patch_lambda", ""),
    ("truncate_floor", ""),
    ("lattice", "2"),
    // visualisation
    ("threshold", "p90"),
    ("glyph_size", "15"),
    ("glyph_cell", "8"),
    ("glyph_stride", "2"),
    ("glyph_extent", "0.75"),
    ("seed", "1"),
    // pinwheel
    ("map_half", "7.5"),
    ("map_step", "0.25"),
    ("waves", "30"),
    ("wave_number", ""),
    ("trials", "1000"),
    // endstopped banks
    ("es_lengths", "1.5,1.0,0.7,0.5"),
    ("es_c_short", "2"),
    ("es_c_long", "1"),
    ("es_ratio", "1.5"),
    ("es_orientations", "21"),
    ("es_half", "2.5"),
    ("es_plain_length", "1.5"),
    // space-time
    ("beta", "1"),
    ("alpha_half", "1"),
    ("alpha_step", "0.1"),
    ("origin_alpha", "0"),
    ("c_weight", ""),
    // image lifting
    ("image", ""),
    ("pixel", "0.05"),
    // learned banks
    ("bank_file", ""),
    ("learned_count", "128"),
    ("learned_size", "16"),
    ("pad", "5"),
    ("crop", "11"),
    ("learned_feature", "0"),
];

const PRESETS: &[(&str, &[(&str, &str)])] = &[
    ("fig-diffK", &[("command", "propagate"), ("bank", "gabor"), ("steps", "4"), ("truncate", "true")]),
    ("fig-pw", &[("command", "pinwheel"), ("steps", "6"), ("truncate", "true"), ("seed", "1")]),
    (
        "fig-curvature",
        &[("command", "endstop"), ("steps", "1"), ("truncate", "true"), ("xy_step", "0.1"), ("es_half", "2.5")],
    ),
    (
        "fig-kernel-spt",
        &[
            ("command", "spatiotemporal"),
            ("x_half", "1"),
            ("y_half", "1"),
            ("xy_step", "0.05"),
            ("theta_half", "1.5"),
            ("theta_step", "0.15"),
            ("alpha_half", "1"),
            ("alpha_step", "0.1"),
        ],
    ),
    ("fig-sparse-laf", &[("command", "learned"), ("truncate", "false"), ("seed", "42")]),
    (
        "fig-kernel",
        &[
            ("command", "kernel"),
            ("x_half", "1"),
            ("y_half", "1"),
            ("xy_step", "0.01"),
            ("theta_half", "1.5"),
            ("theta_step", "0.015"),
            ("truncate", "false"),
        ],
    ),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    /// Line of the config file that set it; 0 for defaults, presets and
    /// command-line overrides.
    line: usize,
}

/// Resolved `key=value` run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, Entry>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let entries = DEFAULTS.iter().map(|(k, v)| (k.to_string(), Entry { value: v.to_string(), line: 0 })).collect();
        RunConfig { entries }
    }
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let (_, pairs) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::invalid(format!("unknown preset `{name}`; known: {}", preset_names().collect::<Vec<_>>().join(", "))))?;
        let mut cfg = RunConfig::default();
        for (k, v) in *pairs {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    /// Applies a config file body: one `key=value` per line, `#` comments.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| Error::Config { line, reason: format!("expected key=value, found `{body}`") })?;
            let (k, v) = (k.trim(), v.trim());
            match self.entries.get_mut(k) {
                Some(e) => *e = Entry { value: v.to_string(), line },
                None => return Err(Error::Config { line, reason: format!("unknown key `{k}`") }),
            }
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.entries.get_mut(key) {
            Some(e) => {
                *e = Entry { value: value.trim().to_string(), line: 0 };
                Ok(())
            }
            None => Err(Error::invalid(format!("unknown config key `{key}`"))),
        }
    }

    /// `key=value` override from the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair.split_once('=').ok_or_else(|| Error::invalid(format!("override `{pair}` is not key=value")))?;
        self.set(k.trim(), v)
    }

    fn entry(&self, key: &str) -> &Entry {
        self.entries.get(key).unwrap_or_else(|| panic!("config key `{key}` is not declared"))
    }

    fn bad(&self, key: &str, why: impl std::fmt::Display) -> Error {
        let e = self.entry(key);
        let reason = format!("`{key}={}`: {why}", e.value);
        if e.line > 0 {
            Error::Config { line: e.line, reason }
        } else {
            Error::InvalidParameter(reason)
        }
    }

    pub fn str(&self, key: &str) -> &str {
        &self.entry(key).value
    }

    /// `None` when the value is empty.
    pub fn opt_str(&self, key: &str) -> Option<&str> {
        Some(self.str(key)).filter(|s| !s.is_empty())
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.str(key);
        v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| self.bad(key, "expected a finite number"))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.opt_str(key) {
            None => Ok(None),
            Some(_) => self.f64(key).map(Some),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.str(key).parse().map_err(|_| self.bad(key, "expected a non-negative integer"))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.str(key).parse().map_err(|_| self.bad(key, "expected a non-negative integer"))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.str(key) {
            "true" | "on" | "yes" | "1" => Ok(true),
            "false" | "off" | "no" | "0" => Ok(false),
            _ => Err(self.bad(key, "expected true or false")),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.str(key)
            .split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<_>>>()
            .filter(|v| !v.is_empty())
            .ok_or_else(|| self.bad(key, "expected a comma-separated list of numbers"))
    }

    /// Error for a value that parsed but is not acceptable.
    pub fn reject(&self, key: &str, why: impl std::fmt::Display) -> Error {
        self.bad(key, why)
    }

    /// The full configuration as sorted `key=value` lines.
    pub fn resolved(&self) -> String {
        let mut s = String::new();
        for (k, e) in &self.entries {
            let _ = writeln!(s, "{k}={}", e.value);
        }
        s
    }
}
