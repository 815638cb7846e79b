//! Flat `key = value` configuration files.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Keys are
//! applied in order on top of the built-in defaults, so a `preset` line
//! should come first. Recognized keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `preset` | `paper_defaults` or `paper_defaults_lb3781`; resets device constants |
//! | `l_a`, `l_b` | Alice / Bob internal loss, dB |
//! | `eta_det` | detector efficiency |
//! | `db` | dark-count probability per detector per window |
//! | `p_dark` | total dark-count probability (sets `db = p_dark / 2`) |
//! | `e_detector` | signal misrouting probability |
//! | `f_casc` | error-correction inefficiency |
//! | `rep_rate` | pulse rate, Hz |
//! | `window_ns` | detection window, ns |
//! | `pprime_variant` | `as_printed` or `four_term_poisson` |
//! | `mu`, `l_c` | fixed operating point |
//! | `mu_min`, `mu_max`, `mu_step` | μ scan grid |
//! | `loss_min`, `loss_max`, `loss_step` | channel-loss scan grid, dB |
//! | `crossing_max` | upper bracket for the secure-loss search, dB |
//! | `trials`, `seed` | Monte Carlo overlay |
//! | `double_click_policy` | `discard` or `random_bit` |
//! | `output` | CSV output path |

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::link::Preset;
use crate::rate::PPrimeVariant;
use crate::sim::DoubleClickPolicy;

pub const PAPER_DEFAULTS_CONF: &str = include_str!("../../presets/paper_defaults.conf");
pub const PAPER_DEFAULTS_LB3781_CONF: &str = include_str!("../../presets/paper_defaults_lb3781.conf");

/// Whether the dark-count figure was given per detector (`db`) or as the
/// two-detector total (`p_dark`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DarkCountConvention {
    PerDetector,
    Total,
}

fn num<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        line,
        msg: format!("`{key}` expects a number, got `{value}`"),
    })
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let wrap = |e: Error| Error::Config {
            line,
            msg: e.to_string(),
        };
        let p = &mut cfg.params;
        match key {
            "preset" => {
                *p = value.parse::<Preset>().map_err(wrap)?.params();
                cfg.dark_convention = DarkCountConvention::PerDetector;
            }
            "l_a" => p.l_a = num(line, key, value)?,
            "l_b" => p.l_b = num(line, key, value)?,
            "eta_det" => p.eta_det = num(line, key, value)?,
            "db" => {
                p.db = num(line, key, value)?;
                cfg.dark_convention = DarkCountConvention::PerDetector;
            }
            "p_dark" => {
                p.db = num::<f64>(line, key, value)? / 2.0;
                cfg.dark_convention = DarkCountConvention::Total;
            }
            "e_detector" => p.e_detector = num(line, key, value)?,
            "f_casc" => p.f_casc = num(line, key, value)?,
            "rep_rate" => p.rep_rate = num(line, key, value)?,
            "window_ns" => p.window_ns = num(line, key, value)?,
            "pprime_variant" => p.pprime_variant = value.parse::<PPrimeVariant>().map_err(wrap)?,
            "mu" => cfg.mu = num(line, key, value)?,
            "l_c" => cfg.l_c = num(line, key, value)?,
            "mu_min" => cfg.mu_range.min = num(line, key, value)?,
            "mu_max" => cfg.mu_range.max = num(line, key, value)?,
            "mu_step" => cfg.mu_range.step = num(line, key, value)?,
            "loss_min" => cfg.loss_range.min = num(line, key, value)?,
            "loss_max" => cfg.loss_range.max = num(line, key, value)?,
            "loss_step" => cfg.loss_range.step = num(line, key, value)?,
            "crossing_max" => cfg.crossing_max_db = num(line, key, value)?,
            "trials" => cfg.trials = num(line, key, value)?,
            "seed" => cfg.seed = num(line, key, value)?,
            "double_click_policy" => {
                cfg.double_click_policy = match value {
                    "discard" => DoubleClickPolicy::Discard,
                    "random_bit" => DoubleClickPolicy::RandomBit,
                    _ => {
                        return Err(Error::Config {
                            line,
                            msg: format!("unknown double_click_policy `{value}`"),
                        })
                    }
                }
            }
            "output" => cfg.output = Some(PathBuf::from(value)),
            _ => {
                return Err(Error::Config {
                    line,
                    msg: format!("unknown key `{key}`"),
                })
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::SystemParams;

    #[test]
    fn shipped_presets_match_builtin_defaults() {
        let cfg = parse_config(PAPER_DEFAULTS_CONF).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let alt = parse_config(PAPER_DEFAULTS_LB3781_CONF).unwrap();
        assert_eq!(alt.params, SystemParams::paper_defaults_quoted_lb());
    }

    #[test]
    fn comments_blank_lines_and_overrides() {
        let cfg = parse_config(
            "# header\n\npreset = paper_defaults_lb3781\nmu = 0.3  # trailing\nseed=42\n",
        )
        .unwrap();
        assert_eq!(cfg.params.l_b, 3.781);
        assert_eq!(cfg.mu, 0.3);
        assert_eq!(cfg.seed, 42);
    }

    #[test]
    fn total_dark_count_is_halved() {
        let cfg = parse_config("p_dark = 8.552e-6\n").unwrap();
        assert!((cfg.params.db - 4.276e-6).abs() < 1e-18);
        assert_eq!(cfg.dark_convention, DarkCountConvention::Total);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_config("mu = 0.1\nbogus = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
        let err = parse_config("mu = abc\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
        let err = parse_config("just words\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
        let err = parse_config("preset = nope\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
        assert!(parse_config("mu_min = 2\nmu_max = 1\n").is_err());
    }
}
