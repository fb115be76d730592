//! Flat `key = value` configuration files.
//!
//! One assignment per line, `#` starts a comment, nested parameters use
//! dotted keys (`motor.tau_s`). Unknown and duplicate keys are rejected with
//! the offending line number; omitted keys keep the default preset. An empty
//! file therefore yields the stock configuration (2 ms sample period,
//! 48-count encoder, kp = 0.375, ki = 1).

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use diffdrive_core::simulation::SimConfig;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Invalid(#[from] diffdrive_core::Error),
}

/// Every key the format accepts, with its default shown by `--help` docs
/// and the README.
pub const KNOWN_KEYS: &[&str] = &[
    "ts_s",
    "cpr",
    "kp",
    "ki",
    "estimator",
    "rng_seed",
    "arena_m",
    "meas_noise_std",
    "speed_window_s",
    "lpf_cutoff_hz",
    "geometry.wheel_radius_m",
    "geometry.axle_length_m",
    "motor.deadband_pwm",
    "motor.breakaway_pwm",
    "motor.breakaway_radps",
    "motor.linear_gain",
    "motor.linear_knee_radps",
    "motor.upper_gain",
    "motor.max_pwm",
    "motor.tau_s",
    "motor.left_tau_scale",
    "kalman.a",
    "kalman.c",
    "kalman.q",
    "kalman.w",
    "kalman.b",
    "kalman.p0",
];

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<SimConfig, ConfigError> {
    let label = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: label.clone(),
        source,
    })?;
    parse_config(&text, &label)
}

/// Parses configuration text; `path` only labels error messages.
pub fn parse_config(text: &str, path: &str) -> Result<SimConfig, ConfigError> {
    let mut config = SimConfig::default();
    let mut seen: HashSet<String> = HashSet::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = match content.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => {
                return Err(parse_error(path, line, "expected `key = value`".into()));
            }
        };
        if key.is_empty() {
            return Err(parse_error(path, line, "missing key before `=`".into()));
        }
        if value.is_empty() {
            return Err(parse_error(path, line, format!("missing value for {key}")));
        }
        if !seen.insert(key.to_string()) {
            return Err(parse_error(path, line, format!("duplicate key {key}")));
        }
        apply_key(&mut config, key, value).map_err(|message| parse_error(path, line, message))?;
    }

    config.validate()?;
    Ok(config)
}

fn parse_error(path: &str, line: usize, message: String) -> ConfigError {
    ConfigError::Parse {
        path: path.to_string(),
        line,
        message,
    }
}

fn apply_key(config: &mut SimConfig, key: &str, value: &str) -> Result<(), String> {
    let float = || -> Result<f64, String> {
        value
            .parse::<f64>()
            .map_err(|_| format!("{key}: expected a number, got {value:?}"))
    };
    match key {
        "ts_s" => config.ts_s = float()?,
        "cpr" => {
            config.cpr = value
                .parse::<u32>()
                .map_err(|_| format!("cpr: expected a positive integer, got {value:?}"))?;
        }
        "kp" => config.gains.kp = float()?,
        "ki" => config.gains.ki = float()?,
        "estimator" => {
            config.estimator = value
                .parse()
                .map_err(|_| format!("estimator: expected raw, lpf, or kf, got {value:?}"))?;
        }
        "rng_seed" => {
            config.rng_seed = value
                .parse::<u64>()
                .map_err(|_| format!("rng_seed: expected an unsigned integer, got {value:?}"))?;
        }
        "arena_m" => config.arena_m = float()?,
        "meas_noise_std" => config.meas_noise_std = float()?,
        "speed_window_s" => config.speed_window_s = float()?,
        "lpf_cutoff_hz" => config.lpf_cutoff_hz = float()?,
        "geometry.wheel_radius_m" => config.geometry.wheel_radius_m = float()?,
        "geometry.axle_length_m" => config.geometry.axle_length_m = float()?,
        "motor.deadband_pwm" => config.motor.deadband_pwm = float()?,
        "motor.breakaway_pwm" => config.motor.breakaway_pwm = float()?,
        "motor.breakaway_radps" => config.motor.breakaway_radps = float()?,
        "motor.linear_gain" => config.motor.linear_gain = float()?,
        "motor.linear_knee_radps" => config.motor.linear_knee_radps = float()?,
        "motor.upper_gain" => config.motor.upper_gain = float()?,
        "motor.max_pwm" => config.motor.max_pwm = float()?,
        "motor.tau_s" => config.motor.tau_s = float()?,
        "motor.left_tau_scale" => config.left_tau_scale = float()?,
        "kalman.a" => config.kalman.a = float()?,
        "kalman.c" => config.kalman.c = float()?,
        "kalman.q" => config.kalman.q = float()?,
        "kalman.w" => config.kalman.w = float()?,
        "kalman.b" => config.kalman.b = float()?,
        "kalman.p0" => config.kalman_p0 = Some(float()?),
        unknown => {
            return Err(format!(
                "unknown key {unknown:?} (known keys: {})",
                KNOWN_KEYS.join(", ")
            ))
        }
    }
    Ok(())
}
