//! `--config FILE`: `key = value` lines using the long flag names. Keys not
//! already given on the command line are appended as flags, so explicit
//! flags win. A value of `true` stands for a bare switch.

use std::fs;

use crate::error::CliError;

fn config_path(args: &[String]) -> Result<Option<String>, CliError> {
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            return args
                .get(i + 1)
                .cloned()
                .map(Some)
                .ok_or_else(|| CliError::usage("--config needs a file"));
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Ok(Some(p.to_string()));
        }
    }
    Ok(None)
}

fn given(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    let with_eq = format!("--{key}=");
    args.iter().any(|a| *a == flag || a.starts_with(&with_eq))
}

/// Parses config text into `(key, value)` pairs in file order.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::new(
                "parse-error",
                format!("config line {}: expected key = value", n + 1),
            )
        })?;
        let k = k.trim().trim_start_matches("--");
        if k.is_empty() || k == "config" {
            return Err(CliError::new(
                "parse-error",
                format!("config line {}: bad key `{k}`", n + 1),
            ));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// `args` with the config file's settings appended.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::new("io", format!("config file {path}: {e}")))?;
    let mut out = args.clone();
    for (k, v) in parse_config(&text)? {
        if given(&args, &k) {
            continue;
        }
        match v.as_str() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => out.push(format!("--{k}={v}")),
        }
    }
    Ok(out)
}
