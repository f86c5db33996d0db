//! Flat `key = value` experiment files. Keys are flag names without the
//! leading dashes; `command` names the subcommand. Flags given on the
//! command line override the file.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub const COMMANDS: [&str; 7] = ["plan", "kernel", "simulate-fourier", "simulate-contour", "app", "cost", "sweep"];

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`, got `{raw}`", lineno + 1);
        };
        let key = key.trim().trim_start_matches('-');
        if key.is_empty() {
            bail!("line {}: empty key", lineno + 1);
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Rebuilds argv as `bin command <file flags> <cli flags>`.
pub fn merge_args(args: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config_path = None;
    let mut iter = args.into_iter();
    let bin = iter.next().unwrap_or_else(|| "psfmat".into());
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            match iter.next() {
                Some(p) => config_path = Some(p),
                None => bail!("--config needs a path"),
            }
        } else if let Some(p) = arg.strip_prefix("--config=") {
            config_path = Some(p.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config_path else {
        let mut out = vec![bin];
        out.extend(rest);
        return Ok(out);
    };
    let text = fs::read_to_string(Path::new(&path)).with_context(|| format!("reading config {path}"))?;
    let entries = parse_config(&text)?;

    let cli_command = rest.first().filter(|a| COMMANDS.contains(&a.as_str())).cloned();
    let file_command = entries.iter().find(|(k, _)| k == "command").map(|(_, v)| v.clone());
    let command = match (cli_command.clone(), file_command) {
        (Some(c), _) => c,
        (None, Some(c)) => c,
        (None, None) => bail!("no command given on the command line or in {path}"),
    };
    if cli_command.is_some() {
        rest.remove(0);
    }

    let mut out = vec![bin, command];
    for (key, value) in entries.into_iter().filter(|(k, _)| k != "command") {
        match value.as_str() {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => {
                out.push(format!("--{key}"));
                out.push(value);
            }
        }
    }
    out.extend(rest);
    Ok(out)
}
