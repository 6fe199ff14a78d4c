//! key=value config files, spliced into the argument list right after the
//! subcommand so explicit flags given later override them.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Command};

/// Finds `--config <path>` or `--config=<path>` in raw arguments.
pub fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Parses `key = value` lines; '#' starts a comment.
pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), i + 1);
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            bail!("{}:{}: empty key", path.display(), i + 1);
        }
        pairs.push((key, v.trim().to_string()));
    }
    Ok(pairs)
}

/// Inserts the config pairs as flags after the subcommand token.
pub fn splice(args: Vec<OsString>, pairs: &[(String, String)], root: &Command) -> Result<Vec<OsString>> {
    let Some(pos) = args
        .iter()
        .position(|a| root.get_subcommands().any(|c| a.to_str() == Some(c.get_name())))
    else {
        return Ok(args);
    };
    let sub = root
        .find_subcommand(args[pos].to_str().unwrap_or_default())
        .expect("matched above");
    let mut injected = Vec::new();
    for (key, value) in pairs {
        if key == "config" || given_explicitly(&args, key) {
            continue;
        }
        let arg = sub
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()));
        let Some(arg) = arg else {
            bail!("unknown config key {key:?} for `{}`", sub.get_name());
        };
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" | "1" | "yes" => injected.push(OsString::from(format!("--{key}"))),
                "false" | "0" | "no" => {}
                other => bail!("config key {key:?} expects a boolean, got {other:?}"),
            },
            _ => injected.push(OsString::from(format!("--{key}={value}"))),
        }
    }
    let mut out = args;
    out.splice(pos + 1..pos + 1, injected);
    Ok(out)
}

fn given_explicitly(args: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    let prefixed = format!("--{key}=");
    args.iter()
        .filter_map(|a| a.to_str())
        .any(|a| a == flag || a.starts_with(&prefixed))
}
