//! `key = value` config files, merged into argv before parsing.
//!
//! Keys are namespaced by subcommand path (`downsample.n`,
//! `generate.fuzzypm.seed`). Only keys under the active subcommand are
//! applied; a flag given on the command line wins over the file.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Command};

/// Parsed config file; a repeated key keeps its last value.
pub type ConfigMap = BTreeMap<String, String>;

pub fn parse_config(text: &str, source: &Path) -> Result<ConfigMap> {
    let mut out = ConfigMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{}:{}: expected `key = value`", source.display(), i + 1);
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            bail!("{}:{}: empty key", source.display(), i + 1);
        }
        let v = v
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .unwrap_or(v);
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

/// Value of `--config` in raw argv, if any.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

/// Subcommand names in argv and the index just past the last one.
fn subcommand_path(cmd: &Command, args: &[OsString]) -> (Vec<String>, usize) {
    let mut path = Vec::new();
    let mut cur = cmd;
    let mut end = 1;
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if s == "--config" {
            i += 2;
            continue;
        }
        if s.starts_with('-') {
            i += 1;
            continue;
        }
        match cur.find_subcommand(s.as_ref()) {
            Some(sub) => {
                path.push(sub.get_name().to_string());
                cur = sub;
                end = i + 1;
                i += 1;
            }
            None => break,
        }
    }
    (path, end)
}

fn flag_given(user: &[OsString], long: &str) -> bool {
    let eq = format!("--{long}=");
    let bare = format!("--{long}");
    user.iter().any(|a| {
        let s = a.to_string_lossy();
        s == bare || s.starts_with(&eq)
    })
}

/// Insert flags from the config file named by `--config` after the
/// subcommand tokens. Errors on keys in the active namespace that name no
/// flag of that subcommand.
pub fn merge_config(cmd: &Command, args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path).to_path_buf();
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {}", path.display()))?;
    let map = parse_config(&text, &path)?;
    let (names, end) = subcommand_path(cmd, &args);
    if names.is_empty() {
        return Ok(args);
    }
    let mut sub = cmd;
    for n in &names {
        sub = sub.find_subcommand(n).expect("path came from this command");
    }
    let prefix = format!("{}.", names.join("."));
    let user = &args[end..];
    let mut injected: Vec<OsString> = Vec::new();
    for (key, value) in &map {
        let Some(name) = key.strip_prefix(&prefix) else { continue };
        let long = name.replace('_', "-");
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(long.as_str())) else {
            bail!("{}: unknown key `{key}` for `{}`", path.display(), names.join(" "));
        };
        if flag_given(user, &long) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" | "1" | "yes" => injected.push(format!("--{long}").into()),
                "false" | "0" | "no" => {}
                other => bail!("{}: `{key}` expects true or false, got `{other}`", path.display()),
            },
            ArgAction::Append => {
                for v in value.split(',').map(str::trim).filter(|v| !v.is_empty()) {
                    injected.push(format!("--{long}={v}").into());
                }
            }
            _ => injected.push(format!("--{long}={value}").into()),
        }
    }
    log::debug!("config {} adds {:?}", path.display(), injected);
    let mut out = args[..end].to_vec();
    out.extend(injected);
    out.extend_from_slice(user);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_quotes() {
        let m = parse_config("# top\ndownsample.n = 20 # trailing\n\ngenerate.fuzzypm.mask = \"XXXXX\"\n", Path::new("c")).unwrap();
        assert_eq!(m["downsample.n"], "20");
        assert_eq!(m["generate.fuzzypm.mask"], "XXXXX");
        assert!(parse_config("novalue\n", Path::new("c")).is_err());
    }
}
