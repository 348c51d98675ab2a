//! Optional TOML config whose keys mirror the command-line flags.
//!
//! Each key becomes a `--key value` argument unless the command line already
//! has that flag, so flags win. Keys may be spelled `m-len` or `m_len`. The
//! merged arguments go through the normal parser, which rejects keys the
//! chosen subcommand does not know.

use std::ffi::OsString;
use std::path::Path;

use anyhow::Context;

use crate::UsageError;

/// Reads `path` and appends its keys to `args`.
pub fn merge_file(args: Vec<OsString>, path: &Path) -> anyhow::Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    merge(args, &text)
}

fn has_flag(args: &[OsString], flag: &str) -> bool {
    let eq = format!("{flag}=");
    args.iter().filter_map(|a| a.to_str()).any(|a| a == flag || a.starts_with(&eq))
}

fn scalar(key: &str, v: &toml::Value) -> anyhow::Result<String> {
    Ok(match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        _ => return Err(UsageError(format!("config key `{key}`: unsupported value {v}")).into()),
    })
}

/// Appends config `text` to `args`.
pub fn merge(mut args: Vec<OsString>, text: &str) -> anyhow::Result<Vec<OsString>> {
    let table: toml::Table = text.parse().map_err(|e| UsageError(format!("config: {e}")))?;
    let mut extra = Vec::new();
    for (key, value) in &table {
        let flag = format!("--{}", key.replace('_', "-"));
        if flag == "--config" {
            return Err(UsageError("config files cannot name another config".into()).into());
        }
        if has_flag(&args, &flag) {
            continue;
        }
        match value {
            toml::Value::Boolean(true) => extra.push(flag.into()),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                let parts = items.iter().map(|v| scalar(key, v)).collect::<anyhow::Result<Vec<_>>>()?;
                extra.push(flag.into());
                extra.push(parts.join(",").into());
            }
            v => {
                extra.push(flag.into());
                extra.push(scalar(key, v)?.into());
            }
        }
    }
    args.extend(extra);
    Ok(args)
}

/// Value of `--config` in raw arguments, if any.
pub fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_str()?;
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}
