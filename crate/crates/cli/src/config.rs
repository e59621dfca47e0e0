//! Flat `key = value` config files.
//!
//! Each entry becomes a long flag inserted right after the subcommand name,
//! ahead of anything typed on the command line. Every argument overrides
//! earlier occurrences of itself, so explicit flags win over the file and the
//! file wins over built-in defaults. Keys clap does not know are rejected by
//! clap itself.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Options taking a value that may appear before the subcommand.
const GLOBAL_VALUE_FLAGS: [&str; 1] = ["--threads"];

pub fn parse_config(text: &str, path: &Path) -> Result<Vec<OsString>, CliError> {
    let mut flags = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |why: &str| CliError::Config(format!("{}:{}: {why}", path.display(), lineno + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad("expected `key = value`"))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key.is_empty() || key.starts_with('-') || key == "config" {
            return Err(bad("invalid key"));
        }
        match value {
            "true" => flags.push(format!("--{key}").into()),
            "false" => {}
            v => {
                flags.push(format!("--{key}").into());
                flags.push(v.into());
            }
        }
    }
    Ok(flags)
}

/// Removes `--config FILE` from `args` and splices the file's flags in after
/// the subcommand.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config: Option<PathBuf> = None;
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        match arg.to_str() {
            Some("--config") => {
                let path = it
                    .next()
                    .ok_or_else(|| CliError::Config("--config needs a file argument".into()))?;
                config = Some(path.into());
            }
            Some(s) if s.starts_with("--config=") => config = Some(s["--config=".len()..].into()),
            _ => rest.push(arg),
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let flags = parse_config(&text, &path)?;
    let Some(at) = subcommand_index(&rest) else {
        return Ok(rest);
    };
    rest.splice(at + 1..at + 1, flags);
    Ok(rest)
}

fn subcommand_index(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_str()?;
        if GLOBAL_VALUE_FLAGS.contains(&s) {
            i += 2;
        } else if s.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_pairs_comments_and_booleans() {
        let text = "# channel\neta = 0.01\nmax_order_log2=14\njson = true\nquiet = false\n\n";
        let flags = parse_config(text, Path::new("c")).unwrap();
        assert_eq!(
            flags,
            os(&["--eta", "0.01", "--max-order-log2", "14", "--json"])
        );
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_config("eta 0.01", Path::new("c")).is_err());
        assert!(parse_config("= 3", Path::new("c")).is_err());
    }

    #[test]
    fn subcommand_position_skips_globals() {
        let args = os(&["bin", "--threads", "4", "--json", "capacity", "--eta", "1"]);
        assert_eq!(subcommand_index(&args), Some(4));
        assert_eq!(subcommand_index(&os(&["bin", "--json"])), None);
    }
}
