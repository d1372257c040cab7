//! `key = value` configuration files.
//!
//! Each entry becomes `--key value` and is inserted right after the
//! subcommand, ahead of the flags typed on the command line, so that the
//! command line wins when both set the same key.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use nnbounds::{Error, Result};

/// Parse `key = value` lines; `#` starts a comment, blank lines are ignored
/// and a bare `key` is a switch.
pub fn parse(text: &str) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim())),
            None => (line, None),
        };
        if key.is_empty() || key.starts_with('-') || key.contains(char::is_whitespace) {
            return Err(Error::Parse(format!(
                "config line {}: bad key {key:?}",
                lineno + 1
            )));
        }
        if matches!(key, "config" | "threads" | "verbose") {
            return Err(Error::Parse(format!(
                "config line {}: {key} can only be set on the command line",
                lineno + 1
            )));
        }
        out.push(OsString::from(format!("--{key}")));
        if let Some(v) = value {
            out.push(OsString::from(v));
        }
    }
    Ok(out)
}

/// Path given to `--config`, if any.
fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut iter = argv.iter().skip(1);
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(OsString::from(p));
        }
    }
    None
}

/// Position of the subcommand token, skipping global options before it.
fn subcommand_index(argv: &[OsString], names: &[&str]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let s = argv[i].to_string_lossy();
        if names.contains(&s.as_ref()) {
            return Some(i);
        }
        if s == "--config" || s == "--threads" {
            i += 1;
        }
        i += 1;
    }
    None
}

/// `argv` with the entries of the `--config` file spliced in after the
/// subcommand.
pub fn expand(argv: Vec<OsString>, subcommands: &[&str]) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let Some(at) = subcommand_index(&argv, subcommands) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(Path::new(&path))
        .map_err(|e| Error::Input(format!("cannot read config {}: {e}", Path::new(&path).display())))?;
    let extra = parse(&text)?;
    let mut out = Vec::with_capacity(argv.len() + extra.len());
    out.extend_from_slice(&argv[..=at]);
    out.extend(extra);
    out.extend_from_slice(&argv[at + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[OsString]) -> Vec<String> {
        v.iter().map(|s| s.to_string_lossy().into_owned()).collect()
    }

    #[test]
    fn parses_pairs_and_comments() {
        let got = parse("# sweep\nW = 8\n l=3 # deep\n\nact = clip\n").unwrap();
        assert_eq!(strings(&got), ["--W", "8", "--l", "3", "--act", "clip"]);
    }

    #[test]
    fn rejects_malformed_keys() {
        assert!(parse("--W = 2").is_err());
        assert!(parse("two words = 1").is_err());
        assert!(parse("threads = 4").is_err());
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = std::env::temp_dir().join(format!("nnbounds-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        fs::write(&path, "W = 4\nl = 2\n").unwrap();
        let argv: Vec<OsString> = [
            "nnbounds",
            "--config",
            path.to_str().unwrap(),
            "count",
            "--l",
            "5",
        ]
        .iter()
        .map(OsString::from)
        .collect();
        let got = strings(&expand(argv, &["count"]).unwrap());
        assert_eq!(got[3..], ["count", "--W", "4", "--l", "2", "--l", "5"]);
        fs::remove_dir_all(dir).unwrap();
    }
}
