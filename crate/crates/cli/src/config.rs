//! `key = value` configuration files, merged under the command line.

use std::collections::BTreeMap;
use std::ffi::OsString;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Command};

pub fn parse(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected key = value", n + 1);
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            bail!("config line {}: empty key", n + 1);
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

pub fn load(path: &str) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {path}"))?;
    parse(&text)
}

/// Position of the first `--config` value, if any.
pub fn config_path(argv: &[OsString]) -> Option<String> {
    let mut it = argv.iter().map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

/// Appends `--key value` for every config entry that names a long option of
/// the selected subcommand (or a global one) and is absent from `argv`.
pub fn merge(root: &Command, argv: Vec<OsString>, cfg: &BTreeMap<String, String>) -> Vec<OsString> {
    let words: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut leaf = root;
    for w in words.iter().skip(1) {
        if let Some(sub) = leaf.find_subcommand(w) {
            leaf = sub;
        }
    }
    let given = |long: &str| words.iter().any(|w| w == &format!("--{long}") || w.starts_with(&format!("--{long}=")));
    let mut out = argv;
    let args = leaf.get_arguments().chain(root.get_arguments().filter(|a| a.is_global_set()));
    let mut seen = Vec::new();
    for arg in args {
        let Some(long) = arg.get_long() else { continue };
        if long == "config" || seen.contains(&long) || given(long) {
            continue;
        }
        seen.push(long);
        let Some(v) = cfg.get(long) else { continue };
        match arg.get_action() {
            ArgAction::SetTrue => {
                if matches!(v.as_str(), "true" | "1" | "yes") {
                    out.push(format!("--{long}").into());
                }
            }
            _ => {
                out.push(format!("--{long}").into());
                out.push(v.into());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::{Arg, Command};

    fn cmd() -> Command {
        Command::new("t").arg(Arg::new("timing").long("timing").action(ArgAction::SetTrue).global(true)).subcommand(
            Command::new("verify")
                .subcommand(Command::new("ricci").arg(Arg::new("k").long("k")).arg(Arg::new("seed").long("seed"))),
        )
    }

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_comments_and_underscores() {
        let c = parse("# sizes\nsamples = 100\nk_range=1..3 # trailing\n\n").unwrap();
        assert_eq!(c["samples"], "100");
        assert_eq!(c["k-range"], "1..3");
        assert!(parse("nonsense").is_err());
    }

    #[test]
    fn flags_win_over_config() {
        let cfg = parse("k = 4\nseed = 9\ntiming = true\nunrelated = 1").unwrap();
        let argv = merge(&cmd(), os(&["t", "verify", "ricci", "--k", "2"]), &cfg);
        assert_eq!(argv, os(&["t", "verify", "ricci", "--k", "2", "--seed", "9", "--timing"]));
        let m = cmd().try_get_matches_from(argv).unwrap();
        let (_, v) = m.subcommand().unwrap();
        let (_, r) = v.subcommand().unwrap();
        assert_eq!(r.get_one::<String>("k").unwrap(), "2");
    }

    #[test]
    fn finds_config_path() {
        assert_eq!(config_path(&os(&["t", "--config", "a.cfg", "verify"])), Some("a.cfg".into()));
        assert_eq!(config_path(&os(&["t", "--config=b"])), Some("b".into()));
        assert_eq!(config_path(&os(&["t"])), None);
    }
}
