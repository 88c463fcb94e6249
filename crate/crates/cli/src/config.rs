//! `key = value` run files. Each key names a long flag of the chosen
//! subcommand (or a global flag); the entries are spliced into the argument
//! list unless the same flag was given on the command line.

use std::collections::HashSet;
use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;
use crate::error::CliError;

const GLOBALS: [&str; 3] = ["seed", "threads", "out"];
const VALUED_GLOBALS: [&str; 4] = ["--config", "--seed", "--threads", "--out"];

pub fn parse_entries(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut entries: Vec<(String, String)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected `key = value`", no + 1)));
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", no + 1)));
        }
        if entries.iter().any(|(k, _)| *k == key) {
            return Err(CliError::Usage(format!("config line {}: duplicate key `{key}`", no + 1)));
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(entries)
}

/// Position of the subcommand token and the `--config` path, if any.
fn scan(argv: &[String]) -> (Option<usize>, Option<String>) {
    let names: Vec<String> = Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect();
    let mut sub = None;
    let mut config = None;
    let mut i = 1;
    while i < argv.len() {
        let tok = &argv[i];
        if let Some(path) = tok.strip_prefix("--config=") {
            config = Some(path.to_string());
        } else if tok == "--config" {
            config = argv.get(i + 1).cloned();
            i += 1;
        } else if sub.is_none() && VALUED_GLOBALS.contains(&tok.as_str()) {
            i += 1;
        } else if sub.is_none() && names.contains(tok) {
            sub = Some(i);
        }
        i += 1;
    }
    (sub, config)
}

/// Rewrites `argv` with the config file's entries inserted after the
/// subcommand. Returns `argv` unchanged when no config is given.
pub fn expand(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let (sub, path) = scan(&argv);
    let Some(path) = path else { return Ok(argv) };
    let Some(sub) = sub else { return Ok(argv) };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
    let entries = parse_entries(&text)?;

    let root = Cli::command();
    let cmd = root.find_subcommand(&argv[sub]).expect("scanned name is a subcommand");
    let mut given: HashSet<String> = HashSet::new();
    for tok in &argv[1..] {
        if let Some(flag) = tok.strip_prefix("--") {
            given.insert(flag.split('=').next().unwrap_or(flag).to_string());
        }
    }

    let mut extra = Vec::new();
    for (key, value) in entries {
        let arg = cmd.get_arguments().find(|a| {
            a.get_long() == Some(key.as_str())
                || a.get_all_aliases().is_some_and(|al| al.contains(&key.as_str()))
        });
        let (names, takes_value): (Vec<String>, bool) = match arg {
            Some(a) => {
                let mut names: Vec<String> = a.get_long().into_iter().map(String::from).collect();
                names.extend(a.get_all_aliases().unwrap_or_default().into_iter().map(String::from));
                (names, a.get_action().takes_values())
            }
            None if GLOBALS.contains(&key.as_str()) => (vec![key.clone()], true),
            None => return Err(CliError::Usage(format!("unknown config key `{key}` for `{}`", argv[sub]))),
        };
        if names.iter().any(|n| given.contains(n)) {
            continue;
        }
        if takes_value {
            extra.push(format!("--{key}"));
            extra.push(value);
        } else {
            match value.as_str() {
                "true" => extra.push(format!("--{key}")),
                "false" => {}
                other => return Err(CliError::Usage(format!("config key `{key}` expects true or false, got `{other}`"))),
            }
        }
    }
    let mut out = argv[..=sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[sub + 1..]);
    Ok(out)
}
