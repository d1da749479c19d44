//! `key = value` run configuration files.
//!
//! Keys are long flag names without the leading dashes. `subcommand` selects
//! the subcommand when none is given on the command line. Boolean flags take
//! `true` or `false`. Flags given on the command line override the file.

use std::path::Path;

#[derive(Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub subcommand: Option<String>,
    pub entries: Vec<(String, String)>,
}

pub fn parse(text: &str) -> Result<ConfigFile, String> {
    let mut out = ConfigFile::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
        let (k, v) = (k.trim().trim_start_matches("--").to_string(), v.trim().to_string());
        if k.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        if k == "subcommand" {
            out.subcommand = Some(v);
        } else if out.entries.iter().any(|(e, _)| *e == k) {
            return Err(format!("line {}: duplicate key {k}", i + 1));
        } else {
            out.entries.push((k, v));
        }
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<ConfigFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse(&text)
}

fn config_path(args: &[String]) -> Result<Option<String>, String> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned().map(Some).ok_or_else(|| "--config needs a path".to_string());
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Ok(Some(p.to_string()));
        }
    }
    Ok(None)
}

fn flags(entries: &[(String, String)]) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => out.push(format!("--{k}={v}")),
        }
    }
    Ok(out)
}

/// Splices configuration flags in front of the command-line flags of the
/// subcommand, so that later command-line occurrences win.
pub fn expand_args(args: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&args)? else { return Ok(args) };
    let cfg = load(Path::new(&path))?;
    let extra = flags(&cfg.entries)?;
    let sub_pos = args.iter().skip(1).position(|a| crate::SUBCOMMANDS.contains(&a.as_str())).map(|i| i + 1);
    let mut out = Vec::with_capacity(args.len() + extra.len() + 1);
    match sub_pos {
        Some(i) => {
            out.extend_from_slice(&args[..=i]);
            out.extend(extra);
            out.extend_from_slice(&args[i + 1..]);
        }
        None => {
            let sub = cfg.subcommand.ok_or_else(|| "no subcommand given on the command line or in the config".to_string())?;
            out.push(args[0].clone());
            out.push(sub);
            out.extend(extra);
            out.extend_from_slice(&args[1..]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_booleans() {
        let c = parse("subcommand = census\n# note\np = 5\nverify = true\nseed=3 # trailing\n").unwrap();
        assert_eq!(c.subcommand.as_deref(), Some("census"));
        assert_eq!(flags(&c.entries).unwrap(), vec!["--p=5", "--verify", "--seed=3"]);
        assert!(parse("p 5").is_err());
        assert!(parse("p = 5\np = 7").is_err());
    }

    #[test]
    fn command_line_follows_config() {
        let dir = std::env::temp_dir().join(format!("repzeta-cfg-{}", std::process::id()));
        std::fs::write(&dir, "subcommand = formula\nm = 2\nq = 5\n").unwrap();
        let args: Vec<String> = ["repzeta", "--config", dir.to_str().unwrap(), "--m", "1"].iter().map(|s| s.to_string()).collect();
        let out = expand_args(args).unwrap();
        assert_eq!(out[1], "formula");
        let m_cfg = out.iter().position(|a| a == "--m=2").unwrap();
        let m_cli = out.iter().position(|a| a == "--m").unwrap();
        assert!(m_cfg < m_cli);
        std::fs::remove_file(&dir).ok();
    }
}
