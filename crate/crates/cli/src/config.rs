//! Flat `key = value` config files.
//!
//! Keys are the long flag names (`p-loss` or `p_loss`). Blank lines and lines
//! starting with `#` are ignored. File entries become flags placed before the
//! real arguments; an entry whose flag also appears on the command line is
//! dropped, so the command line wins.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;

/// Parses file text into `(line, key, value)` entries.
pub fn parse(text: &str) -> Result<Vec<(usize, String, String)>, Vec<String>> {
    let mut entries = vec![];
    let mut problems = vec![];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => {
                entries.push((i + 1, k.trim().replace('_', "-"), v.trim().to_string()));
            }
            _ => problems.push(format!("line {}: expected key = value, got {line:?}", i + 1)),
        }
    }
    if problems.is_empty() {
        Ok(entries)
    } else {
        Err(problems)
    }
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Returns the argument list with config-file entries spliced in after the
/// subcommand name. Unknown or repeated keys are rejected.
pub fn merge(args: Vec<OsString>) -> Result<Vec<OsString>, Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let Some(sub_name) = args.get(1).map(|s| s.to_string_lossy().into_owned()) else {
        return Ok(args);
    };
    let cmd = Cli::command();
    let Some(sub) = cmd.find_subcommand(&sub_name) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = fs::read_to_string(path).map_err(|e| vec![format!("config {}: {e}", path.display())])?;
    let entries = parse(&text).map_err(|p| p.into_iter().map(|m| format!("config {}: {m}", path.display())).collect::<Vec<_>>())?;

    let known: Vec<&str> = sub
        .get_arguments()
        .filter(|a| !a.is_hide_set())
        .filter_map(|a| a.get_long())
        .filter(|&l| l != "config")
        .collect();
    let given: Vec<String> = args[2..]
        .iter()
        .filter_map(|a| a.to_str()?.strip_prefix("--").map(|f| f.split('=').next().unwrap_or(f).replace('_', "-")))
        .collect();
    let mut problems = vec![];
    let mut seen: Vec<&str> = vec![];
    let mut injected = vec![];
    for (line, key, value) in &entries {
        match known.iter().find(|k| *k == key) {
            None => problems.push(format!("config {} line {line}: unknown key {key:?} for {sub_name}", path.display())),
            Some(_) if seen.contains(&key.as_str()) => {
                problems.push(format!("config {} line {line}: key {key:?} given twice", path.display()))
            }
            Some(_) => {
                seen.push(key);
                if !given.contains(key) {
                    injected.push(OsString::from(format!("--{key}={value}")));
                }
            }
        }
    }
    if !problems.is_empty() {
        return Err(problems);
    }
    let mut out = args[..2].to_vec();
    out.extend(injected);
    out.extend(args[2..].iter().cloned());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_normalises_keys() {
        let e = parse("# tree\np_loss = 0.1\n\nbranching=3,3\n").unwrap();
        assert_eq!(e, vec![(2, "p-loss".into(), "0.1".into()), (4, "branching".into(), "3,3".into())]);
        assert!(parse("just words\n").is_err());
    }

    #[test]
    fn flags_after_file_entries() {
        let dir = std::env::temp_dir().join(format!("lossprop-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let f = dir.join("a.conf");
        fs::write(&f, "scheme = parity\nn = 4\n").unwrap();
        let args: Vec<OsString> =
            ["lossprop", "rates", "--config", f.to_str().unwrap(), "--n", "5"].iter().map(OsString::from).collect();
        let merged = merge(args).unwrap();
        let s: Vec<String> = merged.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(s[2..], ["--scheme=parity", "--config", f.to_str().unwrap(), "--n", "5"]);

        fs::write(&f, "scheme = parity\nbogus = 1\n").unwrap();
        let args: Vec<OsString> = ["lossprop", "rates", "--config", f.to_str().unwrap()].iter().map(OsString::from).collect();
        let err = merge(args).unwrap_err();
        assert!(err[0].contains("bogus"));
        fs::remove_dir_all(dir).unwrap();
    }
}
