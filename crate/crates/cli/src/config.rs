//! `--config` files: `key = value` lines mirroring long flags.
//!
//! Values are spliced into argv right after the subcommand name, so flags
//! given on the command line override them. `true`/`false` toggle switches.
//! Keys the subcommand does not define are ignored, so one file can serve
//! every subcommand.

use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut entries = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", n + 1))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(format!("config line {}: empty key", n + 1));
        }
        entries.push((key, value));
    }
    Ok(entries)
}

fn take_config_flag(args: &mut Vec<OsString>) -> Result<Option<OsString>, String> {
    let mut i = 1;
    while i < args.len() {
        let arg = args[i].to_string_lossy().into_owned();
        if arg == "--" {
            break;
        }
        if arg == "--config" {
            if i + 1 >= args.len() {
                return Err("--config needs a file".into());
            }
            let path = args.remove(i + 1);
            args.remove(i);
            return Ok(Some(path));
        }
        if let Some(path) = arg.strip_prefix("--config=") {
            let path = OsString::from(path);
            args.remove(i);
            return Ok(Some(path));
        }
        i += 1;
    }
    Ok(None)
}

/// Returns argv with config-file entries expanded in place.
pub fn expand(mut args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = take_config_flag(&mut args)? else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let entries = parse(&text)?;

    let command = Cli::command();
    let Some(position) = args.iter().position(|a| {
        command
            .get_subcommands()
            .any(|s| s.get_name() == a.to_string_lossy())
    }) else {
        // Let clap report the missing subcommand.
        return Ok(args);
    };
    let name = args[position].to_string_lossy().into_owned();
    let sub = command.find_subcommand(&name).expect("subcommand exists");

    let mut injected = Vec::new();
    for (key, value) in entries {
        let Some(arg) = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
        else {
            continue;
        };
        let is_switch = !arg.get_action().takes_values();
        match (is_switch, value.as_str()) {
            (true, "true") => injected.push(OsString::from(format!("--{key}"))),
            (true, "false") => {}
            (true, other) => {
                return Err(format!(
                    "config key {key}: expected true or false, got {other:?}"
                ))
            }
            (false, _) => {
                injected.push(OsString::from(format!("--{key}")));
                injected.push(OsString::from(value));
            }
        }
    }
    args.splice(position + 1..position + 1, injected);
    Ok(args)
}
