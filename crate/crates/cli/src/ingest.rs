//! CSV ingestion of three-armed trial data.
//!
//! Two layouts are accepted, both with a header row:
//!
//! - sufficient statistics, one row per group:
//!   `group,n,stat[,stat2]` where `group` is T/R/P, `stat` is the success
//!   count (binary), event total (Poisson) or observation sum (normal,
//!   exponential), and the optional `stat2` is the sum of squares (required
//!   for the normal family in this layout);
//! - raw observations, one row per patient: `group,value`.

use std::collections::BTreeMap;
use std::path::Path;

use ret_core::{Error, Family, Group, GroupData, Result, SufficientStat};

pub fn ingest_group_data(path: &Path, family: &dyn Family) -> Result<GroupData> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        message: "empty file; a header row is required".into(),
    })?;
    let cols: Vec<String> = header
        .split(',')
        .map(|c| c.trim().to_ascii_lowercase())
        .collect();

    let layout = match cols.as_slice() {
        [g, n, s] if g == "group" && n == "n" && s == "stat" => Layout::Stat { has_sq: false },
        [g, n, s, s2] if g == "group" && n == "n" && s == "stat" && s2 == "stat2" => {
            Layout::Stat { has_sq: true }
        }
        [g, v] if g == "group" && v == "value" => Layout::Raw,
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "unrecognized header '{header}'; expected 'group,n,stat[,stat2]' or \
                     'group,value'"
                ),
            })
        }
    };

    match layout {
        Layout::Stat { has_sq } => ingest_stats(lines, has_sq, family),
        Layout::Raw => ingest_raw(lines, family),
    }
}

enum Layout {
    Stat { has_sq: bool },
    Raw,
}

fn parse_group(field: &str, line: usize) -> Result<Group> {
    Group::from_code(field).ok_or_else(|| Error::Parse {
        line,
        message: format!("unknown group '{field}' (expected T, R or P)"),
    })
}

fn parse_num(field: &str, line: usize, what: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {what} '{field}'"),
    })
}

fn ingest_stats<'a>(
    lines: impl Iterator<Item = (usize, &'a str)>,
    has_sq: bool,
    family: &dyn Family,
) -> Result<GroupData> {
    let mut groups: BTreeMap<char, SufficientStat> = BTreeMap::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        let expected = if has_sq { 4 } else { 3 };
        if fields.len() != expected {
            return Err(Error::Parse {
                line,
                message: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        let group = parse_group(fields[0], line)?;
        let n = parse_num(fields[1], line, "group size")?;
        if n < 1.0 || n.fract() != 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("group size '{}' is not a positive integer", fields[1]),
            });
        }
        let sum = parse_num(fields[2], line, "statistic")?;
        let sum_sq = if has_sq {
            parse_num(fields[3], line, "sum of squares")?
        } else {
            sum
        };
        let stat = SufficientStat::new(n as u64, sum, sum_sq)?;
        family.validate_stat(&stat)?;
        if groups.insert(group.code(), stat).is_some() {
            return Err(Error::InconsistentStat(format!(
                "duplicate row for group {group} at line {line}"
            )));
        }
    }
    assemble(groups)
}

fn ingest_raw<'a>(
    lines: impl Iterator<Item = (usize, &'a str)>,
    family: &dyn Family,
) -> Result<GroupData> {
    let mut obs: BTreeMap<char, Vec<f64>> = BTreeMap::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let group = parse_group(fields[0], line)?;
        let value = parse_num(fields[1], line, "observation")?;
        obs.entry(group.code()).or_default().push(value);
    }
    let mut groups = BTreeMap::new();
    for (code, values) in obs {
        let stat = SufficientStat::from_observations(&values)?;
        family.validate_stat(&stat)?;
        groups.insert(code, stat);
    }
    assemble(groups)
}

fn assemble(mut groups: BTreeMap<char, SufficientStat>) -> Result<GroupData> {
    let test = groups
        .remove(&'T')
        .ok_or(Error::MissingGroup(Group::Test))?;
    let reference = groups
        .remove(&'R')
        .ok_or(Error::MissingGroup(Group::Reference))?;
    let placebo = groups
        .remove(&'P')
        .ok_or(Error::MissingGroup(Group::Placebo))?;
    Ok(GroupData::new(test, reference, placebo))
}
