//! Parsing of the `--space` argument.

use std::fs;
use std::path::Path;

use metric_entropy::{Family, GroupSpec, SpaceSpec, SubgroupSpec};

use crate::error::{CliError, CliResult};

fn call(text: &str) -> Option<(&str, Vec<&str>)> {
    let text = text.trim();
    match text.find('(') {
        None => Some((text, Vec::new())),
        Some(open) => {
            let inner = text[open + 1..].strip_suffix(')')?;
            let args = inner.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
            Some((text[..open].trim(), args))
        }
    }
}

fn numbers(args: &[&str], text: &str) -> CliResult<Vec<usize>> {
    args.iter()
        .map(|a| a.parse().map_err(|_| CliError::Input(format!("bad integer '{a}' in space '{text}'"))))
        .collect()
}

/// Parses shorthand such as `U(4)`, `SO(3)/Gr(1)`, `U(6)/Block(2,2,2)`,
/// `U(4)/Tensor(2,2)`, `U(3)/SU` or `U(2)/Full`.
pub fn parse_shorthand(text: &str) -> CliResult<SpaceSpec> {
    let bad = || CliError::Input(format!("cannot parse space '{text}'"));
    let (group_text, sub_text) = match text.split_once('/') {
        Some((g, s)) => (g, Some(s)),
        None => (text, None),
    };
    let (name, args) = call(group_text).ok_or_else(bad)?;
    let family = match name.to_ascii_uppercase().as_str() {
        "U" => Family::U,
        "SO" => Family::SO,
        _ => return Err(bad()),
    };
    let n = match numbers(&args, text)?.as_slice() {
        [n] => *n,
        _ => return Err(bad()),
    };
    let group = GroupSpec::new(family, n)?;
    let subgroup = match sub_text {
        None => SubgroupSpec::Trivial,
        Some(s) => {
            let (name, args) = call(s).ok_or_else(bad)?;
            let args = numbers(&args, text)?;
            match (name.to_ascii_lowercase().as_str(), args.as_slice()) {
                ("trivial" | "e", []) => SubgroupSpec::Trivial,
                ("full", []) => SubgroupSpec::Full,
                ("su", []) => SubgroupSpec::SpecialUnitary,
                ("gr" | "grassmann", [k]) => SubgroupSpec::Grassmann { k: *k },
                ("block", parts) if !parts.is_empty() => SubgroupSpec::BlockDiagonal { partition: parts.to_vec() },
                ("tensor", [m, k]) => SubgroupSpec::TensorFactor { m: *m, k: *k },
                _ => return Err(bad()),
            }
        }
    };
    Ok(SpaceSpec::new(group, subgroup)?)
}

fn parse_inline(text: &str) -> CliResult<SpaceSpec> {
    if text.trim_start().starts_with('{') {
        // semantic errors surface as the core error they wrap
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("space JSON: {e}")))?;
        #[derive(serde::Deserialize)]
        struct Raw {
            group: GroupSpec,
            subgroup: SubgroupSpec,
        }
        let raw: Raw = serde_json::from_value(value).map_err(|e| CliError::Input(format!("space JSON: {e}")))?;
        Ok(SpaceSpec::new(raw.group, raw.subgroup)?)
    } else {
        parse_shorthand(text)
    }
}

/// A space given inline (shorthand or JSON) or as a path to a file holding
/// either form.
pub fn parse_space(arg: &str) -> CliResult<SpaceSpec> {
    let trimmed = arg.trim();
    if trimmed.starts_with('{') || call(trimmed.split('/').next().unwrap_or("")).is_some_and(|(n, a)| {
        !a.is_empty() && matches!(n.to_ascii_uppercase().as_str(), "U" | "SO")
    }) {
        return parse_inline(trimmed);
    }
    let path = Path::new(trimmed);
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("space '{arg}' is neither a space nor a readable file: {e}")))?;
    parse_inline(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_matches_the_identifier() {
        for id in ["U(4)/Gr(2)", "SO(3)/Gr(1)", "U(6)/Block(2,2,2)", "U(4)/Tensor(2,2)", "U(3)/SU", "U(2)/Full", "SO(3)/Trivial"] {
            assert_eq!(parse_space(id).unwrap().id(), id);
        }
        assert_eq!(parse_space("U(3)").unwrap().id(), "U(3)/Trivial");
    }

    #[test]
    fn json_form_is_accepted() {
        let s = parse_space(r#"{"group":{"family":"SO","n":3},"subgroup":{"variant":"grassmann","k":1}}"#).unwrap();
        assert_eq!(s.id(), "SO(3)/Gr(1)");
    }

    #[test]
    fn malformed_and_invalid_are_distinguished() {
        assert!(matches!(parse_space("V(3)"), Err(CliError::Input(_))));
        assert!(matches!(parse_space("{not json"), Err(CliError::Input(_))));
        assert_eq!(parse_space("U(3)/Gr(5)").unwrap_err().status().0, 4);
    }
}
