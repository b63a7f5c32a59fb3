use hcv_dynamics::sweep::{Axis, Output, Scale};
use hcv_dynamics::{ParamName, SweepSpec};

use crate::kv::{parse_integer, read_sections, Entry, ParseError, ParseErrorKind, Section};
use crate::scenario::{param_keys, read_params};

const AXIS_KEYS: [&str; 5] = ["param", "lo", "hi", "n", "scale"];

fn malformed(key: &str, e: &Entry, reason: impl ToString) -> ParseError {
    ParseError::at(
        e.line,
        ParseErrorKind::Malformed {
            key: key.to_string(),
            value: e.value.clone(),
            reason: reason.to_string(),
        },
    )
}

fn read_axis(section: &Section) -> Result<Axis, ParseError> {
    section.check_keys(&AXIS_KEYS)?;
    let param_entry = section.required("param")?;
    let param: ParamName = param_entry
        .value
        .parse()
        .map_err(|e| malformed("param", param_entry, e))?;
    let n_entry = section.required("n")?;
    let scale = match section.entries.get("scale") {
        Some(e) => e.value.parse::<Scale>().map_err(|err| malformed("scale", e, err))?,
        None => Scale::Linear,
    };
    Ok(Axis {
        param,
        lo: section.number("lo")?,
        hi: section.number("hi")?,
        n: parse_integer("n", n_entry)?,
        scale,
    })
}

/// Reads a sweep spec: base parameters and `outputs` at the top level, then
/// `[axis1]` and an optional `[axis2]` block. Semantic checks (axis ranges,
/// duplicates) are left to the sweep itself.
pub fn parse_sweep_spec(text: &str) -> Result<SweepSpec, ParseError> {
    let sections = read_sections(text)?;
    let top = &sections[0];
    let allowed: Vec<&str> = param_keys().chain(["outputs", "name"]).collect();
    top.check_keys(&allowed)?;
    let base = read_params(top)?;

    let out_entry = top.required("outputs")?;
    let outputs = out_entry
        .value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<Output>()
                .map_err(|e| malformed("outputs", out_entry, e))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut axis1 = None;
    let mut axis2 = None;
    for section in &sections[1..] {
        let (line, name) = section.header.clone().expect("nested sections have headers");
        match name.as_str() {
            "axis1" => axis1 = Some(read_axis(section)?),
            "axis2" => axis2 = Some(read_axis(section)?),
            other => {
                return Err(ParseError::at(
                    line,
                    ParseErrorKind::Syntax(format!("unknown section `[{other}]` (expected axis1 or axis2)")),
                ))
            }
        }
    }
    let axis1 = axis1.ok_or_else(|| ParseError::missing("[axis1]", None))?;
    Ok(SweepSpec {
        base,
        axis1,
        axis2,
        outputs,
    })
}
