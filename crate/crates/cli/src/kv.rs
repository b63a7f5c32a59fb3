//! Line-oriented `key = value` reader shared by scenario and sweep files.

use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Duplicate { key: String, first_line: usize },
    Missing { key: String },
    Unknown { key: String },
    Malformed { key: String, value: String, reason: String },
    Syntax(String),
}

/// Parse failure; `line` is 1-based and absent only for missing keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn at(line: usize, kind: ParseErrorKind) -> Self {
        ParseError { line: Some(line), kind }
    }

    pub(crate) fn missing(key: &str, section: Option<&str>) -> Self {
        let key = match section {
            Some(s) => format!("{s}.{key}"),
            None => key.to_string(),
        };
        ParseError {
            line: None,
            kind: ParseErrorKind::Missing { key },
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: ")?,
            None => f.write_str("end of input: ")?,
        }
        match &self.kind {
            ParseErrorKind::Duplicate { key, first_line } => {
                write!(f, "duplicate key `{key}` (first set on line {first_line})")
            }
            ParseErrorKind::Missing { key } => write!(f, "missing key `{key}`"),
            ParseErrorKind::Unknown { key } => write!(f, "unknown key `{key}`"),
            ParseErrorKind::Malformed { key, value, reason } => {
                write!(f, "malformed value `{value}` for `{key}`: {reason}")
            }
            ParseErrorKind::Syntax(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Entry {
    pub line: usize,
    pub value: String,
}

/// Entries under one `[header]`, or the top level when `header` is `None`.
#[derive(Debug, Default)]
pub(crate) struct Section {
    pub header: Option<(usize, String)>,
    pub entries: HashMap<String, Entry>,
}

impl Section {
    pub fn name(&self) -> Option<&str> {
        self.header.as_ref().map(|(_, h)| h.as_str())
    }

    /// Rejects keys outside `allowed`, reporting the earliest offender.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), ParseError> {
        let mut unknown: Vec<(&String, &Entry)> = self
            .entries
            .iter()
            .filter(|(k, _)| !allowed.contains(&k.as_str()))
            .collect();
        unknown.sort_by_key(|(_, e)| e.line);
        match unknown.first() {
            Some((k, e)) => Err(ParseError::at(e.line, ParseErrorKind::Unknown { key: (*k).clone() })),
            None => Ok(()),
        }
    }

    pub fn required(&self, key: &str) -> Result<&Entry, ParseError> {
        self.entries
            .get(key)
            .ok_or_else(|| ParseError::missing(key, self.name()))
    }

    pub fn number(&self, key: &str) -> Result<f64, ParseError> {
        let e = self.required(key)?;
        parse_number(key, e)
    }

    pub fn optional_number(&self, key: &str) -> Result<Option<f64>, ParseError> {
        self.entries.get(key).map(|e| parse_number(key, e)).transpose()
    }
}

/// Finite decimal or scientific literal, dot separator only.
pub(crate) fn parse_number(key: &str, e: &Entry) -> Result<f64, ParseError> {
    let malformed = |reason: &str| {
        ParseError::at(
            e.line,
            ParseErrorKind::Malformed {
                key: key.to_string(),
                value: e.value.clone(),
                reason: reason.to_string(),
            },
        )
    };
    // f64::from_str also takes "inf", "NaN" and "infinity"; none are valid here.
    if !e.value.bytes().all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b)) {
        return Err(malformed("expected a decimal number such as 1.5 or 1e-7"));
    }
    match e.value.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(_) => Err(malformed("number is out of range")),
        Err(_) => Err(malformed("expected a decimal number such as 1.5 or 1e-7")),
    }
}

pub(crate) fn parse_integer(key: &str, e: &Entry) -> Result<usize, ParseError> {
    e.value.parse::<usize>().map_err(|_| {
        ParseError::at(
            e.line,
            ParseErrorKind::Malformed {
                key: key.to_string(),
                value: e.value.clone(),
                reason: "expected a non-negative integer".to_string(),
            },
        )
    })
}

/// Splits `text` into sections. Handles `#` comments, blank lines and CRLF.
pub(crate) fn read_sections(text: &str) -> Result<Vec<Section>, ParseError> {
    let mut sections = vec![Section::default()];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .ok_or_else(|| {
                    ParseError::at(line, ParseErrorKind::Syntax(format!("bad section header `{content}`")))
                })?;
            if let Some(prev) = sections.iter().find(|s| s.name() == Some(name)) {
                let first_line = prev.header.as_ref().map_or(0, |(l, _)| *l);
                return Err(ParseError::at(
                    line,
                    ParseErrorKind::Duplicate {
                        key: format!("[{name}]"),
                        first_line,
                    },
                ));
            }
            sections.push(Section {
                header: Some((line, name.to_string())),
                ..Default::default()
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| {
                ParseError::at(
                    line,
                    ParseErrorKind::Syntax(format!("expected `key = value`, got `{content}`")),
                )
            })?;
        if key.is_empty() || value.is_empty() {
            return Err(ParseError::at(
                line,
                ParseErrorKind::Syntax(format!("expected `key = value`, got `{content}`")),
            ));
        }
        let section = sections.last_mut().expect("top-level section");
        if let Some(prev) = section.entries.get(key) {
            return Err(ParseError::at(
                line,
                ParseErrorKind::Duplicate {
                    key: key.to_string(),
                    first_line: prev.line,
                },
            ));
        }
        section.entries.insert(
            key.to_string(),
            Entry {
                line,
                value: value.to_string(),
            },
        );
    }
    Ok(sections)
}
