//! Dialogue-act parsing and printing.
//!
//! Grammar: `act_type '(' [slot (';' slot)*] ')'` with `slot := name ['=' value]`
//! and values optionally single-quoted. Whitespace around separators is
//! ignored. Slot order is preserved; duplicate slot names are legal and
//! meaningful (compare acts carry two `name` slots).

use crate::error::{Error, Result};

/// How a slot value behaves in the surface text.
///
/// Only `Normal` values appear verbatim in utterances and can be
/// delexicalized; the others are realized by paraphrase ("has internet",
/// "does not care") and are excluded from slot-error accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueClass {
    Normal,
    BinaryYes,
    BinaryNo,
    DontCare,
    NoValue,
}

impl ValueClass {
    /// Stable lowercase label used in schema files.
    pub fn label(self) -> &'static str {
        match self {
            ValueClass::Normal => "normal",
            ValueClass::BinaryYes => "binary_yes",
            ValueClass::BinaryNo => "binary_no",
            ValueClass::DontCare => "dont_care",
            ValueClass::NoValue => "no_value",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Some(match label {
            "normal" => ValueClass::Normal,
            "binary_yes" => ValueClass::BinaryYes,
            "binary_no" => ValueClass::BinaryNo,
            "dont_care" => ValueClass::DontCare,
            "no_value" => ValueClass::NoValue,
            _ => return None,
        })
    }
}

/// One slot of a dialogue act. `value` is present iff `class != NoValue`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub name: String,
    pub value: Option<String>,
    pub class: ValueClass,
}

/// An act type plus an ordered list of slot-value pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogueAct {
    pub act_type: String,
    pub slots: Vec<Slot>,
}

impl DialogueAct {
    /// Indices and slots of normal (delexicalizable) class, in DA order.
    pub fn normal_slots(&self) -> impl Iterator<Item = (usize, &Slot)> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.class == ValueClass::Normal)
    }
}

fn classify(value: &str) -> ValueClass {
    match value {
        "yes" => ValueClass::BinaryYes,
        "no" => ValueClass::BinaryNo,
        "dont_care" | "dontcare" => ValueClass::DontCare,
        _ => ValueClass::Normal,
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn fail<T>(&self, offset: usize, message: &str) -> Result<T> {
        Err(Error::DaParse {
            offset,
            message: message.to_string(),
        })
    }

    /// Consume until one of `stops`, returning the trimmed span.
    fn until(&mut self, stops: &[char]) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if stops.contains(&c) {
                break;
            }
            self.bump();
        }
        self.src[start..self.pos].trim()
    }

    /// Quoted value: opening `'` or backquote, closed by the first `'` whose
    /// next non-whitespace character is `;` or `)`. The lookahead lets values
    /// contain bare apostrophes and separators.
    fn quoted_value(&mut self) -> Result<String> {
        let open_at = self.pos;
        self.bump();
        let start = self.pos;
        let mut scan = self.pos;
        while let Some(rel) = self.src[scan..].find('\'') {
            let close = scan + rel;
            let after = self.src[close + 1..].trim_start();
            if after.starts_with(';') || after.starts_with(')') {
                let value = self.src[start..close].to_string();
                self.pos = close + 1;
                return Ok(value);
            }
            scan = close + 1;
        }
        self.fail(open_at, "unterminated quoted value")
    }

    fn slot(&mut self) -> Result<Slot> {
        self.skip_ws();
        let name_at = self.pos;
        let name = self.until(&['=', ';', ')']).to_string();
        if name.is_empty() {
            return self.fail(name_at, "empty slot name");
        }
        self.skip_ws();
        if self.peek() != Some('=') {
            return Ok(Slot {
                name,
                value: None,
                class: ValueClass::NoValue,
            });
        }
        self.bump();
        self.skip_ws();
        let value_at = self.pos;
        let value = match self.peek() {
            Some('\'') | Some('`') => self.quoted_value()?,
            _ => self.until(&[';', ')']).to_string(),
        };
        if value.is_empty() {
            return self.fail(value_at, "empty slot value after '='");
        }
        let class = classify(&value);
        Ok(Slot {
            name,
            value: Some(value),
            class,
        })
    }
}

/// Parse a dialogue-act string. Errors carry the byte offset of the problem.
pub fn parse_da(text: &str) -> Result<DialogueAct> {
    let mut p = Parser { src: text, pos: 0 };
    p.skip_ws();
    let act_at = p.pos;
    let act_type = p.until(&['(', ')', ';']).to_string();
    if act_type.is_empty() {
        return p.fail(act_at, "empty act type");
    }
    if p.peek() != Some('(') {
        return p.fail(p.pos, "expected '(' after act type");
    }
    p.bump();
    let mut slots = Vec::new();
    p.skip_ws();
    if p.peek() == Some(')') {
        p.bump();
    } else {
        loop {
            slots.push(p.slot()?);
            p.skip_ws();
            match p.peek() {
                Some(';') => {
                    p.bump();
                }
                Some(')') => {
                    p.bump();
                    break;
                }
                _ => return p.fail(p.pos, "expected ';' or ')' in slot list"),
            }
        }
    }
    p.skip_ws();
    if p.pos != text.len() {
        return p.fail(p.pos, "trailing characters after ')'");
    }
    Ok(DialogueAct { act_type, slots })
}

/// Inverse printer: `parse_da(render_da(da)) == da` for any act whose values
/// survive single-quoting.
pub fn render_da(da: &DialogueAct) -> String {
    let slots: Vec<String> = da
        .slots
        .iter()
        .map(|s| match &s.value {
            Some(v) => format!("{}='{}'", s.name, v),
            None => s.name.clone(),
        })
        .collect();
    format!("{}({})", da.act_type, slots.join(";"))
}
