//! Strict RFC 4180 record reader.
//!
//! The `csv` crate recovers silently from an unterminated quoted field, which
//! would hide malformed input, so records are split here and every structural
//! error is reported with the 1-based line on which it occurs.

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    FieldStart,
    Unquoted,
    Quoted,
    QuoteInQuoted,
}

pub(crate) fn parse_records(text: &str) -> Result<Vec<Vec<String>>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);

    let mut records = Vec::new();
    let mut record: Vec<String> = Vec::new();
    let mut field = String::new();
    let mut state = State::FieldStart;
    let mut line = 1usize;
    let mut quote_line = 1usize;
    let mut chars = text.chars().peekable();

    while let Some(c) = chars.next() {
        match state {
            State::FieldStart | State::Unquoted => match c {
                '"' if state == State::FieldStart => {
                    state = State::Quoted;
                    quote_line = line;
                }
                ',' => {
                    record.push(std::mem::take(&mut field));
                    state = State::FieldStart;
                }
                '\r' | '\n' => {
                    if c == '\r' && chars.peek() == Some(&'\n') {
                        chars.next();
                    }
                    line += 1;
                    end_record(&mut records, &mut record, &mut field, state);
                    state = State::FieldStart;
                }
                _ => {
                    field.push(c);
                    state = State::Unquoted;
                }
            },
            State::Quoted => match c {
                '"' => state = State::QuoteInQuoted,
                '\n' => {
                    line += 1;
                    field.push(c);
                }
                '\r' => {
                    if chars.peek() != Some(&'\n') {
                        line += 1;
                    }
                    field.push(c);
                }
                _ => field.push(c),
            },
            State::QuoteInQuoted => match c {
                '"' => {
                    field.push('"');
                    state = State::Quoted;
                }
                ',' => {
                    record.push(std::mem::take(&mut field));
                    state = State::FieldStart;
                }
                '\r' | '\n' => {
                    if c == '\r' && chars.peek() == Some(&'\n') {
                        chars.next();
                    }
                    line += 1;
                    // a quoted field is never "empty line" even if it holds ""
                    record.push(std::mem::take(&mut field));
                    records.push(std::mem::take(&mut record));
                    state = State::FieldStart;
                }
                other => {
                    return Err(Error::Parse { line, message: format!("unexpected {other:?} after closing quote") })
                }
            },
        }
    }

    match state {
        State::Quoted => Err(Error::Parse { line: quote_line, message: "unterminated quoted field".into() }),
        State::QuoteInQuoted => {
            record.push(field);
            records.push(record);
            Ok(records)
        }
        State::FieldStart | State::Unquoted => {
            end_record(&mut records, &mut record, &mut field, state);
            Ok(records)
        }
    }
}

fn end_record(records: &mut Vec<Vec<String>>, record: &mut Vec<String>, field: &mut String, state: State) {
    // Blank lines carry no fields and are skipped.
    if record.is_empty() && field.is_empty() && state == State::FieldStart {
        return;
    }
    record.push(std::mem::take(field));
    records.push(std::mem::take(record));
}
