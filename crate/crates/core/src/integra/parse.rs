//! Line-oriented reader for `.integra` programs.

use crate::ast::{Assertion, EventSpec, FieldDecl, InstanceSpec, SourceSpan, StateRef, TypeSpec};
use crate::parser::expr::{self, Context, ExprError};
use crate::parser::{parse_carried_data, parse_width, ParseError};

use super::{Transform, TransformProgram};

/// One argument: its text (quotes removed) and 0-based char offset.
struct Arg {
    text: String,
    pos: usize,
    /// Offset of the content inside quotes, if quoted.
    content: usize,
}

struct Line<'a> {
    file: &'a str,
    no: u32,
}

impl Line<'_> {
    fn err(&self, pos: usize, msg: impl Into<String>) -> ParseError {
        let col = pos as u32 + 1;
        ParseError::new(SourceSpan::new(self.file, self.no, col, col), msg)
    }

    fn expr_err(&self, arg: &Arg, e: ExprError) -> ParseError {
        self.err(arg.content + e.pos, e.message)
    }
}

/// Drops a trailing `#` comment that is outside quotes.
fn strip_comment(chars: &[char]) -> usize {
    let mut in_q = false;
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '\\' if in_q => i += 1,
            '"' => in_q = !in_q,
            '#' if !in_q && (i == 0 || chars[i - 1].is_whitespace()) => return i,
            _ => {}
        }
        i += 1;
    }
    chars.len()
}

/// Splits on commas outside quotes and brackets.
fn split_args(chars: &[char], start: usize, line: &Line) -> Result<Vec<Arg>, ParseError> {
    let mut out = Vec::new();
    let mut i = start;
    let end = chars.len();
    loop {
        while i < end && chars[i].is_whitespace() {
            i += 1;
        }
        let pos = i;
        let mut text = String::new();
        let mut content = pos;
        let mut quoted = false;
        if i < end && chars[i] == '"' {
            quoted = true;
            content = i + 1;
            i += 1;
            loop {
                if i >= end {
                    return Err(line.err(pos, "unterminated quoted argument"));
                }
                match chars[i] {
                    '"' => {
                        i += 1;
                        break;
                    }
                    '\\' if i + 1 < end && matches!(chars[i + 1], '"' | '\\') => {
                        text.push(chars[i + 1]);
                        i += 2;
                    }
                    c => {
                        text.push(c);
                        i += 1;
                    }
                }
            }
            while i < end && chars[i].is_whitespace() {
                i += 1;
            }
            if i < end && chars[i] != ',' {
                return Err(line.err(i, "expected `,` after quoted argument"));
            }
        } else {
            let mut depth = 0i32;
            while i < end {
                match chars[i] {
                    '{' | '[' | '(' => depth += 1,
                    '}' | ']' | ')' => depth -= 1,
                    ',' if depth <= 0 => break,
                    _ => {}
                }
                i += 1;
            }
            text = chars[pos..i].iter().collect::<String>().trim_end().to_string();
        }
        if text.is_empty() && !quoted {
            return Err(line.err(pos, "empty argument"));
        }
        out.push(Arg { text, pos, content });
        if i < end && chars[i] == ',' {
            i += 1;
        } else {
            break;
        }
    }
    Ok(out)
}

fn ident(line: &Line, a: &Arg, what: &str) -> Result<String, ParseError> {
    let ok = a.text.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
        && a.text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(a.text.clone())
    } else {
        Err(line.err(a.pos, format!("expected {what}, found `{}`", a.text)))
    }
}

fn number(line: &Line, a: &Arg, what: &str) -> Result<u64, ParseError> {
    if a.text.is_empty() || !a.text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(line.err(a.pos, format!("expected {what}, found `{}`", a.text)));
    }
    a.text
        .parse()
        .map_err(|_| line.err(a.pos, format!("{what} `{}` is too large", a.text)))
}

fn field_decl(line: &Line, a: &Arg) -> Result<FieldDecl, ParseError> {
    let (name, ty) = a
        .text
        .split_once(':')
        .ok_or_else(|| line.err(a.pos, format!("expected `name: BV[w]`, found `{}`", a.text)))?;
    let name = name.trim().to_string();
    let width = parse_width(ty).ok_or_else(|| line.err(a.pos, format!("expected `BV[w]`, found `{}`", ty.trim())))?;
    Ok(FieldDecl { name, width })
}

fn state_ref(line: &Line, a: &Arg) -> Result<StateRef, ParseError> {
    match expr::arith_expr(&a.text, Context::Constraint).map_err(|e| line.expr_err(a, e))? {
        crate::ast::Expr::State(r) => Ok(r),
        _ => Err(line.err(a.pos, format!("expected `instance.field`, found `{}`", a.text))),
    }
}

fn arity(line: &Line, d: &str, args: &[Arg], min: usize, max: usize, at: usize) -> Result<(), ParseError> {
    if args.len() < min || args.len() > max {
        let want = if min == max {
            format!("{min}")
        } else if max == usize::MAX {
            format!("at least {min}")
        } else {
            format!("{min} to {max}")
        };
        return Err(line.err(at, format!("{d} takes {want} arguments, found {}", args.len())));
    }
    Ok(())
}

fn directive(line: &Line, d: &str, args: &[Arg], at: usize) -> Result<Transform, ParseError> {
    let n = |min, max| arity(line, d, args, min, max, at);
    Ok(match d {
        "ADD_EVENT" => {
            n(6, 7)?;
            let mut spec = EventSpec::new(ident(line, &args[0], "event name")?);
            spec.carried_data = parse_carried_data(&args[1].text).map_err(|m| line.err(args[1].pos, m))?;
            spec.triggers = expr::triggers(&args[2].text).map_err(|e| line.expr_err(&args[2], e))?;
            spec.state_changes = expr::statechanges(&args[3].text).map_err(|e| line.expr_err(&args[3], e))?;
            spec.delay = number(line, &args[4], "delay")?;
            spec.present_at_start = match args[5].text.as_str() {
                "Yes" => true,
                "No" => false,
                other => return Err(line.err(args[5].pos, format!("expected `Yes` or `No`, found `{other}`"))),
            };
            let max_instances = match args.get(6) {
                Some(a) => {
                    let v = number(line, a, "instance cap")?;
                    if v == 0 || v > u32::MAX as u64 {
                        return Err(line.err(a.pos, "instance cap must be a positive 32-bit integer"));
                    }
                    Some(v as u32)
                }
                None => None,
            };
            Transform::AddEventSpec { spec, max_instances }
        }
        "ADD_DATA_FIELD" => {
            n(2, 2)?;
            let f = field_decl(line, &args[1])?;
            Transform::AddDataField {
                event: ident(line, &args[0], "event name")?,
                field: crate::ast::DataField {
                    name: f.name,
                    width: f.width,
                },
            }
        }
        "ADD_TRIGGER" => {
            n(2, 2)?;
            Transform::AddTriggerClause {
                event: ident(line, &args[0], "event name")?,
                clause: expr::trigger_clause(&args[1].text).map_err(|e| line.expr_err(&args[1], e))?,
            }
        }
        "GUARD_AND" | "GUARD_OR" => {
            n(2, 2)?;
            let event = ident(line, &args[0], "event name")?;
            let condition = expr::bool_expr(&args[1].text, Context::Clause).map_err(|e| line.expr_err(&args[1], e))?;
            if d == "GUARD_AND" {
                Transform::GuardAnd { event, condition }
            } else {
                Transform::GuardOr { event, condition }
            }
        }
        "ADD_STATE_CHANGE" => {
            n(2, 2)?;
            Transform::AddStateChange {
                event: ident(line, &args[0], "event name")?,
                clause: expr::statechange_clause(&args[1].text).map_err(|e| line.expr_err(&args[1], e))?,
            }
        }
        "ADD_DELAY" => {
            n(2, 2)?;
            Transform::AddDelay {
                event: ident(line, &args[0], "event name")?,
                amount: number(line, &args[1], "delay amount")?,
            }
        }
        "ADD_TYPE" => {
            n(1, usize::MAX)?;
            Transform::AddTypeSpec(TypeSpec {
                name: ident(line, &args[0], "type name")?,
                fields: args[1..].iter().map(|a| field_decl(line, a)).collect::<Result<_, _>>()?,
            })
        }
        "ADD_INSTANCE" => {
            n(2, 2)?;
            Transform::AddInstance(InstanceSpec {
                name: ident(line, &args[0], "instance name")?,
                type_name: ident(line, &args[1], "type name")?,
            })
        }
        "ADD_ASSERTION" => {
            n(2, 2)?;
            let (mode, body) = expr::assertion(&args[1].text).map_err(|e| line.expr_err(&args[1], e))?;
            Transform::AddAssertion(Assertion {
                name: ident(line, &args[0], "assertion name")?,
                mode,
                body,
            })
        }
        "ADD_INITIAL" => {
            n(1, 1)?;
            Transform::AddInitialConstraint(
                expr::bool_expr(&args[0].text, Context::Constraint).map_err(|e| line.expr_err(&args[0], e))?,
            )
        }
        "DUPLICATE_STATE" | "DUPLICATE_EVENTS" => {
            n(2, 2)?;
            let m1 = ident(line, &args[0], "machine suffix")?;
            let m2 = ident(line, &args[1], "machine suffix")?;
            if m1 == m2 {
                return Err(line.err(args[1].pos, "machine suffixes must differ"));
            }
            if d == "DUPLICATE_STATE" {
                Transform::DuplicateStateForNI { m1, m2 }
            } else {
                Transform::DuplicateEventsForNI { m1, m2 }
            }
        }
        "SECRET_FREE" => {
            n(1, 1)?;
            Transform::SecretFree(state_ref(line, &args[0])?)
        }
        "OBSERVABLE_EQUAL" => {
            n(1, 1)?;
            Transform::ObservableEqual(state_ref(line, &args[0])?)
        }
        other => return Err(line.err(0, format!("unknown directive `{other}`"))),
    })
}

/// Parses a program; `name` labels it in composed output.
pub fn parse_integra(text: &str, name: &str) -> Result<TransformProgram, ParseError> {
    let mut transforms = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line = Line { file: name, no: idx as u32 + 1 };
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let chars: Vec<char> = raw.chars().collect();
        let chars = &chars[..strip_comment(&chars)];
        let lead = chars.iter().take_while(|c| c.is_whitespace()).count();
        if chars[lead..].iter().all(|c| c.is_whitespace()) {
            continue;
        }
        let mut end = lead;
        while end < chars.len() && !chars[end].is_whitespace() {
            end += 1;
        }
        let d: String = chars[lead..end].iter().collect();
        let args = if chars[end..].iter().all(|c| c.is_whitespace()) {
            Vec::new()
        } else {
            split_args(chars, end, &line)?
        };
        transforms.push(directive(&line, &d, &args, lead)?);
    }
    Ok(TransformProgram {
        name: name.to_string(),
        transforms,
    })
}
