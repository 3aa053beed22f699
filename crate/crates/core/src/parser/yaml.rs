//! A small YAML-subset reader that keeps a source span on every node.
//!
//! Supported: block mappings and sequences, `- key: value` items,
//! flow mappings/sequences, single- and double-quoted scalars, `#`
//! comments and a leading `---` marker. Plain scalars inside flow
//! collections may contain balanced brackets, so `{entry: BV[5]}` reads
//! as a one-entry mapping. Anchors, tags, block scalars and multiple
//! documents are rejected.

use crate::ast::SourceSpan;

use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Scalar { text: String, quoted: bool },
    Seq(Vec<Node>),
    Map(Vec<(Key, Node)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Key {
    pub text: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub span: SourceSpan,
}

impl Node {
    pub fn as_scalar(&self) -> Option<&str> {
        match &self.kind {
            NodeKind::Scalar { text, .. } => Some(text),
            _ => None,
        }
    }

    /// Column (1-based) where the scalar's text content starts.
    pub fn content_col(&self) -> u32 {
        match &self.kind {
            NodeKind::Scalar { quoted: true, .. } => self.span.col_start + 1,
            _ => self.span.col_start,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            NodeKind::Scalar { .. } => "scalar",
            NodeKind::Seq(_) => "sequence",
            NodeKind::Map(_) => "mapping",
        }
    }
}

#[derive(Debug, Clone)]
struct Line {
    no: u32,
    indent: usize,
    /// 0-based char column where `text` starts.
    col0: usize,
    text: String,
}

pub fn parse(src: &str, file: &str) -> Result<Node, ParseError> {
    let lines = split_lines(src, file)?;
    if lines.is_empty() {
        return Err(ParseError::new(SourceSpan::new(file, 1, 1, 1), "empty document"));
    }
    let mut r = Reader { lines, pos: 0, file };
    let indent = r.lines[0].indent;
    let root = r.block(indent)?;
    if r.pos < r.lines.len() {
        let l = &r.lines[r.pos];
        return Err(r.err_at(l.no, l.col0, l.text.chars().count(), "unexpected content (bad indentation?)"));
    }
    Ok(root)
}

fn split_lines(src: &str, file: &str) -> Result<Vec<Line>, ParseError> {
    let mut out = Vec::new();
    let mut seen_marker = false;
    for (idx, raw) in src.split('\n').enumerate() {
        let no = idx as u32 + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let chars: Vec<char> = raw.chars().collect();
        let mut indent = 0;
        while indent < chars.len() && (chars[indent] == ' ' || chars[indent] == '\t') {
            if chars[indent] == '\t' {
                let rest_blank = chars[indent..].iter().all(|c| c.is_whitespace());
                if !rest_blank {
                    return Err(ParseError::new(
                        SourceSpan::new(file, no, indent as u32 + 1, indent as u32 + 1),
                        "tab characters are not allowed in indentation",
                    ));
                }
            }
            indent += 1;
        }
        let content = strip_comment(&chars[indent..]);
        let content = content.trim_end();
        if content.is_empty() {
            continue;
        }
        if content == "---" || content.starts_with("--- ") {
            if seen_marker || !out.is_empty() {
                return Err(ParseError::new(
                    SourceSpan::new(file, no, indent as u32 + 1, indent as u32 + 3),
                    "only one document per file is supported",
                ));
            }
            if content.len() > 3 {
                return Err(ParseError::new(
                    SourceSpan::new(file, no, indent as u32 + 5, chars.len() as u32),
                    "content after document marker",
                ));
            }
            seen_marker = true;
            continue;
        }
        if content == "..." {
            break;
        }
        out.push(Line {
            no,
            indent,
            col0: indent,
            text: content.to_string(),
        });
    }
    Ok(out)
}

fn quote_can_open(prev: Option<char>) -> bool {
    matches!(prev, None | Some(':') | Some('-') | Some('{') | Some('[') | Some(','))
}

fn strip_comment(chars: &[char]) -> String {
    let mut out = String::new();
    let mut in_dq = false;
    let mut in_sq = false;
    let mut prev_nonspace: Option<char> = None;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if in_dq {
            out.push(c);
            if c == '\\' && i + 1 < chars.len() {
                out.push(chars[i + 1]);
                i += 2;
                continue;
            }
            if c == '"' {
                in_dq = false;
                prev_nonspace = Some('"');
            }
        } else if in_sq {
            out.push(c);
            if c == '\'' {
                if i + 1 < chars.len() && chars[i + 1] == '\'' {
                    out.push('\'');
                    i += 2;
                    continue;
                }
                in_sq = false;
                prev_nonspace = Some('\'');
            }
        } else {
            if c == '#' && (i == 0 || chars[i - 1].is_whitespace()) {
                break;
            }
            if c == '"' && quote_can_open(prev_nonspace) {
                in_dq = true;
            } else if c == '\'' && quote_can_open(prev_nonspace) {
                in_sq = true;
            }
            out.push(c);
            if !c.is_whitespace() {
                prev_nonspace = Some(c);
            }
        }
        i += 1;
    }
    out
}

fn is_seq_item(text: &str) -> bool {
    text == "-" || text.starts_with("- ")
}

struct Reader<'f> {
    lines: Vec<Line>,
    pos: usize,
    file: &'f str,
}

impl<'f> Reader<'f> {
    fn span(&self, line: u32, col0: usize, len: usize) -> SourceSpan {
        let start = col0 as u32 + 1;
        SourceSpan::new(self.file, line, start, start + len.saturating_sub(1) as u32)
    }

    fn err_at(&self, line: u32, col0: usize, len: usize, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.span(line, col0, len.max(1)), msg)
    }

    fn block(&mut self, indent: usize) -> Result<Node, ParseError> {
        let line = self.lines[self.pos].clone();
        debug_assert_eq!(line.indent, indent);
        if is_seq_item(&line.text) {
            return self.seq(indent);
        }
        if split_key(&line.text).is_some() {
            return self.map(indent);
        }
        let node = inline(&line.text, line.no, line.col0, self.file)?;
        self.pos += 1;
        Ok(node)
    }

    fn seq(&mut self, indent: usize) -> Result<Node, ParseError> {
        let first = self.lines[self.pos].clone();
        let span = self.span(first.no, first.col0, 1);
        let mut items = Vec::new();
        while self.pos < self.lines.len() {
            let line = self.lines[self.pos].clone();
            if line.indent > indent {
                return Err(self.err_at(line.no, line.col0, line.text.chars().count(), "unexpected indentation"));
            }
            if line.indent < indent || !is_seq_item(&line.text) {
                break;
            }
            let rest: String = line.text.chars().skip(1).collect();
            let gap = rest.chars().take_while(|c| *c == ' ').count();
            let body = rest.trim_start().to_string();
            if body.is_empty() {
                self.pos += 1;
                if self.pos < self.lines.len() && self.lines[self.pos].indent > indent {
                    let inner = self.lines[self.pos].indent;
                    items.push(self.block(inner)?);
                } else {
                    items.push(Node {
                        kind: NodeKind::Scalar { text: String::new(), quoted: false },
                        span: self.span(line.no, line.col0, 1),
                    });
                }
            } else {
                let c = line.indent + 1 + gap;
                self.lines[self.pos] = Line {
                    no: line.no,
                    indent: c,
                    col0: line.col0 + 1 + gap,
                    text: body,
                };
                items.push(self.block(c)?);
            }
        }
        Ok(Node { kind: NodeKind::Seq(items), span })
    }

    fn map(&mut self, indent: usize) -> Result<Node, ParseError> {
        let first = self.lines[self.pos].clone();
        let span = self.span(first.no, first.col0, 1);
        let mut entries: Vec<(Key, Node)> = Vec::new();
        while self.pos < self.lines.len() {
            let line = self.lines[self.pos].clone();
            if line.indent > indent {
                return Err(self.err_at(line.no, line.col0, line.text.chars().count(), "unexpected indentation"));
            }
            if line.indent < indent {
                break;
            }
            if is_seq_item(&line.text) {
                return Err(self.err_at(line.no, line.col0, 1, "sequence item where a mapping key was expected"));
            }
            let Some((key, key_len, rest_off)) = split_key(&line.text) else {
                return Err(self.err_at(line.no, line.col0, line.text.chars().count(), "expected `key: value`"));
            };
            let key = Key {
                text: key,
                span: self.span(line.no, line.col0, key_len),
            };
            if entries.iter().any(|(k, _)| k.text == key.text) {
                return Err(ParseError::new(key.span.clone(), format!("duplicate key `{}`", key.text)));
            }
            let rest: String = line.text.chars().skip(rest_off).collect();
            let lead = rest.chars().take_while(|c| *c == ' ').count();
            let rest_trim = rest.trim();
            let value = if rest_trim.is_empty() {
                self.pos += 1;
                let nested = self.pos < self.lines.len()
                    && (self.lines[self.pos].indent > indent
                        || (self.lines[self.pos].indent == indent && is_seq_item(&self.lines[self.pos].text)));
                if nested {
                    let inner = self.lines[self.pos].indent;
                    self.block(inner)?
                } else {
                    Node {
                        kind: NodeKind::Scalar { text: String::new(), quoted: false },
                        span: key.span.clone(),
                    }
                }
            } else {
                let node = inline(rest_trim, line.no, line.col0 + rest_off + lead, self.file)?;
                self.pos += 1;
                node
            };
            entries.push((key, value));
        }
        Ok(Node { kind: NodeKind::Map(entries), span })
    }
}

/// Splits `key: rest`, returning (key, key length in chars, char offset of rest).
fn split_key(text: &str) -> Option<(String, usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    if chars.is_empty() || matches!(chars[0], '{' | '[') {
        return None;
    }
    if chars[0] == '"' || chars[0] == '\'' {
        let q = chars[0];
        let mut i = 1;
        let mut key = String::new();
        while i < chars.len() {
            if chars[i] == q {
                if q == '\'' && i + 1 < chars.len() && chars[i + 1] == '\'' {
                    key.push('\'');
                    i += 2;
                    continue;
                }
                break;
            }
            if q == '"' && chars[i] == '\\' && i + 1 < chars.len() {
                key.push(chars[i + 1]);
                i += 2;
                continue;
            }
            key.push(chars[i]);
            i += 1;
        }
        if i >= chars.len() {
            return None;
        }
        let after = i + 1;
        if after < chars.len() && chars[after] == ':' && (after + 1 == chars.len() || chars[after + 1] == ' ') {
            return Some((key, after, after + 1));
        }
        return None;
    }
    for i in 0..chars.len() {
        if chars[i] == ':' && (i + 1 == chars.len() || chars[i + 1] == ' ') {
            if i == 0 {
                return None;
            }
            let key: String = chars[..i].iter().collect();
            let key = key.trim_end().to_string();
            if key.is_empty() {
                return None;
            }
            return Some((key, i, i + 1));
        }
    }
    None
}

fn inline(text: &str, line: u32, col0: usize, file: &str) -> Result<Node, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut p = Flow { chars: &chars, i: 0, line, col0, file };
    let first = chars[0];
    let node = match first {
        '{' | '[' | '"' | '\'' => {
            let n = p.value(false)?;
            p.ws();
            if p.i < chars.len() {
                return Err(p.err(p.i, "unexpected characters after value"));
            }
            n
        }
        '&' | '*' | '!' | '|' | '>' | '%' | '@' | '`' => {
            return Err(p.err(0, format!("unsupported YAML feature `{first}`")));
        }
        _ => Node {
            kind: NodeKind::Scalar {
                text: text.trim().to_string(),
                quoted: false,
            },
            span: p.span(0, chars.len()),
        },
    };
    Ok(node)
}

struct Flow<'a> {
    chars: &'a [char],
    i: usize,
    line: u32,
    col0: usize,
    file: &'a str,
}

impl<'a> Flow<'a> {
    fn span(&self, at: usize, len: usize) -> SourceSpan {
        let start = (self.col0 + at) as u32 + 1;
        SourceSpan::new(self.file, self.line, start, start + len.max(1) as u32 - 1)
    }

    fn err(&self, at: usize, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.span(at, 1), msg)
    }

    fn ws(&mut self) {
        while self.i < self.chars.len() && self.chars[self.i] == ' ' {
            self.i += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn value(&mut self, in_flow: bool) -> Result<Node, ParseError> {
        self.ws();
        match self.peek() {
            None => Err(self.err(self.i, "missing value")),
            Some('{') => self.flow_map(),
            Some('[') => self.flow_seq(),
            Some('"') | Some('\'') => self.quoted(),
            Some(_) if in_flow => self.plain(&[',', '}', ']']),
            Some(_) => self.plain(&[]),
        }
    }

    fn quoted(&mut self) -> Result<Node, ParseError> {
        let start = self.i;
        let q = self.chars[self.i];
        self.i += 1;
        let mut text = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(self.err(start, "unterminated quoted string"));
            };
            self.i += 1;
            if c == q {
                if q == '\'' && self.peek() == Some('\'') {
                    text.push('\'');
                    self.i += 1;
                    continue;
                }
                break;
            }
            if q == '"' && c == '\\' {
                let Some(e) = self.peek() else {
                    return Err(self.err(start, "unterminated quoted string"));
                };
                self.i += 1;
                text.push(match e {
                    '"' => '"',
                    '\\' => '\\',
                    '/' => '/',
                    'n' => '\n',
                    't' => '\t',
                    other => return Err(self.err(self.i - 2, format!("unsupported escape `\\{other}`"))),
                });
                continue;
            }
            text.push(c);
        }
        Ok(Node {
            kind: NodeKind::Scalar { text, quoted: true },
            span: self.span(start, self.i - start),
        })
    }

    /// Plain scalar ending at one of `stops` outside brackets.
    fn plain(&mut self, stops: &[char]) -> Result<Node, ParseError> {
        let start = self.i;
        let mut depth = 0usize;
        while let Some(c) = self.peek() {
            if depth == 0 && stops.contains(&c) {
                break;
            }
            match c {
                '[' | '(' => depth += 1,
                ']' | ')' if depth > 0 => depth -= 1,
                _ => {}
            }
            self.i += 1;
        }
        let text: String = self.chars[start..self.i].iter().collect();
        let trimmed = text.trim_end().to_string();
        if trimmed.is_empty() {
            return Err(self.err(start, "missing value"));
        }
        Ok(Node {
            span: self.span(start, trimmed.chars().count()),
            kind: NodeKind::Scalar { text: trimmed, quoted: false },
        })
    }

    fn flow_key(&mut self) -> Result<Key, ParseError> {
        self.ws();
        let start = self.i;
        if matches!(self.peek(), Some('"') | Some('\'')) {
            let n = self.quoted()?;
            let NodeKind::Scalar { text, .. } = n.kind else { unreachable!() };
            return Ok(Key { text, span: n.span });
        }
        while let Some(c) = self.peek() {
            if c == ':' || c == ',' || c == '}' {
                break;
            }
            self.i += 1;
        }
        let text: String = self.chars[start..self.i].iter().collect();
        let text = text.trim_end().to_string();
        if text.is_empty() {
            return Err(self.err(start, "missing key in flow mapping"));
        }
        Ok(Key {
            span: self.span(start, text.chars().count()),
            text,
        })
    }

    fn flow_map(&mut self) -> Result<Node, ParseError> {
        let start = self.i;
        self.i += 1;
        let mut entries: Vec<(Key, Node)> = Vec::new();
        self.ws();
        if self.peek() == Some('}') {
            self.i += 1;
            return Ok(Node {
                kind: NodeKind::Map(entries),
                span: self.span(start, self.i - start),
            });
        }
        loop {
            let key = self.flow_key()?;
            self.ws();
            if self.peek() != Some(':') {
                return Err(self.err(self.i.min(self.chars.len().saturating_sub(1)), "expected `:` in flow mapping"));
            }
            self.i += 1;
            let value = self.value(true)?;
            if entries.iter().any(|(k, _)| k.text == key.text) {
                return Err(ParseError::new(key.span, format!("duplicate key `{}`", key.text)));
            }
            entries.push((key, value));
            self.ws();
            match self.peek() {
                Some(',') => self.i += 1,
                Some('}') => {
                    self.i += 1;
                    break;
                }
                _ => return Err(self.err(start, "unterminated flow mapping")),
            }
        }
        Ok(Node {
            kind: NodeKind::Map(entries),
            span: self.span(start, self.i - start),
        })
    }

    fn flow_seq(&mut self) -> Result<Node, ParseError> {
        let start = self.i;
        self.i += 1;
        let mut items = Vec::new();
        self.ws();
        if self.peek() == Some(']') {
            self.i += 1;
            return Ok(Node {
                kind: NodeKind::Seq(items),
                span: self.span(start, self.i - start),
            });
        }
        loop {
            items.push(self.value(true)?);
            self.ws();
            match self.peek() {
                Some(',') => self.i += 1,
                Some(']') => {
                    self.i += 1;
                    break;
                }
                _ => return Err(self.err(start, "unterminated flow sequence")),
            }
        }
        Ok(Node {
            kind: NodeKind::Seq(items),
            span: self.span(start, self.i - start),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_keys(n: &Node) -> Vec<String> {
        match &n.kind {
            NodeKind::Map(e) => e.iter().map(|(k, _)| k.text.clone()).collect(),
            _ => panic!("not a map"),
        }
    }

    #[test]
    fn reads_full_model_document() {
        let src = "#comment\n---\nA:\n  - T:\n     - C: {entry: BV[5]}\nB: \"x # y\"\nN: 33 \n";
        let root = parse(src, "t").unwrap();
        assert_eq!(map_keys(&root), vec!["A", "B", "N"]);
        let NodeKind::Map(e) = &root.kind else { panic!() };
        assert_eq!(e[1].1.as_scalar(), Some("x # y"));
        assert_eq!(e[2].1.as_scalar(), Some("33"));
        let NodeKind::Seq(items) = &e[0].1.kind else { panic!() };
        let NodeKind::Map(t) = &items[0].kind else { panic!() };
        let NodeKind::Seq(cs) = &t[0].1.kind else { panic!() };
        let NodeKind::Map(c) = &cs[0].kind else { panic!() };
        let NodeKind::Map(fields) = &c[0].1.kind else { panic!() };
        assert_eq!(fields[0].0.text, "entry");
        assert_eq!(fields[0].1.as_scalar(), Some("BV[5]"));
    }

    #[test]
    fn seq_items_continue_as_maps() {
        let src = "E:\n  - Name: \"a\"\n    Delay: 1\n  - Name: b\n";
        let root = parse(src, "t").unwrap();
        let NodeKind::Map(e) = &root.kind else { panic!() };
        let NodeKind::Seq(items) = &e[0].1.kind else { panic!() };
        assert_eq!(items.len(), 2);
        assert_eq!(map_keys(&items[0]), vec!["Name", "Delay"]);
        assert_eq!(items[0].span.line, 2);
    }

    #[test]
    fn errors_carry_locations() {
        for bad in ["a: 1\n   b: 2\n", "a: {x: 1\n", "a: \"open\n", "\tx: 1\n", "a: 1\na: 2\n", "", "a: &x 1\n"] {
            let e = parse(bad, "f").unwrap_err();
            assert!(e.span.line >= 1 && e.span.col_start >= 1, "{bad:?} -> {e}");
        }
    }

    #[test]
    fn quote_inside_plain_word_is_literal() {
        let root = parse("A: ALWAYS x.y'=1 # c\n", "t").unwrap();
        let NodeKind::Map(e) = &root.kind else { panic!() };
        assert_eq!(e[0].1.as_scalar(), Some("ALWAYS x.y'=1"));
    }
}
