//! Tokenizer for clause and expression strings.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u64),
    Dot,
    Prime,
    Hash,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Arrow,
    Plus,
    Minus,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Dot => ".",
            Tok::Prime => "'",
            Tok::Hash => "#",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Arrow => "<-",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            _ => "",
        }
    }
}

/// A token with its 0-based char offset and length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: usize,
    pub len: usize,
}

/// Lexing failure at a char offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub pos: usize,
    pub message: String,
}

pub fn lex(text: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                pos: start,
                len: i - start,
            });
            continue;
        }
        if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                return Err(LexError {
                    pos: i,
                    message: "identifier may not start with a digit".into(),
                });
            }
            let digits: String = chars[start..i].iter().collect();
            let n = digits.parse::<u64>().map_err(|_| LexError {
                pos: start,
                message: format!("integer literal `{digits}` exceeds 64 bits"),
            })?;
            out.push(Token {
                tok: Tok::Num(n),
                pos: start,
                len: i - start,
            });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('<', Some('-')) => (Tok::Arrow, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('=', _) => (Tok::Eq, 1),
            ('.', _) => (Tok::Dot, 1),
            ('\'', _) => (Tok::Prime, 1),
            ('#', _) => (Tok::Hash, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            (':', _) => (Tok::Colon, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            _ => {
                return Err(LexError {
                    pos: i,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push(Token { tok, pos: start, len });
        i += len;
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: chars.len(),
        len: 0,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrow_is_one_token() {
        let toks: Vec<Tok> = lex("SC a.b <- a.b+1").unwrap().into_iter().map(|t| t.tok).collect();
        assert!(toks.contains(&Tok::Arrow));
        assert!(!toks.contains(&Tok::Lt));
    }

    #[test]
    fn prime_and_comparisons() {
        let toks: Vec<Tok> = lex("x.y'<=3 != >").unwrap().into_iter().map(|t| t.tok).collect();
        assert_eq!(toks[3], Tok::Prime);
        assert_eq!(toks[4], Tok::Le);
        assert_eq!(toks[6], Tok::Ne);
        assert_eq!(toks[7], Tok::Gt);
    }

    #[test]
    fn rejects_bad_chars_with_position() {
        let e = lex("a * b").unwrap_err();
        assert_eq!(e.pos, 2);
        assert!(lex("99999999999999999999999").is_err());
    }
}
