//! Recursive-descent parser for the clause and expression mini-grammar.
//!
//! ```text
//! boolexpr  := disj
//! disj      := conj ("or" conj)*
//! conj      := neg ("and" neg)*
//! neg       := "not" neg | "true" | "false" | "(" boolexpr ")" | cmp
//! cmp       := arith ("=" | "!=" | "<" | "<=" | ">" | ">=") arith
//! arith     := term (("+" | "-") term)*
//! term      := NUM | "(" arith ")" | ref
//! ref       := IDENT "." IDENT ["'"] | "self" "." IDENT | "#" IDENT ["'"]
//!
//! triggers  := "None" | tclause (";" tclause)* [";"]
//! tclause   := ["IF" boolexpr ":"] "Trigger" IDENT "{" ("NONE" | IDENT "=" arith ("," IDENT "=" arith)*) "}"
//! changes   := "None" | sclause (";" sclause)* [";"]
//! sclause   := ["IF" boolexpr ":"] "SC" IDENT "." IDENT "<-" arith
//! assertion := ("ALWAYS" | "FINALLY") boolexpr
//! ```
//!
//! `TimingRecord.time` and `StepRecord.step` name the global time and step
//! counters. A parenthesis opening a comparison operand is resolved by
//! backtracking.

use crate::ast::{
    ArithOp, AssertionMode, BoolExpr, CmpOp, Expr, StateChangeClause, StateRef, TriggerClause, STEP_RECORD,
    TIMING_RECORD,
};

use super::lexer::{lex, Tok, Token};

pub const RESERVED: &[&str] = &["and", "or", "not", "true", "false", "self"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    /// 0-based char offset into the parsed string.
    pub pos: usize,
    pub message: String,
}

/// Where an expression appears; decides which references are legal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    /// Trigger/state-change clauses: `self.` allowed, primes not.
    Clause,
    /// Initial constraints and guards applied outside events.
    Constraint,
    Always,
    Finally,
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    ctx: Context,
}

type PResult<T> = Result<T, ExprError>;

impl Parser {
    fn new(text: &str, ctx: Context) -> PResult<Self> {
        let toks = lex(text).map_err(|e| ExprError {
            pos: e.pos,
            message: e.message,
        })?;
        Ok(Self { toks, i: 0, ctx })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> usize {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ExprError {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.err(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect(&mut self, t: Tok, wanted: &str) -> PResult<Token> {
        if *self.peek() == t {
            Ok(self.bump())
        } else {
            self.unexpected(wanted)
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self, wanted: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected(wanted),
        }
    }

    fn end(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err(format!("unexpected {} after expression", self.peek().describe()))
        }
    }

    fn bool_expr(&mut self) -> PResult<BoolExpr> {
        let mut lhs = self.conj()?;
        while self.is_kw("or") {
            self.bump();
            let rhs = self.conj()?;
            lhs = BoolExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> PResult<BoolExpr> {
        let mut lhs = self.neg()?;
        while self.is_kw("and") {
            self.bump();
            let rhs = self.neg()?;
            lhs = BoolExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn neg(&mut self) -> PResult<BoolExpr> {
        if self.is_kw("not") {
            self.bump();
            return Ok(BoolExpr::not(self.neg()?));
        }
        if self.is_kw("true") {
            self.bump();
            return Ok(BoolExpr::True);
        }
        if self.is_kw("false") {
            self.bump();
            return Ok(BoolExpr::False);
        }
        if *self.peek() == Tok::LParen {
            let save = self.i;
            self.bump();
            if let Ok(inner) = self.bool_expr() {
                if *self.peek() == Tok::RParen {
                    self.bump();
                    if !is_arith_or_cmp(self.peek()) {
                        return Ok(inner);
                    }
                }
            }
            self.i = save;
        }
        self.cmp()
    }

    fn cmp(&mut self) -> PResult<BoolExpr> {
        let lhs = self.arith()?;
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return self.unexpected("comparison operator"),
        };
        self.bump();
        let rhs = self.arith()?;
        Ok(BoolExpr::Cmp(op, lhs, rhs))
    }

    fn arith(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Lit(n))
            }
            Tok::LParen => {
                self.bump();
                let e = self.arith()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Hash => {
                self.bump();
                let event = self.ident("event name after `#`")?;
                let primed = self.prime()?;
                Ok(Expr::Count { event, primed })
            }
            Tok::Ident(_) => self.reference(),
            _ => self.unexpected("number, reference or `(`"),
        }
    }

    fn prime(&mut self) -> PResult<bool> {
        if *self.peek() != Tok::Prime {
            return Ok(false);
        }
        match self.ctx {
            Context::Always => {
                self.bump();
                Ok(true)
            }
            Context::Finally => self.err("primed reference illegal in FINALLY"),
            _ => self.err("primed reference only allowed in ALWAYS assertions"),
        }
    }

    fn reference(&mut self) -> PResult<Expr> {
        let start = self.pos();
        let head = self.ident("reference")?;
        if RESERVED.contains(&head.as_str()) && head != "self" {
            return Err(ExprError {
                pos: start,
                message: format!("keyword `{head}` cannot start a reference"),
            });
        }
        self.expect(Tok::Dot, "`.` in reference")?;
        let field_pos = self.pos();
        let field = self.ident("field name")?;
        if head == "self" {
            if self.ctx != Context::Clause {
                return Err(ExprError {
                    pos: start,
                    message: "`self.` carried-data reference outside an event clause".into(),
                });
            }
            if *self.peek() == Tok::Prime {
                return self.err("carried data cannot be primed");
            }
            return Ok(Expr::Data(field));
        }
        if head == TIMING_RECORD || head == STEP_RECORD {
            let want = if head == TIMING_RECORD { "time" } else { "step" };
            if field != want {
                return Err(ExprError {
                    pos: field_pos,
                    message: format!("`{head}` has only the field `{want}`"),
                });
            }
            let primed = self.prime()?;
            return Ok(if head == TIMING_RECORD {
                Expr::Time { primed }
            } else {
                Expr::Step { primed }
            });
        }
        let primed = self.prime()?;
        Ok(Expr::State(StateRef {
            instance: head,
            field,
            primed,
        }))
    }

    fn guard(&mut self) -> PResult<BoolExpr> {
        if self.is_kw("IF") {
            self.bump();
            let c = self.bool_expr()?;
            self.expect(Tok::Colon, "`:` after IF condition")?;
            Ok(c)
        } else {
            Ok(BoolExpr::True)
        }
    }

    fn trigger_clause(&mut self) -> PResult<TriggerClause> {
        let condition = self.guard()?;
        self.expect_kw("Trigger")?;
        let target = self.ident("event name")?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut assignments = Vec::new();
        if self.is_kw("NONE") {
            self.bump();
        } else {
            loop {
                let fpos = self.pos();
                let f = self.ident("data field name or NONE")?;
                if assignments.iter().any(|(n, _): &(String, Expr)| *n == f) {
                    return Err(ExprError {
                        pos: fpos,
                        message: format!("data field `{f}` assigned twice"),
                    });
                }
                self.expect(Tok::Eq, "`=`")?;
                let e = self.arith()?;
                assignments.push((f, e));
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(TriggerClause {
            condition,
            target,
            assignments,
        })
    }

    fn statechange_clause(&mut self) -> PResult<StateChangeClause> {
        let condition = self.guard()?;
        self.expect_kw("SC")?;
        let start = self.pos();
        let target = match self.reference()? {
            Expr::State(r) => r,
            _ => {
                return Err(ExprError {
                    pos: start,
                    message: "state-change target must be `instance.field`".into(),
                })
            }
        };
        self.expect(Tok::Arrow, "`<-`")?;
        let value = self.arith()?;
        Ok(StateChangeClause {
            condition,
            target,
            value,
        })
    }

    fn clause_list<T>(&mut self, mut one: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        if self.is_kw("None") && *self.peek_at(1) == Tok::Eof {
            return Ok(Vec::new());
        }
        if *self.peek() == Tok::Eof {
            return self.err("empty clause list (write `None`)");
        }
        let mut out = Vec::new();
        loop {
            out.push(one(self)?);
            match self.peek() {
                Tok::Semi => {
                    self.bump();
                    if *self.peek() == Tok::Eof {
                        break;
                    }
                }
                Tok::Eof => break,
                _ => return self.unexpected("`;` or end of clause list"),
            }
        }
        Ok(out)
    }
}

fn is_arith_or_cmp(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Plus | Tok::Minus | Tok::Eq | Tok::Ne | Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge
    )
}

pub fn bool_expr(text: &str, ctx: Context) -> Result<BoolExpr, ExprError> {
    let mut p = Parser::new(text, ctx)?;
    let e = p.bool_expr()?;
    p.end()?;
    Ok(e)
}

pub fn arith_expr(text: &str, ctx: Context) -> Result<Expr, ExprError> {
    let mut p = Parser::new(text, ctx)?;
    let e = p.arith()?;
    p.end()?;
    Ok(e)
}

pub fn triggers(text: &str) -> Result<Vec<TriggerClause>, ExprError> {
    let mut p = Parser::new(text, Context::Clause)?;
    p.clause_list(Parser::trigger_clause)
}

pub fn trigger_clause(text: &str) -> Result<TriggerClause, ExprError> {
    let mut p = Parser::new(text, Context::Clause)?;
    let c = p.trigger_clause()?;
    p.end()?;
    Ok(c)
}

pub fn statechanges(text: &str) -> Result<Vec<StateChangeClause>, ExprError> {
    let mut p = Parser::new(text, Context::Clause)?;
    p.clause_list(Parser::statechange_clause)
}

pub fn statechange_clause(text: &str) -> Result<StateChangeClause, ExprError> {
    let mut p = Parser::new(text, Context::Clause)?;
    let c = p.statechange_clause()?;
    p.end()?;
    Ok(c)
}

pub fn assertion(text: &str) -> Result<(AssertionMode, BoolExpr), ExprError> {
    let probe = Parser::new(text, Context::Constraint)?;
    let mode = if probe.is_kw("ALWAYS") {
        AssertionMode::Always
    } else if probe.is_kw("FINALLY") {
        AssertionMode::Finally
    } else {
        return probe.unexpected("`ALWAYS` or `FINALLY`");
    };
    let ctx = match mode {
        AssertionMode::Always => Context::Always,
        AssertionMode::Finally => Context::Finally,
    };
    let mut p = Parser { ctx, ..probe };
    p.bump();
    let body = p.bool_expr()?;
    p.end()?;
    Ok((mode, body))
}
