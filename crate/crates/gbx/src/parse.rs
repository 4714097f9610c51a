//! Recursive-descent parser for the `.gbx` DSL.
//!
//! Grammar (statements end with `;`, `//` starts a line comment):
//!
//! ```text
//! document  := context stmt*
//! context   := "context" "base" "(" names ")" "fiber" "(" names ")"
//!              [ "chart" "(" name (">"|"<") "0" { "," ... } ")" ] ";"
//! stmt      := "let" NAME ":" kind "=" expr ";"
//!            | "check" NAME "(" expr { "," expr } ")" [ "expect" ("pass"|"fail") ] ";"
//!            | "print" expr ";"
//!            | "analyze" expr [ "sample" "(" NAME "=" rat { "," ... } ")" ] ";"
//! kind      := "scalar" | "form"K | "vec"K | "endo" | "structure" | "element"
//! expr      := additive with `+ -` < `* /` < `^` < unary `-`;
//!              `^` is the wedge product (or exponentiation on scalars),
//!              `d(e)`, `bb(u,v)`, `sch(u,v)` are built-in calls.
//! ```

use crate::ast::{ContextDecl, Document, Expectation, Expr, Kind, Span, Stmt};
use crate::error::DslError;
use crate::lex::{tokenize, Token, TokenKind};
use gbx_core::scalar::Rat;

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn span(&self) -> Span {
        Span {
            line: self.peek().line,
            col: self.peek().col,
        }
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> DslError {
        DslError::Syntax {
            line: self.peek().line,
            col: self.peek().col,
            message: message.into(),
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, DslError> {
        if self.peek().kind == kind {
            Ok(self.advance())
        } else {
            Err(self.error(format!("expected {what}, found {}", self.peek().describe())))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Span), DslError> {
        let span = self.span();
        match self.peek().kind.clone() {
            TokenKind::Ident(s) => {
                self.advance();
                Ok((s, span))
            }
            _ => Err(self.error(format!(
                "expected an identifier, found {}",
                self.peek().describe()
            ))),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<Span, DslError> {
        let span = self.span();
        match &self.peek().kind {
            TokenKind::Ident(s) if s == kw => {
                self.advance();
                Ok(span)
            }
            _ => Err(self.error(format!(
                "expected `{kw}`, found {}",
                self.peek().describe()
            ))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if s == kw)
    }

    fn name_list(&mut self) -> Result<Vec<String>, DslError> {
        self.expect(TokenKind::LParen, "`(`")?;
        let mut names = Vec::new();
        loop {
            let (name, _) = self.expect_ident()?;
            names.push(name);
            if self.peek().kind == TokenKind::Comma {
                self.advance();
            } else {
                break;
            }
        }
        self.expect(TokenKind::RParen, "`)`")?;
        Ok(names)
    }

    fn context_decl(&mut self) -> Result<ContextDecl, DslError> {
        let span = self.expect_keyword("context")?;
        self.expect_keyword("base")?;
        let base = self.name_list()?;
        self.expect_keyword("fiber")?;
        let fiber = self.name_list()?;
        let mut chart = Vec::new();
        if self.at_keyword("chart") {
            self.advance();
            self.expect(TokenKind::LParen, "`(`")?;
            loop {
                let (name, nspan) = self.expect_ident()?;
                let positive = match self.peek().kind {
                    TokenKind::Greater => true,
                    TokenKind::Less => false,
                    _ => return Err(self.error("expected `>` or `<` in chart constraint")),
                };
                self.advance();
                let zero = self.expect(TokenKind::Int("0".into()), "`0`");
                if zero.is_err() {
                    return Err(self.error("chart constraints compare against 0"));
                }
                chart.push((name, positive, nspan));
                if self.peek().kind == TokenKind::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
            self.expect(TokenKind::RParen, "`)`")?;
        }
        self.expect(TokenKind::Semicolon, "`;`")?;
        Ok(ContextDecl {
            base,
            fiber,
            chart,
            span,
        })
    }

    fn kind(&mut self) -> Result<Kind, DslError> {
        let (name, span) = self.expect_ident()?;
        let parse_k = |digits: &str| -> Option<u32> { digits.parse().ok() };
        match name.as_str() {
            "scalar" => Ok(Kind::Scalar),
            "endo" => Ok(Kind::Endo),
            "structure" => Ok(Kind::Structure),
            "element" => Ok(Kind::Element),
            s if s.starts_with("form") && parse_k(&s[4..]).is_some() => {
                Ok(Kind::Form(parse_k(&s[4..]).expect("checked")))
            }
            s if s.starts_with("vec") && parse_k(&s[3..]).is_some() => {
                Ok(Kind::Multivector(parse_k(&s[3..]).expect("checked")))
            }
            other => Err(DslError::Syntax {
                line: span.line,
                col: span.col,
                message: format!("unknown kind `{other}`"),
            }),
        }
    }

    fn rational(&mut self) -> Result<Rat, DslError> {
        let neg = if self.peek().kind == TokenKind::Minus {
            self.advance();
            true
        } else {
            false
        };
        let num = match self.peek().kind.clone() {
            TokenKind::Int(s) => {
                self.advance();
                s.parse::<i64>()
                    .map_err(|_| self.error("integer literal out of range"))?
            }
            _ => return Err(self.error("expected a number")),
        };
        let den = if self.peek().kind == TokenKind::Slash {
            self.advance();
            match self.peek().kind.clone() {
                TokenKind::Int(s) => {
                    self.advance();
                    s.parse::<i64>()
                        .map_err(|_| self.error("integer literal out of range"))?
                }
                _ => return Err(self.error("expected a denominator")),
            }
        } else {
            1
        };
        if den == 0 {
            return Err(self.error("zero denominator"));
        }
        let mut r = Rat::new(num.into(), den.into());
        if neg {
            r = -r;
        }
        Ok(r)
    }

    fn statement(&mut self) -> Result<Stmt, DslError> {
        let span = self.span();
        if self.at_keyword("let") {
            self.advance();
            let (name, _) = self.expect_ident()?;
            self.expect(TokenKind::Colon, "`:`")?;
            let kind = self.kind()?;
            self.expect(TokenKind::Equals, "`=`")?;
            let value = self.expr()?;
            self.expect(TokenKind::Semicolon, "`;`")?;
            Ok(Stmt::Let {
                name,
                kind,
                value,
                span,
            })
        } else if self.at_keyword("check") {
            self.advance();
            let (kind, _) = self.expect_ident()?;
            self.expect(TokenKind::LParen, "`(`")?;
            let mut args = Vec::new();
            if self.peek().kind != TokenKind::RParen {
                loop {
                    args.push(self.expr()?);
                    if self.peek().kind == TokenKind::Comma {
                        self.advance();
                    } else {
                        break;
                    }
                }
            }
            self.expect(TokenKind::RParen, "`)`")?;
            let mut expect = Expectation::Pass;
            if self.at_keyword("expect") {
                self.advance();
                if self.at_keyword("pass") {
                    self.advance();
                } else if self.at_keyword("fail") {
                    self.advance();
                    expect = Expectation::Fail;
                } else {
                    return Err(self.error("expected `pass` or `fail`"));
                }
            }
            self.expect(TokenKind::Semicolon, "`;`")?;
            Ok(Stmt::Check {
                kind,
                args,
                expect,
                span,
            })
        } else if self.at_keyword("print") {
            self.advance();
            let value = self.expr()?;
            self.expect(TokenKind::Semicolon, "`;`")?;
            Ok(Stmt::Print { value, span })
        } else if self.at_keyword("analyze") {
            self.advance();
            let form = self.expr()?;
            let mut sample = Vec::new();
            if self.at_keyword("sample") {
                self.advance();
                self.expect(TokenKind::LParen, "`(`")?;
                loop {
                    let (name, nspan) = self.expect_ident()?;
                    self.expect(TokenKind::Equals, "`=`")?;
                    let value = self.rational()?;
                    sample.push((name, value, nspan));
                    if self.peek().kind == TokenKind::Comma {
                        self.advance();
                    } else {
                        break;
                    }
                }
                self.expect(TokenKind::RParen, "`)`")?;
            }
            self.expect(TokenKind::Semicolon, "`;`")?;
            Ok(Stmt::Analyze { form, sample, span })
        } else {
            Err(self.error(format!(
                "expected a statement (`let`, `check`, `print`, `analyze`), found {}",
                self.peek().describe()
            )))
        }
    }

    pub fn expr(&mut self) -> Result<Expr, DslError> {
        let span = self.span();
        let mut lhs = self.term()?;
        loop {
            match self.peek().kind {
                TokenKind::Plus => {
                    self.advance();
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs), span);
                }
                TokenKind::Minus => {
                    self.advance();
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs), span);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let span = self.span();
        let mut lhs = self.unary()?;
        loop {
            match self.peek().kind {
                TokenKind::Star => {
                    self.advance();
                    let rhs = self.unary()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs), span);
                }
                TokenKind::Slash => {
                    self.advance();
                    let rhs = self.unary()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs), span);
                }
                _ => return Ok(lhs),
            }
        }
    }

    /// Unary minus binds looser than `^`: `-x^k` is `-(x^k)`.
    fn unary(&mut self) -> Result<Expr, DslError> {
        let span = self.span();
        if self.peek().kind == TokenKind::Minus {
            self.advance();
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner), span));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let span = self.span();
        let mut lhs = self.primary()?;
        while self.peek().kind == TokenKind::Caret {
            self.advance();
            // The exponent side may itself carry a sign (`p1^-2`).
            let rhs = if self.peek().kind == TokenKind::Minus {
                self.unary()?
            } else {
                self.primary()?
            };
            lhs = Expr::Caret(Box::new(lhs), Box::new(rhs), span);
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Expr, DslError> {
        let span = self.span();
        match self.peek().kind.clone() {
            TokenKind::Int(s) => {
                self.advance();
                let n = s
                    .parse::<i64>()
                    .map_err(|_| self.error("integer literal out of range"))?;
                Ok(Expr::Int(n, span))
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                self.advance();
                if self.peek().kind == TokenKind::LParen
                    && matches!(name.as_str(), "d" | "bb" | "sch")
                {
                    self.advance();
                    let mut args = Vec::new();
                    if self.peek().kind != TokenKind::RParen {
                        loop {
                            args.push(self.expr()?);
                            if self.peek().kind == TokenKind::Comma {
                                self.advance();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(TokenKind::RParen, "`)`")?;
                    Ok(Expr::Call(name, args, span))
                } else {
                    Ok(Expr::Name(name, span))
                }
            }
            _ => Err(self.error(format!(
                "expected an expression, found {}",
                self.peek().describe()
            ))),
        }
    }
}

/// Parse a complete document (context declaration plus statements).
pub fn parse_document(text: &str) -> Result<Document, DslError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let context = p.context_decl()?;
    let mut statements = Vec::new();
    while p.peek().kind != TokenKind::Eof {
        statements.push(p.statement()?);
    }
    Ok(Document {
        context,
        statements,
    })
}

/// Parse a standalone expression (used by the `ma` and `jacobi` subcommands
/// and by the round-trip property).
pub fn parse_expr(text: &str) -> Result<Expr, DslError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    if p.peek().kind != TokenKind::Eof {
        return Err(p.error(format!(
            "unexpected trailing {}",
            p.peek().describe()
        )));
    }
    Ok(e)
}
