//! Tokenizer for the `.gbx` DSL.
//!
//! Every token carries the 1-based line and column of its first byte so that
//! parse and type errors point at the offending source location.

use crate::error::DslError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// Identifier: letters, digits, `_`, optionally prefixed by `@` (the
    /// vector-field spelling `@q1` of a θ generator).
    Ident(String),
    /// Unsigned integer literal.
    Int(String),
    LParen,
    RParen,
    Comma,
    Semicolon,
    Colon,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Less,
    Greater,
    Equals,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: u32,
    pub col: u32,
}

impl Token {
    pub fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Int(s) => format!("integer `{s}`"),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Semicolon => "`;`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Plus => "`+`".into(),
            TokenKind::Minus => "`-`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Slash => "`/`".into(),
            TokenKind::Caret => "`^`".into(),
            TokenKind::Less => "`<`".into(),
            TokenKind::Greater => "`>`".into(),
            TokenKind::Equals => "`=`".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, DslError> {
    let mut tokens = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let advance = |chars: &mut std::iter::Peekable<std::str::Chars>,
                           line: &mut u32,
                           col: &mut u32| {
            let c = chars.next();
            if c == Some('\n') {
                *line += 1;
                *col = 1;
            } else if c.is_some() {
                *col += 1;
            }
            c
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                advance(&mut chars, &mut line, &mut col);
            }
            '/' => {
                advance(&mut chars, &mut line, &mut col);
                if chars.peek() == Some(&'/') {
                    // Line comment.
                    while let Some(&c2) = chars.peek() {
                        if c2 == '\n' {
                            break;
                        }
                        advance(&mut chars, &mut line, &mut col);
                    }
                } else {
                    tokens.push(Token {
                        kind: TokenKind::Slash,
                        line: tline,
                        col: tcol,
                    });
                }
            }
            '(' | ')' | ',' | ';' | ':' | '+' | '-' | '*' | '^' | '<' | '>' | '=' => {
                advance(&mut chars, &mut line, &mut col);
                let kind = match c {
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    ',' => TokenKind::Comma,
                    ';' => TokenKind::Semicolon,
                    ':' => TokenKind::Colon,
                    '+' => TokenKind::Plus,
                    '-' => TokenKind::Minus,
                    '*' => TokenKind::Star,
                    '^' => TokenKind::Caret,
                    '<' => TokenKind::Less,
                    '>' => TokenKind::Greater,
                    _ => TokenKind::Equals,
                };
                tokens.push(Token {
                    kind,
                    line: tline,
                    col: tcol,
                });
            }
            '0'..='9' => {
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_digit() {
                        s.push(c2);
                        advance(&mut chars, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Int(s),
                    line: tline,
                    col: tcol,
                });
            }
            '@' | '_' | 'a'..='z' | 'A'..='Z' => {
                let mut s = String::new();
                if c == '@' {
                    s.push('@');
                    advance(&mut chars, &mut line, &mut col);
                }
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '_' {
                        s.push(c2);
                        advance(&mut chars, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                if s == "@" || s.is_empty() {
                    return Err(DslError::Syntax {
                        line: tline,
                        col: tcol,
                        message: "`@` must be followed by a coordinate name".into(),
                    });
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(s),
                    line: tline,
                    col: tcol,
                });
            }
            other => {
                return Err(DslError::Syntax {
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        line,
        col,
    });
    Ok(tokens)
}
