//! Abstract syntax of a `.gbx` document.

use gbx_core::scalar::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64, Span),
    Name(String, Span),
    /// Built-in call: `d(e)`, `bb(u,v)`, `sch(u,v)`.
    Call(String, Vec<Expr>, Span),
    Neg(Box<Expr>, Span),
    Add(Box<Expr>, Box<Expr>, Span),
    Sub(Box<Expr>, Box<Expr>, Span),
    Mul(Box<Expr>, Box<Expr>, Span),
    Div(Box<Expr>, Box<Expr>, Span),
    /// `u ^ v`: wedge product, or exponentiation when `v` is a rational
    /// constant and `u` is a scalar.
    Caret(Box<Expr>, Box<Expr>, Span),
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Int(_, s)
            | Expr::Name(_, s)
            | Expr::Call(_, _, s)
            | Expr::Neg(_, s)
            | Expr::Add(_, _, s)
            | Expr::Sub(_, _, s)
            | Expr::Mul(_, _, s)
            | Expr::Div(_, _, s)
            | Expr::Caret(_, _, s) => *s,
        }
    }
}

/// Declared kind of a `let` binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    Scalar,
    Form(u32),
    Multivector(u32),
    Endo,
    Structure,
    Element,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Kind::Scalar => write!(f, "scalar"),
            Kind::Form(k) => write!(f, "form{k}"),
            Kind::Multivector(k) => write!(f, "vec{k}"),
            Kind::Endo => write!(f, "endo"),
            Kind::Structure => write!(f, "structure"),
            Kind::Element => write!(f, "element"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Let {
        name: String,
        kind: Kind,
        value: Expr,
        span: Span,
    },
    Check {
        kind: String,
        args: Vec<Expr>,
        expect: Expectation,
        span: Span,
    },
    Print {
        value: Expr,
        span: Span,
    },
    Analyze {
        form: Expr,
        sample: Vec<(String, Rat, Span)>,
        span: Span,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextDecl {
    pub base: Vec<String>,
    pub fiber: Vec<String>,
    /// `(coordinate, positive?)` chart constraints.
    pub chart: Vec<(String, bool, Span)>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub context: ContextDecl,
    pub statements: Vec<Stmt>,
}
