use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};

use crate::contract::SourceSpan;
use crate::diagnostics::{Diagnostic, DiagnosticKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Decimal(BigRational),
    Prime,
    Colon,
    Semi,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Arrow,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Decimal(_) => "decimal literal".into(),
            Tok::Prime => "`'`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`<>`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Arrow => "`=>`".into(),
            Tok::Eof => "end of file".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// Splits `text` into tokens. Unrecognised characters produce a
/// `LexError` diagnostic and are skipped. The result always ends in `Eof`.
pub fn lex(text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut diags = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    while i < chars.len() {
        let c = chars[i];
        let start_col = col;
        let span = |len: usize| SourceSpan::new(line, start_col, len as u32);

        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            toks.push(Token {
                tok: Tok::Ident(word),
                span: span(i - start),
            });
            col += (i - start) as u32;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_part: String = chars[start..i].iter().collect();
            let tok = if chars.get(i) == Some(&'.')
                && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())
            {
                i += 1;
                let fstart = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let frac: String = chars[fstart..i].iter().collect();
                Tok::Decimal(decimal(&int_part, &frac))
            } else {
                Tok::Int(int_part.parse().expect("digits"))
            };
            toks.push(Token {
                tok,
                span: span(i - start),
            });
            col += (i - start) as u32;
            continue;
        }

        let two: Option<Tok> = match (c, chars.get(i + 1)) {
            ('<', Some('=')) => Some(Tok::Le),
            ('>', Some('=')) => Some(Tok::Ge),
            ('<', Some('>')) => Some(Tok::Ne),
            ('!', Some('=')) => Some(Tok::Ne),
            ('=', Some('>')) => Some(Tok::Arrow),
            _ => None,
        };
        if let Some(tok) = two {
            toks.push(Token { tok, span: span(2) });
            i += 2;
            col += 2;
            continue;
        }
        let one = match c {
            '\'' => Some(Tok::Prime),
            ':' => Some(Tok::Colon),
            ';' => Some(Tok::Semi),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '=' => Some(Tok::Eq),
            '<' => Some(Tok::Lt),
            '>' => Some(Tok::Gt),
            _ => None,
        };
        match one {
            Some(tok) => toks.push(Token { tok, span: span(1) }),
            None => diags.push(Diagnostic::new(
                DiagnosticKind::LexError,
                Some(span(1)),
                format!("unexpected character `{c}`"),
            )),
        }
        i += 1;
        col += 1;
    }
    toks.push(Token {
        tok: Tok::Eof,
        span: SourceSpan::new(line, col, 1),
    });
    (toks, diags)
}

fn decimal(int_part: &str, frac: &str) -> BigRational {
    let digits: BigInt = format!("{int_part}{frac}").parse().expect("digits");
    let denom: BigInt = Pow::pow(BigInt::from(10u32), frac.len() as u32);
    if frac.is_empty() {
        BigRational::new(digits, BigInt::one())
    } else {
        BigRational::new(digits, denom)
    }
}
