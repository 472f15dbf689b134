//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*          (form mode: juxtaposition also multiplies)
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?               (right associative)
//! primary := number | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! The parser is shared by scalar expressions and form literals; it produces a
//! [`Syntax`] tree that is lowered separately for each use.

use crate::error::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Syntax {
    Num(f64),
    Ident { name: String, offset: usize },
    Call {
        name: String,
        args: Vec<Syntax>,
        offset: usize,
    },
    Neg(Box<Syntax>),
    Binary {
        op: BinOp,
        lhs: Box<Syntax>,
        rhs: Box<Syntax>,
        offset: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
        }
    }
}

fn err(offset: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { offset, kind }
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = pos;
            let mut end = pos;
            let mut seen_exp = false;
            while let Some(&(p, d)) = chars.peek() {
                let take = d.is_ascii_digit()
                    || d == '.'
                    || (!seen_exp && (d == 'e' || d == 'E'))
                    || (seen_exp
                        && (d == '+' || d == '-')
                        && matches!(src[..p].chars().last(), Some('e' | 'E')));
                if !take {
                    break;
                }
                if d == 'e' || d == 'E' {
                    // only an exponent if a digit or sign follows
                    let rest = &src[p + 1..];
                    let next = rest.chars().next();
                    let ok = match next {
                        Some(n) if n.is_ascii_digit() => true,
                        Some('+' | '-') => rest[1..].starts_with(|n: char| n.is_ascii_digit()),
                        _ => false,
                    };
                    if !ok {
                        break;
                    }
                    seen_exp = true;
                }
                end = p + d.len_utf8();
                chars.next();
            }
            let text = &src[start..end];
            let v: f64 = text
                .parse()
                .map_err(|_| err(start, ParseErrorKind::BadNumber(text.to_string())))?;
            toks.push((Tok::Num(v), start));
            continue;
        }
        if is_ident_start(c) {
            let start = pos;
            let mut end = pos;
            while let Some(&(p, d)) = chars.peek() {
                if !is_ident_continue(d) {
                    break;
                }
                end = p + d.len_utf8();
                chars.next();
            }
            toks.push((Tok::Ident(src[start..end].to_string()), start));
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' | '\u{2212}' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            other => return Err(err(pos, ParseErrorKind::UnexpectedChar(other))),
        };
        toks.push((tok, pos));
        chars.next();
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    form_mode: bool,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        match self.bump() {
            Some((t, _)) if t == want => Ok(()),
            Some((t, o)) => Err(err(o, ParseErrorKind::UnexpectedToken(t.describe()))),
            None => Err(err(self.end, ParseErrorKind::UnexpectedEnd)),
        }
    }

    fn expr(&mut self) -> Result<Syntax, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let offset = self.offset();
            self.bump();
            let rhs = self.term()?;
            lhs = Syntax::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                offset,
            };
        }
    }

    fn term(&mut self) -> Result<Syntax, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let offset = self.offset();
            let op = match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    BinOp::Mul
                }
                Some(Tok::Slash) => {
                    self.bump();
                    BinOp::Div
                }
                Some(Tok::Ident(_) | Tok::LParen | Tok::Num(_)) if self.form_mode => BinOp::Mul,
                _ => return Ok(lhs),
            };
            let rhs = self.unary()?;
            lhs = Syntax::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                offset,
            };
        }
    }

    fn unary(&mut self) -> Result<Syntax, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            let inner = self.unary()?;
            return Ok(Syntax::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Syntax, ParseError> {
        let base = self.primary()?;
        if let Some(Tok::Caret) = self.peek() {
            let offset = self.offset();
            self.bump();
            let exp = self.unary()?;
            return Ok(Syntax::Binary {
                op: BinOp::Pow,
                lhs: Box::new(base),
                rhs: Box::new(exp),
                offset,
            });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Syntax, ParseError> {
        match self.bump() {
            Some((Tok::Num(v), _)) => Ok(Syntax::Num(v)),
            Some((Tok::Ident(name), offset)) => {
                if let Some(Tok::LParen) = self.peek() {
                    self.bump();
                    let mut args = Vec::new();
                    if let Some(Tok::RParen) = self.peek() {
                        self.bump();
                    } else {
                        loop {
                            args.push(self.expr()?);
                            match self.bump() {
                                Some((Tok::Comma, _)) => continue,
                                Some((Tok::RParen, _)) => break,
                                Some((t, o)) => {
                                    return Err(err(
                                        o,
                                        ParseErrorKind::UnexpectedToken(t.describe()),
                                    ))
                                }
                                None => return Err(err(self.end, ParseErrorKind::UnexpectedEnd)),
                            }
                        }
                    }
                    Ok(Syntax::Call { name, args, offset })
                } else {
                    Ok(Syntax::Ident { name, offset })
                }
            }
            Some((Tok::LParen, _)) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some((t, o)) => Err(err(o, ParseErrorKind::UnexpectedToken(t.describe()))),
            None => Err(err(self.end, ParseErrorKind::UnexpectedEnd)),
        }
    }
}

fn parse_with_mode(src: &str, form_mode: bool) -> Result<Syntax, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
        form_mode,
    };
    let tree = p.expr()?;
    if let Some((t, o)) = p.bump() {
        return Err(err(o, ParseErrorKind::UnexpectedToken(t.describe())));
    }
    Ok(tree)
}

/// Parses a scalar expression into a syntax tree.
pub fn parse_syntax(src: &str) -> Result<Syntax, ParseError> {
    parse_with_mode(src, false)
}

/// Parses a form literal; juxtaposition is read as multiplication.
pub fn parse_form_syntax(src: &str) -> Result<Syntax, ParseError> {
    parse_with_mode(src, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_of_unary_minus_and_power() {
        // -q^2 is -(q^2)
        let t = parse_syntax("-q^2").unwrap();
        assert!(matches!(t, Syntax::Neg(_)));
    }

    #[test]
    fn power_is_right_associative() {
        let t = parse_syntax("q^2^3").unwrap();
        match t {
            Syntax::Binary { op: BinOp::Pow, rhs, .. } => {
                assert!(matches!(*rhs, Syntax::Binary { op: BinOp::Pow, .. }))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reports_byte_offset() {
        let e = parse_syntax("q + * p").unwrap_err();
        assert_eq!(e.offset, 4);
        let e = parse_syntax("(q + p").unwrap_err();
        assert_eq!(e.offset, 6);
        assert_eq!(e.kind, ParseErrorKind::UnexpectedEnd);
        let e = parse_syntax("q $ p").unwrap_err();
        assert_eq!(e.offset, 2);
    }

    #[test]
    fn scientific_numbers() {
        assert_eq!(parse_syntax("1.5e-3").unwrap(), Syntax::Num(1.5e-3));
        assert_eq!(parse_syntax("2E2").unwrap(), Syntax::Num(200.0));
    }

    #[test]
    fn juxtaposition_only_in_form_mode() {
        assert!(parse_syntax("q dp").is_err());
        assert!(parse_form_syntax("q dp").is_ok());
    }
}
