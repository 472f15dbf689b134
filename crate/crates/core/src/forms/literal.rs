//! Form literals such as `dz - p*dq` or `0.5*(q dp - p dq)` or `dq^dp`.
//!
//! A literal is read with the expression grammar where `d<coord>` denotes a
//! coordinate differential, `*` and juxtaposition multiply (wedge), and `^`
//! between forms is the wedge product.

use super::KForm;
use crate::error::{ParseError, ParseErrorKind, Result};
use crate::expr::parser::{parse_form_syntax, BinOp, Syntax};
use crate::expr::{is_differential, lower_scalar, Chart, ScalarField};
use std::collections::HashMap;
use std::sync::Arc;

pub fn parse_form(src: &str, chart: &Arc<Chart>) -> Result<KForm> {
    parse_form_with(src, chart, &HashMap::new())
}

pub fn parse_form_with(src: &str, chart: &Arc<Chart>, constants: &HashMap<String, f64>) -> Result<KForm> {
    let syntax = parse_form_syntax(src)?;
    Ok(lower(&syntax, chart, constants)?)
}

fn mentions_differential(s: &Syntax, chart: &Chart) -> bool {
    match s {
        Syntax::Num(_) => false,
        Syntax::Ident { name, .. } => is_differential(name, chart),
        Syntax::Call { args, .. } => args.iter().any(|a| mentions_differential(a, chart)),
        Syntax::Neg(a) => mentions_differential(a, chart),
        Syntax::Binary { lhs, rhs, .. } => {
            mentions_differential(lhs, chart) || mentions_differential(rhs, chart)
        }
    }
}

fn form_err(offset: usize, msg: &str) -> ParseError {
    ParseError {
        offset,
        kind: ParseErrorKind::Form(msg.to_string()),
    }
}

fn lower(s: &Syntax, chart: &Arc<Chart>, constants: &HashMap<String, f64>) -> Result<KForm, ParseError> {
    if !mentions_differential(s, chart) {
        let node = lower_scalar(s, chart, constants)?;
        return Ok(KForm::scalar(&ScalarField::from_node(chart, node)));
    }
    match s {
        Syntax::Ident { name, .. } => {
            let i = chart.coord_index(&name[1..]).expect("checked by is_differential");
            Ok(KForm::differential(chart, i))
        }
        Syntax::Call { offset, name, .. } => Err(form_err(
            *offset,
            &format!("{name}() cannot be applied to a differential"),
        )),
        Syntax::Neg(a) => Ok(lower(a, chart, constants)?.neg()),
        Syntax::Num(_) => unreachable!(),
        Syntax::Binary { op, lhs, rhs, offset } => {
            let a = lower(lhs, chart, constants)?;
            match op {
                BinOp::Add | BinOp::Sub => {
                    let b = lower(rhs, chart, constants)?;
                    if a.degree() != b.degree() {
                        return Err(ParseError {
                            offset: *offset,
                            kind: ParseErrorKind::DegreeMismatch(a.degree(), b.degree()),
                        });
                    }
                    let b = if *op == BinOp::Sub { b.neg() } else { b };
                    Ok(a.add(&b).expect("same chart and degree"))
                }
                BinOp::Mul => {
                    let b = lower(rhs, chart, constants)?;
                    Ok(a.wedge(&b).expect("same chart"))
                }
                BinOp::Pow => {
                    if !mentions_differential(rhs, chart) {
                        return Err(form_err(*offset, "a form cannot be raised to a power"));
                    }
                    let b = lower(rhs, chart, constants)?;
                    Ok(a.wedge(&b).expect("same chart"))
                }
                BinOp::Div => {
                    if mentions_differential(rhs, chart) {
                        return Err(form_err(*offset, "cannot divide by a form"));
                    }
                    let den = ScalarField::from_node(chart, lower_scalar(rhs, chart, constants)?);
                    Ok(a.mul_field(&den.recip()).expect("same chart"))
                }
            }
        }
    }
}
