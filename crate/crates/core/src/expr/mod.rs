//! Scalar fields over coordinate charts.
//!
//! A [`ScalarField`] is an immutable expression DAG. Parsed sources only use
//! constants, coordinates, the builtins `sin cos exp sqrt`, and arithmetic.
//! Operations elsewhere in the crate build derived nodes on top (partial
//! derivatives, composition with maps, pointwise linear solves), all of which
//! evaluate exactly in forward mode through [`Jet`].

pub mod jet;
pub mod parser;
mod print;

pub use jet::{Jet, Scalar};

use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::linalg::LinearSystem;
use parser::{BinOp, Syntax};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// A named coordinate domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    name: String,
    coords: Vec<String>,
    bounds: Option<Vec<(f64, f64)>>,
    sample_box: Option<Vec<(f64, f64)>>,
}

impl Chart {
    pub fn new<S: AsRef<str>>(name: &str, coords: &[S]) -> Result<Chart> {
        if coords.is_empty() {
            return Err(Error::Chart("a chart needs at least one coordinate".into()));
        }
        let coords: Vec<String> = coords.iter().map(|c| c.as_ref().to_string()).collect();
        for (i, c) in coords.iter().enumerate() {
            if c.is_empty() || !c.chars().next().is_some_and(|ch| ch == '_' || ch.is_alphabetic())
            {
                return Err(Error::Chart(format!("bad coordinate name {c:?}")));
            }
            if coords[..i].contains(c) {
                return Err(Error::Chart(format!("duplicate coordinate {c:?}")));
            }
        }
        Ok(Chart {
            name: name.to_string(),
            coords,
            bounds: None,
            sample_box: None,
        })
    }

    /// Restricts the chart to an open box.
    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Result<Chart> {
        if bounds.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: bounds.len(),
            });
        }
        if let Some((i, _)) = bounds.iter().enumerate().find(|(_, (lo, hi))| !(lo < hi)) {
            return Err(Error::Chart(format!(
                "empty interval for coordinate {}",
                self.coords[i]
            )));
        }
        self.bounds = Some(bounds);
        Ok(self)
    }

    /// Overrides the default sampling box.
    pub fn with_sample_box(mut self, sample_box: Vec<(f64, f64)>) -> Result<Chart> {
        if sample_box.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: sample_box.len(),
            });
        }
        self.sample_box = Some(sample_box);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn bounds(&self) -> Option<&[(f64, f64)]> {
        self.bounds.as_deref()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.bounds {
            None => x.iter().all(|v| v.is_finite()),
            Some(b) => x.iter().zip(b).all(|(v, (lo, hi))| lo < v && v < hi),
        }
    }

    /// Box used for default sample sets: an explicit override, otherwise the
    /// bounds intersected with `[-1, 1]` per coordinate.
    pub fn sample_box(&self) -> Vec<(f64, f64)> {
        if let Some(b) = &self.sample_box {
            return b.clone();
        }
        (0..self.dim())
            .map(|i| match &self.bounds {
                None => (-1.0, 1.0),
                Some(b) => {
                    let (lo, hi) = b[i];
                    let (l, h) = (lo.max(-1.0), hi.min(1.0));
                    if l < h {
                        (l, h)
                    } else {
                        (lo, hi)
                    }
                }
            })
            .collect()
    }

    /// The same coordinates with `extra` appended.
    pub fn extended(&self, name: &str, extra: &str, bound: (f64, f64), sample: (f64, f64)) -> Result<Chart> {
        let mut coords = self.coords.clone();
        coords.push(extra.to_string());
        let mut chart = Chart::new(name, &coords)?;
        let mut bounds = self
            .bounds
            .clone()
            .unwrap_or_else(|| vec![(f64::NEG_INFINITY, f64::INFINITY); self.dim()]);
        bounds.push(bound);
        chart.bounds = Some(bounds);
        let mut sb = self.sample_box();
        sb.push(sample);
        chart.sample_box = Some(sb);
        if self.bounds.is_none() && bound == (f64::NEG_INFINITY, f64::INFINITY) {
            chart.bounds = None;
        }
        Ok(chart)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Arith {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug)]
pub(crate) enum Node {
    Const(f64),
    Pi,
    Coord(usize),
    Neg(Arc<Node>),
    Func(Func, Arc<Node>),
    Bin(Arith, Arc<Node>, Arc<Node>),
    Pow(Arc<Node>, f64),
    /// Exact partial derivative of the child along a coordinate.
    Partial(Arc<Node>, usize),
    /// Child evaluated at the point given by the argument nodes.
    Compose(Arc<Node>, Vec<Arc<Node>>),
    /// One component of the least-squares solution of a pointwise system.
    Solve(Arc<LinearSystem>, usize),
}

impl Node {
    fn as_const(&self) -> Option<f64> {
        match self {
            Node::Const(v) => Some(*v),
            Node::Pi => Some(std::f64::consts::PI),
            _ => None,
        }
    }

    fn depends_on_point(&self) -> bool {
        has_coords(self)
    }

    pub(crate) fn eval<T: Scalar>(&self, x: &[T]) -> Result<T> {
        self.eval_in(x, None)
    }

    pub(crate) fn eval_in<T: Scalar>(&self, x: &[T], names: Option<&Chart>) -> Result<T> {
        match self {
            Node::Const(v) => Ok(T::from_f64(*v)),
            Node::Pi => Ok(T::from_f64(std::f64::consts::PI)),
            Node::Coord(i) => x.get(*i).cloned().ok_or(Error::Dimension {
                expected: *i + 1,
                found: x.len(),
            }),
            Node::Neg(a) => Ok(-a.eval_in(x, names)?),
            Node::Func(f, a) => {
                let v = a.eval_in(x, names)?;
                match f {
                    Func::Sin => Ok(v.sin()),
                    Func::Cos => Ok(v.cos()),
                    Func::Exp => Ok(v.exp()),
                    Func::Sqrt => {
                        let r = v.re();
                        if r < 0.0 || (r == 0.0 && !v.is_real()) || r.is_nan() {
                            return Err(self.domain(names, "square root of a non-positive value"));
                        }
                        Ok(v.sqrt())
                    }
                }
            }
            Node::Bin(op, a, b) => {
                let (u, v) = (a.eval_in(x, names)?, b.eval_in(x, names)?);
                match op {
                    Arith::Add => Ok(u + v),
                    Arith::Sub => Ok(u - v),
                    Arith::Mul => Ok(u * v),
                    Arith::Div => {
                        if v.re() == 0.0 {
                            return Err(self.domain(names, "division by zero"));
                        }
                        Ok(u.div(&v))
                    }
                }
            }
            Node::Pow(a, p) => {
                let v = a.eval_in(x, names)?;
                let r = v.re();
                if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
                    if r == 0.0 && *p < 0.0 {
                        return Err(self.domain(names, "division by zero"));
                    }
                    Ok(v.powi(*p as i32))
                } else {
                    if r < 0.0 || (r == 0.0 && (!v.is_real() || *p < 0.0)) {
                        return Err(self.domain(names, "fractional power of a non-positive value"));
                    }
                    Ok(v.powf(*p))
                }
            }
            Node::Partial(a, i) => {
                let jets: Vec<Jet> = x.iter().map(|v| v.to_jet()).collect();
                let unit = jets.iter().map(Jet::units).max().unwrap_or(0);
                let mut seeded = jets;
                let slot = seeded.get_mut(*i).ok_or(Error::Dimension {
                    expected: *i + 1,
                    found: x.len(),
                })?;
                *slot = slot.clone().seeded(unit);
                let out = a.eval_in(&seeded, names)?;
                Ok(T::from_jet(out.extract(unit)))
            }
            Node::Compose(inner, args) => {
                let y = args.iter().map(|g| g.eval_in(x, names)).collect::<Result<Vec<T>>>()?;
                inner.eval(&y)
            }
            Node::Solve(system, k) => {
                let sol = system.solve(x)?;
                Ok(sol[*k].clone())
            }
        }
    }

    fn domain(&self, names: Option<&Chart>, reason: &str) -> Error {
        Error::Domain {
            expr: print::render(self, names),
            reason: reason.to_string(),
        }
    }
}

// Smart constructors with light constant folding, used when operations build
// derived fields. They keep trees from filling up with `0 * ...` terms.
pub(crate) fn n_const(v: f64) -> Arc<Node> {
    Arc::new(Node::Const(v))
}

pub(crate) fn n_add(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => n_const(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Arc::new(Node::Bin(Arith::Add, a, b)),
    }
}

pub(crate) fn n_sub(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => n_const(x - y),
        (Some(x), _) if x == 0.0 => n_neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => Arc::new(Node::Bin(Arith::Sub, a, b)),
    }
}

pub(crate) fn n_mul(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => n_const(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => n_const(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => n_neg(b),
        (_, Some(y)) if y == -1.0 => n_neg(a),
        _ => Arc::new(Node::Bin(Arith::Mul, a, b)),
    }
}

pub(crate) fn n_div(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (a.as_const(), b.as_const()) {
        (Some(x), _) if x == 0.0 => n_const(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Arc::new(Node::Bin(Arith::Div, a, b)),
    }
}

pub(crate) fn n_neg(a: Arc<Node>) -> Arc<Node> {
    match &*a {
        Node::Const(v) => n_const(-v),
        Node::Neg(inner) => inner.clone(),
        _ => Arc::new(Node::Neg(a)),
    }
}

pub(crate) fn n_partial(a: &Arc<Node>, i: usize) -> Arc<Node> {
    match &**a {
        Node::Const(_) | Node::Pi => n_const(0.0),
        Node::Coord(j) => n_const(if *j == i { 1.0 } else { 0.0 }),
        _ => Arc::new(Node::Partial(a.clone(), i)),
    }
}

pub(crate) fn n_compose(inner: &Arc<Node>, args: &[Arc<Node>]) -> Arc<Node> {
    match &**inner {
        Node::Const(_) | Node::Pi => inner.clone(),
        Node::Coord(j) => args[*j].clone(),
        _ => Arc::new(Node::Compose(inner.clone(), args.to_vec())),
    }
}

/// Expression-backed real function on a chart.
#[derive(Clone)]
pub struct ScalarField {
    chart: Arc<Chart>,
    node: Arc<Node>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField[{}]({})", self.chart.name, self)
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render(&self.node, Some(&self.chart)))
    }
}

/// Parses `src` as a scalar field on `chart`.
pub fn parse_expr(src: &str, chart: &Arc<Chart>) -> Result<ScalarField> {
    ScalarField::parse_with(src, chart, &HashMap::new())
}

impl ScalarField {
    pub(crate) fn from_node(chart: &Arc<Chart>, node: Arc<Node>) -> ScalarField {
        ScalarField {
            chart: chart.clone(),
            node,
        }
    }

    pub(crate) fn node(&self) -> &Arc<Node> {
        &self.node
    }

    pub fn parse(src: &str, chart: &Arc<Chart>) -> Result<ScalarField> {
        parse_expr(src, chart)
    }

    /// Parses with named constants bound to literal values.
    pub fn parse_with(
        src: &str,
        chart: &Arc<Chart>,
        constants: &HashMap<String, f64>,
    ) -> Result<ScalarField> {
        let syntax = parser::parse_syntax(src)?;
        let node = lower_scalar(&syntax, chart, constants)?;
        Ok(ScalarField::from_node(chart, node))
    }

    pub fn constant(chart: &Arc<Chart>, v: f64) -> ScalarField {
        ScalarField::from_node(chart, n_const(v))
    }

    pub fn coordinate(chart: &Arc<Chart>, i: usize) -> ScalarField {
        assert!(i < chart.dim(), "coordinate index out of range");
        ScalarField::from_node(chart, Arc::new(Node::Coord(i)))
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    /// The constant value, if the field is syntactically constant.
    pub fn as_constant(&self) -> Option<f64> {
        self.node.as_const()
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    fn check_point<T>(&self, x: &[T]) -> Result<()> {
        if x.len() != self.chart.dim() {
            return Err(Error::Dimension {
                expected: self.chart.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.node.eval_in(x, Some(&self.chart))
    }

    /// Evaluation over any scalar type; used by the solvers and integrators.
    pub fn eval_generic<T: Scalar>(&self, x: &[T]) -> Result<T> {
        self.check_point(x)?;
        self.node.eval_in(x, Some(&self.chart))
    }

    /// Exact first partial derivative along coordinate `i`.
    pub fn partial(&self, x: &[f64], i: usize) -> Result<f64> {
        self.check_point(x)?;
        self.check_index(i)?;
        let pt: Vec<Jet> = x
            .iter()
            .enumerate()
            .map(|(k, v)| if k == i { Jet::variable(*v, 0) } else { Jet::constant(*v) })
            .collect();
        Ok(self.node.eval_in(&pt, Some(&self.chart))?.coeff(1))
    }

    /// Exact second partial derivative; symmetric in `(i, j)` bit for bit.
    pub fn second_partial(&self, x: &[f64], i: usize, j: usize) -> Result<f64> {
        self.check_point(x)?;
        self.check_index(i)?;
        self.check_index(j)?;
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let pt: Vec<Jet> = x
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let mut jv = Jet::constant(*v);
                if k == a {
                    jv = jv.seeded(0);
                }
                if k == b {
                    jv = jv.seeded(1);
                }
                jv
            })
            .collect();
        Ok(self.node.eval_in(&pt, Some(&self.chart))?.coeff(0b11))
    }

    /// Gradient by forward mode, one pass per coordinate.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        (0..self.chart.dim()).map(|i| self.partial(x, i)).collect()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.chart.dim() {
            return Err(Error::Dimension {
                expected: self.chart.dim(),
                found: i + 1,
            });
        }
        Ok(())
    }

    /// The derivative `∂f/∂x^i` as a field.
    pub fn derivative(&self, i: usize) -> ScalarField {
        ScalarField::from_node(&self.chart, n_partial(&self.node, i))
    }

    fn same_chart(&self, other: &ScalarField) -> Result<()> {
        if self.chart != other.chart {
            return Err(Error::ChartMismatch(
                self.chart.name.clone(),
                other.chart.name.clone(),
            ));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.same_chart(other)?;
        Ok(ScalarField::from_node(&self.chart, n_add(self.node.clone(), other.node.clone())))
    }

    pub fn try_sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.same_chart(other)?;
        Ok(ScalarField::from_node(&self.chart, n_sub(self.node.clone(), other.node.clone())))
    }

    pub fn try_mul(&self, other: &ScalarField) -> Result<ScalarField> {
        self.same_chart(other)?;
        Ok(ScalarField::from_node(&self.chart, n_mul(self.node.clone(), other.node.clone())))
    }

    pub fn try_div(&self, other: &ScalarField) -> Result<ScalarField> {
        self.same_chart(other)?;
        Ok(ScalarField::from_node(&self.chart, n_div(self.node.clone(), other.node.clone())))
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        ScalarField::from_node(&self.chart, n_mul(n_const(s), self.node.clone()))
    }

    pub fn neg(&self) -> ScalarField {
        ScalarField::from_node(&self.chart, n_neg(self.node.clone()))
    }

    pub fn recip(&self) -> ScalarField {
        ScalarField::from_node(&self.chart, n_div(n_const(1.0), self.node.clone()))
    }

    pub fn powi(&self, n: i32) -> ScalarField {
        ScalarField::from_node(&self.chart, Arc::new(Node::Pow(self.node.clone(), n as f64)))
    }

    pub fn sqrt(&self) -> ScalarField {
        ScalarField::from_node(&self.chart, Arc::new(Node::Func(Func::Sqrt, self.node.clone())))
    }

    /// `self ∘ args`: substitutes the fields `args` (all on one chart) for this
    /// field's coordinates.
    pub fn compose(&self, args: &[ScalarField]) -> Result<ScalarField> {
        if args.len() != self.chart.dim() {
            return Err(Error::Dimension {
                expected: self.chart.dim(),
                found: args.len(),
            });
        }
        let Some(first) = args.first() else {
            return Err(Error::Dimension { expected: 1, found: 0 });
        };
        for a in args {
            first.same_chart(a)?;
        }
        let nodes: Vec<Arc<Node>> = args.iter().map(|a| a.node.clone()).collect();
        Ok(ScalarField::from_node(&first.chart, n_compose(&self.node, &nodes)))
    }

    /// The same expression viewed on a chart whose leading coordinates are
    /// this chart's coordinates.
    pub fn lift_to(&self, chart: &Arc<Chart>) -> Result<ScalarField> {
        if chart.dim() < self.chart.dim() || chart.coords[..self.chart.dim()] != self.chart.coords[..] {
            return Err(Error::ChartMismatch(self.chart.name.clone(), chart.name.clone()));
        }
        Ok(ScalarField::from_node(chart, self.node.clone()))
    }

    /// Expression-only pretty print that the parser reads back.
    pub fn to_source(&self) -> String {
        self.to_string()
    }

    pub fn depends_on_point(&self) -> bool {
        self.node.depends_on_point()
    }
}

pub(crate) fn lower_scalar(
    s: &Syntax,
    chart: &Chart,
    constants: &HashMap<String, f64>,
) -> Result<Arc<Node>, ParseError> {
    Ok(match s {
        Syntax::Num(v) => n_const(*v),
        Syntax::Ident { name, offset } => {
            if let Some(i) = chart.coord_index(name) {
                Arc::new(Node::Coord(i))
            } else if let Some(v) = constants.get(name) {
                n_const(*v)
            } else if name == "pi" {
                Arc::new(Node::Pi)
            } else if let Some(_f) = Func::lookup(name) {
                return Err(ParseError {
                    offset: *offset,
                    kind: ParseErrorKind::Arity {
                        name: name.clone(),
                        expected: 1,
                        found: 0,
                    },
                });
            } else if is_differential(name, chart) {
                return Err(ParseError {
                    offset: *offset,
                    kind: ParseErrorKind::DifferentialInScalar(name.clone()),
                });
            } else {
                return Err(ParseError {
                    offset: *offset,
                    kind: ParseErrorKind::UnknownIdentifier(name.clone()),
                });
            }
        }
        Syntax::Call { name, args, offset } => {
            let Some(f) = Func::lookup(name) else {
                let kind = if chart.coord_index(name).is_some()
                    || constants.contains_key(name)
                    || name == "pi"
                {
                    ParseErrorKind::Arity {
                        name: name.clone(),
                        expected: 0,
                        found: args.len(),
                    }
                } else {
                    ParseErrorKind::UnknownIdentifier(name.clone())
                };
                return Err(ParseError { offset: *offset, kind });
            };
            if args.len() != 1 {
                return Err(ParseError {
                    offset: *offset,
                    kind: ParseErrorKind::Arity {
                        name: name.clone(),
                        expected: 1,
                        found: args.len(),
                    },
                });
            }
            Arc::new(Node::Func(f, lower_scalar(&args[0], chart, constants)?))
        }
        Syntax::Neg(a) => {
            let inner = lower_scalar(a, chart, constants)?;
            Arc::new(Node::Neg(inner))
        }
        Syntax::Binary { op, lhs, rhs, offset } => {
            let a = lower_scalar(lhs, chart, constants)?;
            if *op == BinOp::Pow {
                let b = lower_scalar(rhs, chart, constants)?;
                let p = fold_constant(&b).ok_or(ParseError {
                    offset: *offset,
                    kind: ParseErrorKind::NonConstantExponent,
                })?;
                return Ok(Arc::new(Node::Pow(a, p)));
            }
            let b = lower_scalar(rhs, chart, constants)?;
            let op = match op {
                BinOp::Add => Arith::Add,
                BinOp::Sub => Arith::Sub,
                BinOp::Mul => Arith::Mul,
                BinOp::Div => Arith::Div,
                BinOp::Pow => unreachable!(),
            };
            Arc::new(Node::Bin(op, a, b))
        }
    })
}

/// Evaluates a coordinate-free subtree.
fn fold_constant(n: &Node) -> Option<f64> {
    if has_coords(n) {
        return None;
    }
    n.eval::<f64>(&[]).ok()
}

fn has_coords(n: &Node) -> bool {
    match n {
        Node::Const(_) | Node::Pi => false,
        Node::Coord(_) | Node::Partial(..) | Node::Compose(..) | Node::Solve(..) => true,
        Node::Neg(a) | Node::Func(_, a) | Node::Pow(a, _) => has_coords(a),
        Node::Bin(_, a, b) => has_coords(a) || has_coords(b),
    }
}

/// `dX` where `X` is a coordinate and `dX` is not itself a coordinate.
pub(crate) fn is_differential(name: &str, chart: &Chart) -> bool {
    chart.coord_index(name).is_none()
        && name
            .strip_prefix('d')
            .is_some_and(|rest| chart.coord_index(rest).is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(coords: &[&str]) -> Arc<Chart> {
        Arc::new(Chart::new("test", coords).unwrap())
    }

    #[test]
    fn constant_and_polynomial() {
        let ch = chart(&["q", "p"]);
        assert_eq!(parse_expr("0", &ch).unwrap().eval(&[5.0, -2.0]).unwrap(), 0.0);
        let f = parse_expr("q^2 + p^2", &ch).unwrap();
        assert_eq!(f.eval(&[3.0, 4.0]).unwrap(), 25.0);
    }

    #[test]
    fn named_constants_bind_at_parse_time() {
        let ch = chart(&["q1", "p1", "q2", "p2"]);
        let consts: HashMap<String, f64> = [("a".to_string(), 1.0), ("b".to_string(), 2.0)].into();
        let h = ScalarField::parse_with("a*(q1^2+p1^2)+b*(q2^2+p2^2)", &ch, &consts).unwrap();
        assert_eq!(h.eval(&[1.0, 0.0, 0.0, 1.0]).unwrap(), 3.0);
        assert_eq!(h.eval(&[0.0, 0.0, 1.0, 0.0]).unwrap(), 2.0);
        // d/dp1 of H at (q1,p1)=(0,1) with a=1
        assert_eq!(h.partial(&[0.0, 1.0, 0.0, 0.0], 1).unwrap(), 2.0);
    }

    #[test]
    fn partials() {
        let ch = chart(&["q", "p"]);
        let f = parse_expr("q^2", &ch).unwrap();
        assert_eq!(f.partial(&[3.0, 0.0], 0).unwrap(), 6.0);
        let g = parse_expr("q*p", &ch).unwrap();
        assert_eq!(g.second_partial(&[0.3, 0.7], 0, 1).unwrap(), 1.0);
        assert_eq!(g.second_partial(&[0.3, 0.7], 1, 0).unwrap(), 1.0);
    }

    #[test]
    fn errors_carry_offsets() {
        let ch = chart(&["q", "p"]);
        let e = parse_expr("q + zz", &ch).unwrap_err();
        assert!(matches!(
            e,
            Error::Parse(ParseError { offset: 4, kind: ParseErrorKind::UnknownIdentifier(_) })
        ));
        let e = parse_expr("sin(q, p)", &ch).unwrap_err();
        assert!(matches!(
            e,
            Error::Parse(ParseError { offset: 0, kind: ParseErrorKind::Arity { found: 2, .. } })
        ));
        let e = parse_expr("2 * cos", &ch).unwrap_err();
        assert!(matches!(
            e,
            Error::Parse(ParseError { offset: 4, kind: ParseErrorKind::Arity { found: 0, .. } })
        ));
        let e = parse_expr("q^p", &ch).unwrap_err();
        assert!(matches!(
            e,
            Error::Parse(ParseError { offset: 1, kind: ParseErrorKind::NonConstantExponent })
        ));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let ch = chart(&["q", "p"]);
        let f = parse_expr("1 + sqrt(q - 1)", &ch).unwrap();
        match f.eval(&[0.0, 0.0]).unwrap_err() {
            Error::Domain { expr, .. } => assert_eq!(expr, "sqrt(q - 1)"),
            other => panic!("{other}"),
        }
        let g = parse_expr("p / q", &ch).unwrap();
        assert!(matches!(g.eval(&[0.0, 1.0]), Err(Error::Domain { .. })));
    }

    #[test]
    fn builtins_and_pi() {
        let ch = chart(&["x"]);
        let f = parse_expr("sin(pi/2) + cos(0) + exp(0) + sqrt(4)", &ch).unwrap();
        assert_eq!(f.eval(&[0.0]).unwrap(), 5.0);
        let g = parse_expr("x^-1 + x^(1/2)", &ch).unwrap();
        assert_eq!(g.eval(&[4.0]).unwrap(), 2.25);
    }

    #[test]
    fn duplicate_coordinates_rejected() {
        assert!(Chart::new("bad", &["q", "q"]).is_err());
    }
}
