use super::{Arith, Chart, Node};

// Binding strength; higher binds tighter.
const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

pub(crate) fn render(node: &Node, chart: Option<&Chart>) -> String {
    let mut out = String::new();
    write(node, chart, 0, &mut out);
    out
}

fn level(node: &Node) -> u8 {
    match node {
        Node::Const(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => NEG,
        Node::Const(_) | Node::Pi | Node::Coord(_) | Node::Func(..) => ATOM,
        Node::Partial(..) | Node::Compose(..) | Node::Solve(..) => ATOM,
        Node::Neg(_) => NEG,
        Node::Bin(Arith::Add | Arith::Sub, ..) => ADD,
        Node::Bin(Arith::Mul | Arith::Div, ..) => MUL,
        Node::Pow(..) => POW,
    }
}

fn write(node: &Node, chart: Option<&Chart>, min: u8, out: &mut String) {
    let own = level(node);
    let paren = own < min;
    if paren {
        out.push('(');
    }
    match node {
        Node::Const(v) => {
            if own == NEG {
                out.push('-');
                out.push_str(&format!("{}", -v));
            } else {
                out.push_str(&format!("{v}"));
            }
        }
        Node::Pi => out.push_str("pi"),
        Node::Coord(i) => match chart.and_then(|c| c.coords().get(*i)) {
            Some(name) => out.push_str(name),
            None => out.push_str(&format!("x{i}")),
        },
        Node::Neg(a) => {
            out.push('-');
            write(a, chart, NEG, out);
        }
        Node::Func(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write(a, chart, 0, out);
            out.push(')');
        }
        Node::Bin(op, a, b) => {
            let (sym, lvl) = match op {
                Arith::Add => (" + ", ADD),
                Arith::Sub => (" - ", ADD),
                Arith::Mul => ("*", MUL),
                Arith::Div => ("/", MUL),
            };
            write(a, chart, lvl, out);
            out.push_str(sym);
            write(b, chart, lvl + 1, out);
        }
        Node::Pow(a, p) => {
            write(a, chart, ATOM, out);
            out.push('^');
            if *p < 0.0 {
                out.push_str(&format!("(-{})", -p));
            } else {
                out.push_str(&format!("{p}"));
            }
        }
        Node::Partial(a, i) => {
            out.push_str(&format!("D{i}["));
            write(a, chart, 0, out);
            out.push(']');
        }
        Node::Compose(a, args) => {
            out.push_str("compose[");
            write(a, None, 0, out);
            out.push_str("; ");
            for (k, g) in args.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write(g, chart, 0, out);
            }
            out.push(']');
        }
        Node::Solve(sys, k) => {
            out.push_str(&format!("solve[{}]#{k}", sys.label()));
        }
    }
    if paren {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse_expr, Chart};
    use std::sync::Arc;

    #[test]
    fn prints_with_minimal_parentheses() {
        let ch = Arc::new(Chart::new("c", &["q", "p"]).unwrap());
        let cases = [
            ("q^2 + p^2", "q^2 + p^2"),
            ("(q+p)*(q-p)", "(q + p)*(q - p)"),
            ("-q^2", "-q^2"),
            ("(-q)^2", "(-q)^2"),
            ("q - (p - 1)", "q - (p - 1)"),
            ("q/(p*2)", "q/(p*2)"),
            ("q^-1", "q^(-1)"),
            ("2^3^2", "2^9"),
        ];
        for (src, want) in cases {
            assert_eq!(parse_expr(src, &ch).unwrap().to_string(), want, "{src}");
        }
    }
}
