use std::sync::Arc;

use super::jet::{Jet, JetSpace, MAX_ORDER};
use super::{BinaryOp, Expr, ExprError, UnaryOp};

/// Intermediate value: subtrees free of the differentiated variables stay scalar.
enum Val {
    S(f64),
    J(Jet),
}

impl Val {
    fn value(&self) -> f64 {
        match self {
            Val::S(v) => *v,
            Val::J(j) => j.value(),
        }
    }
}

fn domain(node: &Expr, reason: &str) -> ExprError {
    ExprError::Domain {
        node: node.to_string(),
        reason: reason.to_string(),
    }
}

impl Expr {
    /// Plain evaluation at a dense point indexed by chart position.
    pub fn eval(&self, point: &[f64]) -> Result<f64, ExprError> {
        match self.eval_val(point, None)? {
            Val::S(v) => Ok(v),
            Val::J(j) => Ok(j.value()),
        }
    }

    /// Value and all mixed partials up to `order` with respect to the chart
    /// positions in `wrt`. Variable `wrt[k]` is jet variable `k`.
    pub fn eval_jet(&self, point: &[f64], order: usize, wrt: &[usize]) -> Result<Jet, ExprError> {
        if order > MAX_ORDER {
            return Err(ExprError::Order(order));
        }
        let space = JetSpace::get(wrt.len(), order);
        match self.eval_val(point, Some((&space, wrt)))? {
            Val::S(v) => Ok(Jet::constant(&space, v)),
            Val::J(j) => Ok(j),
        }
    }

    fn eval_val(&self, point: &[f64], jet: Option<(&Arc<JetSpace>, &[usize])>) -> Result<Val, ExprError> {
        Ok(match self {
            Expr::Const(c) => Val::S(*c),
            Expr::Var(i, name) => {
                let v = *point
                    .get(*i)
                    .ok_or_else(|| ExprError::Unbound(name.to_string()))?;
                if v.is_nan() {
                    return Err(ExprError::Unbound(name.to_string()));
                }
                match jet.and_then(|(s, wrt)| wrt.iter().position(|w| w == i).map(|k| (s, k))) {
                    Some((s, k)) => Val::J(Jet::variable(s, k, v)),
                    None => Val::S(v),
                }
            }
            Expr::Unary(op, a) => {
                let x = a.eval_val(point, jet)?;
                let v = x.value();
                match op {
                    UnaryOp::Log if v <= 0.0 => return Err(domain(self, "log of non-positive value")),
                    UnaryOp::Sqrt if v < 0.0 => return Err(domain(self, "sqrt of negative value")),
                    UnaryOp::Sqrt if v == 0.0 && matches!(x, Val::J(ref j) if j.order() > 0) => {
                        return Err(domain(self, "sqrt is not differentiable at 0"))
                    }
                    _ => {}
                }
                match x {
                    Val::S(v) => Val::S(match op {
                        UnaryOp::Neg => -v,
                        UnaryOp::Sqrt => v.sqrt(),
                        UnaryOp::Exp => v.exp(),
                        UnaryOp::Log => v.ln(),
                        UnaryOp::Sin => v.sin(),
                        UnaryOp::Cos => v.cos(),
                    }),
                    Val::J(j) => Val::J(match op {
                        UnaryOp::Neg => -j,
                        UnaryOp::Sqrt => j.sqrt(),
                        UnaryOp::Exp => j.exp(),
                        UnaryOp::Log => j.ln(),
                        UnaryOp::Sin => j.sin(),
                        UnaryOp::Cos => j.cos(),
                    }),
                }
            }
            Expr::Binary(op, a, b) => {
                let x = a.eval_val(point, jet)?;
                let y = b.eval_val(point, jet)?;
                if *op == BinaryOp::Div && y.value() == 0.0 {
                    return Err(domain(self, "division by zero"));
                }
                match (x, y) {
                    (Val::S(x), Val::S(y)) => Val::S(match op {
                        BinaryOp::Add => x + y,
                        BinaryOp::Sub => x - y,
                        BinaryOp::Mul => x * y,
                        BinaryOp::Div => x / y,
                    }),
                    (Val::J(x), Val::S(y)) => Val::J(match op {
                        BinaryOp::Add => x.add_scalar(y),
                        BinaryOp::Sub => x.add_scalar(-y),
                        BinaryOp::Mul => x.scale(y),
                        BinaryOp::Div => x.scale(1.0 / y),
                    }),
                    (Val::S(x), Val::J(y)) => Val::J(match op {
                        BinaryOp::Add => y.add_scalar(x),
                        BinaryOp::Sub => (-y).add_scalar(x),
                        BinaryOp::Mul => y.scale(x),
                        BinaryOp::Div => y.recip().scale(x),
                    }),
                    (Val::J(x), Val::J(y)) => Val::J(match op {
                        BinaryOp::Add => &x + &y,
                        BinaryOp::Sub => &x - &y,
                        BinaryOp::Mul => &x * &y,
                        BinaryOp::Div => &x / &y,
                    }),
                }
            }
            Expr::Pow(a, p) => {
                let x = a.eval_val(point, jet)?;
                let v = x.value();
                let integer = p.fract() == 0.0;
                if !integer && v < 0.0 {
                    return Err(domain(self, "non-integer power of negative base"));
                }
                if v == 0.0 && *p < 0.0 {
                    return Err(domain(self, "negative power of zero"));
                }
                match x {
                    Val::S(v) => Val::S(if integer { v.powi(*p as i32) } else { v.powf(*p) }),
                    Val::J(j) => {
                        if !integer && v == 0.0 && j.order() > 0 {
                            return Err(domain(self, "non-integer power is not differentiable at 0"));
                        }
                        Val::J(j.powf(*p))
                    }
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_expr, Chart};
    use super::*;

    #[test]
    fn hand_derivatives() {
        let c = Chart::finsler();
        let e = parse_expr("x1 * y1^2", &c).unwrap();
        let p = c
            .point(&[("x1", 2.0), ("x2", 0.0), ("x3", 0.0), ("x4", 0.0), ("y1", 3.0), ("y2", 0.0), ("y3", 0.0), ("y4", 0.0)])
            .unwrap();
        let x1 = c.index("x1").unwrap();
        let y1 = c.index("y1").unwrap();
        let j = e.eval_jet(&p, 3, &[x1, y1]).unwrap();
        assert_eq!(j.d(&[1, 1]), 4.0);
        assert_eq!(j.d(&[0, 1, 1]), 2.0);
    }

    #[test]
    fn constant_has_zero_partials() {
        let c = Chart::finsler();
        let e = parse_expr("5", &c).unwrap();
        let j = e.eval_jet(&[0.0; 8], 2, &[0, 1, 4]).unwrap();
        assert_eq!(j.value(), 5.0);
        assert!(j.coeffs()[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn domain_errors_name_node() {
        let c = Chart::finsler();
        let e = parse_expr("1 + log(x1 - 1)", &c).unwrap();
        match e.eval(&[0.5; 8]) {
            Err(ExprError::Domain { node, .. }) => assert_eq!(node, "log(x1 - 1.0)"),
            other => panic!("unexpected {other:?}"),
        }
        let d = parse_expr("y1 / (x1 - x1)", &c).unwrap();
        assert!(matches!(d.eval_jet(&[1.0; 8], 1, &[4]), Err(ExprError::Domain { .. })));
        let s = parse_expr("sqrt(x2)", &c).unwrap();
        assert!(matches!(s.eval(&[-1.0; 8]), Err(ExprError::Domain { .. })));
    }

    #[test]
    fn integer_power_of_negative_base() {
        let c = Chart::finsler();
        let e = parse_expr("x1^3", &c).unwrap();
        let j = e.eval_jet(&[-2.0; 8], 2, &[0]).unwrap();
        assert_eq!(j.value(), -8.0);
        assert_eq!(j.d(&[0]), 12.0);
    }

    #[test]
    fn order_zero_is_plain_arithmetic() {
        let c = Chart::finsler();
        let e = parse_expr("sin(x1) * exp(y2) / (1 + x3^2) - sqrt(y4)", &c).unwrap();
        let p = [0.3, 0.0, 1.2, 0.0, 0.0, -0.4, 0.0, 2.5];
        let plain = 0.3f64.sin() * (-0.4f64).exp() / (1.0 + 1.2f64 * 1.2) - 2.5f64.sqrt();
        let j = e.eval_jet(&p, 0, &[0, 5]).unwrap();
        assert_eq!(j.value(), plain);
        assert_eq!(e.eval(&p).unwrap(), plain);
    }
}
