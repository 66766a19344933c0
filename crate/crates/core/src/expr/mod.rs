//! Complex-valued functions of one real variable on `[0, 1]`.
//!
//! Expressions are parsed from a small infix language (see [`parse_function`]),
//! evaluated in double precision and printed back in a canonical form that
//! re-parses to a tree with bit-identical evaluation.

mod parser;

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use parser::parse_function;

/// Named unary functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    /// Fractional part of a real argument.
    Frac,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Frac => "frac",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "frac" => Func::Frac,
            _ => return None,
        })
    }
}

/// Exact rational constant together with its correctly rounded double.
#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    exact: BigRational,
    value: f64,
}

impl Constant {
    pub fn new(exact: BigRational) -> Self {
        let value = exact.to_f64().unwrap_or(f64::NAN);
        Constant { exact, value }
    }

    pub fn integer(v: i64) -> Self {
        Constant::new(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    fn is_integer(&self) -> bool {
        self.exact.is_integer()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Real(Constant),
    /// The imaginary unit `i`.
    Imag,
    Pi,
    Var,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Call(Func, Box<Node>),
    /// `indicator(a, b)`: 1 on the half-open interval `[a, b)`, 0 elsewhere.
    Indicator(Constant, Constant),
}

/// A parsed function of `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct FuncExpr {
    root: Node,
}

impl FuncExpr {
    pub fn new(root: Node) -> Self {
        FuncExpr { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// The constant function `c`.
    pub fn constant(c: i64) -> Self {
        FuncExpr::new(Node::Real(Constant::integer(c)))
    }

    /// The identity `x`, i.e. the Bishop weight.
    pub fn identity() -> Self {
        FuncExpr::new(Node::Var)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.root, Node::Var)
    }

    /// Evaluates at `x` in `[0, 1]`.
    pub fn evaluate(&self, x: f64) -> Result<Complex64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("x = {x} outside [0, 1]")));
        }
        let v = eval_node(&self.root, x)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::domain(format!("non-finite value at x = {x}")));
        }
        Ok(v)
    }

    /// Evaluates a function that must be real-valued at `x`.
    pub fn evaluate_real(&self, x: f64) -> Result<f64> {
        let v = self.evaluate(x)?;
        if v.im != 0.0 {
            return Err(Error::domain(format!("complex value {v} at x = {x} where a real was required")));
        }
        Ok(v.re)
    }

    /// Breakpoints of all indicator nodes, used for quadrature tolerances.
    pub fn indicator_breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        collect_breakpoints(&self.root, &mut out);
        out
    }
}

fn collect_breakpoints(node: &Node, out: &mut Vec<f64>) {
    match node {
        Node::Indicator(a, b) => {
            out.push(a.value());
            out.push(b.value());
        }
        Node::Neg(c) | Node::Pow(c, _) | Node::Call(_, c) => collect_breakpoints(c, out),
        Node::Add(l, r) | Node::Sub(l, r) | Node::Mul(l, r) | Node::Div(l, r) => {
            collect_breakpoints(l, out);
            collect_breakpoints(r, out);
        }
        Node::Real(_) | Node::Imag | Node::Pi | Node::Var => {}
    }
}

fn eval_node(node: &Node, x: f64) -> Result<Complex64> {
    let mut v = eval_raw(node, x)?;
    // A zero imaginary part is always +0, so folded and unfolded trees agree bitwise.
    if v.im == 0.0 {
        v.im = 0.0;
    }
    Ok(v)
}

fn eval_raw(node: &Node, x: f64) -> Result<Complex64> {
    Ok(match node {
        Node::Real(c) => Complex64::new(c.value, 0.0),
        Node::Imag => Complex64::new(0.0, 1.0),
        Node::Pi => Complex64::new(std::f64::consts::PI, 0.0),
        Node::Var => Complex64::new(x, 0.0),
        Node::Neg(c) => -eval_node(c, x)?,
        Node::Add(l, r) => eval_node(l, x)? + eval_node(r, x)?,
        Node::Sub(l, r) => eval_node(l, x)? - eval_node(r, x)?,
        Node::Mul(l, r) => mul(eval_node(l, x)?, eval_node(r, x)?),
        Node::Div(l, r) => {
            let num = eval_node(l, x)?;
            let den = eval_node(r, x)?;
            if den.re == 0.0 && den.im == 0.0 {
                return Err(Error::domain(format!("division by zero at x = {x}")));
            }
            div(num, den)
        }
        Node::Pow(b, k) => {
            let base = eval_node(b, x)?;
            if *k < 0 && base.re == 0.0 && base.im == 0.0 {
                return Err(Error::domain(format!("zero raised to negative power at x = {x}")));
            }
            if base.im == 0.0 {
                Complex64::new(base.re.powi(*k), 0.0)
            } else {
                base.powi(*k)
            }
        }
        Node::Call(func, arg) => {
            let a = eval_node(arg, x)?;
            apply_func(*func, a, x)?
        }
        Node::Indicator(a, b) => {
            if x >= a.value && x < b.value {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }
    })
}

// Real operands stay on the real axis exactly; the general complex formulas would
// introduce signed zeros and extra roundings.
fn mul(a: Complex64, b: Complex64) -> Complex64 {
    if a.im == 0.0 && b.im == 0.0 {
        Complex64::new(a.re * b.re, 0.0)
    } else {
        a * b
    }
}

fn div(a: Complex64, b: Complex64) -> Complex64 {
    if a.im == 0.0 && b.im == 0.0 {
        Complex64::new(a.re / b.re, 0.0)
    } else {
        a / b
    }
}

fn apply_func(func: Func, a: Complex64, x: f64) -> Result<Complex64> {
    let real = a.im == 0.0;
    Ok(match func {
        Func::Exp => {
            if real {
                Complex64::new(a.re.exp(), 0.0)
            } else {
                a.exp()
            }
        }
        Func::Log => {
            if real {
                if a.re <= 0.0 {
                    return Err(Error::domain(format!("log of non-positive real {} at x = {x}", a.re)));
                }
                Complex64::new(a.re.ln(), 0.0)
            } else {
                a.ln()
            }
        }
        Func::Sqrt => {
            if real {
                if a.re < 0.0 {
                    return Err(Error::domain(format!("sqrt of negative real {} at x = {x}", a.re)));
                }
                Complex64::new(a.re.sqrt(), 0.0)
            } else {
                a.sqrt()
            }
        }
        Func::Sin => {
            if real {
                Complex64::new(a.re.sin(), 0.0)
            } else {
                a.sin()
            }
        }
        Func::Cos => {
            if real {
                Complex64::new(a.re.cos(), 0.0)
            } else {
                a.cos()
            }
        }
        Func::Frac => {
            if !real {
                return Err(Error::domain(format!("frac of non-real {a} at x = {x}")));
            }
            Complex64::new(a.re - a.re.floor(), 0.0)
        }
    })
}

// Printing. Precedences: 1 additive, 2 multiplicative, 3 unary minus, 4 power, 5 atom.

fn constant_precedence(c: &Constant) -> u8 {
    if c.is_integer() {
        if c.exact.is_negative() {
            3
        } else {
            5
        }
    } else {
        2
    }
}

fn precedence(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(_) => 3,
        Node::Pow(..) => 4,
        Node::Real(c) => constant_precedence(c),
        _ => 5,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, node: &Node, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "(")?;
        write_node(f, node)?;
        write!(f, ")")
    } else {
        write_node(f, node)
    }
}

fn write_constant(f: &mut fmt::Formatter<'_>, c: &BigRational) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node) -> fmt::Result {
    match node {
        Node::Real(c) => write_constant(f, &c.exact),
        Node::Imag => write!(f, "i"),
        Node::Pi => write!(f, "pi"),
        Node::Var => write!(f, "x"),
        Node::Neg(c) => {
            write!(f, "-")?;
            write_child(f, c, precedence(c) < 3)
        }
        Node::Add(l, r) | Node::Sub(l, r) | Node::Mul(l, r) | Node::Div(l, r) => {
            let (p, op) = match node {
                Node::Add(..) => (1, " + "),
                Node::Sub(..) => (1, " - "),
                Node::Mul(..) => (2, "*"),
                _ => (2, "/"),
            };
            write_child(f, l, precedence(l) < p)?;
            write!(f, "{op}")?;
            write_child(f, r, precedence(r) <= p)
        }
        Node::Pow(b, k) => {
            write_child(f, b, precedence(b) <= 4)?;
            write!(f, "^{k}")
        }
        Node::Call(func, arg) => {
            write!(f, "{}(", func.name())?;
            write_node(f, arg)?;
            write!(f, ")")
        }
        Node::Indicator(a, b) => {
            write!(f, "indicator(")?;
            write_constant(f, &a.exact)?;
            write!(f, ", ")?;
            write_constant(f, &b.exact)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for FuncExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root)
    }
}

impl std::str::FromStr for FuncExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_function(s)
    }
}

impl Serialize for FuncExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FuncExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_function(&text).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn indicator_bounds_valid(a: &BigRational, b: &BigRational) -> bool {
    !a.is_negative() && a < b && *b <= BigRational::one() && !(a.is_zero() && b.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eval(text: &str, x: f64) -> Complex64 {
        parse_function(text).unwrap().evaluate(x).unwrap()
    }

    #[test]
    fn constant_literal() {
        let e = parse_function("1").unwrap();
        assert_eq!(e.root(), &Node::Real(Constant::integer(1)));
        assert_eq!(e.evaluate(0.37).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn polynomial_value() {
        assert_eq!(eval("x^2 + 1", 0.5), Complex64::new(1.25, 0.0));
    }

    #[test]
    fn exp_at_one() {
        assert_eq!(eval("exp(x)", 1.0).re, std::f64::consts::E);
    }

    #[test]
    fn indicator_is_half_open() {
        let e = parse_function("indicator(0.25, 0.5)").unwrap();
        assert_eq!(e.evaluate(0.3).unwrap().re, 1.0);
        assert_eq!(e.evaluate(0.6).unwrap().re, 0.0);
        assert_eq!(e.evaluate(0.25).unwrap().re, 1.0);
        assert_eq!(e.evaluate(0.5).unwrap().re, 0.0);
    }

    #[test]
    fn complex_constants() {
        let v = eval("(1 + 2*i)*x", 0.5);
        assert_eq!(v, Complex64::new(0.5, 1.0));
    }

    #[test]
    fn domain_errors() {
        let log = parse_function("log(x)").unwrap();
        assert!(matches!(log.evaluate(0.0), Err(Error::Domain(_))));
        let div = parse_function("1/(x - 1/2)").unwrap();
        assert!(matches!(div.evaluate(0.5), Err(Error::Domain(_))));
        let sqrt = parse_function("sqrt(x - 1)").unwrap();
        assert!(matches!(sqrt.evaluate(0.5), Err(Error::Domain(_))));
        assert!(sqrt.evaluate(1.0).is_ok());
        assert!(matches!(log.evaluate(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn fractions_are_exact_literals() {
        let e = parse_function("3/7").unwrap();
        match e.root() {
            Node::Real(c) => assert_eq!(c.exact(), &BigRational::new(3.into(), 7.into())),
            other => panic!("expected a literal, got {other:?}"),
        }
        assert_eq!(e.to_string(), "3/7");
        assert_eq!(parse_function("0.25").unwrap().to_string(), "1/4");
    }

    #[test]
    fn printer_keeps_structure() {
        for text in [
            "x - (1 - x)",
            "x/(3/7)",
            "-x^2",
            "(-3)^2",
            "(x + 1)^-2",
            "2*pi*x",
            "sin(2*pi*x) + cos(x)*i",
            "indicator(1/4, 1/2) + indicator(3/4, 1)",
            "frac(x + 1/3)",
        ] {
            let e = parse_function(text).unwrap();
            assert_eq!(e.to_string(), text, "printing {text}");
        }
    }

    #[test]
    fn frac_of_shift() {
        let v = eval("frac(x + 3/4)", 0.5);
        assert_eq!(v.re, 0.25);
    }

    fn arb_leaf() -> impl Strategy<Value = Node> {
        prop_oneof![
            (-20i64..20, 1i64..9).prop_map(|(n, d)| Node::Real(Constant::new(BigRational::new(n.into(), d.into())))),
            Just(Node::Var),
            Just(Node::Imag),
            Just(Node::Pi),
            (0i64..4, 1i64..4).prop_map(|(a, w)| {
                let a = BigRational::new(a.into(), 4.into());
                let b = (&a + BigRational::new(w.into(), 4.into())).min(BigRational::one());
                Node::Indicator(Constant::new(a), Constant::new(b))
            }),
        ]
    }

    fn arb_node() -> impl Strategy<Value = Node> {
        arb_leaf().prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|n| Node::Neg(Box::new(n))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Div(Box::new(a), Box::new(b))),
                (inner.clone(), -3i32..4).prop_map(|(a, k)| Node::Pow(Box::new(a), k)),
                (inner.clone(), prop_oneof![Just(Func::Exp), Just(Func::Sin), Just(Func::Cos), Just(Func::Frac)])
                    .prop_map(|(a, f)| Node::Call(f, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(node in arb_node(), x in 0.0f64..=1.0) {
            let e = FuncExpr::new(node);
            let text = e.to_string();
            let reparsed = parse_function(&text).unwrap();
            let text2 = reparsed.to_string();
            prop_assert_eq!(&parse_function(&text2).unwrap().to_string(), &text2);
            match (e.evaluate(x), reparsed.evaluate(x)) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(a.re.to_bits(), b.re.to_bits(), "{} vs {}", text, text2);
                    prop_assert_eq!(a.im.to_bits(), b.im.to_bits(), "{} vs {}", text, text2);
                }
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{text}: {a:?} vs {b:?}"),
            }
        }

        #[test]
        fn indicator_is_zero_or_one(a in 0u32..10, w in 1u32..10, x in 0.0f64..=1.0) {
            let b = (a + w).min(10);
            let e = parse_function(&format!("indicator({a}/10, {b}/10)")).unwrap();
            let v = e.evaluate(x).unwrap();
            prop_assert!(v == Complex64::new(1.0, 0.0) || v == Complex64::new(0.0, 0.0));
        }
    }
}
