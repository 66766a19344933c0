//! Parse function expressions and evaluate them, including piecewise ones.

use bishop::parse_function;

fn main() -> bishop::Result<()> {
    for text in ["x^2 + 1", "exp(2*pi*i*x)", "indicator(1/4, 1/2) + indicator(3/4, 1)", "frac(3*x) * sqrt(x)"] {
        let f = parse_function(text)?;
        let values: Vec<String> = [0.0, 0.3, 0.6, 0.9].iter().map(|&x| f.evaluate(x).map(|v| format!("{v:.4}"))).collect::<Result<_, _>>()?;
        println!("{f:<45} breakpoints {:?}  f(0, .3, .6, .9) = {}", f.indicator_breakpoints(), values.join(", "));
    }
    Ok(())
}
