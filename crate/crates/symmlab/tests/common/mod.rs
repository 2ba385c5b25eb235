//! Shared oracles for the integration suites. These are deliberately
//! independent of the library's evaluation paths: plain power series and
//! structural JSON comparison.

#![allow(dead_code)]

/// Modified Bessel function of the first kind, order zero:
/// `I0(x) = sum_k (x/2)^{2k} / (k!)^2`.
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 1.0_f64;
    while term > 1e-18 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// `I1(x) = I0'(x) = sum_k (x/2)^{2k+1} / (k! (k+1)!)`.
pub fn bessel_i1(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = x / 2.0;
    let mut sum = term;
    let mut k = 1.0_f64;
    while term.abs() > 1e-18 * sum.abs().max(1e-300) {
        term *= q / (k * (k + 1.0));
        sum += term;
        k += 1.0;
    }
    sum
}

/// Structural comparison of two JSON values: strings/bools exact, numbers to
/// a relative/absolute tolerance, arrays and objects recursively with equal
/// shape. Returns the first mismatch path.
pub fn json_close(
    a: &serde_json::Value,
    b: &serde_json::Value,
    rel: f64,
    abs: f64,
) -> Result<(), String> {
    fn walk(
        a: &serde_json::Value,
        b: &serde_json::Value,
        rel: f64,
        abs: f64,
        path: &str,
    ) -> Result<(), String> {
        use serde_json::Value::*;
        match (a, b) {
            (Number(x), Number(y)) => {
                let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
                if (x - y).abs() <= abs + rel * x.abs().max(y.abs()) {
                    Ok(())
                } else {
                    Err(format!("{path}: {x} vs {y}"))
                }
            }
            (Array(xs), Array(ys)) => {
                if xs.len() != ys.len() {
                    return Err(format!("{path}: array lengths {} vs {}", xs.len(), ys.len()));
                }
                for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
                    walk(x, y, rel, abs, &format!("{path}[{i}]"))?;
                }
                Ok(())
            }
            (Object(xs), Object(ys)) => {
                if xs.len() != ys.len() {
                    let ka: Vec<_> = xs.keys().collect();
                    let kb: Vec<_> = ys.keys().collect();
                    return Err(format!("{path}: keys {ka:?} vs {kb:?}"));
                }
                for (k, x) in xs {
                    let y = ys
                        .get(k)
                        .ok_or_else(|| format!("{path}: missing key '{k}' on one side"))?;
                    walk(x, y, rel, abs, &format!("{path}.{k}"))?;
                }
                Ok(())
            }
            _ => {
                if a == b {
                    Ok(())
                } else {
                    Err(format!("{path}: {a} vs {b}"))
                }
            }
        }
    }
    walk(a, b, rel, abs, "$")
}
