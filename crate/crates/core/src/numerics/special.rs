//! Special functions needed by the closed-form solution families.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpecialError {
    #[error("E1 requires a positive argument, got {0}")]
    E1Domain(f64),
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Error function (fdlibm algorithm via `libm`).
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Exponential integral `E1(x) = Gamma(0, x)` for `x > 0`.
pub fn e1(x: f64) -> Result<f64, SpecialError> {
    if !(x > 0.0) {
        return Err(SpecialError::E1Domain(x));
    }
    if x <= 1.0 {
        // -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= -x / kf;
            let add = -term / kf;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return Ok(-EULER_GAMMA - x.ln() + sum);
    }
    // Continued fraction, modified Lentz.
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    Ok(h * (-x).exp())
}
