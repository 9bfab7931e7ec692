//! Bessel functions of the first kind for the Jacobi-Anger coefficients.

use crate::{Error, Result};

/// Largest argument accepted by [`bessel_j`].
pub const MAX_ARGUMENT: f64 = 2.0;

const TERMS: usize = 20;

/// J₀(x) or J₁(x) from the ascending power series.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > MAX_ARGUMENT {
        return Err(Error::InvalidArgument(format!(
            "Bessel argument {x} outside validated range |x| <= {MAX_ARGUMENT}"
        )));
    }
    match order {
        0 => Ok(j0(x)),
        1 => Ok(j1(x)),
        n => Err(Error::InvalidArgument(format!("Bessel order {n} not supported"))),
    }
}

fn series(order: u32, x: f64) -> f64 {
    // Σ_k (−1)^k (x/2)^{2k+n} / (k! (k+n)!)
    let h = 0.5 * x;
    let mut term = if order == 0 { 1.0 } else { h };
    let mut sum = term;
    let q = -h * h;
    for k in 1..TERMS {
        term *= q / (k as f64 * (k + order as usize) as f64);
        sum += term;
    }
    sum
}

/// J₀(x); accurate to 1e-15 for |x| ≤ 2.
pub fn j0(x: f64) -> f64 {
    series(0, x)
}

/// J₁(x); accurate to 1e-15 for |x| ≤ 2.
pub fn j1(x: f64) -> f64 {
    series(1, x)
}

/// Solves J₁(x) = value for x on the rising branch 0 ≤ x ≤ 1.8.
pub fn j1_inverse(value: f64) -> Result<f64> {
    // J₁ peaks at x ≈ 1.8412 with J₁ ≈ 0.5819.
    if !(0.0..0.58).contains(&value) {
        return Err(Error::InvalidArgument(format!("J1 = {value} not invertible on the rising branch")));
    }
    let mut x = 2.0 * value;
    for _ in 0..50 {
        let f = j1(x) - value;
        // J₁' = J₀ − J₁/x
        let df = if x > 0.0 { j0(x) - j1(x) / x } else { 0.5 };
        let step = f / df;
        x -= step;
        if step.abs() < 1e-16 * x.max(1e-300) {
            break;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        assert!(bessel_j(1, 2.5).is_err());
        assert!(bessel_j(2, 0.1).is_err());
    }

    #[test]
    fn reference_values() {
        // mpmath besselj at 30 digits.
        assert!((j1(0.2) - 0.099_500_832_639_236_00).abs() < 1e-15);
        assert!((j0(0.5) - 0.938_469_807_240_812_904).abs() < 1e-15);
        assert!((j1(0.5) - 0.242_268_457_674_873_9).abs() < 1e-15);
        assert!((j0(2.0) - 0.223_890_779_141_235_668).abs() < 1e-14);
        assert!((j1(2.0) - 0.576_724_807_756_873_4).abs() < 1e-14);
    }

    #[test]
    fn small_argument_form() {
        assert!((j1(0.1) - 0.05).abs() < 6.3e-5);
        // |J₁(x) − x/2| / (x/2) = x²/8 − x⁴/192 + …
        let x = 0.26;
        let rel = (j1(x) - x / 2.0).abs() / (x / 2.0);
        assert!((rel / (x * x / 8.0) - 1.0).abs() < 0.01, "{rel}");
        assert!((rel - x * x / 8.0 + x.powi(4) / 192.0).abs() < 1e-7, "{rel}");
    }

    #[test]
    fn inverse_round_trip() {
        for x in [1e-4, 0.01, 0.2555, 0.7, 1.5] {
            let back = j1_inverse(j1(x)).unwrap();
            assert!((back - x).abs() < 1e-13, "{x} -> {back}");
        }
        assert!(j1_inverse(0.7).is_err());
    }
}
