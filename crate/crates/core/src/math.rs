//! Log-space helpers.

pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// `ln(e^a + e^b)`; `-inf` is the additive identity.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

/// Log-sum-exp over a slice, summed in slice order.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut acc = 0.0;
    for &v in values {
        acc += libm::exp(v - max);
    }
    max + libm::log(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_2pi_constant() {
        assert!((LN_2PI - ln(2.0 * core::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn log_add_identity_and_symmetry() {
        assert_eq!(log_add(f64::NEG_INFINITY, 1.5), 1.5);
        assert_eq!(log_add(-2.0, f64::NEG_INFINITY), -2.0);
        let v = log_add(ln(0.2), ln(0.4));
        assert!((v - ln(0.6)).abs() < 1e-15);
        assert_eq!(log_add(0.3, -1.0), log_add(-1.0, 0.3));
    }

    #[test]
    fn log_sum_exp_all_neg_inf() {
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[0.0, 0.0]) - ln(2.0)).abs() < 1e-15);
    }
}
