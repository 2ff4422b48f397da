//! Standard normal tail probabilities.

use crate::scalar::Real;

/// Beyond this argument the continued fraction for `erfc` converges faster
/// than the power series for `erf`.
const SERIES_LIMIT: f64 = 3.0;
const MAX_TERMS: usize = 500;

/// `erf(x)` for `x >= 0` from `2/√π e^{-x²} Σ 2^n x^{2n+1} / (2n+1)!!`,
/// a series with only positive terms.
fn erf_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    let two = T::lit(2.0);
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_TERMS {
        term *= two * x2 / T::from_count(2 * n + 1);
        sum += term;
        if term <= T::epsilon() * sum {
            break;
        }
    }
    two / T::PI().sqrt() * (-x2).exp() * sum
}

/// `erfc(x)` for large positive `x` from the continued fraction
/// `e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))`, modified Lentz.
fn erfc_continued_fraction<T: Real>(x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let half = T::lit(0.5);
    let mut f = x;
    let mut c = f;
    let mut d = T::zero();
    for n in 1..MAX_TERMS {
        let a = half * T::from_count(n);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        d = d.recip();
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if (delta - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    (-x * x).exp() / (T::PI().sqrt() * f)
}

/// Complementary error function for `x >= 0`.
fn erfc_nonneg<T: Real>(x: T) -> T {
    if x < T::lit(SERIES_LIMIT) {
        T::one() - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// `1 − Φ(z)`, the upper tail of the standard normal.
pub fn normal_sf<T: Real>(z: T) -> T {
    if z.is_nan() {
        return z;
    }
    let half = T::lit(0.5);
    let x = z.abs() / T::SQRT_2();
    if z >= T::zero() {
        half * erfc_nonneg(x)
    } else {
        T::one() - half * erfc_nonneg(x)
    }
}

/// `Φ(z)`.
pub fn normal_cdf<T: Real>(z: T) -> T {
    normal_sf(-z)
}
