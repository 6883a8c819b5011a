//! Exponentially scaled modified Bessel functions of the first kind, orders 0 and 1.

/// Ascending series is used up to here, the large-argument expansion above.
const SERIES_LIMIT: f64 = 15.0;

/// `e^{-|x|} I_0(x)`.
pub fn i0e(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(0, ax) * (-ax).exp()
    } else {
        asymptotic(0, ax)
    }
}

/// `e^{-|x|} I_1(x)`.
pub fn i1e(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        series(1, ax) * (-ax).exp()
    } else {
        asymptotic(1, ax)
    };
    v.copysign(x)
}

pub fn i0(x: f64) -> f64 {
    if x.abs() <= SERIES_LIMIT {
        series(0, x.abs())
    } else {
        asymptotic(0, x.abs()) * x.abs().exp()
    }
}

pub fn i1(x: f64) -> f64 {
    let v = if x.abs() <= SERIES_LIMIT {
        series(1, x.abs())
    } else {
        asymptotic(1, x.abs()) * x.abs().exp()
    };
    v.copysign(x)
}

/// `sum_k (x/2)^{2k+n} / (k! (k+n)!)` for `x >= 0`.
fn series(order: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let n = order as f64;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + n));
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

/// `e^{-x} I_n(x) ~ (2 pi x)^{-1/2} sum_k (-1)^k a_k(n) / x^k`, truncated at the smallest term.
fn asymptotic(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    let mut term: f64 = 1.0;
    let mut sum: f64 = 1.0;
    let mut k = 1.0;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (k * 8.0 * x);
        if next.abs() >= term.abs() || next.abs() <= 1e-17 * sum.abs() {
            if next.abs() < term.abs() {
                sum += next;
            }
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}
