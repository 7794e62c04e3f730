//! Thin wrappers over `libm` so the rest of the crate reads like `std` code.

#[inline]
pub fn sqrt(v: f64) -> f64 {
    libm::sqrt(v)
}

#[inline]
pub fn exp(v: f64) -> f64 {
    libm::exp(v)
}

#[inline]
pub fn ln(v: f64) -> f64 {
    libm::log(v)
}

#[inline]
pub fn powf(b: f64, p: f64) -> f64 {
    libm::pow(b, p)
}

#[inline]
pub fn sin(v: f64) -> f64 {
    libm::sin(v)
}

#[inline]
pub fn cos(v: f64) -> f64 {
    libm::cos(v)
}

pub fn powi(mut b: f64, mut k: u32) -> f64 {
    let mut acc = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            acc *= b;
        }
        b *= b;
        k >>= 1;
    }
    acc
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Largest absolute entry; 0 for an empty slice.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn norm2(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}
