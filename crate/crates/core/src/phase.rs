//! Reduction of large phase arguments `freq * t` modulo 2π.
//!
//! With `omega` up to 1e8 and `t` up to 1e5 the raw product is ~1e13 rad and
//! a plain `f64` product keeps no digits of the fractional turn. The product
//! is formed exactly (hi + lo via fused multiply-add) and reduced against a
//! two-word representation of 2π.

use std::f64::consts::PI;

const TWO_PI_HI: f64 = std::f64::consts::TAU;
const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;

/// `freq * t` reduced to `(-π, π]`.
pub fn reduced(freq: f64, t: f64) -> f64 {
    let hi = freq * t;
    if hi.abs() <= PI {
        return hi;
    }
    let lo = freq.mul_add(t, -hi);
    let k = (hi / TWO_PI_HI).round();
    let r = (-k).mul_add(TWO_PI_HI, hi);
    let r = (-k).mul_add(TWO_PI_LO, r) + lo;
    wrap(r)
}

/// Reduces an already small angle into `(-π, π]`.
pub fn wrap(theta: f64) -> f64 {
    let mut r = theta;
    while r > PI {
        r -= TWO_PI_HI;
    }
    while r <= -PI {
        r += TWO_PI_HI;
    }
    r
}
