//! Hermite polynomials H_m and associated Laguerre polynomials L_n^a with
//! real parameter a, evaluated by upward three-term recurrence in double
//! precision. Degrees are capped at desk scale.

use crate::error::{Error, Result};

pub const MAX_DEGREE: u32 = 64;

fn check_degree(n: u32) -> Result<()> {
    if n > MAX_DEGREE {
        return Err(Error::Domain(format!(
            "polynomial degree {n} exceeds cap {MAX_DEGREE}"
        )));
    }
    Ok(())
}

/// Physicists' Hermite polynomial H_m(x).
pub fn hermite(m: u32, x: f64) -> Result<f64> {
    check_degree(m)?;
    if m == 0 {
        return Ok(1.0);
    }
    let mut hk_minus = 1.0;
    let mut hk = 2.0 * x;
    for k in 1..m {
        let next = 2.0 * x * hk - 2.0 * k as f64 * hk_minus;
        hk_minus = hk;
        hk = next;
    }
    Ok(hk)
}

/// H_m'(x) = 2m H_{m-1}(x).
pub fn hermite_derivative(m: u32, x: f64) -> Result<f64> {
    check_degree(m)?;
    if m == 0 {
        return Ok(0.0);
    }
    Ok(2.0 * m as f64 * hermite(m - 1, x)?)
}

fn check_laguerre_param(a: f64) -> Result<()> {
    if !(a > -1.0) {
        return Err(Error::Domain(format!(
            "Laguerre parameter a = {a} must exceed -1"
        )));
    }
    Ok(())
}

/// Associated Laguerre polynomial L_n^a(x) for real a > -1.
pub fn laguerre(n: u32, a: f64, x: f64) -> Result<f64> {
    check_degree(n)?;
    check_laguerre_param(a)?;
    if n == 0 {
        return Ok(1.0);
    }
    let mut lk_minus = 1.0;
    let mut lk = 1.0 + a - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * lk - (kf + a) * lk_minus) / (kf + 1.0);
        lk_minus = lk;
        lk = next;
    }
    Ok(lk)
}

/// (L_n^a)'(x) = -L_{n-1}^{a+1}(x), zero for n = 0.
pub fn laguerre_derivative(n: u32, a: f64, x: f64) -> Result<f64> {
    check_degree(n)?;
    check_laguerre_param(a)?;
    if n == 0 {
        return Ok(0.0);
    }
    Ok(-laguerre(n - 1, a + 1.0, x)?)
}
