//! Fixed-step classical Runge–Kutta.

use std::ops::{Add, Mul};

/// One RK4 step of size `h` for y' = f(y).
pub fn rk4_step<S, F>(y: &S, h: f64, f: F) -> S
where
    S: Copy + Add<Output = S> + Mul<f64, Output = S>,
    F: Fn(&S) -> S,
{
    let k1 = f(y);
    let k2 = f(&(*y + k1 * (0.5 * h)));
    let k3 = f(&(*y + k2 * (0.5 * h)));
    let k4 = f(&(*y + k3 * h));
    *y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}
