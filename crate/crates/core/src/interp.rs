//! Local cubic interpolation on uniform grids.

/// Cubic (4-point Lagrange) interpolation of `values` sampled at the uniform
/// grid `x_j = x0 + j*dx`, evaluated at `x`. Queries outside the grid clamp
/// to the end stencils.
pub fn cubic_uniform(x0: f64, dx: f64, values: &[f64], x: f64) -> f64 {
    let n = values.len();
    assert!(n >= 1, "empty sample set");
    if n == 1 {
        return values[0];
    }
    if n < 4 {
        // Fall back to linear on tiny grids.
        let s = ((x - x0) / dx).clamp(0.0, (n - 1) as f64);
        let j = (s.floor() as usize).min(n - 2);
        let t = s - j as f64;
        return values[j] * (1.0 - t) + values[j + 1] * t;
    }
    let s = (x - x0) / dx;
    // Stencil start so that x lies between the middle pair when possible.
    let j = (s.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let t = s - j as f64; // position relative to stencil start, in [0,3]-ish
    let (f0, f1, f2, f3) = (values[j], values[j + 1], values[j + 2], values[j + 3]);
    let l0 = (t - 1.0) * (t - 2.0) * (t - 3.0) / -6.0;
    let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    let l2 = t * (t - 1.0) * (t - 3.0) / -2.0;
    let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    f0 * l0 + f1 * l1 + f2 * l2 + f3 * l3
}

/// Uniform grid of `n` points spanning `[a, b]` inclusive (single point `a`
/// when `n == 1`).
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1);
    if n == 1 {
        return vec![a];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
        .collect()
}
