//! Adaptive Dormand–Prince 5(4) integration with dense output.
//!
//! A single embedded pair drives every ODE solve in the crate: the radial
//! flow branches, the Mach-squared profile, the mode shooting problems, and
//! the energy-transform change of variables. The right-hand side returns a
//! `Result` so domain guards (e.g. the sonic guard) can abort a step cleanly.

use crate::error::{Error, Result};

/// Tolerances and limits for one adaptive solve.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense-output weights (Shampine's continuous extension).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone)]
struct StepRecord<const N: usize> {
    x: f64,
    h: f64,
    rcont: [[f64; N]; 5],
}

/// Dense solution of one initial value problem over `[x0, x_end]`.
///
/// `eval` interpolates with the method's own continuous extension, so the
/// interpolation error is of the same order as the step error.
#[derive(Debug, Clone)]
pub struct DenseSolution<const N: usize> {
    x0: f64,
    x_end: f64,
    y0: [f64; N],
    y_end: [f64; N],
    steps: Vec<StepRecord<N>>,
}

impl<const N: usize> DenseSolution<N> {
    pub fn x_end(&self) -> f64 {
        self.x_end
    }

    pub fn end_state(&self) -> [f64; N] {
        self.y_end
    }

    /// Interpolated state at `x`, clamped to the integration span.
    pub fn eval(&self, x: f64) -> [f64; N] {
        if self.steps.is_empty() {
            return self.y0;
        }
        let dir = (self.x_end - self.x0).signum();
        if (x - self.x0) * dir <= 0.0 {
            return self.y0;
        }
        if (x - self.x_end) * dir >= 0.0 {
            return self.y_end;
        }
        // Binary search for the step whose span contains x.
        let mut lo = 0usize;
        let mut hi = self.steps.len() - 1;
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if (x - self.steps[mid].x) * dir >= 0.0 {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let step = &self.steps[lo];
        let theta = (x - step.x) / step.h;
        let th1 = 1.0 - theta;
        let mut out = [0.0; N];
        for i in 0..N {
            let r = &step.rcont;
            out[i] =
                r[0][i] + theta * (r[1][i] + th1 * (r[2][i] + theta * (r[3][i] + th1 * r[4][i])));
        }
        out
    }
}

/// Integrate `dy/dx = f(x, y)` from `x0` to `x_end` (either direction).
pub fn integrate<const N: usize, F>(
    f: F,
    x0: f64,
    y0: &[f64; N],
    x_end: f64,
    opts: &OdeOptions,
) -> Result<DenseSolution<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut sol = DenseSolution {
        x0,
        x_end,
        y0: *y0,
        y_end: *y0,
        steps: Vec::new(),
    };
    if x_end == x0 {
        return Ok(sol);
    }

    let dir = (x_end - x0).signum();
    let span = (x_end - x0).abs();
    let mut x = x0;
    let mut y = *y0;
    let mut k1 = f(x, &y)?;
    let mut h = dir * initial_step(&f, x, &y, &k1, dir, span, opts)?;

    let mut rejected = false;
    for _ in 0..opts.max_steps {
        if (x + h - x_end) * dir > 0.0 {
            h = x_end - x;
        }
        if h.abs() < 4.0 * f64::EPSILON * x.abs().max(span) {
            return Err(Error::StepFailure { x0: x, h });
        }

        let (ynew, k, err) = attempt_step(&f, x, &y, &k1, h, opts)?;
        if err <= 1.0 {
            // Accept: record the continuous extension for this span.
            let mut rcont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = ynew[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k[6][i] - bspl;
                rcont[4][i] = h
                    * (D1 * k1[i]
                        + D3 * k[2][i]
                        + D4 * k[3][i]
                        + D5 * k[4][i]
                        + D6 * k[5][i]
                        + D7 * k[6][i]);
            }
            sol.steps.push(StepRecord { x, h, rcont });

            x += h;
            y = ynew;
            k1 = k[6]; // FSAL
            if (x - x_end) * dir >= 0.0 {
                sol.y_end = y;
                sol.x_end = x_end;
                return Ok(sol);
            }
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, if rejected { 1.0 } else { 10.0 });
            h *= fac;
            rejected = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0).min(0.9);
            rejected = true;
        }
    }
    Err(Error::StepFailure { x0: x, h })
}

/// Convenience wrapper returning only the final state.
pub fn integrate_to_end<const N: usize, F>(
    f: F,
    x0: f64,
    y0: &[f64; N],
    x_end: f64,
    opts: &OdeOptions,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    integrate(f, x0, y0, x_end, opts).map(|s| s.end_state())
}

#[allow(clippy::type_complexity)]
fn attempt_step<const N: usize, F>(
    f: &F,
    x: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    opts: &OdeOptions,
) -> Result<([f64; N], [[f64; N]; 7], f64)>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut k = [[0.0; N]; 7];
    k[0] = *k1;

    let mut yt = [0.0; N];
    for i in 0..N {
        yt[i] = y[i] + h * A21 * k[0][i];
    }
    k[1] = f(x + C2 * h, &yt)?;
    for i in 0..N {
        yt[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
    }
    k[2] = f(x + C3 * h, &yt)?;
    for i in 0..N {
        yt[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
    }
    k[3] = f(x + C4 * h, &yt)?;
    for i in 0..N {
        yt[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
    }
    k[4] = f(x + C5 * h, &yt)?;
    for i in 0..N {
        yt[i] = y[i]
            + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
    }
    k[5] = f(x + h, &yt)?;

    let mut ynew = [0.0; N];
    for i in 0..N {
        ynew[i] =
            y[i] + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
    }
    k[6] = f(x + h, &ynew)?;

    let mut err_sq = 0.0;
    for i in 0..N {
        let e = h
            * (E1 * k[0][i]
                + E3 * k[2][i]
                + E4 * k[3][i]
                + E5 * k[4][i]
                + E6 * k[5][i]
                + E7 * k[6][i]);
        let scale = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
        err_sq += (e / scale) * (e / scale);
    }
    let err = (err_sq / N as f64).sqrt();
    Ok((ynew, k, err))
}

/// Hairer-style starting step heuristic.
fn initial_step<const N: usize, F>(
    f: &F,
    x0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    span: f64,
    opts: &OdeOptions,
) -> Result<f64>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let sci =
        |i: usize, y: &[f64; N]| -> f64 { opts.atol + opts.rtol * y[i].abs().max(y0[i].abs()) };
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        d0 += (y0[i] / sci(i, y0)).powi(2);
        d1 += (f0[i] / sci(i, y0)).powi(2);
    }
    d0 = (d0 / N as f64).sqrt();
    d1 = (d1 / N as f64).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span);

    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y0[i] + dir * h0 * f0[i];
    }
    let f1 = f(x0 + dir * h0, &y1)?;
    let mut d2 = 0.0;
    for i in 0..N {
        d2 += ((f1[i] - f0[i]) / sci(i, y0)).powi(2);
    }
    d2 = (d2 / N as f64).sqrt() / h0;

    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    Ok(h1.min(100.0 * h0).min(span))
}
