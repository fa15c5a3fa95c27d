//! Transport of differential forms along a transverse field.
//!
//! Solves Cauchy problems `L_X omega + f omega = theta` for 1- and 2-forms
//! on `[0,1] x T^2` (a periodic two-dimensional chart standing in for a
//! closed surface), with `X = X0 d_0` already straightened. Componentwise
//! the problem splits into transport ODEs in the `x0` direction: the
//! components carrying a `0` index close among themselves, and the purely
//! spatial components couple to them through spatial derivatives of `X0`.
//! A flow-straightening map is provided for general transverse fields.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::interp::cubic_uniform;

/// Transversality floor for `dx0(X)`.
const EPS_TRANSVERSE: f64 = 1e-8;

/// Uniform grid on `[0,1] x T^2`: `n_t` time levels (both ends included),
/// `n_x` points per periodic spatial direction of period `2 pi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartGrid {
    pub n_t: usize,
    pub n_x: usize,
}

impl ChartGrid {
    pub fn new(n_t: usize, n_x: usize) -> Result<Self> {
        if n_t < 16 || n_x < 16 {
            return Err(Error::InvalidConfig {
                reason: format!("grid {n_t} x {n_x} below the 16-point minimum"),
            });
        }
        Ok(Self { n_t, n_x })
    }

    pub fn dt(&self) -> f64 {
        1.0 / (self.n_t - 1) as f64
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.n_x as f64
    }

    pub fn t_of(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub fn x_of(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }
}

/// Scalar samples over a [`ChartGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub grid: ChartGrid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: ChartGrid) -> Self {
        Self {
            grid,
            data: vec![0.0; grid.n_t * grid.n_x * grid.n_x],
        }
    }

    pub fn from_fn(grid: ChartGrid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut field = Self::zeros(grid);
        for k in 0..grid.n_t {
            for i in 0..grid.n_x {
                for j in 0..grid.n_x {
                    let v = f(grid.t_of(k), grid.x_of(i), grid.x_of(j));
                    field.set(k, i, j, v);
                }
            }
        }
        field
    }

    #[inline]
    fn idx(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.grid.n_x + i) * self.grid.n_x + j
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[self.idx(k, i, j)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let id = self.idx(k, i, j);
        self.data[id] = v;
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Periodic bicubic interpolation within time level `k`.
    pub fn interp_slice(&self, k: usize, x1: f64, x2: f64) -> f64 {
        let n = self.grid.n_x;
        let dx = self.grid.dx();
        let s1 = x1 / dx;
        let s2 = x2 / dx;
        let i0 = s1.floor() as i64 - 1;
        let j0 = s2.floor() as i64 - 1;
        let w1 = lagrange4(s1 - (i0 + 1) as f64 + 1.0);
        let w2 = lagrange4(s2 - (j0 + 1) as f64 + 1.0);
        let mut acc = 0.0;
        for (a, wa) in w1.iter().enumerate() {
            let i = (i0 + a as i64).rem_euclid(n as i64) as usize;
            for (b, wb) in w2.iter().enumerate() {
                let j = (j0 + b as i64).rem_euclid(n as i64) as usize;
                acc += wa * wb * self.get(k, i, j);
            }
        }
        acc
    }

    /// Cubic interpolation through time at fixed spatial indices.
    pub fn interp_time(&self, t: f64, i: usize, j: usize) -> f64 {
        let vals: Vec<f64> = (0..self.grid.n_t).map(|k| self.get(k, i, j)).collect();
        cubic_uniform(0.0, self.grid.dt(), &vals, t)
    }

    /// Second-order time derivative on the grid (centered interior,
    /// one-sided at the ends).
    pub fn ddt(&self) -> ScalarField {
        let g = self.grid;
        let dt = g.dt();
        let mut out = ScalarField::zeros(g);
        for i in 0..g.n_x {
            for j in 0..g.n_x {
                for k in 0..g.n_t {
                    let v = if k == 0 {
                        (-3.0 * self.get(0, i, j) + 4.0 * self.get(1, i, j) - self.get(2, i, j))
                            / (2.0 * dt)
                    } else if k == g.n_t - 1 {
                        (3.0 * self.get(k, i, j) - 4.0 * self.get(k - 1, i, j)
                            + self.get(k - 2, i, j))
                            / (2.0 * dt)
                    } else {
                        (self.get(k + 1, i, j) - self.get(k - 1, i, j)) / (2.0 * dt)
                    };
                    out.set(k, i, j, v);
                }
            }
        }
        out
    }

    /// Fourth-order centered derivative along periodic direction `axis`
    /// (1 or 2).
    pub fn dspace(&self, axis: usize) -> ScalarField {
        let g = self.grid;
        let n = g.n_x as i64;
        let dx = g.dx();
        let mut out = ScalarField::zeros(g);
        let at = |k: usize, i: i64, j: i64| -> f64 {
            self.get(k, i.rem_euclid(n) as usize, j.rem_euclid(n) as usize)
        };
        for k in 0..g.n_t {
            for i in 0..g.n_x as i64 {
                for j in 0..g.n_x as i64 {
                    let v = match axis {
                        1 => {
                            (-at(k, i + 2, j) + 8.0 * at(k, i + 1, j) - 8.0 * at(k, i - 1, j)
                                + at(k, i - 2, j))
                                / (12.0 * dx)
                        }
                        2 => {
                            (-at(k, i, j + 2) + 8.0 * at(k, i, j + 1) - 8.0 * at(k, i, j - 1)
                                + at(k, i, j - 2))
                                / (12.0 * dx)
                        }
                        _ => panic!("axis must be 1 or 2"),
                    };
                    out.set(k, i as usize, j as usize, v);
                }
            }
        }
        out
    }
}

fn lagrange4(t: f64) -> [f64; 4] {
    [
        (t - 1.0) * (t - 2.0) * (t - 3.0) / -6.0,
        t * (t - 2.0) * (t - 3.0) / 2.0,
        t * (t - 1.0) * (t - 3.0) / -2.0,
        t * (t - 1.0) * (t - 2.0) / 6.0,
    ]
}

/// Scalar samples on one spatial slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceField {
    pub n_x: usize,
    data: Vec<f64>,
}

impl SliceField {
    pub fn zeros(n_x: usize) -> Self {
        Self {
            n_x,
            data: vec![0.0; n_x * n_x],
        }
    }

    pub fn from_fn(grid: ChartGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut s = Self::zeros(grid.n_x);
        for i in 0..grid.n_x {
            for j in 0..grid.n_x {
                s.set(i, j, f(grid.x_of(i), grid.x_of(j)));
            }
        }
        s
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_x + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_x + j] = v;
    }
}

/// Form degree supported by the transport solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormDegree {
    One,
    Two,
}

impl FormDegree {
    /// Stored components, by increasing index tuple.
    /// Degree one: `(0), (1), (2)`. Degree two: `(0,1), (0,2), (1,2)`.
    pub fn component_count(self) -> usize {
        3
    }

    /// How many leading components carry a `0` index.
    pub fn zero_components(self) -> usize {
        match self {
            FormDegree::One => 1,
            FormDegree::Two => 2,
        }
    }
}

/// An r-form stored through its increasing-index components over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormField {
    pub degree: FormDegree,
    pub grid: ChartGrid,
    pub comps: Vec<ScalarField>,
}

impl FormField {
    pub fn zeros(degree: FormDegree, grid: ChartGrid) -> Self {
        Self {
            degree,
            grid,
            comps: (0..degree.component_count())
                .map(|_| ScalarField::zeros(grid))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0f64, |m, c| m.max(c.max_abs()))
    }

    /// Componentwise max-norm distance.
    pub fn distance(&self, other: &FormField) -> f64 {
        assert_eq!(self.degree, other.degree);
        let mut worst: f64 = 0.0;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            for k in 0..self.grid.n_t {
                for i in 0..self.grid.n_x {
                    for j in 0..self.grid.n_x {
                        worst = worst.max((a.get(k, i, j) - b.get(k, i, j)).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn initial_slice(&self) -> FormSlice {
        let mut s = FormSlice::zeros(self.degree, self.grid.n_x);
        for (c, comp) in self.comps.iter().enumerate() {
            for i in 0..self.grid.n_x {
                for j in 0..self.grid.n_x {
                    s.comps[c].set(i, j, comp.get(0, i, j));
                }
            }
        }
        s
    }
}

/// Initial data: an r-form on the `x0 = 0` slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormSlice {
    pub degree: FormDegree,
    pub n_x: usize,
    pub comps: Vec<SliceField>,
}

impl FormSlice {
    pub fn zeros(degree: FormDegree, n_x: usize) -> Self {
        Self {
            degree,
            n_x,
            comps: (0..degree.component_count())
                .map(|_| SliceField::zeros(n_x))
                .collect(),
        }
    }
}

/// A transport Cauchy problem in straightened coordinates.
#[derive(Debug, Clone)]
pub struct TransportProblem {
    /// `dx0(X)` of the straightened field; positive and bounded below.
    pub x0: ScalarField,
    pub f: ScalarField,
    pub theta: FormField,
    pub omega0: FormSlice,
}

impl TransportProblem {
    fn validate(&self) -> Result<()> {
        let min_x0 = self.x0.min_value();
        if min_x0 <= EPS_TRANSVERSE {
            return Err(Error::NotTransverse { min_x0 });
        }
        if self.theta.degree != self.omega0.degree {
            return Err(Error::InvalidConfig {
                reason: "theta and omega0 must share a degree".into(),
            });
        }
        Ok(())
    }
}

/// March one linear ODE `y' = -a(t) y + b(t)` across the time levels with
/// Heun's method; `a`, `b` are callbacks over the level index.
fn heun_march(
    n_t: usize,
    dt: f64,
    y0: f64,
    a: impl Fn(usize) -> f64,
    b: impl Fn(usize) -> f64,
    out: &mut [f64],
) {
    out[0] = y0;
    let mut y = y0;
    for k in 0..n_t - 1 {
        let g0 = -a(k) * y + b(k);
        let pred = y + dt * g0;
        let g1 = -a(k + 1) * pred + b(k + 1);
        y += 0.5 * dt * (g0 + g1);
        out[k + 1] = y;
    }
}

/// Solve the transport problem over the full grid.
///
/// Components with a `0` index satisfy
/// `d0 w + (d0 X0 / X0 + f / X0) w = theta / X0` and are integrated first;
/// the purely spatial components then satisfy
/// `d0 w + (f / X0) w = theta / X0 - (coupling) / X0`, where the coupling
/// contracts the already-solved `0`-components with spatial derivatives of
/// `X0` (signed by the index permutation).
pub fn transport_form(problem: &TransportProblem) -> Result<FormField> {
    problem.validate()?;
    let grid = problem.theta.grid;
    let degree = problem.theta.degree;
    let dt = grid.dt();
    let n_t = grid.n_t;

    let dx0_dt = problem.x0.ddt();
    let dx0_d1 = problem.x0.dspace(1);
    let dx0_d2 = problem.x0.dspace(2);

    let mut out = FormField::zeros(degree, grid);
    let n_zero = degree.zero_components();
    let mut column = vec![0.0; n_t];

    for i in 0..grid.n_x {
        for j in 0..grid.n_x {
            let x0 = |k: usize| problem.x0.get(k, i, j);
            let f = |k: usize| problem.f.get(k, i, j);

            // 0-index components close among themselves.
            for c in 0..n_zero {
                let theta_c = &problem.theta.comps[c];
                heun_march(
                    n_t,
                    dt,
                    problem.omega0.comps[c].get(i, j),
                    |k| dx0_dt.get(k, i, j) / x0(k) + f(k) / x0(k),
                    |k| theta_c.get(k, i, j) / x0(k),
                    &mut column,
                );
                for (k, &v) in column.iter().enumerate() {
                    out.comps[c].set(k, i, j, v);
                }
            }

            // Purely spatial components, coupled to the solved ones.
            match degree {
                FormDegree::One => {
                    for (c, d_alpha) in [(1, &dx0_d1), (2, &dx0_d2)] {
                        let theta_c = &problem.theta.comps[c];
                        heun_march(
                            n_t,
                            dt,
                            problem.omega0.comps[c].get(i, j),
                            |k| f(k) / x0(k),
                            |k| {
                                (theta_c.get(k, i, j)
                                    - d_alpha.get(k, i, j) * out.comps[0].get(k, i, j))
                                    / x0(k)
                            },
                            &mut column,
                        );
                        for (k, &v) in column.iter().enumerate() {
                            out.comps[c].set(k, i, j, v);
                        }
                    }
                }
                FormDegree::Two => {
                    let theta_c = &problem.theta.comps[2];
                    heun_march(
                        n_t,
                        dt,
                        problem.omega0.comps[2].get(i, j),
                        |k| f(k) / x0(k),
                        |k| {
                            let coupling = dx0_d1.get(k, i, j) * out.comps[1].get(k, i, j)
                                - dx0_d2.get(k, i, j) * out.comps[0].get(k, i, j);
                            (theta_c.get(k, i, j) - coupling) / x0(k)
                        },
                        &mut column,
                    );
                    for (k, &v) in column.iter().enumerate() {
                        out.comps[2].set(k, i, j, v);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Sampled straightening map. `pos1`, `pos2` hold the flow position
/// `phi_t(P)` of each slice point `P` (the inverse of the straightening
/// homeomorphism), unwrapped along the periodic directions; `x0_straight`
/// is `dx0(X)` carried along the flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap {
    pub grid: ChartGrid,
    pub pos1: ScalarField,
    pub pos2: ScalarField,
    pub x0_straight: ScalarField,
}

/// Straighten a transverse field `X = (X0, X1, X2)` by integrating the
/// auxiliary field with unit time component, `d x^a / dt = X^a / X0`, from
/// every point of the initial slice.
pub fn straighten_flow(x: &[ScalarField; 3]) -> Result<FlowMap> {
    let min_x0 = x[0].min_value();
    if min_x0 <= EPS_TRANSVERSE {
        return Err(Error::NotTransverse { min_x0 });
    }
    let grid = x[0].grid;
    let dt = grid.dt();
    let wrap = |v: f64| v.rem_euclid(2.0 * PI);

    let mut map = FlowMap {
        grid,
        pos1: ScalarField::zeros(grid),
        pos2: ScalarField::zeros(grid),
        x0_straight: ScalarField::zeros(grid),
    };

    let vel = |k: usize, a: f64, b: f64| -> (f64, f64) {
        let x0 = x[0].interp_slice(k, wrap(a), wrap(b));
        (
            x[1].interp_slice(k, wrap(a), wrap(b)) / x0,
            x[2].interp_slice(k, wrap(a), wrap(b)) / x0,
        )
    };

    for i in 0..grid.n_x {
        for j in 0..grid.n_x {
            let mut a = grid.x_of(i);
            let mut b = grid.x_of(j);
            map.pos1.set(0, i, j, a);
            map.pos2.set(0, i, j, b);
            map.x0_straight.set(0, i, j, x[0].get(0, i, j));
            for k in 0..grid.n_t - 1 {
                let (v1a, v1b) = vel(k, a, b);
                let (pa, pb) = (a + dt * v1a, b + dt * v1b);
                let (v2a, v2b) = vel(k + 1, pa, pb);
                a += 0.5 * dt * (v1a + v2a);
                b += 0.5 * dt * (v1b + v2b);
                map.pos1.set(k + 1, i, j, a);
                map.pos2.set(k + 1, i, j, b);
                map.x0_straight
                    .set(k + 1, i, j, x[0].interp_slice(k + 1, wrap(a), wrap(b)));
            }
        }
    }
    Ok(map)
}

/// Max-norm residual of `L_X omega + f omega - theta` over interior points,
/// with `X = X0 d_0`.
///
/// The Lie derivative is evaluated geometrically: the flow of `X` is stepped
/// a centered parameter `+-s` from every grid point, the form is pulled back
/// through both flow maps, and the derivative is the centered difference.
/// This route never touches the componentwise transport equations, so it
/// checks the solver through an independent definition.
pub fn lie_residual(
    omega: &FormField,
    x0: &ScalarField,
    f: &ScalarField,
    theta: &FormField,
) -> f64 {
    let grid = omega.grid;
    let s = f64::EPSILON.sqrt() / x0.max_abs().max(1.0);

    // Flow maps T(+-s) from every grid point: one fourth-order step each.
    let mut t_plus = ScalarField::zeros(grid);
    let mut t_minus = ScalarField::zeros(grid);
    for i in 0..grid.n_x {
        for j in 0..grid.n_x {
            for k in 0..grid.n_t {
                let t0 = grid.t_of(k);
                let speed = |tt: f64| x0.interp_time(tt, i, j);
                t_plus.set(k, i, j, rk4_flow(t0, s, &speed));
                t_minus.set(k, i, j, rk4_flow(t0, -s, &speed));
            }
        }
    }

    let maps = [(&t_plus, 1.0), (&t_minus, -1.0)];
    let jac = |m: &ScalarField| (m.ddt(), m.dspace(1), m.dspace(2));
    let (jp, jm) = (jac(&t_plus), jac(&t_minus));

    let mut worst: f64 = 0.0;
    let interior_t = 2..grid.n_t.saturating_sub(2);
    for k in interior_t {
        for i in 0..grid.n_x {
            for j in 0..grid.n_x {
                for (c, _) in omega.comps.iter().enumerate() {
                    let mut pulled = [0.0f64; 2];
                    for (m, (map, _)) in maps.iter().enumerate() {
                        let tt = map.get(k, i, j);
                        let (d0, d1, d2) = if m == 0 {
                            (&jp.0, &jp.1, &jp.2)
                        } else {
                            (&jm.0, &jm.1, &jm.2)
                        };
                        let grad = [d0.get(k, i, j), d1.get(k, i, j), d2.get(k, i, j)];
                        let w = |cc: usize| omega.comps[cc].interp_time(tt, i, j);
                        pulled[m] = match (omega.degree, c) {
                            // phi(t,x) = (T(t,x), x): pullback rows are
                            // dphi^0 = grad T, dphi^a = e_a.
                            (FormDegree::One, 0) => w(0) * grad[0],
                            (FormDegree::One, a) => w(0) * grad[a] + w(a),
                            (FormDegree::Two, 0) => w(0) * grad[0], // (0,1)
                            (FormDegree::Two, 1) => w(1) * grad[0], // (0,2)
                            (FormDegree::Two, 2) => w(2) + grad[1] * w(1) - grad[2] * w(0),
                            _ => unreachable!(),
                        };
                    }
                    let lie = (pulled[0] - pulled[1]) / (2.0 * s);
                    let res = lie + f.get(k, i, j) * omega.comps[c].get(k, i, j)
                        - theta.comps[c].get(k, i, j);
                    worst = worst.max(res.abs());
                }
            }
        }
    }
    worst
}

/// One classical RK4 step of `dT/d sigma = speed(T)` from `t0` over `s`.
fn rk4_flow(t0: f64, s: f64, speed: &impl Fn(f64) -> f64) -> f64 {
    let k1 = speed(t0);
    let k2 = speed(t0 + 0.5 * s * k1);
    let k3 = speed(t0 + 0.5 * s * k2);
    let k4 = speed(t0 + s * k3);
    t0 + s / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

// ---------------------------------------------------------------------------
// Manufactured problems (shared by the demo subcommand and the test suites).
// ---------------------------------------------------------------------------

/// A manufactured transport problem with its exact solution: smooth fields
/// on the chart, `theta := L_X omega* + f omega*` formed symbolically for a
/// spatially varying `X0`.
pub fn manufactured_case(degree: FormDegree, grid: ChartGrid) -> (TransportProblem, FormField) {
    let x0_fn = |x1: f64, x2: f64| 1.0 + 0.3 * x1.sin() * x2.cos();
    let dx0_d1 = |x1: f64, x2: f64| 0.3 * x1.cos() * x2.cos();
    let dx0_d2 = |x1: f64, x2: f64| -0.3 * x1.sin() * x2.sin();
    let f_fn = |t: f64, x1: f64, x2: f64| 0.4 + 0.2 * x1.cos() * x2.sin() * (PI * t).cos();

    let x0 = ScalarField::from_fn(grid, |_, x1, x2| x0_fn(x1, x2));
    let f = ScalarField::from_fn(grid, f_fn);

    match degree {
        FormDegree::One => {
            let w0 = |t: f64, x1: f64, x2: f64| (PI * t).cos() * (1.0 + 0.5 * x1.sin() * x2.sin());
            let d0_w0 =
                |t: f64, x1: f64, x2: f64| -PI * (PI * t).sin() * (1.0 + 0.5 * x1.sin() * x2.sin());
            let w1 = |t: f64, x1: f64, x2: f64| (PI * t).sin() * x2.cos() + 0.2 * x1.cos();
            let d0_w1 = |t: f64, _x1: f64, x2: f64| PI * (PI * t).cos() * x2.cos();
            let w2 = |t: f64, x1: f64, x2: f64| (x1 + x2).cos() * (0.5 + 0.5 * t);
            let d0_w2 = |_t: f64, x1: f64, x2: f64| 0.5 * (x1 + x2).cos();

            let exact = FormField {
                degree,
                grid,
                comps: vec![
                    ScalarField::from_fn(grid, w0),
                    ScalarField::from_fn(grid, w1),
                    ScalarField::from_fn(grid, w2),
                ],
            };
            let theta = FormField {
                degree,
                grid,
                comps: vec![
                    ScalarField::from_fn(grid, |t, x1, x2| {
                        x0_fn(x1, x2) * d0_w0(t, x1, x2) + f_fn(t, x1, x2) * w0(t, x1, x2)
                    }),
                    ScalarField::from_fn(grid, |t, x1, x2| {
                        x0_fn(x1, x2) * d0_w1(t, x1, x2)
                            + w0(t, x1, x2) * dx0_d1(x1, x2)
                            + f_fn(t, x1, x2) * w1(t, x1, x2)
                    }),
                    ScalarField::from_fn(grid, |t, x1, x2| {
                        x0_fn(x1, x2) * d0_w2(t, x1, x2)
                            + w0(t, x1, x2) * dx0_d2(x1, x2)
                            + f_fn(t, x1, x2) * w2(t, x1, x2)
                    }),
                ],
            };
            let omega0 = exact.initial_slice();
            (
                TransportProblem {
                    x0,
                    f,
                    theta,
                    omega0,
                },
                exact,
            )
        }
        FormDegree::Two => {
            let w01 = |t: f64, _x1: f64, x2: f64| (PI * t).cos() * x2.sin() + 0.3;
            let d0_w01 = |t: f64, _x1: f64, x2: f64| -PI * (PI * t).sin() * x2.sin();
            let w02 = |t: f64, x1: f64, _x2: f64| (1.0 + 0.5 * t * t) * x1.cos();
            let d0_w02 = |t: f64, x1: f64, _x2: f64| t * x1.cos();
            let w12 = |t: f64, x1: f64, x2: f64| (PI * t + 0.5).sin() * x1.sin() * x2.cos();
            let d0_w12 = |t: f64, x1: f64, x2: f64| PI * (PI * t + 0.5).cos() * x1.sin() * x2.cos();

            let exact = FormField {
                degree,
                grid,
                comps: vec![
                    ScalarField::from_fn(grid, w01),
                    ScalarField::from_fn(grid, w02),
                    ScalarField::from_fn(grid, w12),
                ],
            };
            let theta = FormField {
                degree,
                grid,
                comps: vec![
                    ScalarField::from_fn(grid, |t, x1, x2| {
                        x0_fn(x1, x2) * d0_w01(t, x1, x2) + f_fn(t, x1, x2) * w01(t, x1, x2)
                    }),
                    ScalarField::from_fn(grid, |t, x1, x2| {
                        x0_fn(x1, x2) * d0_w02(t, x1, x2) + f_fn(t, x1, x2) * w02(t, x1, x2)
                    }),
                    ScalarField::from_fn(grid, |t, x1, x2| {
                        x0_fn(x1, x2) * d0_w12(t, x1, x2)
                            + f_fn(t, x1, x2) * w12(t, x1, x2)
                            + dx0_d1(x1, x2) * w02(t, x1, x2)
                            - dx0_d2(x1, x2) * w01(t, x1, x2)
                    }),
                ],
            };
            let omega0 = exact.initial_slice();
            (
                TransportProblem {
                    x0,
                    f,
                    theta,
                    omega0,
                },
                exact,
            )
        }
    }
}

/// Solve the manufactured case at each `(n_t, n_x)` level and return the
/// max-norm errors against the exact solution.
pub fn manufactured_errors(degree: FormDegree, levels: &[(usize, usize)]) -> Result<Vec<f64>> {
    levels
        .iter()
        .map(|&(n_t, n_x)| {
            let grid = ChartGrid::new(n_t, n_x)?;
            let (problem, exact) = manufactured_case(degree, grid);
            let solved = transport_form(&problem)?;
            Ok(solved.distance(&exact))
        })
        .collect()
}

/// Constant-coefficient decay problem: `X0 = 1`, `f = a`, `theta = 0`.
/// The exact solution is `e^{-a t}` times the initial slice.
pub fn constant_decay_case(
    degree: FormDegree,
    grid: ChartGrid,
    a: f64,
) -> (TransportProblem, FormField) {
    let shapes: [Box<dyn Fn(f64, f64) -> f64>; 3] = [
        Box::new(|x1: f64, x2: f64| 1.0 + 0.5 * x1.sin() * x2.cos()),
        Box::new(|x1: f64, x2: f64| 0.3 + (x1 + x2).cos()),
        Box::new(|x1: f64, x2: f64| x1.cos() * (2.0 * x2).sin() - 0.4),
    ];
    let exact = FormField {
        degree,
        grid,
        comps: shapes
            .iter()
            .map(|g| ScalarField::from_fn(grid, |t, x1, x2| (-a * t).exp() * g(x1, x2)))
            .collect(),
    };
    let problem = TransportProblem {
        x0: ScalarField::from_fn(grid, |_, _, _| 1.0),
        f: ScalarField::from_fn(grid, |_, _, _| a),
        theta: FormField::zeros(degree, grid),
        omega0: exact.initial_slice(),
    };
    (problem, exact)
}
