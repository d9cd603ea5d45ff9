//! Adaptive integrators for small autonomous systems `y' = f(t, y)`.
//!
//! [`dormand_prince`] is the explicit 5(4) pair with FSAL and a 4th-order
//! continuous extension. [`rosenbrock`] is the linearly implicit 2(3) pair of
//! Shampine & Reichelt for stiff relaxation runs where the explicit pair
//! would be held at its stability limit for millions of steps.

use crate::error::{Error, Result};

/// Steps shorter than this (in units of 1/γ) abort the integration.
pub const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-8, atol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// States sampled on the requested output grid.
#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub stats: Stats,
    /// Scaled error estimate of the last accepted step.
    pub last_error: f64,
}

fn check_grid(t0: f64, t_end: f64, grid: &[f64]) -> Result<()> {
    if !(t_end > t0) || !t_end.is_finite() {
        return Err(Error::Domain(format!("integration interval [{t0}, {t_end}] is empty")));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::DegenerateGrid("output times must be non-decreasing".into()));
    }
    if let (Some(&first), Some(&last)) = (grid.first(), grid.last()) {
        if first < t0 || last > t_end {
            return Err(Error::DegenerateGrid(format!(
                "output times [{first}, {last}] outside [{t0}, {t_end}]"
            )));
        }
    }
    Ok(())
}

#[inline]
fn scaled_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], tol: &Tolerances) -> f64 {
    let sum: f64 = (0..N)
        .map(|i| {
            let scale = tol.atol + tol.rtol * y0[i].abs().max(y1[i].abs());
            (err[i] / scale).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for &(c, k) in terms {
        if c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

mod tableau {
    pub const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    pub const A21: f64 = 0.2;
    pub const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
    pub const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
    pub const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
    pub const A6: [f64; 5] = [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ];
    pub const B: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    pub const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    pub const D: [f64; 7] = [
        -12715105075.0 / 11282082432.0,
        0.0,
        87487479700.0 / 32700410799.0,
        -10690763975.0 / 1880347072.0,
        701980252875.0 / 199316789632.0,
        -1453857185.0 / 822651844.0,
        69997945.0 / 29380423.0,
    ];
}

fn initial_step<const N: usize, F>(
    f: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    h_max: f64,
    tol: &Tolerances,
    order: i32,
) -> Result<f64>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let zero = [0.0; N];
    let d0 = scaled_norm(y0, &zero, &zero, tol);
    let d1 = scaled_norm(f0, &zero, &zero, tol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(h_max);
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = f(t0 + h0, &y1)?;
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = scaled_norm(&diff, &zero, &zero, tol) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(1.0 / (order as f64 + 1.0))
    };
    Ok((100.0 * h0).min(h1).min(h_max))
}

/// Integrates from `t0` to `t_end` with the Dormand-Prince 5(4) pair and
/// samples the dense output at `grid` (non-decreasing, inside the interval).
///
/// `f` is evaluated at every stage; errors it returns abort the integration.
pub fn dormand_prince<const N: usize, F>(
    mut f: F,
    y0: [f64; N],
    t0: f64,
    t_end: f64,
    grid: &[f64],
    tol: Tolerances,
) -> Result<Solution<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    use tableau::*;
    check_grid(t0, t_end, grid)?;

    const SAFETY: f64 = 0.9;
    const BETA: f64 = 0.04;
    const EXPO: f64 = 0.2 - BETA * 0.75;

    let h_max = t_end - t0;
    let mut stats = Stats::default();
    let mut out_times = Vec::with_capacity(grid.len());
    let mut out_states = Vec::with_capacity(grid.len());
    let mut next_out = 0;
    while next_out < grid.len() && grid[next_out] <= t0 {
        out_times.push(grid[next_out]);
        out_states.push(y0);
        next_out += 1;
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    stats.evaluations += 1;
    let mut h = initial_step(&mut f, t0, &y0, &k1, h_max, &tol, 5)?;
    stats.evaluations += 1;
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut last_error = 0.0;

    while t < t_end {
        if h < MIN_STEP {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let k2 = f(t + C[1] * h, &axpy(&y, h, &[(A21, &k1)]))?;
        let k3 = f(t + C[2] * h, &axpy(&y, h, &[(A3[0], &k1), (A3[1], &k2)]))?;
        let k4 = f(t + C[3] * h, &axpy(&y, h, &[(A4[0], &k1), (A4[1], &k2), (A4[2], &k3)]))?;
        let k5 = f(
            t + C[4] * h,
            &axpy(&y, h, &[(A5[0], &k1), (A5[1], &k2), (A5[2], &k3), (A5[3], &k4)]),
        )?;
        let k6 = f(
            t + C[5] * h,
            &axpy(
                &y,
                h,
                &[(A6[0], &k1), (A6[1], &k2), (A6[2], &k3), (A6[3], &k4), (A6[4], &k5)],
            ),
        )?;
        let y_new = axpy(
            &y,
            h,
            &[(B[0], &k1), (B[2], &k3), (B[3], &k4), (B[4], &k5), (B[5], &k6)],
        );
        let k7 = f(t + h, &y_new)?;
        stats.evaluations += 6;

        let err_vec: [f64; N] = std::array::from_fn(|i| {
            h * (E[0] * k1[i] + E[2] * k3[i] + E[3] * k4[i] + E[4] * k5[i] + E[5] * k6[i] + E[6] * k7[i])
        });
        let err = scaled_norm(&err_vec, &y, &y_new, &tol);
        let fac11 = err.powf(EXPO);

        if err <= 1.0 {
            // Continuous extension on [t, t + h].
            let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            let c4: [f64; N] = std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]);
            let c5: [f64; N] = std::array::from_fn(|i| {
                h * (D[0] * k1[i] + D[2] * k3[i] + D[3] * k4[i] + D[4] * k5[i] + D[5] * k6[i] + D[6] * k7[i])
            });
            let t_new = if last { t_end } else { t + h };
            while next_out < grid.len() && grid[next_out] <= t_new {
                let s = (grid[next_out] - t) / h;
                let s1 = 1.0 - s;
                let value: [f64; N] =
                    std::array::from_fn(|i| y[i] + s * (ydiff[i] + s1 * (bspl[i] + s * (c4[i] + s1 * c5[i]))));
                out_times.push(grid[next_out]);
                out_states.push(if grid[next_out] == t_new { y_new } else { value });
                next_out += 1;
            }

            stats.accepted += 1;
            last_error = err;
            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(0.1, 5.0);
            fac_old = err.max(1e-4);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            t = t_new;
            y = y_new;
            k1 = k7;
            h = h_new.min(h_max);
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h /= (fac11 / SAFETY).min(5.0);
        }
    }

    Ok(Solution {
        times: out_times,
        states: out_states,
        stats,
        last_error,
    })
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
fn solve_dense<const N: usize>(mut m: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let pivot = (col..N).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col] == 0.0 || !m[pivot][col].is_finite() {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..N {
            let factor = m[row][col] / m[col][col];
            for k in col..N {
                m[row][k] -= factor * m[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    for row in (0..N).rev() {
        let tail: f64 = (row + 1..N).map(|k| m[row][k] * b[k]).sum();
        b[row] = (b[row] - tail) / m[row][row];
    }
    Some(b)
}

fn jacobian<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], f0: &[f64; N]) -> Result<[[f64; N]; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut jac = [[0.0; N]; N];
    for j in 0..N {
        let delta = 1e-8 * y[j].abs().max(1e-4);
        let mut shifted = *y;
        shifted[j] += delta;
        let fj = f(t, &shifted)?;
        for i in 0..N {
            jac[i][j] = (fj[i] - f0[i]) / delta;
        }
    }
    Ok(jac)
}

/// Integrates with the Rosenbrock 2(3) pair (finite-difference Jacobian,
/// refreshed every step). Steps are shortened to land on the output grid.
pub fn rosenbrock<const N: usize, F>(
    mut f: F,
    y0: [f64; N],
    t0: f64,
    t_end: f64,
    grid: &[f64],
    tol: Tolerances,
) -> Result<Solution<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    check_grid(t0, t_end, grid)?;
    let d = 1.0 / (2.0 + std::f64::consts::SQRT_2);
    let e32 = 6.0 + std::f64::consts::SQRT_2;

    let mut stats = Stats::default();
    let mut out_times = Vec::with_capacity(grid.len());
    let mut out_states = Vec::with_capacity(grid.len());
    let mut next_out = 0;
    while next_out < grid.len() && grid[next_out] <= t0 {
        out_times.push(grid[next_out]);
        out_states.push(y0);
        next_out += 1;
    }

    let h_max = t_end - t0;
    let mut t = t0;
    let mut y = y0;
    let mut f0 = f(t, &y)?;
    stats.evaluations += 1;
    let mut h = initial_step(&mut f, t0, &y0, &f0, h_max, &tol, 2)?;
    stats.evaluations += 1;
    let mut last_error = 0.0;

    while t < t_end {
        if h < MIN_STEP {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let target = grid.get(next_out).copied().unwrap_or(t_end).min(t_end);
        let hits = t + h >= target;
        if hits {
            h = target - t;
        }

        let jac = jacobian(&mut f, t, &y, &f0)?;
        stats.evaluations += N;
        let w: [[f64; N]; N] =
            std::array::from_fn(|i| std::array::from_fn(|j| f64::from(u8::from(i == j)) - h * d * jac[i][j]));
        let solve = |rhs: [f64; N]| -> Result<[f64; N]> {
            solve_dense(w, rhs).ok_or_else(|| Error::Domain("singular Rosenbrock iteration matrix".into()))
        };

        let k1 = solve(f0)?;
        let f1 = f(t + 0.5 * h, &axpy(&y, h, &[(0.5, &k1)]))?;
        let k2 = {
            let r = solve(std::array::from_fn(|i| f1[i] - k1[i]))?;
            std::array::from_fn(|i| r[i] + k1[i])
        };
        let y_new = axpy(&y, h, &[(1.0, &k2)]);
        let f2 = f(t + h, &y_new)?;
        let k3 = solve(std::array::from_fn(|i| {
            f2[i] - e32 * (k2[i] - f1[i]) - 2.0 * (k1[i] - f0[i])
        }))?;
        stats.evaluations += 2;

        let err_vec: [f64; N] = std::array::from_fn(|i| h / 6.0 * (k1[i] - 2.0 * k2[i] + k3[i]));
        let err = scaled_norm(&err_vec, &y, &y_new, &tol);
        let fac = (0.8 * err.max(1e-10).powf(-1.0 / 3.0)).clamp(0.2, 5.0);

        if err <= 1.0 {
            stats.accepted += 1;
            last_error = err;
            t = if hits { target } else { t + h };
            y = y_new;
            f0 = f2;
            while next_out < grid.len() && grid[next_out] <= t {
                out_times.push(grid[next_out]);
                out_states.push(y);
                next_out += 1;
            }
            h = (h * fac).min(h_max);
        } else {
            stats.rejected += 1;
            h *= fac.min(1.0);
        }
    }

    Ok(Solution {
        times: out_times,
        states: out_states,
        stats,
        last_error,
    })
}
