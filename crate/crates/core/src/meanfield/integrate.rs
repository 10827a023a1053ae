use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

// Three-stage Gauss-Legendre collocation: order 6, symplectic, and exact
// for quadratic invariants such as the particle number.
const SQRT15: f64 = 3.872_983_346_207_417;
const A: [[f64; 3]; 3] = [
    [5.0 / 36.0, 2.0 / 9.0 - SQRT15 / 15.0, 5.0 / 36.0 - SQRT15 / 30.0],
    [5.0 / 36.0 + SQRT15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - SQRT15 / 24.0],
    [5.0 / 36.0 + SQRT15 / 30.0, 2.0 / 9.0 + SQRT15 / 15.0, 5.0 / 36.0],
];
pub(crate) const B: [f64; 3] = [5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0];

/// Implicit Gauss-Legendre stepper with fixed-point stage iteration.
pub(crate) struct Gauss6 {
    slopes: [Vec<Complex64>; 3],
    stages: [Vec<Complex64>; 3],
    trial: Vec<Complex64>,
    rel_tol: f64,
    max_iter: usize,
}

impl Gauss6 {
    pub(crate) fn new(n: usize, rel_tol: f64) -> Self {
        Self {
            slopes: std::array::from_fn(|_| vec![ZERO; n]),
            stages: std::array::from_fn(|_| vec![ZERO; n]),
            trial: vec![ZERO; n],
            rel_tol,
            max_iter: 60,
        }
    }

    /// Stage value and slope `i` of the last accepted step.
    pub(crate) fn stage(&self, i: usize) -> (&[Complex64], &[Complex64]) {
        (&self.stages[i], &self.slopes[i])
    }

    /// One step of size `h`; returns `false` if the stage iteration failed
    /// and leaves `y` untouched in that case.
    pub(crate) fn step<F>(&mut self, y: &mut [Complex64], h: f64, f: &mut F) -> bool
    where
        F: FnMut(&[Complex64], &mut [Complex64]),
    {
        let n = y.len();
        f(y, &mut self.trial);
        for s in &mut self.slopes {
            s.copy_from_slice(&self.trial);
        }
        let scale = 1.0 + y.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let target = self.rel_tol * scale;
        let mut last = f64::INFINITY;
        for iter in 0..self.max_iter {
            for i in 0..3 {
                let st = &mut self.stages[i];
                for k in 0..n {
                    st[k] = y[k]
                        + (self.slopes[0][k] * A[i][0]
                            + self.slopes[1][k] * A[i][1]
                            + self.slopes[2][k] * A[i][2])
                            * h;
                }
            }
            let mut change: f64 = 0.0;
            for i in 0..3 {
                f(&self.stages[i], &mut self.trial);
                for (s, t) in self.slopes[i].iter_mut().zip(&self.trial) {
                    change = change.max((*s - *t).norm());
                    *s = *t;
                }
            }
            let change = change * h.abs();
            // Stop once converged or once rounding noise stalls the iteration.
            let stalled = iter > 3 && change >= last && change < 1e3 * target;
            if change <= target || stalled {
                for i in 0..3 {
                    let st = &mut self.stages[i];
                    for k in 0..n {
                        st[k] = y[k]
                            + (self.slopes[0][k] * A[i][0]
                                + self.slopes[1][k] * A[i][1]
                                + self.slopes[2][k] * A[i][2])
                                * h;
                    }
                }
                for k in 0..n {
                    y[k] += (self.slopes[0][k] * B[0] + self.slopes[1][k] * B[1] + self.slopes[2][k] * B[2]) * h;
                }
                return true;
            }
            last = change;
        }
        false
    }
}

/// Advances `y` by `span` in `ceil(|span|/dt)` equal steps, splitting any
/// step whose stage iteration fails. `after_step(stepper, h)` runs after
/// every accepted step.
pub(crate) fn advance<F, G>(
    stepper: &mut Gauss6,
    y: &mut [Complex64],
    start: f64,
    span: f64,
    dt: f64,
    f: &mut F,
    after_step: &mut G,
) -> Result<()>
where
    F: FnMut(&[Complex64], &mut [Complex64]),
    G: FnMut(&Gauss6, f64),
{
    if span == 0.0 {
        return Ok(());
    }
    let steps = ((span.abs() / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    for k in 0..steps {
        substep(stepper, y, start + h * k as f64, h, f, after_step, 0)?;
    }
    Ok(())
}

fn substep<F, G>(
    stepper: &mut Gauss6,
    y: &mut [Complex64],
    time: f64,
    h: f64,
    f: &mut F,
    after_step: &mut G,
    depth: usize,
) -> Result<()>
where
    F: FnMut(&[Complex64], &mut [Complex64]),
    G: FnMut(&Gauss6, f64),
{
    if stepper.step(y, h, f) {
        after_step(stepper, h);
        return Ok(());
    }
    if depth >= 30 {
        return Err(Error::StepUnderflow { time, dt: h });
    }
    substep(stepper, y, time, 0.5 * h, f, after_step, depth + 1)?;
    substep(stepper, y, time + 0.5 * h, 0.5 * h, f, after_step, depth + 1)
}
