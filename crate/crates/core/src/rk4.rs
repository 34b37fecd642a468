//! Classical fixed-step fourth-order Runge-Kutta for planar systems.

pub type State = [f64; 2];

#[inline]
pub fn rk4_step<F>(f: &F, x: f64, y: State, h: f64) -> State
where
    F: Fn(f64, State) -> State,
{
    let k1 = f(x, y);
    let k2 = f(x + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
    let k3 = f(x + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
    let k4 = f(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Integrates `n` steps of size `h` from `(x0, y0)` and returns all `n + 1` states.
pub fn rk4_trajectory<F>(f: &F, x0: f64, y0: State, h: f64, n: usize) -> Vec<State>
where
    F: Fn(f64, State) -> State,
{
    let mut out = Vec::with_capacity(n + 1);
    let mut y = y0;
    out.push(y);
    for i in 0..n {
        y = rk4_step(f, x0 + i as f64 * h, y, h);
        out.push(y);
    }
    out
}
