//! Single-agent optimal execution against fixed deterministic opponents.
//!
//! With deterministic coefficients the agent's value function is the
//! quadratic `a_t Q^2 + b_t Q + c_t` whose coefficients solve backward ODEs
//! (all martingale parts vanish):
//!
//! ```text
//! da/dt = a^2 / b_slip - lambda sigma_t^2,          a(T) = beta
//! db/dt = a b / b_slip + mu_t + imp * sum_opp q_j,  b(T) = 0
//! dc/dt = b^2 / (4 b_slip),                         c(T) = 0
//! ```
//!
//! and the optimum is the feedback rate `q* = -(a Q + b/2) / b_slip`.
//! Here `b_slip` is the market slippage coefficient and `imp` the permanent
//! impact; the empty opponent sum makes this the plain one-agent problem.

use crate::error::{Error, Result};
use crate::model::{AgentParams, MarketParams, TimeGrid};
use crate::path;

/// Value-function coefficients of one agent on a grid: the value at
/// inventory Q and node k is `a[k] Q^2 + b[k] Q + c[k]`.
#[derive(Debug, Clone)]
pub struct AbcSolution {
    pub grid: TimeGrid,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// Slack allowed when checking the a-priori coefficient bounds.
const BOUND_SLACK: f64 = 1e-8;

fn require_beta(agent: &AgentParams, market: &MarketParams) -> Result<f64> {
    let beta = agent.beta(market);
    if beta < 0.0 {
        return Err(Error::BetaNegative { beta });
    }
    Ok(beta)
}

/// Solves the quadratic coefficient (scalar Riccati) backward:
/// `da/dt = a^2/b - lambda sigma_t^2`, `a(T) = beta`.
///
/// The result is checked against the a-priori sandwich
/// `beta exp(-M (T-t)/b) <= a(t) <= beta + lambda ||sigma||^2 (T-t)` with
/// `M = beta + lambda ||sigma||^2 T`; a breach is reported as a blow-up.
pub fn solve_a(agent: &AgentParams, market: &MarketParams, grid: &TimeGrid) -> Result<Vec<f64>> {
    let beta = require_beta(agent, market)?;
    let sigma2 = market.vol.interval_values(grid)?;
    let b = market.b;
    let lambda = agent.lambda;
    let dt = grid.dt();
    let n = grid.n_steps();

    let mut out = vec![0.0; n + 1];
    out[n] = beta;
    let mut y = beta;
    for k in (0..n).rev() {
        let source = lambda * sigma2[k];
        let f = |a: f64| a * a / b - source;
        let k1 = f(y);
        let k2 = f(y - 0.5 * dt * k1);
        let k3 = f(y - 0.5 * dt * k2);
        let k4 = f(y - dt * k3);
        y -= dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out[k] = y;
    }

    // A-priori bounds from the comparison argument.
    let sigma2_sup = market.vol_squared_sup();
    let horizon = grid.horizon();
    let big_m = beta + lambda * sigma2_sup * horizon;
    for (k, &t) in grid.nodes().iter().enumerate() {
        let lower = beta * (-big_m * (horizon - t) / b).exp();
        let upper = beta + lambda * sigma2_sup * (horizon - t);
        let slack = BOUND_SLACK * (1.0 + beta.abs() + upper.abs());
        if out[k] < lower - slack || out[k] > upper + slack {
            return Err(Error::BlowUp {
                what: "single-agent quadratic coefficient",
                t,
                norm: out[k],
                guard: upper + slack,
            });
        }
    }
    Ok(out)
}

/// Solves the linear coefficient backward given the quadratic path and the
/// opponents' rate paths (empty slice for no opponents):
/// `db/dt = a_path b / b_slip + mu_t + imp * sum_j q_j`, `b(T) = 0`.
pub fn solve_b(
    market: &MarketParams,
    grid: &TimeGrid,
    a_path: &[f64],
    opponents: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let n = grid.n_steps();
    if a_path.len() != n + 1 {
        return Err(Error::GridMismatch {
            left: a_path.len(),
            right: n + 1,
        });
    }
    for q in opponents {
        if q.len() != n + 1 {
            return Err(Error::GridMismatch {
                left: q.len(),
                right: n + 1,
            });
        }
    }
    let mu = market.drift.interval_values(grid)?;
    let b_slip = market.b;
    let imp = market.a;
    let dt = grid.dt();

    // Summed opponent rate at nodes, resampled to interval midpoints.
    let opp_sum: Vec<f64> = (0..=n)
        .map(|k| opponents.iter().map(|q| q[k]).sum::<f64>())
        .collect();
    let opp_mid = path::midpoints(&opp_sum);
    let a_mid = path::midpoints(a_path);

    let mut out = vec![0.0; n + 1];
    let mut y = 0.0;
    for k in (0..n).rev() {
        let f = |a: f64, opp: f64, bb: f64| a * bb / b_slip + mu[k] + imp * opp;
        let k1 = f(a_path[k + 1], opp_sum[k + 1], y);
        let k2 = f(a_mid[k], opp_mid[k], y - 0.5 * dt * k1);
        let k3 = f(a_mid[k], opp_mid[k], y - 0.5 * dt * k2);
        let k4 = f(a_path[k], opp_sum[k], y - dt * k3);
        y -= dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out[k] = y;
    }
    out[n] = 0.0;
    Ok(out)
}

/// Constant coefficient `c(t) = -int_t^T b(s)^2 / (4 b_slip) ds` by
/// backward trapezoid; `c <= 0` and `c(T) = 0` by construction.
pub fn solve_c(grid: &TimeGrid, b_path: &[f64], b_slip: f64) -> Vec<f64> {
    let integrand: Vec<f64> = b_path.iter().map(|b| b * b / (4.0 * b_slip)).collect();
    path::suffix_trapezoid(&integrand, grid.dt())
        .into_iter()
        .map(|v| -v)
        .collect()
}

/// All three coefficients in one call.
pub fn solve_abc(
    agent: &AgentParams,
    market: &MarketParams,
    grid: &TimeGrid,
    opponents: &[Vec<f64>],
) -> Result<AbcSolution> {
    let a = solve_a(agent, market, grid)?;
    let b = solve_b(market, grid, &a, opponents)?;
    let c = solve_c(grid, &b, market.b);
    Ok(AbcSolution {
        grid: grid.clone(),
        a,
        b,
        c,
    })
}

/// Value of the quadratic `a Q^2 + b Q + c` at a grid node.
///
/// `t` must lie on the grid; off-grid times are an error, not interpolated.
/// The returned value excludes the permanent-impact bookkeeping term
/// `imp Q^2 / 2`; add it to recover the raw cost-to-go.
pub fn value_function(abc: &AbcSolution, t: f64, inventory: f64) -> Result<f64> {
    let k = abc.grid.node_index_of(t)?;
    Ok(abc.a[k] * inventory * inventory + abc.b[k] * inventory + abc.c[k])
}

/// Forward integration of the optimal feedback: `Q' = -(a Q + b/2)/b_slip`
/// from the agent's initial inventory. Returns the inventory path and the
/// feedback rate evaluated on it.
pub fn optimal_trajectory(
    agent: &AgentParams,
    market: &MarketParams,
    grid: &TimeGrid,
    abc: &AbcSolution,
) -> (Vec<f64>, Vec<f64>) {
    let n = grid.n_steps();
    let dt = grid.dt();
    let b_slip = market.b;
    let a_mid = path::midpoints(&abc.a);
    let b_mid = path::midpoints(&abc.b);

    let feedback = |a: f64, b: f64, q_inv: f64| -(a * q_inv + 0.5 * b) / b_slip;

    let mut inventory = vec![0.0; n + 1];
    inventory[0] = agent.q0;
    let mut y = agent.q0;
    for k in 0..n {
        let k1 = feedback(abc.a[k], abc.b[k], y);
        let k2 = feedback(a_mid[k], b_mid[k], y + 0.5 * dt * k1);
        let k3 = feedback(a_mid[k], b_mid[k], y + 0.5 * dt * k2);
        let k4 = feedback(abc.a[k + 1], abc.b[k + 1], y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        inventory[k + 1] = y;
    }
    let rate: Vec<f64> = (0..=n)
        .map(|k| feedback(abc.a[k], abc.b[k], inventory[k]))
        .collect();
    (inventory, rate)
}
