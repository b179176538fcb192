//! Exact Nash equilibrium for constant coefficients.
//!
//! Differentiating the equilibrium system turns it into the linear
//! second-order ODE `Q'' = At Q' - Ah Q - Ch` for the inventory vector Q,
//! i.e. the first-order system `L' = M L + N` for `L = [Q'; Q]` with
//!
//! ```text
//! M = [At  -Ah]    N = [-Ch]    At = (a/2b)(I - ones)
//!     [I     0]        [  0]    Ah = diag(-lambda_i sigma^2 / b)
//!                               Ch = (mu/2b) * 1
//! ```
//!
//! The two-point boundary conditions are `Q(0) = Q_0` and the terminal
//! coupling `Q'(T) = G Q(T)` with `G = diag(-beta_i/b)`. The solution is an
//! exact matrix-exponential flow; only the initial rate `Q'(0)` has to be
//! recovered from a linear solve. The inhomogeneous term always goes
//! through the augmented exponential rather than `M^{-1} N`: when some
//! `lambda_i = 0` the matrix M is singular and the inverse does not exist.

use ndarray::{s, Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::model::{AgentParams, MarketParams, Provenance, TimeGrid, TrajectorySet};

/// The constant-coefficient equilibrium system in block form.
#[derive(Debug, Clone)]
pub struct OdeSystem {
    pub n_agents: usize,
    /// Horizon the terminal condition applies at.
    pub horizon: f64,
    /// `M`, 2n x 2n.
    pub state_matrix: Matrix,
    /// `N`, 2n x 1.
    pub forcing: Matrix,
    /// `G = diag(-beta_i/b)`, n x n.
    pub terminal_gain: Matrix,
    /// `Ah = diag(-lambda_i sigma^2 / b)`, n x n.
    pub risk_diag: Matrix,
    /// `ones`, n x n.
    pub interaction: Matrix,
    /// `At = (a/2b)(I - ones)`: zero diagonal, off-diagonal -a/2b.
    pub rate_coupling: Matrix,
    /// `Ch = (mu/2b) 1`, n x 1.
    pub drift_forcing: Matrix,
}

/// Boundary data recovered from the two-point conditions.
#[derive(Debug, Clone)]
pub struct BoundaryConstants {
    /// xi_1 = Q'(0), the equilibrium rates at time zero.
    pub initial_rate: Array1<f64>,
    /// xi_2 = Q(0), fixed to the initial inventories.
    pub initial_inventory: Array1<f64>,
    /// sup |Q(0) - Q_0| (zero by construction).
    pub initial_residual: f64,
    /// sup |Q'(T) - G Q(T)| of the reconstructed terminal state.
    pub terminal_residual: f64,
    /// Condition estimate of the boundary matrix `E1 - G E3`.
    pub cond: f64,
}

/// Assembles the block system; requires constant drift and volatility.
pub fn build_system(market: &MarketParams, agents: &[AgentParams]) -> Result<OdeSystem> {
    if !market.drift.is_constant() || !market.vol.is_constant() {
        return Err(Error::InvalidParameter(
            "closed-form backend requires constant mu and sigma".into(),
        ));
    }
    let n = agents.len();
    let mu = market.drift.constant_value()?;
    let sigma = market.vol.constant_value()?;
    let sigma2 = sigma * sigma;
    let b = market.b;

    let risk_diag = Array2::from_diag(&Array1::from_iter(
        agents.iter().map(|ag| -ag.lambda * sigma2 / b),
    ));
    let terminal_gain = Array2::from_diag(&Array1::from_iter(
        agents.iter().map(|ag| -ag.beta(market) / b),
    ));
    let interaction: Matrix = Array2::ones((n, n));
    let eye: Matrix = Array2::eye(n);
    let rate_coupling = (&eye - &interaction) * (market.a / (2.0 * b));
    let drift_forcing: Matrix = Array2::from_elem((n, 1), mu / (2.0 * b));

    let mut state_matrix: Matrix = Array2::zeros((2 * n, 2 * n));
    state_matrix.slice_mut(s![..n, ..n]).assign(&rate_coupling);
    state_matrix.slice_mut(s![..n, n..]).assign(&(-&risk_diag));
    state_matrix.slice_mut(s![n.., ..n]).assign(&eye);

    let mut forcing: Matrix = Array2::zeros((2 * n, 1));
    forcing.slice_mut(s![..n, ..]).assign(&(-&drift_forcing));

    Ok(OdeSystem {
        n_agents: n,
        horizon: market.horizon,
        state_matrix,
        forcing,
        terminal_gain,
        risk_diag,
        interaction,
        rate_coupling,
        drift_forcing,
    })
}

/// Recovers the free constant `xi_1 = Q'(0)` from the terminal coupling:
///
/// ```text
/// (E1 - G E3) xi_1 = [-I  G] R(T) - (E2 - G E4) Q_0
/// ```
///
/// where `exp(T M) = [E1 E2; E3 E4]` and `R(T) = int_0^T exp(sM) N ds`.
/// A near-singular boundary matrix signals a parameter regime close to
/// non-uniqueness and surfaces as `IllConditioned`.
pub fn solve_boundary(sys: &OdeSystem, q0: &[f64]) -> Result<BoundaryConstants> {
    let n = sys.n_agents;
    if q0.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "q0 has {} entries for {n} agents",
            q0.len()
        )));
    }
    let horizon = sys.horizon;
    let exp_tm = linalg::mat_exp(&sys.state_matrix, horizon)?;
    let r = linalg::exp_integral(&sys.state_matrix, &sys.forcing, horizon)?;

    let e1 = exp_tm.slice(s![..n, ..n]).to_owned();
    let e2 = exp_tm.slice(s![..n, n..]).to_owned();
    let e3 = exp_tm.slice(s![n.., ..n]).to_owned();
    let e4 = exp_tm.slice(s![n.., n..]).to_owned();
    let r_top = r.slice(s![..n, ..]).to_owned();
    let r_bot = r.slice(s![n.., ..]).to_owned();

    let g = &sys.terminal_gain;
    let lhs = &e1 - &g.dot(&e3);
    let q0_col = Array2::from_shape_fn((n, 1), |(i, _)| q0[i]);
    let rhs = g.dot(&r_bot) - &r_top - (&e2 - &g.dot(&e4)).dot(&q0_col);

    let solved = linalg::solve_linear(&lhs, &rhs)?;
    let xi1 = solved.x.column(0).to_owned();

    // Reconstruct the terminal state and measure the boundary defect.
    let mut state0: Matrix = Array2::zeros((2 * n, 1));
    state0.slice_mut(s![..n, ..]).assign(&solved.x);
    state0.slice_mut(s![n.., ..]).assign(&q0_col);
    let state_t = exp_tm.dot(&state0) + &r;
    let rate_t = state_t.slice(s![..n, ..]).to_owned();
    let inv_t = state_t.slice(s![n.., ..]).to_owned();
    let defect = &rate_t - &g.dot(&inv_t);
    let terminal_residual = defect.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    Ok(BoundaryConstants {
        initial_rate: xi1,
        initial_inventory: Array1::from_vec(q0.to_vec()),
        initial_residual: 0.0,
        terminal_residual,
        cond: solved.cond,
    })
}

/// Evaluates the flow `L(t_k) = exp(t_k M) [xi_1; Q_0] + R(t_k)` at every
/// node by exact per-step propagation.
pub fn equilibrium_trajectories(
    sys: &OdeSystem,
    bc: &BoundaryConstants,
    grid: &TimeGrid,
) -> Result<TrajectorySet> {
    let n = sys.n_agents;
    let n_nodes = grid.n_nodes();
    let dt = grid.dt();
    let step = linalg::mat_exp(&sys.state_matrix, dt)?;
    let step_forcing = linalg::exp_integral(&sys.state_matrix, &sys.forcing, dt)?;

    let mut state: Matrix = Array2::zeros((2 * n, 1));
    for i in 0..n {
        state[[i, 0]] = bc.initial_rate[i];
        state[[n + i, 0]] = bc.initial_inventory[i];
    }

    let mut inventory = Array2::zeros((n, n_nodes));
    let mut rate = Array2::zeros((n, n_nodes));
    for k in 0..n_nodes {
        for i in 0..n {
            rate[[i, k]] = state[[i, 0]];
            inventory[[i, k]] = state[[n + i, 0]];
        }
        if k + 1 < n_nodes {
            state = step.dot(&state) + &step_forcing;
        }
    }

    Ok(TrajectorySet {
        grid: grid.clone(),
        inventory,
        rate,
        provenance: Provenance::ClosedForm,
    })
}

/// Full pipeline: build the system, solve the boundary conditions, and
/// evaluate the equilibrium on the grid.
pub fn solve(
    market: &MarketParams,
    agents: &[AgentParams],
    grid: &TimeGrid,
) -> Result<TrajectorySet> {
    let sys = build_system(market, agents)?;
    let q0: Vec<f64> = agents.iter().map(|ag| ag.q0).collect();
    let bc = solve_boundary(&sys, &q0)?;
    equilibrium_trajectories(&sys, &bc, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_grid, Scenario};
    use crate::single_agent;

    #[test]
    fn system_blocks_single_agent() {
        let market = MarketParams::constant(0.01, 0.01, 1.0, 0.02, 0.2);
        let agents = [AgentParams::new(1.0, 1.0, 1.0)];
        let sys = build_system(&market, &agents).unwrap();
        // n = 1: ones = I, so the rate coupling vanishes and
        // M = [[0, lambda sigma^2 / b], [1, 0]].
        assert_eq!(sys.rate_coupling[[0, 0]], 0.0);
        assert_eq!(sys.state_matrix[[0, 0]], 0.0);
        assert!((sys.state_matrix[[0, 1]] - 4.0).abs() < 1e-14);
        assert_eq!(sys.state_matrix[[1, 0]], 1.0);
        assert_eq!(sys.state_matrix[[1, 1]], 0.0);
    }

    #[test]
    fn system_blocks_baseline() {
        let scenario = Scenario::baseline();
        let sys = build_system(&scenario.market, &scenario.agents).unwrap();
        // Ah = diag(-lambda_i sigma^2 / b) = diag(-4, -2, -1).
        assert!((sys.risk_diag[[0, 0]] + 4.0).abs() < 1e-12);
        assert!((sys.risk_diag[[1, 1]] + 2.0).abs() < 1e-12);
        assert!((sys.risk_diag[[2, 2]] + 1.0).abs() < 1e-12);
        // At has zero diagonal and -a/2b = -0.5 off-diagonal.
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 0.0 } else { -0.5 };
                assert!((sys.rate_coupling[[i, j]] - expected).abs() < 1e-14);
            }
        }
        // G = diag(-beta_i / b).
        assert!((sys.terminal_gain[[0, 0]] + 99.5).abs() < 1e-10);
        assert!((sys.terminal_gain[[2, 2]] + 24.5).abs() < 1e-10);
    }

    #[test]
    fn system_decouples_without_impact() {
        let mut market = MarketParams::constant(0.01, 0.01, 1.0, 0.02, 0.2);
        market.a = 1e-300; // a -> 0 limit; a = 0 itself is outside the domain
        let agents = [
            AgentParams::new(1.0, 1.0, 1.0),
            AgentParams::new(0.5, 0.5, 1.0),
        ];
        let sys = build_system(&market, &agents).unwrap();
        assert!(sys.rate_coupling.iter().all(|v| v.abs() < 1e-290));
    }

    #[test]
    fn system_rejects_time_varying_coefficients() {
        let mut market = MarketParams::constant(0.01, 0.01, 1.0, 0.02, 0.2);
        market.vol = crate::model::CoefficientSpec::Piecewise {
            t: vec![0.0, 0.5],
            v: vec![0.2, 0.4],
        };
        let agents = [AgentParams::new(1.0, 1.0, 1.0)];
        assert!(build_system(&market, &agents).is_err());
    }

    #[test]
    fn boundary_zero_data_gives_zero_rate() {
        let market = MarketParams::constant(0.01, 0.01, 1.0, 0.0, 0.2);
        let agents = [
            AgentParams::new(1.0, 1.0, 0.0),
            AgentParams::new(0.5, 0.5, 0.0),
        ];
        let sys = build_system(&market, &agents).unwrap();
        let bc = solve_boundary(&sys, &[0.0, 0.0]).unwrap();
        assert!(bc.initial_rate.iter().all(|v| v.abs() < 1e-14));
        let grid = make_grid(1.0, 50).unwrap();
        let traj = equilibrium_trajectories(&sys, &bc, &grid).unwrap();
        assert!(traj.inventory.iter().all(|v| v.abs() < 1e-12));
        assert!(traj.rate.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn boundary_residuals_small_on_baseline() {
        let scenario = Scenario::baseline();
        let sys = build_system(&scenario.market, &scenario.agents).unwrap();
        let q0: Vec<f64> = scenario.agents.iter().map(|a| a.q0).collect();
        let bc = solve_boundary(&sys, &q0).unwrap();
        assert!(bc.initial_residual <= 1e-10);
        assert!(bc.terminal_residual <= 1e-8, "residual {}", bc.terminal_residual);
        assert!(bc.cond.is_finite());
    }

    #[test]
    fn matches_single_agent_closed_form() {
        // n = 1, lambda = 0, mu = 0: Q(t) = Q0 (b + beta (T-t)) / (b + beta T).
        let market = MarketParams::constant(0.01, 0.01, 1.0, 0.0, 0.2);
        let agents = [AgentParams::new(1.0, 0.0, 2.0)];
        let grid = make_grid(1.0, 100).unwrap();
        let traj = solve(&market, &agents, &grid).unwrap();
        let beta = agents[0].beta(&market);
        let denom = market.b + beta;
        for (k, &t) in grid.nodes().iter().enumerate() {
            let expected = 2.0 * (market.b + beta * (1.0 - t)) / denom;
            assert!(
                (traj.inventory[[0, k]] - expected).abs() < 1e-12,
                "node {k}: {} vs {expected}",
                traj.inventory[[0, k]]
            );
        }
        // Constant optimal rate.
        let expected_rate = -2.0 * beta / denom;
        for k in 0..grid.n_nodes() {
            assert!((traj.rate[[0, k]] - expected_rate).abs() < 1e-12);
        }

        // And against the RK4 single-agent solver on the same grid.
        let abc = single_agent::solve_abc(&agents[0], &market, &grid, &[]).unwrap();
        let (inv, _) = single_agent::optimal_trajectory(&agents[0], &market, &grid, &abc);
        for k in 0..grid.n_nodes() {
            assert!((traj.inventory[[0, k]] - inv[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn baseline_liquidates_monotonically() {
        let scenario = Scenario::baseline();
        let grid = make_grid(1.0, 1000).unwrap();
        let traj = solve(&scenario.market, &scenario.agents, &grid).unwrap();
        traj.check_consistency(&[1.0, 1.0, 0.5], 1e-8).unwrap();
        for i in 0..3 {
            let q0 = scenario.agents[i].q0;
            let q_t = traj.inventory[[i, grid.n_steps()]];
            assert!(q_t.abs() < 0.1 * q0, "agent {i} keeps {q_t}");
            for k in 0..grid.n_steps() {
                assert!(
                    traj.inventory[[i, k + 1]] <= traj.inventory[[i, k]] + 1e-9,
                    "agent {i} inventory not monotone at step {k}"
                );
            }
        }
    }

    #[test]
    fn identical_agents_share_trajectories() {
        let market = MarketParams::constant(0.01, 0.01, 1.0, 0.02, 0.2);
        let agents = [AgentParams::new(0.5, 0.5, 1.0); 3];
        let grid = make_grid(1.0, 200).unwrap();
        let traj = solve(&market, &agents, &grid).unwrap();
        for k in 0..grid.n_nodes() {
            for i in 1..3 {
                assert!((traj.inventory[[i, k]] - traj.inventory[[0, k]]).abs() < 1e-12);
                assert!((traj.rate[[i, k]] - traj.rate[[0, k]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn permutation_equivariance() {
        let market = MarketParams::constant(0.01, 0.01, 1.0, 0.02, 0.2);
        let agents = [
            AgentParams::new(1.0, 1.0, 1.0),
            AgentParams::new(0.5, 0.5, 1.0),
            AgentParams::new(0.25, 0.25, 0.5),
        ];
        let permuted = [agents[2], agents[0], agents[1]];
        let grid = make_grid(1.0, 200).unwrap();
        let base = solve(&market, &agents, &grid).unwrap();
        let perm = solve(&market, &permuted, &grid).unwrap();
        // Row i of the permuted run is row map[i] of the base run, up to
        // floating-point summation order.
        let map = [2usize, 0, 1];
        for (pi, &bi) in map.iter().enumerate() {
            for k in 0..grid.n_nodes() {
                assert!((perm.inventory[[pi, k]] - base.inventory[[bi, k]]).abs() < 1e-12);
                assert!((perm.rate[[pi, k]] - base.rate[[bi, k]]).abs() < 1e-12);
            }
        }
    }
}
