//! Open-loop Nash equilibria for n-agent market impact games.
//!
//! n risk-averse agents trade a common asset whose price carries permanent
//! impact `a` proportional to the cumulative traded volume of *all* agents,
//! while each agent additionally pays quadratic slippage `b` on their own
//! trading rate. Agent `i` holds inventory `Q_i` with rate `q_i = dQ_i/dt`
//! and minimizes expected implementation shortfall plus a terminal penalty
//! `alpha_i * Q_i(T)^2` and a running risk charge `lambda_i * sigma^2 * Q_i^2`.
//!
//! The open-loop Nash equilibrium solves a coupled forward-backward system:
//! inventories run forward from `Q_i(0)`, while the rates satisfy
//!
//! ```text
//! q_i(t) = -(beta_i/b) Q_i(T)
//!          + int_t^T (1/b) ( -lambda_i sigma_s^2 Q_i(s)
//!                            + (mu_s + a * sum_{j != i} q_j(s)) / 2 ) ds
//! ```
//!
//! with `beta_i = alpha_i - a/2`. Three backends solve this system and
//! cross-check each other:
//!
//! * [`closed_form`] — constant coefficients: the system reduces to a linear
//!   second-order ODE solved exactly with a matrix exponential.
//! * [`riccati`] — deterministic (possibly time-varying) coefficients:
//!   decoupling via a matrix Riccati equation integrated with RK4.
//! * [`mc`] — Markovian stochastic coefficients: Picard iteration with
//!   least-squares Monte Carlo regression.
//!
//! [`equilibrium`] provides ground truth: cost evaluation, best responses,
//! fixed-point iteration, and unilateral-deviation Nash tests. [`aggregate`]
//! covers the similar-agents reduction to a scalar system and the scaled
//! mean-field limit as the number of agents grows.

pub mod aggregate;
pub mod closed_form;
pub mod equilibrium;
mod error;
pub mod linalg;
pub mod mc;
pub mod model;
pub mod path;
pub mod riccati;
pub mod single_agent;

pub use error::{Error, Result};
pub use model::{
    AgentParams, CoefficientSpec, FactorParams, MarketParams, Scenario, TimeGrid, TrajectorySet,
    ValidationReport, Verdict,
};
