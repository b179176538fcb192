//! Model parameters, time grid, trajectories, and assumption validation.
//!
//! Conventions: inventory `Q` is in shares (negative rate = selling),
//! permanent impact `a` is price per share per share, slippage `b` is price
//! per share per (share/time). The volatility spec carries `|sigma_t|`; the
//! model only ever consumes `sigma_t^2`.

use ndarray::Array2;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default number of grid intervals.
pub const DEFAULT_N_STEPS: usize = 1000;

/// Parameters of the one-factor mean-reverting coefficient model.
///
/// The factor follows an Ornstein-Uhlenbeck diffusion
/// `dX = speed * (level - X) dt + vol_of_vol dW` started at `x0`; the
/// coefficient value at time `t` is `max(X_t, floor)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorParams {
    pub x0: f64,
    pub level: f64,
    pub speed: f64,
    pub vol_of_vol: f64,
    pub floor: f64,
}

/// A (possibly time-varying, possibly stochastic) model coefficient.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientSpec {
    /// Constant value.
    Constant(f64),
    /// Piecewise-constant in time: value `v[k]` on `[t[k], t[k+1])`,
    /// with `t[0] = 0` and the last value extending to the horizon.
    Piecewise { t: Vec<f64>, v: Vec<f64> },
    /// One-factor stochastic model; only the Monte Carlo backend accepts it.
    Factor(FactorParams),
}

impl CoefficientSpec {
    pub fn is_constant(&self) -> bool {
        matches!(self, CoefficientSpec::Constant(_))
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, CoefficientSpec::Factor(_))
    }

    /// Value at time `t` for deterministic specs.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        match self {
            CoefficientSpec::Constant(v) => Ok(*v),
            CoefficientSpec::Piecewise { t: ts, v } => {
                // Largest breakpoint <= t; times before the first get v[0].
                let mut idx = 0;
                for (k, &tk) in ts.iter().enumerate() {
                    if tk <= t {
                        idx = k;
                    } else {
                        break;
                    }
                }
                Ok(v[idx])
            }
            CoefficientSpec::Factor(_) => Err(Error::StochasticCoefficient),
        }
    }

    /// One value per grid interval, sampled at the interval midpoint.
    ///
    /// For piecewise-constant specs whose breakpoints sit on grid nodes this
    /// reproduces the coefficient exactly on every interval, which keeps the
    /// RK4 integrators at full order across breakpoints.
    pub fn interval_values(&self, grid: &TimeGrid) -> Result<Vec<f64>> {
        (0..grid.n_steps()).map(|k| self.value_at(grid.mid(k))).collect()
    }

    /// One value per grid node.
    pub fn node_values(&self, grid: &TimeGrid) -> Result<Vec<f64>> {
        grid.nodes().iter().map(|&t| self.value_at(t)).collect()
    }

    /// Constant value, or an error for anything time-varying.
    pub fn constant_value(&self) -> Result<f64> {
        match self {
            CoefficientSpec::Constant(v) => Ok(*v),
            CoefficientSpec::Piecewise { .. } | CoefficientSpec::Factor(_) => Err(
                Error::InvalidParameter("expected a constant coefficient".into()),
            ),
        }
    }

    /// Infimum of the coefficient value over the horizon.
    ///
    /// For the stochastic factor this is the floor of the clamp, the lowest
    /// value the mapped coefficient can reach.
    pub fn min_value(&self) -> f64 {
        match self {
            CoefficientSpec::Constant(v) => *v,
            CoefficientSpec::Piecewise { v, .. } => v.iter().cloned().fold(f64::INFINITY, f64::min),
            CoefficientSpec::Factor(p) => p.floor,
        }
    }

    /// Supremum of the coefficient value over the horizon (infinite for the
    /// unbounded factor model).
    pub fn max_value(&self) -> f64 {
        match self {
            CoefficientSpec::Constant(v) => *v,
            CoefficientSpec::Piecewise { v, .. } => {
                v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            }
            CoefficientSpec::Factor(_) => f64::INFINITY,
        }
    }

    fn check(&self, name: &str, require_nonnegative: bool) -> Result<()> {
        match self {
            CoefficientSpec::Constant(v) => {
                if !v.is_finite() {
                    return Err(Error::Config(format!("{name}: non-finite value")));
                }
                if require_nonnegative && *v < 0.0 {
                    return Err(Error::Config(format!("{name}: value must be >= 0")));
                }
            }
            CoefficientSpec::Piecewise { t, v } => {
                if t.is_empty() || t.len() != v.len() {
                    return Err(Error::Config(format!(
                        "{name}: piecewise t and v must be nonempty and equal length"
                    )));
                }
                if t[0] != 0.0 {
                    return Err(Error::Config(format!("{name}: first breakpoint must be 0")));
                }
                if t.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config(format!(
                        "{name}: breakpoints must be strictly increasing"
                    )));
                }
                if t.iter().chain(v.iter()).any(|x| !x.is_finite()) {
                    return Err(Error::Config(format!("{name}: non-finite entries")));
                }
                if require_nonnegative && v.iter().any(|&x| x < 0.0) {
                    return Err(Error::Config(format!("{name}: values must be >= 0")));
                }
            }
            CoefficientSpec::Factor(p) => {
                let fields = [p.x0, p.level, p.speed, p.vol_of_vol, p.floor];
                if fields.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Config(format!("{name}: non-finite factor parameters")));
                }
                if p.speed < 0.0 || p.vol_of_vol < 0.0 {
                    return Err(Error::Config(format!(
                        "{name}: speed and vol_of_vol must be >= 0"
                    )));
                }
                if require_nonnegative && p.floor < 0.0 {
                    return Err(Error::Config(format!("{name}: floor must be >= 0")));
                }
            }
        }
        Ok(())
    }
}

// JSON form: a bare number, {"type":"piecewise","t":[..],"v":[..]}, or
// {"type":"factor", ...}.
#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum TaggedSpec {
    Piecewise { t: Vec<f64>, v: Vec<f64> },
    Factor(FactorParams),
}

impl Serialize for CoefficientSpec {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CoefficientSpec::Constant(v) => ser.serialize_f64(*v),
            CoefficientSpec::Piecewise { t, v } => TaggedSpec::Piecewise {
                t: t.clone(),
                v: v.clone(),
            }
            .serialize(ser),
            CoefficientSpec::Factor(p) => TaggedSpec::Factor(*p).serialize(ser),
        }
    }
}

impl<'de> Deserialize<'de> for CoefficientSpec {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Tagged(TaggedSpec),
        }
        match Raw::deserialize(de).map_err(|_| {
            D::Error::custom("expected a number, {type:\"piecewise\",..} or {type:\"factor\",..}")
        })? {
            Raw::Num(v) => Ok(CoefficientSpec::Constant(v)),
            Raw::Tagged(TaggedSpec::Piecewise { t, v }) => Ok(CoefficientSpec::Piecewise { t, v }),
            Raw::Tagged(TaggedSpec::Factor(p)) => Ok(CoefficientSpec::Factor(p)),
        }
    }
}

/// Global market coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Permanent impact coefficient, > 0.
    pub a: f64,
    /// Slippage coefficient, > 0.
    pub b: f64,
    /// Trading horizon, > 0.
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Drift of the unaffected price.
    #[serde(rename = "mu")]
    pub drift: CoefficientSpec,
    /// Magnitude of the price volatility; the model consumes its square.
    #[serde(rename = "sigma")]
    pub vol: CoefficientSpec,
    /// Initial price. Stored for completeness; equilibria do not depend on
    /// it because the expected cost eliminates the price level.
    #[serde(default)]
    pub s0: f64,
}

impl MarketParams {
    /// Constant-coefficient market, the common case.
    pub fn constant(a: f64, b: f64, horizon: f64, mu: f64, sigma: f64) -> Self {
        MarketParams {
            a,
            b,
            horizon,
            drift: CoefficientSpec::Constant(mu),
            vol: CoefficientSpec::Constant(sigma),
            s0: 0.0,
        }
    }

    /// sigma_t^2 at time `t` (deterministic specs only).
    pub fn vol_squared_at(&self, t: f64) -> Result<f64> {
        self.vol.value_at(t).map(|s| s * s)
    }

    pub fn drift_at(&self, t: f64) -> Result<f64> {
        self.drift.value_at(t)
    }

    /// Infimum of sigma_t^2 over the horizon.
    pub fn vol_squared_inf(&self) -> f64 {
        let m = self.vol.min_value();
        m * m
    }

    /// Supremum of sigma_t^2 over the horizon.
    pub fn vol_squared_sup(&self) -> f64 {
        let m = self.vol.max_value();
        m * m
    }

    /// Structural validity: positive a, b, T, well-formed coefficient specs,
    /// nonnegative volatility values.
    pub fn check(&self) -> Result<()> {
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::Config("market.a must be > 0".into()));
        }
        if !(self.b > 0.0) || !self.b.is_finite() {
            return Err(Error::Config("market.b must be > 0".into()));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::Config("market.T must be > 0".into()));
        }
        self.drift.check("market.mu", false)?;
        self.vol.check("market.sigma", true)?;
        Ok(())
    }
}

/// Per-agent parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentParams {
    /// Terminal inventory penalty, >= 0.
    pub alpha: f64,
    /// Running risk aversion, >= 0.
    pub lambda: f64,
    /// Initial inventory in shares (any sign).
    pub q0: f64,
}

impl AgentParams {
    pub fn new(alpha: f64, lambda: f64, q0: f64) -> Self {
        AgentParams { alpha, lambda, q0 }
    }

    /// Effective terminal penalty `beta = alpha - a/2` after folding the
    /// permanent-impact bookkeeping term into the terminal condition.
    pub fn beta(&self, market: &MarketParams) -> f64 {
        self.alpha - market.a / 2.0
    }

    pub fn check(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::Config("agent.alpha must be >= 0".into()));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::Config("agent.lambda must be >= 0".into()));
        }
        if !self.q0.is_finite() {
            return Err(Error::Config("agent.q0 must be finite".into()));
        }
        Ok(())
    }
}

/// `beta_i = alpha_i - a/2` as a free function.
pub fn beta_of(agent: &AgentParams, market: &MarketParams) -> f64 {
    agent.beta(market)
}

/// Uniform time grid `0 = t_0 < t_1 < ... < t_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    dt: f64,
}

impl TimeGrid {
    /// Uniform grid with `n_steps >= 2` intervals.
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if n_steps < 2 {
            return Err(Error::TooFewSteps(n_steps));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter("horizon must be > 0".into()));
        }
        let dt = horizon / n_steps as f64;
        let mut nodes: Vec<f64> = (0..=n_steps).map(|k| k as f64 * dt).collect();
        nodes[n_steps] = horizon;
        Ok(TimeGrid { nodes, dt })
    }

    /// Number of intervals N.
    pub fn n_steps(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Number of nodes, N + 1.
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> f64 {
        self.nodes[k]
    }

    /// Midpoint of interval k.
    pub fn mid(&self, k: usize) -> f64 {
        self.nodes[k] + 0.5 * self.dt
    }

    /// Index of the node equal to `t` (within a relative tolerance), or an
    /// off-grid error. Times are never interpolated here; callers resample.
    pub fn node_index_of(&self, t: f64) -> Result<usize> {
        let k = (t / self.dt).round() as isize;
        if k < 0 || k as usize >= self.n_nodes() {
            return Err(Error::OffGrid { t });
        }
        let k = k as usize;
        if (self.nodes[k] - t).abs() <= 1e-9 * self.horizon().max(1.0) {
            Ok(k)
        } else {
            Err(Error::OffGrid { t })
        }
    }
}

/// Uniform grid constructor (`n_steps >= 2` intervals over `[0, T]`).
pub fn make_grid(horizon: f64, n_steps: usize) -> Result<TimeGrid> {
    TimeGrid::new(horizon, n_steps)
}

/// Which backend produced a trajectory set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Riccati,
    FixedPoint,
    Aggregation,
    McMean,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed_form",
            Provenance::Riccati => "riccati",
            Provenance::FixedPoint => "fixed_point",
            Provenance::Aggregation => "aggregation",
            Provenance::McMean => "mc_mean",
        }
    }
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-agent inventory and rate paths on a common grid.
///
/// Row i of `inventory` is agent i's `Q` path over the nodes; `rate` holds
/// the corresponding `q` paths.
#[derive(Debug, Clone)]
pub struct TrajectorySet {
    pub grid: TimeGrid,
    pub inventory: Array2<f64>,
    pub rate: Array2<f64>,
    pub provenance: Provenance,
}

impl TrajectorySet {
    pub fn n_agents(&self) -> usize {
        self.inventory.nrows()
    }

    /// Agent i's inventory path as a plain vector.
    pub fn inventory_of(&self, i: usize) -> Vec<f64> {
        self.inventory.row(i).to_vec()
    }

    /// Agent i's rate path as a plain vector.
    pub fn rate_of(&self, i: usize) -> Vec<f64> {
        self.rate.row(i).to_vec()
    }

    /// Sum of all agents' rates at each node.
    pub fn total_rate(&self) -> Vec<f64> {
        (0..self.grid.n_nodes())
            .map(|k| self.rate.column(k).sum())
            .collect()
    }

    /// Sum of all agents' inventories at each node.
    pub fn total_inventory(&self) -> Vec<f64> {
        (0..self.grid.n_nodes())
            .map(|k| self.inventory.column(k).sum())
            .collect()
    }

    /// Checks `Q_i(0) = q0_i` and that each inventory increment matches the
    /// trapezoidal integral of the rate over the interval, within `tol`.
    pub fn check_consistency(&self, q0: &[f64], tol: f64) -> Result<()> {
        let dt = self.grid.dt();
        for i in 0..self.n_agents() {
            if (self.inventory[[i, 0]] - q0[i]).abs() > tol {
                return Err(Error::InvalidParameter(format!(
                    "agent {i}: initial inventory {} != {}",
                    self.inventory[[i, 0]],
                    q0[i]
                )));
            }
            for k in 0..self.grid.n_steps() {
                let inc = self.inventory[[i, k + 1]] - self.inventory[[i, k]];
                let trap = 0.5 * dt * (self.rate[[i, k]] + self.rate[[i, k + 1]]);
                if (inc - trap).abs() > tol {
                    return Err(Error::InvalidParameter(format!(
                        "agent {i}, step {k}: inventory increment {inc} vs trapezoid {trap}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Overall verdict of the standing-assumption check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// All agents satisfy the strict uniqueness condition.
    Unique,
    /// The weak assumptions hold but strictness fails somewhere; an
    /// equilibrium may exist without a uniqueness guarantee.
    ExistsMaybeNonUnique,
    /// Some `beta_i < 0`; the solvers' standing assumption is violated.
    AssumptionViolated,
}

/// Per-agent assumption checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentCheck {
    pub beta: f64,
    /// (i) beta_i >= 0.
    pub beta_nonnegative: bool,
    /// (ii) beta_i > 0 and lambda_i > 0.
    pub strictly_positive: bool,
    /// inf_t lambda_i * sigma_t^2.
    pub min_risk_level: f64,
    /// (iii) inf_t lambda_i sigma_t^2 > a^2 b (n-1) / 16.
    pub uniqueness_holds: bool,
}

/// Result of [`validate`]; never an error, callers decide what to do.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n_agents: usize,
    /// Uniqueness threshold `a^2 b (n-1) / 16`.
    pub uniqueness_threshold: f64,
    pub agents: Vec<AgentCheck>,
    pub verdict: Verdict,
}

/// Checks the standing assumptions for an n-agent game: per agent
/// `beta_i >= 0` (weak), `beta_i > 0` and `lambda_i > 0` (strict), and the
/// uniqueness condition `inf_t lambda_i sigma_t^2 > a^2 b (n-1) / 16`,
/// read uniformly in t.
pub fn validate(market: &MarketParams, agents: &[AgentParams], n: usize) -> ValidationReport {
    assert!(n >= 1, "need at least one agent");
    assert_eq!(agents.len(), n, "agents list must have length n");

    let threshold = market.a * market.a * market.b * (n as f64 - 1.0) / 16.0;
    let sigma2_inf = market.vol_squared_inf();

    let checks: Vec<AgentCheck> = agents
        .iter()
        .map(|agent| {
            let beta = agent.beta(market);
            let min_risk_level = agent.lambda * sigma2_inf;
            AgentCheck {
                beta,
                beta_nonnegative: beta >= 0.0,
                strictly_positive: beta > 0.0 && agent.lambda > 0.0,
                min_risk_level,
                uniqueness_holds: min_risk_level > threshold,
            }
        })
        .collect();

    let verdict = if checks.iter().any(|c| !c.beta_nonnegative) {
        Verdict::AssumptionViolated
    } else if checks.iter().all(|c| c.strictly_positive && c.uniqueness_holds) {
        Verdict::Unique
    } else {
        Verdict::ExistsMaybeNonUnique
    };

    ValidationReport {
        n_agents: n,
        uniqueness_threshold: threshold,
        agents: checks,
        verdict,
    }
}

/// Grid section of a scenario config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
}

fn default_n_steps() -> usize {
    DEFAULT_N_STEPS
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_steps: DEFAULT_N_STEPS,
        }
    }
}

/// A complete scenario: market, agents, and grid resolution.
///
/// JSON schema:
///
/// ```json
/// {
///   "market": { "a": 0.01, "b": 0.01, "T": 1.0, "mu": 0.02, "sigma": 0.2 },
///   "agents": [ { "alpha": 1.0, "lambda": 1.0, "q0": 1.0 } ],
///   "grid": { "n_steps": 1000 }
/// }
/// ```
///
/// `mu` and `sigma` each accept a number, `{"type": "piecewise", "t": [...],
/// "v": [...]}`, or `{"type": "factor", "x0": .., "level": .., "speed": ..,
/// "vol_of_vol": .., "floor": ..}`. An optional `market.s0` sets the initial
/// price; it never affects equilibria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub market: MarketParams,
    pub agents: Vec<AgentParams>,
    #[serde(default)]
    pub grid: GridSpec,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.check()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Structural validity of every field.
    pub fn check(&self) -> Result<()> {
        self.market.check()?;
        if self.agents.is_empty() {
            return Err(Error::Config("at least one agent required".into()));
        }
        for agent in &self.agents {
            agent.check()?;
        }
        if self.grid.n_steps < 2 {
            return Err(Error::TooFewSteps(self.grid.n_steps));
        }
        Ok(())
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.market.horizon, self.grid.n_steps)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.market, &self.agents, self.agents.len())
    }

    /// Three-trader demo scenario used throughout the tests and as the base
    /// of the built-in sweeps: a = b = 1%, T = 1, mu = 2%, sigma = 20%,
    /// alpha = lambda = (1, 0.5, 0.25), initial inventories (1, 1, 0.5).
    pub fn baseline() -> Self {
        Scenario {
            market: MarketParams::constant(0.01, 0.01, 1.0, 0.02, 0.2),
            agents: vec![
                AgentParams::new(1.0, 1.0, 1.0),
                AgentParams::new(0.5, 0.5, 1.0),
                AgentParams::new(0.25, 0.25, 0.5),
            ],
            grid: GridSpec::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline_market() -> MarketParams {
        MarketParams::constant(0.01, 0.01, 1.0, 0.02, 0.2)
    }

    #[test]
    fn validate_baseline_is_unique() {
        let scenario = Scenario::baseline();
        let report = scenario.validate();
        assert_eq!(report.verdict, Verdict::Unique);
        // a^2 b (n-1)/16 = 1e-4 * 1e-2 * 2 / 16
        assert!((report.uniqueness_threshold - 1.25e-7).abs() < 1e-20);
        let min_risk = report
            .agents
            .iter()
            .map(|c| c.min_risk_level)
            .fold(f64::INFINITY, f64::min);
        assert!((min_risk - 0.01).abs() < 1e-15);
        assert!(report.agents.iter().all(|c| c.beta_nonnegative));
        assert!(report.agents.iter().all(|c| c.strictly_positive));
        assert!(report.agents.iter().all(|c| c.uniqueness_holds));
    }

    #[test]
    fn validate_single_agent_follows_strict_inequality() {
        let market = baseline_market();
        // n = 1: threshold is 0, so lambda sigma^2 > 0 is required strictly.
        let report = validate(&market, &[AgentParams::new(1.0, 1.0, 1.0)], 1);
        assert_eq!(report.uniqueness_threshold, 0.0);
        assert_eq!(report.verdict, Verdict::Unique);

        let report = validate(&market, &[AgentParams::new(1.0, 0.0, 1.0)], 1);
        assert!(!report.agents[0].uniqueness_holds);
        assert_eq!(report.verdict, Verdict::ExistsMaybeNonUnique);
    }

    #[test]
    fn validate_beta_zero_boundary() {
        let market = baseline_market();
        // alpha = a/2 makes beta exactly 0: weak check passes, strict fails.
        let report = validate(&market, &[AgentParams::new(0.005, 1.0, 1.0)], 1);
        assert_eq!(report.agents[0].beta, 0.0);
        assert!(report.agents[0].beta_nonnegative);
        assert!(!report.agents[0].strictly_positive);
        assert_eq!(report.verdict, Verdict::ExistsMaybeNonUnique);
    }

    #[test]
    fn validate_negative_beta_is_violation() {
        let market = baseline_market();
        let report = validate(&market, &[AgentParams::new(0.001, 1.0, 1.0)], 1);
        assert_eq!(report.verdict, Verdict::AssumptionViolated);
    }

    #[test]
    fn validate_is_pure() {
        let scenario = Scenario::baseline();
        let r1 = serde_json::to_string(&scenario.validate()).unwrap();
        let r2 = serde_json::to_string(&scenario.validate()).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn beta_of_baseline_agents() {
        let market = baseline_market();
        assert!((beta_of(&AgentParams::new(1.0, 1.0, 1.0), &market) - 0.995).abs() < 1e-15);
        assert!((beta_of(&AgentParams::new(0.25, 0.25, 0.5), &market) - 0.245).abs() < 1e-15);
        assert_eq!(beta_of(&AgentParams::new(0.005, 1.0, 1.0), &market), 0.0);
    }

    #[test]
    fn grid_nodes_uniform() {
        let grid = make_grid(1.0, 4).unwrap();
        assert_eq!(grid.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let grid = make_grid(1.0, 1000).unwrap();
        assert_eq!(grid.n_nodes(), 1001);
        assert_eq!(grid.node(1000), 1.0);
        assert_eq!(grid.node(0), 0.0);
        // Spacing constant to machine precision.
        let dt = grid.dt();
        for k in 0..grid.n_steps() {
            assert!((grid.node(k + 1) - grid.node(k) - dt).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_rejects_single_step() {
        assert!(matches!(make_grid(1.0, 1), Err(Error::TooFewSteps(1))));
    }

    #[test]
    fn grid_node_lookup() {
        let grid = make_grid(1.0, 4).unwrap();
        assert_eq!(grid.node_index_of(0.5).unwrap(), 2);
        assert!(grid.node_index_of(0.3).is_err());
        assert!(grid.node_index_of(1.5).is_err());
    }

    #[test]
    fn coefficient_spec_json_forms() {
        let c: CoefficientSpec = serde_json::from_str("0.02").unwrap();
        assert_eq!(c, CoefficientSpec::Constant(0.02));

        let c: CoefficientSpec =
            serde_json::from_str(r#"{"type":"piecewise","t":[0.0,0.5],"v":[0.2,0.4]}"#).unwrap();
        assert_eq!(c.value_at(0.0).unwrap(), 0.2);
        assert_eq!(c.value_at(0.49).unwrap(), 0.2);
        assert_eq!(c.value_at(0.5).unwrap(), 0.4);
        assert_eq!(c.value_at(1.0).unwrap(), 0.4);

        let c: CoefficientSpec = serde_json::from_str(
            r#"{"type":"factor","x0":0.2,"level":0.2,"speed":1.0,"vol_of_vol":0.1,"floor":0.05}"#,
        )
        .unwrap();
        assert!(!c.is_deterministic());
        assert!(c.value_at(0.0).is_err());

        // Round trip through serialization.
        let scenario = Scenario::baseline();
        let text = scenario.to_json();
        let back = Scenario::from_json(&text).unwrap();
        assert_eq!(scenario, back);
    }

    #[test]
    fn scenario_structural_checks() {
        let mut scenario = Scenario::baseline();
        scenario.market.a = -1.0;
        assert!(scenario.check().is_err());

        let mut scenario = Scenario::baseline();
        scenario.market.vol = CoefficientSpec::Constant(-0.2);
        assert!(scenario.check().is_err());

        let mut scenario = Scenario::baseline();
        scenario.agents.clear();
        assert!(scenario.check().is_err());
    }

    #[test]
    fn uniqueness_threshold_monotone_in_n() {
        // Increasing n can flip Unique -> ExistsMaybeNonUnique, never back.
        let market = baseline_market();
        let agent = AgentParams::new(1.0, 1e-5, 1.0);
        let mut was_unique = true;
        for n in 1..40usize {
            let agents = vec![agent; n];
            let verdict = validate(&market, &agents, n).verdict;
            let unique = verdict == Verdict::Unique;
            if !was_unique {
                assert!(!unique, "verdict flipped back to Unique at n = {n}");
            }
            was_unique = unique;
        }
    }
}
