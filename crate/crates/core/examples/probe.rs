use impact_game::model::*;
use impact_game::single_agent::*;

fn main() {
    let mut market = MarketParams::constant(0.01, 0.01, 1.0, 0.02, 0.2);
    market.drift = CoefficientSpec::Constant(0.0);
    let agent = AgentParams::new(1.0, 0.0, 1.0);
    let grid = make_grid(1.0, 1000).unwrap();
    let beta = agent.beta(&market);
    let a = solve_a(&agent, &market, &grid).unwrap();
    let cf = |t: f64| market.b * beta / (market.b + beta * (1.0 - t));
    for &t in &[0.0f64, 0.5, 0.8, 0.9, 0.95, 0.99, 0.996, 1.0] {
        let k = (t * 1000.0).round() as usize;
        println!("t={t}: err {:.3e}", (a[k] - cf(grid.node(k))).abs());
    }
    // stiff case
    let agent = AgentParams::new(1e3, 1.0, 1.0);
    let market2 = MarketParams::constant(0.01, 0.01, 1.0, 0.02, 0.2);
    let grid = make_grid(1.0, 200_000).unwrap();
    match solve_abc(&agent, &market2, &grid, &[]) {
        Ok(abc) => {
            let (inv, _) = optimal_trajectory(&agent, &market2, &grid, &abc);
            println!("alpha=1e3 at 2e5 steps: Q(T) = {:.3e}", inv[grid.n_steps()]);
        }
        Err(e) => println!("alpha=1e3 failed: {e}"),
    }
}
