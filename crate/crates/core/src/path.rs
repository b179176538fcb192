//! Helpers for scalar paths sampled on a uniform grid.

/// Values at interval midpoints `t_k + dt/2` from node samples, using a
/// 4-point Lagrange stencil (one-sided at the ends). Exact for cubics, so
/// RK4-accurate paths keep their order when resampled this way.
pub fn midpoints(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    assert!(n >= 2, "need at least two nodes");
    if n == 2 {
        return vec![0.5 * (nodes[0] + nodes[1])];
    }
    if n == 3 {
        // Quadratic through all three nodes, evaluated at the two midpoints.
        return vec![
            0.375 * nodes[0] + 0.75 * nodes[1] - 0.125 * nodes[2],
            -0.125 * nodes[0] + 0.75 * nodes[1] + 0.375 * nodes[2],
        ];
    }
    let mut mids = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        // Stencil [j, j+3] around interval k, clamped to the grid.
        let j = k.saturating_sub(1).min(n - 4);
        // Midpoint offset within the stencil in units of dt: k - j + 1/2.
        let s = (k - j) as f64 + 0.5;
        // Lagrange weights at offset s for nodes 0, 1, 2, 3.
        let w0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
        let w1 = s * (s - 2.0) * (s - 3.0) / 2.0;
        let w2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
        let w3 = s * (s - 1.0) * (s - 2.0) / 6.0;
        mids.push(w0 * nodes[j] + w1 * nodes[j + 1] + w2 * nodes[j + 2] + w3 * nodes[j + 3]);
    }
    mids
}

/// Trapezoidal integral of node samples with uniform spacing `dt`.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let interior: f64 = values[1..values.len() - 1].iter().sum();
    dt * (0.5 * (values[0] + values[values.len() - 1]) + interior)
}

/// Cumulative trapezoidal integral from the left: out[k] = int_0^{t_k}.
pub fn cum_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Suffix integrals int_{t_k}^{T} of node samples by backward trapezoid:
/// out[k] holds the integral from t_k to the last node.
pub fn suffix_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    for k in (0..n - 1).rev() {
        out[k] = out[k + 1] + 0.5 * dt * (values[k] + values[k + 1]);
    }
    out
}

/// Suffix integrals with per-interval Simpson using midpoint samples:
/// out[k] = int_{t_k}^{T}, fourth-order accurate for smooth integrands.
pub fn suffix_simpson(nodes: &[f64], mids: &[f64], dt: f64) -> Vec<f64> {
    let n = nodes.len();
    assert_eq!(mids.len(), n - 1);
    let mut out = vec![0.0; n];
    for k in (0..n - 1).rev() {
        out[k] = out[k + 1] + dt / 6.0 * (nodes[k] + 4.0 * mids[k] + nodes[k + 1]);
    }
    out
}

/// Largest absolute entry.
pub fn sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Largest absolute difference between two equally long paths.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "paths must share a grid");
    a.iter()
        .zip(b)
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
