//! Reference values computed without the simulation engine.

/// Expected mean absolute ROI error for uniform relative errors, by
/// composite trapezoid integration over `(u, v) ∈ [-1, 1]²` on a
/// `points × points` grid:
///
/// `E|r(1 + u·e_b)/(1 + v·e_c) - r| = ¼ ∬ |…| du dv`
#[allow(dead_code)]
pub fn integration_oracle(ratio: f64, e_benefit: f64, e_cost: f64, points: usize) -> f64 {
    assert!(points >= 2);
    let h = 2.0 / (points - 1) as f64;
    let weight = |k: usize| {
        if k == 0 || k == points - 1 {
            h / 2.0
        } else {
            h
        }
    };
    let node = |k: usize| -1.0 + k as f64 * h;
    let mut total = 0.0;
    for j in 0..points {
        let cost_factor = 1.0 + node(j) * e_cost;
        let mut row = 0.0;
        for i in 0..points {
            let est = ratio * (1.0 + node(i) * e_benefit) / cost_factor;
            row += weight(i) * (est - ratio).abs();
        }
        total += weight(j) * row;
    }
    total / 4.0
}

/// Oracle values at ratio 2.0 with `e_benefit = e_cost = e`, frozen from a
/// 4001-point grid (they agree with the 2001-point grid to 3e-6 relative).
#[allow(dead_code)]
pub const FROZEN_ORACLE: [(f64, f64); 3] =
    [(0.05, 0.066_733_4), (0.30, 0.415_293), (0.90, 2.178_67)];
