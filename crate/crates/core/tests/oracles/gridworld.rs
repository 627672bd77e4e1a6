//! Exact value iteration on a 5×5 deterministic gridworld with an interior
//! wall, used to check that potential-based shaping leaves greedy policies
//! unchanged.

pub const SIZE: usize = 5;
pub const GOAL: (usize, usize) = (4, 4);
pub const WALL: [(usize, usize); 3] = [(2, 1), (2, 2), (2, 3)];
pub const GOAL_REWARD: f64 = 1.0;
pub const STEP_COST: f64 = -0.04;
const MOVES: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

pub fn states() -> Vec<(usize, usize)> {
    (0..SIZE).flat_map(|r| (0..SIZE).map(move |c| (r, c))).collect()
}

pub fn is_wall(s: (usize, usize)) -> bool {
    WALL.contains(&s)
}

/// Deterministic successor: bumping into the border or the wall stays put.
pub fn next_state(s: (usize, usize), a: usize) -> (usize, usize) {
    let (dr, dc) = MOVES[a];
    let (r, c) = (s.0 as i64 + dr, s.1 as i64 + dc);
    if r < 0 || c < 0 || r >= SIZE as i64 || c >= SIZE as i64 || is_wall((r as usize, c as usize)) {
        s
    } else {
        (r as usize, c as usize)
    }
}

pub fn base_reward(next: (usize, usize)) -> f64 {
    if next == GOAL {
        GOAL_REWARD
    } else {
        STEP_COST
    }
}

/// Negative Manhattan distance to the goal (ignores the wall on purpose).
pub fn potential(s: (usize, usize)) -> f64 {
    -((s.0.abs_diff(GOAL.0) + s.1.abs_diff(GOAL.1)) as f64)
}

/// Q-values from value iteration to convergence; `reward(s, a, s')` supplies
/// the per-transition reward. The goal is absorbing with value 0.
pub fn q_values(gamma: f64, reward: impl Fn((usize, usize), usize, (usize, usize)) -> f64) -> Vec<[f64; 4]> {
    let idx = |s: (usize, usize)| s.0 * SIZE + s.1;
    let mut v = vec![0.0; SIZE * SIZE];
    let mut q = vec![[0.0; 4]; SIZE * SIZE];
    for _ in 0..10_000 {
        let mut delta = 0.0f64;
        for s in states() {
            if s == GOAL || is_wall(s) {
                continue;
            }
            for a in 0..4 {
                let n = next_state(s, a);
                q[idx(s)][a] = reward(s, a, n) + gamma * v[idx(n)];
            }
            let best = q[idx(s)].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            delta = delta.max((best - v[idx(s)]).abs());
            v[idx(s)] = best;
        }
        if delta < 1e-14 {
            break;
        }
    }
    q
}

/// Actions within `tol` of the best Q-value.
pub fn greedy_set(q: &[f64; 4], tol: f64) -> Vec<usize> {
    let best = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..4).filter(|&a| q[a] >= best - tol).collect()
}

/// Closed form of the discounted shaping sum over potentials `phi[1..=T]`:
/// `Σ_{t=1}^{T-1} γ^t (γ Φ_{t+1} − Φ_t) = γ^T Φ_T − γ Φ_1`.
pub fn telescoped(phi: &[f64], gamma: f64) -> f64 {
    let t = phi.len() as i32;
    gamma.powi(t) * phi[phi.len() - 1] - gamma * phi[0]
}
