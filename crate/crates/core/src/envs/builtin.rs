use alloc::vec;
use alloc::vec::Vec;

use super::Environment;
use crate::policy::ActionBounds;

/// Static tasks keep a single constant state entry so that the rollout
/// machinery is the same as for dynamic ones.
fn hold(next: &mut [f64]) {
    next[0] = 0.0;
}

/// One-dimensional static bowl `weight · (u − target)²`.
#[derive(Debug, Clone)]
pub struct QuadraticBowl {
    pub target: f64,
    pub weight: f64,
    bounds: ActionBounds,
}

impl QuadraticBowl {
    pub fn new(target: f64, weight: f64, limit: f64) -> Self {
        assert!(target.abs() < limit, "target must lie inside the action bounds");
        Self {
            target,
            weight,
            bounds: ActionBounds::symmetric(1, limit).expect("positive limit"),
        }
    }

    /// Pre-squash location of the minimum.
    pub fn raw_optimum(&self) -> f64 {
        self.bounds.unsquash(0, self.target)
    }
}

impl Default for QuadraticBowl {
    fn default() -> Self {
        Self::new(0.5, 1.0, 1.0)
    }
}

impl Environment for QuadraticBowl {
    fn name(&self) -> &'static str {
        "quadratic"
    }
    fn state_dim(&self) -> usize {
        1
    }
    fn bounds(&self) -> &ActionBounds {
        &self.bounds
    }
    fn dt(&self) -> f64 {
        0.1
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0]
    }
    fn dynamics(&self, _x: &[f64], _u: &[f64], next: &mut [f64]) {
        hold(next);
    }
    fn stage_cost(&self, _x: &[f64], u: &[f64]) -> f64 {
        let d = u[0] - self.target;
        self.weight * d * d
    }
    fn terminal_cost(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn constraint_penalty(&self) -> f64 {
        100.0
    }
}

/// One-dimensional static cost with two wells,
/// `scale · min((u − left)², (u − right)² + gap)`.
///
/// The left well is the global minimum (value 0); the right one is
/// shallower by `gap`.
#[derive(Debug, Clone)]
pub struct BimodalValley {
    pub left: f64,
    pub right: f64,
    pub gap: f64,
    pub scale: f64,
    bounds: ActionBounds,
}

impl BimodalValley {
    pub fn new(left: f64, right: f64, gap: f64, scale: f64, limit: f64) -> Self {
        assert!(left < right && gap >= 0.0 && scale > 0.0);
        assert!(left > -limit && right < limit);
        Self {
            left,
            right,
            gap,
            scale,
            bounds: ActionBounds::symmetric(1, limit).expect("positive limit"),
        }
    }

    pub fn cost_at(&self, u: f64) -> f64 {
        let l = (u - self.left) * (u - self.left);
        let r = (u - self.right) * (u - self.right) + self.gap;
        self.scale * l.min(r)
    }

    /// `(location, value)` of both minima in action space.
    pub fn minima(&self) -> [(f64, f64); 2] {
        [(self.left, 0.0), (self.right, self.scale * self.gap)]
    }

    /// Both minima in pre-squash coordinates.
    pub fn raw_minima(&self) -> [f64; 2] {
        [self.bounds.unsquash(0, self.left), self.bounds.unsquash(0, self.right)]
    }
}

impl Default for BimodalValley {
    fn default() -> Self {
        Self::new(-1.0, 1.0, 0.1, 4.0, 2.0)
    }
}

impl Environment for BimodalValley {
    fn name(&self) -> &'static str {
        "bimodal_valley"
    }
    fn state_dim(&self) -> usize {
        1
    }
    fn bounds(&self) -> &ActionBounds {
        &self.bounds
    }
    fn dt(&self) -> f64 {
        0.1
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0]
    }
    fn dynamics(&self, _x: &[f64], _u: &[f64], next: &mut [f64]) {
        hold(next);
    }
    fn stage_cost(&self, _x: &[f64], u: &[f64]) -> f64 {
        self.cost_at(u[0])
    }
    fn terminal_cost(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn constraint_penalty(&self) -> f64 {
        100.0
    }
}

/// A cart on a rail (double integrator, state `[position, velocity]`) that
/// must stop at `goal`. Just past the goal lies a trap `[trap_start,
/// trap_end]`; entering it violates the constraint.
///
/// The `overlap_trap` variant moves the trap right up against the goal so
/// that good and catastrophic candidates overlap.
#[derive(Debug, Clone)]
pub struct TrapCorridor {
    pub goal: f64,
    pub trap_start: f64,
    pub trap_end: f64,
    pub velocity_weight: f64,
    pub effort_weight: f64,
    pub penalty: f64,
    pub dt: f64,
    name: &'static str,
    bounds: ActionBounds,
}

impl TrapCorridor {
    pub fn new(goal: f64, trap_start: f64, trap_end: f64, accel_limit: f64) -> Self {
        assert!(goal < trap_start && trap_start < trap_end);
        Self {
            goal,
            trap_start,
            trap_end,
            velocity_weight: 0.1,
            effort_weight: 0.01,
            penalty: 50.0,
            dt: 0.1,
            name: "trap_corridor",
            bounds: ActionBounds::symmetric(1, accel_limit).expect("positive limit"),
        }
    }

    /// Trap directly adjacent to the goal.
    pub fn overlapping() -> Self {
        let mut env = Self::new(1.0, 1.05, 3.0, 2.0);
        env.name = "overlap_trap";
        env
    }

    pub fn in_trap(&self, position: f64) -> bool {
        position >= self.trap_start && position <= self.trap_end
    }

    /// Distance margin between the goal's cost and the cost of sitting at
    /// rest inside the trap.
    pub fn trap_margin(&self) -> f64 {
        let x_trap = [self.trap_start, 0.0];
        let x_goal = [self.goal, 0.0];
        let u = [0.0];
        super::realized_stage_cost(self, &x_trap, &u) - super::realized_stage_cost(self, &x_goal, &u)
    }
}

impl Default for TrapCorridor {
    fn default() -> Self {
        Self::new(1.0, 1.2, 3.0, 2.0)
    }
}

impl Environment for TrapCorridor {
    fn name(&self) -> &'static str {
        self.name
    }
    fn state_dim(&self) -> usize {
        2
    }
    fn bounds(&self) -> &ActionBounds {
        &self.bounds
    }
    fn dt(&self) -> f64 {
        self.dt
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }
    fn dynamics(&self, x: &[f64], u: &[f64], next: &mut [f64]) {
        next[1] = x[1] + self.dt * u[0];
        next[0] = x[0] + self.dt * next[1];
    }
    fn stage_cost(&self, x: &[f64], u: &[f64]) -> f64 {
        let d = x[0] - self.goal;
        d * d + self.velocity_weight * x[1] * x[1] + self.effort_weight * u[0] * u[0]
    }
    fn terminal_cost(&self, x: &[f64]) -> f64 {
        let d = x[0] - self.goal;
        let trapped = if self.in_trap(x[0]) { self.penalty } else { 0.0 };
        d * d + self.velocity_weight * x[1] * x[1] + trapped
    }
    fn constraint(&self, x: &[f64], _u: &[f64]) -> f64 {
        if self.in_trap(x[0]) {
            1.0
        } else {
            -1.0
        }
    }
    fn constraint_penalty(&self) -> f64 {
        self.penalty
    }
}

/// Planar point mass, state `[px, py, vx, vy]`, acceleration control, that
/// must reach `goal`. Unimodal quadratic cost.
#[derive(Debug, Clone)]
pub struct PointReacher {
    pub goal: [f64; 2],
    pub dt: f64,
    bounds: ActionBounds,
}

impl Default for PointReacher {
    fn default() -> Self {
        Self {
            goal: [1.0, -0.5],
            dt: 0.1,
            bounds: ActionBounds::symmetric(2, 1.0).expect("positive limit"),
        }
    }
}

impl PointReacher {
    fn distance_sq(&self, x: &[f64]) -> f64 {
        let dx = x[0] - self.goal[0];
        let dy = x[1] - self.goal[1];
        dx * dx + dy * dy
    }
}

impl Environment for PointReacher {
    fn name(&self) -> &'static str {
        "point_reacher"
    }
    fn state_dim(&self) -> usize {
        4
    }
    fn bounds(&self) -> &ActionBounds {
        &self.bounds
    }
    fn dt(&self) -> f64 {
        self.dt
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0; 4]
    }
    fn dynamics(&self, x: &[f64], u: &[f64], next: &mut [f64]) {
        next[2] = x[2] + self.dt * u[0];
        next[3] = x[3] + self.dt * u[1];
        next[0] = x[0] + self.dt * next[2];
        next[1] = x[1] + self.dt * next[3];
    }
    fn stage_cost(&self, x: &[f64], u: &[f64]) -> f64 {
        self.distance_sq(x) + 0.1 * (x[2] * x[2] + x[3] * x[3]) + 0.01 * (u[0] * u[0] + u[1] * u[1])
    }
    fn terminal_cost(&self, x: &[f64]) -> f64 {
        5.0 * self.distance_sq(x)
    }
    fn constraint_penalty(&self) -> f64 {
        100.0
    }
}

/// Torque-limited pendulum, state `[angle from upright, angular velocity]`,
/// starting at rest hanging down. The torque limit is below `m·g·l`, so the
/// controller must pump energy before it can balance.
///
/// Integration is semi-implicit (symplectic) Euler with `substeps` per
/// control period: first order, with bounded energy error and no secular
/// drift when undamped.
#[derive(Debug, Clone)]
pub struct PendulumSwingup {
    pub gravity: f64,
    pub mass: f64,
    pub length: f64,
    pub damping: f64,
    pub dt: f64,
    pub substeps: usize,
    bounds: ActionBounds,
}

impl Default for PendulumSwingup {
    fn default() -> Self {
        Self {
            gravity: 9.81,
            mass: 1.0,
            length: 1.0,
            damping: 0.0,
            dt: 0.1,
            substeps: 4,
            bounds: ActionBounds::symmetric(1, 3.0).expect("positive limit"),
        }
    }
}

impl PendulumSwingup {
    /// Mechanical energy, zero potential at the pivot height.
    pub fn energy(&self, x: &[f64]) -> f64 {
        let inertia = self.mass * self.length * self.length;
        0.5 * inertia * x[1] * x[1] + self.mass * self.gravity * self.length * libm::cos(x[0])
    }
}

impl Environment for PendulumSwingup {
    fn name(&self) -> &'static str {
        "pendulum_swingup"
    }
    fn state_dim(&self) -> usize {
        2
    }
    fn bounds(&self) -> &ActionBounds {
        &self.bounds
    }
    fn dt(&self) -> f64 {
        self.dt
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![core::f64::consts::PI, 0.0]
    }
    fn dynamics(&self, x: &[f64], u: &[f64], next: &mut [f64]) {
        let h = self.dt / self.substeps as f64;
        let inertia = self.mass * self.length * self.length;
        let (mut angle, mut rate) = (x[0], x[1]);
        for _ in 0..self.substeps {
            let accel = self.gravity / self.length * libm::sin(angle) + u[0] / inertia - self.damping * rate;
            rate += h * accel;
            angle += h * rate;
        }
        next[0] = angle;
        next[1] = rate;
    }
    fn stage_cost(&self, x: &[f64], u: &[f64]) -> f64 {
        2.0 * (1.0 - libm::cos(x[0])) + 0.1 * x[1] * x[1] + 0.001 * u[0] * u[0]
    }
    fn terminal_cost(&self, x: &[f64]) -> f64 {
        2.0 * (1.0 - libm::cos(x[0])) + 0.1 * x[1] * x[1]
    }
    fn constraint_penalty(&self) -> f64 {
        100.0
    }
}
