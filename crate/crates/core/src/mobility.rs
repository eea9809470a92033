//! Gauss-Markov mobility with reflective world boundaries.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geometry::Position;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub width: f64,
    pub height: f64,
}

impl Bounds {
    pub fn contains(&self, p: Position) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussMarkovParams {
    pub mean_speed: f64,
    pub alpha: f64,
    pub speed_sigma: f64,
    pub direction_sigma: f64,
}

impl Default for GaussMarkovParams {
    fn default() -> Self {
        GaussMarkovParams { mean_speed: 40.0, alpha: 0.75, speed_sigma: 4.0, direction_sigma: 0.3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussMarkovState {
    pub speed: f64,
    /// Heading in radians.
    pub direction: f64,
    pub mean_direction: f64,
}

impl GaussMarkovState {
    pub fn random<R: Rng>(params: &GaussMarkovParams, rng: &mut R) -> Self {
        let dir = rng.gen_range(0.0..2.0 * PI);
        GaussMarkovState { speed: params.mean_speed, direction: dir, mean_direction: dir }
    }
}

/// Advances one node by `dt` seconds. Returns the new position.
pub fn gm_step<R: Rng>(
    state: &mut GaussMarkovState,
    params: &GaussMarkovParams,
    pos: Position,
    dt: f64,
    bounds: &Bounds,
    rng: &mut R,
) -> Position {
    let a = params.alpha;
    let noise = (1.0 - a * a).max(0.0).sqrt();
    let xs: f64 = rng.sample(StandardNormal);
    let xd: f64 = rng.sample(StandardNormal);
    state.speed = (a * state.speed + (1.0 - a) * params.mean_speed + noise * params.speed_sigma * xs).max(0.0);
    state.direction = a * state.direction + (1.0 - a) * state.mean_direction + noise * params.direction_sigma * xd;

    let mut x = pos.x + state.speed * state.direction.cos() * dt;
    let mut y = pos.y + state.speed * state.direction.sin() * dt;
    let mut reflect_x = false;
    let mut reflect_y = false;
    while !(0.0..=bounds.width).contains(&x) {
        x = if x < 0.0 { -x } else { 2.0 * bounds.width - x };
        reflect_x = !reflect_x;
    }
    while !(0.0..=bounds.height).contains(&y) {
        y = if y < 0.0 { -y } else { 2.0 * bounds.height - y };
        reflect_y = !reflect_y;
    }
    if reflect_x {
        state.direction = PI - state.direction;
        state.mean_direction = PI - state.mean_direction;
    }
    if reflect_y {
        state.direction = -state.direction;
        state.mean_direction = -state.mean_direction;
    }
    Position::new(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{rng_stream, StreamId};
    use proptest::prelude::{prop_assert, proptest};

    const WORLD: Bounds = Bounds { width: 10_000.0, height: 10_000.0 };

    #[test]
    fn alpha_one_keeps_speed() {
        let p = GaussMarkovParams { alpha: 1.0, ..Default::default() };
        let mut rng = rng_stream(1, StreamId::Mobility);
        let mut s = GaussMarkovState { speed: 33.0, direction: 0.4, mean_direction: 1.0 };
        let mut pos = Position::new(5000.0, 5000.0);
        for _ in 0..100 {
            pos = gm_step(&mut s, &p, pos, 1.0, &WORLD, &mut rng);
            assert_eq!(s.speed, 33.0);
        }
    }

    #[test]
    fn alpha_zero_is_memoryless() {
        let p = GaussMarkovParams { alpha: 0.0, ..Default::default() };
        let mut rng = rng_stream(2, StreamId::Mobility);
        let mut check = rng_stream(2, StreamId::Mobility);
        let mut s = GaussMarkovState { speed: 5.0, direction: 0.0, mean_direction: 0.0 };
        gm_step(&mut s, &p, Position::new(5000.0, 5000.0), 1.0, &WORLD, &mut rng);
        let xs: f64 = check.sample(StandardNormal);
        assert!((s.speed - (40.0 + 4.0 * xs).max(0.0)).abs() < 1e-12);
    }

    #[test]
    fn long_run_mean_speed_near_target() {
        let p = GaussMarkovParams::default();
        let mut rng = rng_stream(3, StreamId::Mobility);
        let mut s = GaussMarkovState::random(&p, &mut rng);
        let mut pos = Position::new(5000.0, 5000.0);
        let mut sum = 0.0;
        let n = 10_000;
        for _ in 0..n {
            pos = gm_step(&mut s, &p, pos, 1.0, &WORLD, &mut rng);
            sum += s.speed;
        }
        let mean = sum / n as f64;
        assert!((mean - 40.0).abs() <= 2.0, "mean speed {mean}");
    }

    proptest! {
        #[test]
        fn positions_stay_in_bounds(seed in 0u64..500, x in 0.0f64..10_000.0, y in 0.0f64..10_000.0) {
            let p = GaussMarkovParams { mean_speed: 400.0, ..Default::default() };
            let mut rng = rng_stream(seed, StreamId::Mobility);
            let mut s = GaussMarkovState::random(&p, &mut rng);
            let mut pos = Position::new(x, y);
            for _ in 0..50 {
                pos = gm_step(&mut s, &p, pos, 1.0, &WORLD, &mut rng);
                prop_assert!(WORLD.contains(pos));
            }
        }
    }
}
