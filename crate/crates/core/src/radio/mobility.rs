use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::config::ScenarioConfig;

/// Position of a UE on the ground plane plus random-walk state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UePosition {
    pub x: f64,
    pub y: f64,
    /// Radians, counter-clockwise from +x.
    pub heading: f64,
    pub walked_since_turn: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct MobilityParams {
    pub speed_mps: f64,
    pub turn_distance_m: f64,
    pub area_m: f64,
}

impl MobilityParams {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self { speed_mps: cfg.ue_speed_kmh / 3.6, turn_distance_m: cfg.turn_distance_m, area_m: cfg.area_m }
    }
}

impl UePosition {
    pub fn random<R: Rng + ?Sized>(area_m: f64, rng: &mut R) -> Self {
        Self {
            x: rng.random::<f64>() * area_m,
            y: rng.random::<f64>() * area_m,
            heading: rng.random::<f64>() * TAU,
            walked_since_turn: 0.0,
        }
    }
}

/// Fold `v` back into `[0, max]`, reporting whether an odd number of reflections happened.
fn reflect(mut v: f64, max: f64) -> (f64, bool) {
    let mut flipped = false;
    loop {
        if v < 0.0 {
            v = -v;
        } else if v > max {
            v = 2.0 * max - v;
        } else {
            return (v, flipped);
        }
        flipped = !flipped;
    }
}

/// Advance a 2-D random walk by `dt` seconds at constant speed, turning to a
/// fresh uniform heading once `turn_distance_m` has been walked and reflecting
/// off the area boundary.
pub fn step_mobility<R: Rng + ?Sized>(pos: UePosition, dt: f64, params: &MobilityParams, rng: &mut R) -> UePosition {
    if dt <= 0.0 {
        return pos;
    }
    let dist = params.speed_mps * dt;
    let (x, flip_x) = reflect(pos.x + dist * pos.heading.cos(), params.area_m);
    let (y, flip_y) = reflect(pos.y + dist * pos.heading.sin(), params.area_m);
    let mut heading = pos.heading;
    if flip_x {
        heading = PI - heading;
    }
    if flip_y {
        heading = -heading;
    }
    heading = heading.rem_euclid(TAU);
    let mut walked = pos.walked_since_turn + dist;
    if walked >= params.turn_distance_m {
        heading = rng.random::<f64>() * TAU;
        walked = 0.0;
    }
    UePosition { x, y, heading, walked_since_turn: walked }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> MobilityParams {
        MobilityParams { speed_mps: 3.0 / 3.6, turn_distance_m: 10.0, area_m: 500.0 }
    }

    #[test]
    fn zero_dt_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = UePosition { x: 12.0, y: 40.0, heading: 1.0, walked_since_turn: 3.0 };
        assert_eq!(step_mobility(p, 0.0, &params(), &mut rng), p);
    }

    #[test]
    fn one_second_east_moves_walking_speed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = UePosition { x: 100.0, y: 100.0, heading: 0.0, walked_since_turn: 0.0 };
        let q = step_mobility(p, 1.0, &params(), &mut rng);
        assert!((q.x - 100.8333).abs() < 1e-4, "{}", q.x);
        assert!((q.y - 100.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_reflects_heading() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = UePosition { x: 499.9, y: 250.0, heading: 0.0, walked_since_turn: 0.0 };
        let q = step_mobility(p, 1.0, &params(), &mut rng);
        assert!(q.x <= 500.0 && q.x > 499.0);
        assert!((q.heading - PI).abs() < 1e-12);
        let p = UePosition { x: 10.0, y: 0.2, heading: 1.5 * PI, walked_since_turn: 0.0 };
        let q = step_mobility(p, 1.0, &params(), &mut rng);
        assert!(q.y >= 0.0);
        assert!((q.heading - 0.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn walk_stays_in_bounds_at_constant_speed() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let prm = params();
        let mut p = UePosition { x: 1.0, y: 499.0, heading: 2.0, walked_since_turn: 0.0 };
        let mut path = 0.0;
        let steps = 1_000_000;
        for _ in 0..steps {
            let q = step_mobility(p, 1e-3, &prm, &mut rng);
            assert!((0.0..=500.0).contains(&q.x) && (0.0..=500.0).contains(&q.y));
            // Away from walls the displacement equals the path length.
            let dx = q.x - p.x;
            let dy = q.y - p.y;
            let disp = (dx * dx + dy * dy).sqrt();
            path += if q.x > 1.0 && q.x < 499.0 && q.y > 1.0 && q.y < 499.0 { disp } else { prm.speed_mps * 1e-3 };
            p = q;
        }
        let mean_speed = path / (steps as f64 * 1e-3);
        assert!((mean_speed / 0.83333 - 1.0).abs() < 1e-3, "{mean_speed}");
    }
}
