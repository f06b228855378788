use alloc::vec::Vec;
use core::f64::consts::PI;

use super::SynthError;
use crate::linalg::{self, Mat3, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Line,
    Racetrack,
    Spiral,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::Line, Pattern::Racetrack, Pattern::Spiral];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Pattern::Line => "line",
            Pattern::Racetrack => "racetrack",
            Pattern::Spiral => "spiral",
        }
    }
}

impl core::str::FromStr for Pattern {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pattern::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or(SynthError::Domain("unknown trajectory pattern"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub t: f64,
    pub position: Vec3,
    /// Body-to-local rotation.
    pub orientation: Mat3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryConfig {
    pub pattern: Pattern,
    /// Seconds.
    pub duration: f64,
    /// Nominal sample rate in Hz.
    pub rate: f64,
    /// Fractional interval jitter in `[0, 1)`.
    pub jitter: f64,
    /// Ground speed in m/s.
    pub speed: f64,
    /// Altitude above the local origin in metres.
    pub altitude: f64,
    /// Straight-leg length (racetrack) or radius (spiral, racetrack turns) in metres.
    pub size: f64,
    /// Climb rate of the spiral in m/s.
    pub climb: f64,
}

impl TrajectoryConfig {
    pub fn new(pattern: Pattern, duration: f64) -> Self {
        TrajectoryConfig {
            pattern,
            duration,
            rate: 10.0,
            jitter: 0.0,
            speed: 60.0,
            altitude: 300.0,
            size: 1500.0,
            climb: 1.0,
        }
    }

    fn turn_radius(&self) -> f64 {
        match self.pattern {
            Pattern::Racetrack => 0.4 * self.size,
            _ => self.size,
        }
    }

    /// Length of one racetrack lap in metres.
    pub fn lap_length(&self) -> f64 {
        2.0 * self.size + 2.0 * PI * self.turn_radius()
    }

    /// Position and heading (radians from east, counter-clockwise) at time `t`.
    pub fn state_at(&self, t: f64) -> (Vec3, f64) {
        let s = self.speed * t;
        match self.pattern {
            Pattern::Line => {
                let half = 0.5 * self.speed * self.duration;
                ([s - half, 0.0, self.altitude], 0.0)
            }
            Pattern::Racetrack => {
                let (l, rho) = (self.size, self.turn_radius());
                let lap = self.lap_length();
                let s = s - lap * libm::floor(s / lap);
                let turn = PI * rho;
                if s < l {
                    ([-0.5 * l + s, -rho, self.altitude], 0.0)
                } else if s < l + turn {
                    let a = (s - l) / rho;
                    let p = [
                        0.5 * l + rho * libm::sin(a),
                        -rho * libm::cos(a),
                        self.altitude,
                    ];
                    (p, a)
                } else if s < 2.0 * l + turn {
                    ([0.5 * l - (s - l - turn), rho, self.altitude], PI)
                } else {
                    let a = (s - 2.0 * l - turn) / rho;
                    let p = [
                        -0.5 * l - rho * libm::sin(a),
                        rho * libm::cos(a),
                        self.altitude,
                    ];
                    (p, PI + a)
                }
            }
            Pattern::Spiral => {
                let a = s / self.size;
                let p = [
                    self.size * libm::cos(a),
                    self.size * libm::sin(a),
                    self.altitude + self.climb * t,
                ];
                (p, a + 0.5 * PI)
            }
        }
    }
}

/// Timestamped poses with intervals `(1/rate)(1 + jitter·u)`, `u ~ U[−1, 1]`,
/// covering `[0, duration]`.
pub fn gen_trajectory<R: rand::Rng + ?Sized>(
    cfg: &TrajectoryConfig,
    rng: &mut R,
) -> Result<Vec<Pose>, SynthError> {
    if !(cfg.duration > 0.0) || !(cfg.rate > 0.0) || !(cfg.speed > 0.0) || !(cfg.size > 0.0) {
        return Err(SynthError::Domain(
            "duration, rate, speed and size must be positive",
        ));
    }
    if !(0.0..1.0).contains(&cfg.jitter) {
        return Err(SynthError::Domain("jitter must lie in [0, 1)"));
    }
    let nominal = 1.0 / cfg.rate;
    let mut poses = Vec::with_capacity((cfg.duration * cfg.rate) as usize + 2);
    let mut k = 0u64;
    let mut t = 0.0;
    // exact grid when unjittered, so integer laps land on the start point
    while t <= cfg.duration * (1.0 + 1e-12) {
        let (position, heading) = cfg.state_at(t);
        poses.push(Pose {
            t,
            position,
            orientation: linalg::euler_zyx(heading, 0.0, 0.0),
        });
        k += 1;
        t = if cfg.jitter == 0.0 {
            k as f64 * nominal
        } else {
            t + nominal * (1.0 + cfg.jitter * rng.random_range(-1.0..=1.0))
        };
    }
    Ok(poses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn racetrack_heading_is_continuous() {
        let cfg = TrajectoryConfig::new(Pattern::Racetrack, 500.0);
        let mut last = cfg.state_at(0.0).1;
        for i in 1..5000 {
            let h = cfg.state_at(i as f64 * 0.1).1;
            let mut d = (h - last).rem_euclid(2.0 * PI);
            if d > PI {
                d -= 2.0 * PI;
            }
            assert!(d.abs() < 0.05);
            last = h;
        }
    }

    #[test]
    fn jitter_of_one_is_rejected() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut cfg = TrajectoryConfig::new(Pattern::Line, 10.0);
        cfg.jitter = 1.0;
        assert!(gen_trajectory(&cfg, &mut rng).is_err());
    }
}
