//! Pinned and seeded-random scenarios shared by the test suite and the
//! `check` command.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rand::Rng;

use crate::bc::{BeamformingPlan, ChannelSpec, EncodingOrder};
use crate::gaussian::{GaussianSystem, SystemBuilder};
use crate::three_stage::ThreeStagePlan;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// The pinned sweep scenario: symmetric direct channel with 0.5 cross
/// gain, relay channel with 0.3 cross gain, total power 10, unit link
/// rate.
pub fn pinned_channel(noise_power: f64) -> ChannelSpec {
    ChannelSpec {
        h: Matrix2::new(c(1.0), c(0.5), c(0.5), c(1.0)),
        g: Matrix2::new(c(1.0), c(0.3), c(0.3), c(1.0)),
        noise_power,
        total_power: 10.0,
        relay_rate: 1.0,
    }
}

/// Identity beams, even power split, first user encoded first.
pub fn pinned_two_stage_plan(spec: &ChannelSpec) -> BeamformingPlan {
    BeamformingPlan {
        v1: Vector2::new(Complex64::ONE, Complex64::ZERO),
        v2: Vector2::new(Complex64::ZERO, Complex64::ONE),
        p1: spec.total_power / 2.0,
        p2: spec.total_power / 2.0,
        order: EncodingOrder::User1First,
    }
}

/// The pinned three-stage plan: the second user's power split evenly
/// across two streams. The third stream uses a distinct beam; with a
/// shared beam the relay cannot tell the two split streams apart, the
/// combiner identity degenerates onto the user's own observation, and
/// the relay gain collapses (see [`crate::three_stage`]).
pub fn pinned_three_stage_plan(spec: &ChannelSpec) -> ThreeStagePlan {
    let e1 = Vector2::new(Complex64::ONE, Complex64::ZERO);
    let e2 = Vector2::new(Complex64::ZERO, Complex64::ONE);
    let diag = Vector2::new(
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    );
    ThreeStagePlan::new(spec, e1, e2, diag, 5.0, 2.5, 2.5).expect("pinned plan is valid")
}

/// The noise-observing relay channel: `Y = X + Z`, the relay sees `Z`
/// directly, and forwards `Yhat = Z + eta` with quantization noise of
/// variance `q`.
pub fn noise_observing(p: f64, n: f64, q: f64) -> GaussianSystem {
    let mut b = SystemBuilder::new();
    b.source("X", p).source("Z", n).source("eta", q);
    b.signal("Y", &[("X", c(1.0)), ("Z", c(1.0))]);
    b.signal("Yr", &[("Z", c(1.0))]);
    b.signal("Yhat", &[("Yr", c(1.0)), ("eta", c(1.0))]);
    b.build().expect("noise-observing system is valid")
}

fn unit_phase(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..TAU))
}

fn unit_beam(rng: &mut impl Rng) -> Vector2<Complex64> {
    loop {
        let v = Vector2::new(
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        );
        let n = v.norm();
        if n > 1e-3 {
            return v / Complex64::new(n, 0.0);
        }
    }
}

/// Random channel with unit-magnitude entries and independent phases
/// (well conditioned with high probability), power 10, unit link rate.
pub fn random_channel(rng: &mut impl Rng, noise_power: f64) -> ChannelSpec {
    let mut m = || {
        Matrix2::new(
            unit_phase(rng),
            unit_phase(rng),
            unit_phase(rng),
            unit_phase(rng),
        )
    };
    let h = m();
    let g = m();
    ChannelSpec {
        h,
        g,
        noise_power,
        total_power: 10.0,
        relay_rate: 1.0,
    }
}

pub fn random_two_stage_plan(rng: &mut impl Rng, spec: &ChannelSpec) -> BeamformingPlan {
    let p1 = rng.random_range(0.05..0.95) * spec.total_power;
    BeamformingPlan {
        v1: unit_beam(rng),
        v2: unit_beam(rng),
        p1,
        p2: spec.total_power - p1,
        order: EncodingOrder::User1First,
    }
}

/// Random three-stage plan with independent beams (a shared second beam
/// makes the relay solve degenerate; see the pinned plan).
pub fn random_three_stage_plan(rng: &mut impl Rng, spec: &ChannelSpec) -> ThreeStagePlan {
    let p1 = rng.random_range(0.1..0.8) * spec.total_power;
    let rest = spec.total_power - p1;
    let split = rng.random_range(0.2..0.8);
    ThreeStagePlan::new(
        spec,
        unit_beam(rng),
        unit_beam(rng),
        unit_beam(rng),
        p1,
        rest * split,
        rest * (1.0 - split),
    )
    .expect("random plan is valid")
}

/// A random well-posed Gaussian system for the calculus properties:
/// three latent sources, three observation noises, and three signals
/// `A`, `B`, `C` mixing the latents with coefficients in the unit disk.
/// Variances are drawn from `[0.1, 10]`.
pub fn random_system(rng: &mut impl Rng) -> GaussianSystem {
    let mut b = SystemBuilder::new();
    for name in ["u0", "u1", "u2", "za", "zb", "zc"] {
        b.source(name, rng.random_range(0.1..10.0));
    }
    let coeff = |rng: &mut dyn rand::RngCore| loop {
        let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if z.norm() <= 1.0 {
            return z;
        }
    };
    for (sig, noise) in [("A", "za"), ("B", "zb"), ("C", "zc")] {
        b.signal(
            sig,
            &[
                ("u0", coeff(rng)),
                ("u1", coeff(rng)),
                ("u2", coeff(rng)),
                (noise, Complex64::ONE),
            ],
        );
    }
    b.build().expect("random system is valid")
}
