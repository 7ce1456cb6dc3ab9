//! Scenario definition for the two-user MIMO broadcast channel with a
//! two-antenna relay, construction of the corresponding Gaussian signal
//! systems, baseline dirty-paper rates without the relay, and the
//! no-relay capacity region via dual multiple-access enumeration.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianSystem, SystemBuilder};
use crate::region::RateRegion;

/// Physical scenario: direct and relay channel matrices, noise power,
/// total transmit power, and the digital relay link rate.
///
/// Row `i` of `h` (and `g`) is the conjugated channel of user `i` (relay
/// antenna `i`), applied directly to the transmit vector: the coefficient
/// of stream `j` at receiver `i` is `h.row(i) * v_j`.
#[derive(Debug, Clone)]
pub struct ChannelSpec {
    pub h: Matrix2<Complex64>,
    pub g: Matrix2<Complex64>,
    /// Receiver noise power at every antenna (destination and relay).
    pub noise_power: f64,
    /// Total transmit power budget.
    pub total_power: f64,
    /// Relay link rate in bits per channel use.
    pub relay_rate: f64,
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_power > 0.0) || !self.noise_power.is_finite() {
            return Err(Error::invalid("noise_power", "must be finite and > 0"));
        }
        if !(self.total_power > 0.0) || !self.total_power.is_finite() {
            return Err(Error::invalid("total_power", "must be finite and > 0"));
        }
        if !(self.relay_rate >= 0.0) || !self.relay_rate.is_finite() {
            return Err(Error::invalid("relay_rate", "must be finite and >= 0"));
        }
        for (name, m) in [("h", &self.h), ("g", &self.g)] {
            if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::invalid(name, "entries must be finite"));
            }
        }
        Ok(())
    }

    /// The scenario at a different noise power (for sweeps).
    pub fn with_noise(&self, noise_power: f64) -> Self {
        ChannelSpec {
            noise_power,
            ..self.clone()
        }
    }
}

/// Which user's stream is encoded first in the successive dirty-paper
/// order. The first-encoded user treats the other stream as noise (the
/// interfered user); the second-encoded user's interference is
/// pre-cancelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EncodingOrder {
    #[default]
    User1First,
    User2First,
}

/// Two-stream transmit plan: unit-norm beams and per-stream powers.
#[derive(Debug, Clone)]
pub struct BeamformingPlan {
    pub v1: Vector2<Complex64>,
    pub v2: Vector2<Complex64>,
    pub p1: f64,
    pub p2: f64,
    pub order: EncodingOrder,
}

impl BeamformingPlan {
    pub fn validate(&self, spec: &ChannelSpec) -> Result<()> {
        for (name, v) in [("v1", &self.v1), ("v2", &self.v2)] {
            if (v.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(name, "beam must have unit norm"));
            }
        }
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::invalid(name, "power must be finite and >= 0"));
            }
        }
        let total = self.p1 + self.p2;
        if (total - spec.total_power).abs() > 1e-9 * spec.total_power {
            return Err(Error::invalid(
                "p1+p2",
                format!("powers sum to {total}, budget is {}", spec.total_power),
            ));
        }
        Ok(())
    }

    /// Identity beams with an even power split.
    pub fn identity_split(spec: &ChannelSpec) -> Self {
        BeamformingPlan {
            v1: Vector2::new(Complex64::ONE, Complex64::ZERO),
            v2: Vector2::new(Complex64::ZERO, Complex64::ONE),
            p1: spec.total_power / 2.0,
            p2: spec.total_power / 2.0,
            order: EncodingOrder::User1First,
        }
    }
}

/// Coefficient of stream `v` at the receiver whose conjugated channel is
/// `row`: the scalar `row * v`.
pub(crate) fn rx_coeff(row: nalgebra::RowVector2<Complex64>, v: &Vector2<Complex64>) -> Complex64 {
    (row * v)[(0, 0)]
}

/// Declare the two-stage transmit/receive system: streams `U1`, `U2`,
/// destination observations `Y1`, `Y2`, and relay observations
/// `Yr1`, `Yr2` grouped as `Y_r`.
pub fn build_two_stage_system(spec: &ChannelSpec, plan: &BeamformingPlan) -> Result<GaussianSystem> {
    spec.validate()?;
    plan.validate(spec)?;
    let n = spec.noise_power;
    let mut b = SystemBuilder::new();
    b.source("U1", plan.p1).source("U2", plan.p2);
    b.source("Z1", n).source("Z2", n);
    b.source("Zr1", n).source("Zr2", n);
    for (sig, row, noise) in [
        ("Y1", spec.h.row(0), "Z1"),
        ("Y2", spec.h.row(1), "Z2"),
        ("Yr1", spec.g.row(0), "Zr1"),
        ("Yr2", spec.g.row(1), "Zr2"),
    ] {
        b.signal(
            sig,
            &[
                ("U1", rx_coeff(row.into_owned(), &plan.v1)),
                ("U2", rx_coeff(row.into_owned(), &plan.v2)),
                (noise, Complex64::ONE),
            ],
        );
    }
    b.group("Y_r", &["Yr1", "Yr2"]);
    b.build()
}

/// Dirty-paper rates of the two-stage scheme without the relay.
///
/// The first-encoded user treats the other stream as noise; the
/// second-encoded user sees an interference-free link.
pub fn dpc_rates_no_relay(spec: &ChannelSpec, plan: &BeamformingPlan) -> Result<(f64, f64)> {
    spec.validate()?;
    plan.validate(spec)?;
    let n = spec.noise_power;
    let a11 = rx_coeff(spec.h.row(0).into_owned(), &plan.v1).norm_sqr();
    let a12 = rx_coeff(spec.h.row(0).into_owned(), &plan.v2).norm_sqr();
    let a21 = rx_coeff(spec.h.row(1).into_owned(), &plan.v1).norm_sqr();
    let a22 = rx_coeff(spec.h.row(1).into_owned(), &plan.v2).norm_sqr();
    let rates = match plan.order {
        EncodingOrder::User1First => (
            (1.0 + a11 * plan.p1 / (a12 * plan.p2 + n)).log2(),
            (1.0 + a22 * plan.p2 / n).log2(),
        ),
        EncodingOrder::User2First => (
            (1.0 + a11 * plan.p1 / n).log2(),
            (1.0 + a22 * plan.p2 / (a21 * plan.p1 + n)).log2(),
        ),
    };
    Ok(rates)
}

/// Inner approximation of the no-relay capacity region by enumerating
/// dual multiple-access power splits on a grid and hulling the resulting
/// pentagons.
///
/// `grid_size` is the number of intervals: `grid_size + 1` splits
/// `q1 = i/grid_size * P` are evaluated, so doubling the grid refines the
/// split set monotonically.
pub fn capacity_region_no_relay(spec: &ChannelSpec, grid_size: usize) -> Result<RateRegion> {
    spec.validate()?;
    if grid_size < 2 {
        return Err(Error::invalid("grid_size", "must be >= 2"));
    }
    let n = spec.noise_power;
    let p = spec.total_power;
    // Dual MAC receive vectors: the column channels of each user.
    let h1 = spec.h.row(0).adjoint();
    let h2 = spec.h.row(1).adjoint();
    let outer1 = &h1 * h1.adjoint();
    let outer2 = &h2 * h2.adjoint();
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(5 * (grid_size + 1));
    for i in 0..=grid_size {
        let q1 = p * i as f64 / grid_size as f64;
        let q2 = p - q1;
        let r1 = (1.0 + q1 * h1.norm_squared() / n).log2();
        let r2 = (1.0 + q2 * h2.norm_squared() / n).log2();
        let m = Matrix2::identity()
            + (&outer1 * Complex64::new(q1 / n, 0.0))
            + (&outer2 * Complex64::new(q2 / n, 0.0));
        let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
        let rsum = det.log2();
        let a = r1.min(rsum);
        let b = r2.min(rsum);
        pts.push([a, 0.0]);
        pts.push([0.0, b]);
        if a + b > rsum {
            pts.push([a, rsum - a]);
            pts.push([rsum - b, b]);
        } else {
            pts.push([a, b]);
        }
    }
    Ok(RateRegion::from_points(&pts))
}

/// Every base rate pair, improved by any nonnegative split of the relay
/// rate: the Minkowski sum of the base region with the `r0` simplex.
pub fn relay_extended_region(base: &RateRegion, r0: f64) -> RateRegion {
    base.minkowski_extend(r0)
}
