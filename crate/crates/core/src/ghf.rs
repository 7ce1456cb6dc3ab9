//! Quantize-and-forward rate evaluation.
//!
//! The relay quantizes a scalar projection of its observation and
//! random-bins the quantization index into the digital link. The
//! achievable rate gains a bonus of at most the link rate and pays a
//! penalty measuring how much of the quantized signal the destination
//! could already infer from its own observation and the decoded message.

use nalgebra::Vector2;
use num_complex::Complex64;

use crate::bc::{BeamformingPlan, ChannelSpec, EncodingOrder};
use crate::error::{Error, Result};
use crate::gaussian::GaussianSystem;

/// Relay receive beamformer and quantizer distortion.
#[derive(Debug, Clone)]
pub struct QuantizerConfig {
    pub w_r: Vector2<Complex64>,
    /// Variance of the quantization noise added to the projected
    /// observation.
    pub q: f64,
}

impl QuantizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.w_r.norm() == 0.0 {
            return Err(Error::invalid("w_r", "relay beamformer must be nonzero"));
        }
        if !(self.q > 0.0) {
            return Err(Error::invalid("q", "distortion must be > 0"));
        }
        Ok(())
    }
}

/// Term-by-term rate report for a quantize-and-forward evaluation.
#[derive(Debug, Clone, Copy)]
pub struct GhfReport {
    /// Rate achieved without the relay link.
    pub base: f64,
    /// `min{R0, I(Yhat; Yr | Y)}`, clamped at zero.
    pub bonus: f64,
    /// `min{R0, I(Yhat; Yr | decoded, Y)}`, clamped at zero.
    pub penalty: f64,
    /// `bonus - penalty`.
    pub delta: f64,
    /// `base + delta`.
    pub total: f64,
}

impl GhfReport {
    fn new(base: f64, bonus_raw: f64, penalty_raw: f64, r0: f64) -> Self {
        let bonus = bonus_raw.min(r0).max(0.0);
        let penalty = penalty_raw.min(r0).max(0.0);
        GhfReport {
            base,
            bonus,
            penalty,
            delta: bonus - penalty,
            total: base + bonus - penalty,
        }
    }
}

/// Rate of a relay channel under quantize-and-forward with joint decoding.
///
/// `yhat` must be declared in the system as a projection of `yr` plus an
/// independent quantization-noise source.
pub fn ghf_rate(
    system: &GaussianSystem,
    x: &[&str],
    y: &[&str],
    yr: &[&str],
    yhat: &[&str],
    r0: f64,
) -> Result<GhfReport> {
    let base = system.mutual_info(x, y)?;
    let bonus = system.cond_mutual_info(yhat, yr, y)?;
    let xy: Vec<&str> = x.iter().chain(y.iter()).copied().collect();
    let penalty = system.cond_mutual_info(yhat, yr, &xy)?;
    Ok(GhfReport::new(base, bonus, penalty, r0))
}

/// Rate of a relay channel with transmitter side information: the source
/// dirty-paper encodes against `s` via the auxiliary variable `utilde`,
/// and the penalty conditions on `(utilde, y)`.
pub fn ghf_rate_with_side_info(
    system: &GaussianSystem,
    utilde: &[&str],
    s: &[&str],
    y: &[&str],
    yr: &[&str],
    yhat: &[&str],
    r0: f64,
) -> Result<GhfReport> {
    let base = system.mutual_info(utilde, y)? - system.mutual_info(utilde, s)?;
    let bonus = system.cond_mutual_info(yhat, yr, y)?;
    let uy: Vec<&str> = utilde.iter().chain(y.iter()).copied().collect();
    let penalty = system.cond_mutual_info(yhat, yr, &uy)?;
    Ok(GhfReport::new(base, bonus, penalty, r0))
}

/// Result of tuning the quantizer distortion to the link rate.
#[derive(Debug, Clone, Copy)]
pub struct DistortionSolution {
    pub q: f64,
    /// Information carried through the link at the returned distortion.
    pub info_bits: f64,
    /// Set when the solver returned the bracket's upper bound instead of
    /// an interior root (zero or trivially satisfiable targets).
    pub at_upper_bound: bool,
}

pub const DISTORTION_BRACKET: (f64, f64) = (1e-12, 1e12);
const DISTORTION_TOL_BITS: f64 = 1e-9;
const DISTORTION_MAX_ITERS: usize = 100;

/// Find `q` with `info(q) == target` by bisection on `log q`.
///
/// `info` must be continuous and strictly decreasing in `q` (the
/// information through a Gaussian quantizer always is). Errors with
/// [`Error::Infeasible`] when even the smallest distortion cannot reach
/// the target.
pub fn solve_distortion(
    info: impl Fn(f64) -> Result<f64>,
    target: f64,
    bracket: (f64, f64),
) -> Result<DistortionSolution> {
    let (q_min, q_max) = bracket;
    if !(q_min > 0.0 && q_max > q_min) {
        return Err(Error::invalid("q_bounds", "need 0 < q_min < q_max"));
    }
    if target <= 0.0 {
        let info_bits = info(q_max)?;
        return Ok(DistortionSolution {
            q: q_max,
            info_bits,
            at_upper_bound: true,
        });
    }
    let i_min = info(q_min)?;
    if i_min < target {
        return Err(Error::Infeasible(format!(
            "link needs {target} bits but the observation carries at most {i_min:.6} \
             even at the finest quantization"
        )));
    }
    let i_max = info(q_max)?;
    if i_max >= target {
        return Ok(DistortionSolution {
            q: q_max,
            info_bits: i_max,
            at_upper_bound: true,
        });
    }
    let (mut lo, mut hi) = (q_min.ln(), q_max.ln());
    let mut q = (0.5 * (lo + hi)).exp();
    let mut val = info(q)?;
    for _ in 0..DISTORTION_MAX_ITERS {
        if (val - target).abs() <= DISTORTION_TOL_BITS {
            break;
        }
        if val > target {
            lo = q.ln();
        } else {
            hi = q.ln();
        }
        q = (0.5 * (lo + hi)).exp();
        val = info(q)?;
    }
    Ok(DistortionSolution {
        q,
        info_bits: val,
        at_upper_bound: false,
    })
}

/// Names used when extending a scenario system with the relay projection
/// and its quantized description.
pub(crate) const PROJECTED: &str = "Ytilde_r";
pub(crate) const QUANTIZED: &str = "Yhat_r";
const QUANT_NOISE: &str = "eta";

/// Extend `base` with the scalar relay projection along `w_r`.
pub fn with_projection(base: &GaussianSystem, w_r: &Vector2<Complex64>) -> Result<GaussianSystem> {
    let mut b = base.to_builder();
    b.signal(
        PROJECTED,
        &[("Yr1", w_r[0].conj()), ("Yr2", w_r[1].conj())],
    );
    b.build()
}

/// Extend `base` with the scalar relay projection along `w_r` and its
/// quantized description at distortion `q`.
pub fn with_quantizer(
    base: &GaussianSystem,
    w_r: &Vector2<Complex64>,
    q: f64,
) -> Result<GaussianSystem> {
    let mut b = base.to_builder();
    b.source(QUANT_NOISE, q);
    b.signal(
        PROJECTED,
        &[("Yr1", w_r[0].conj()), ("Yr2", w_r[1].conj())],
    );
    b.signal(
        QUANTIZED,
        &[(PROJECTED, Complex64::ONE), (QUANT_NOISE, Complex64::ONE)],
    );
    b.build()
}

/// Information the quantized description carries about the projection
/// given conditioning variables with conditional variance `v`: the scalar
/// additive quantizer has `I = log2((v + q) / q)` exactly. Used as the
/// solver objective because it stays well conditioned across the whole
/// distortion bracket; the full log-det evaluation of the final report
/// cross-checks it at the solved point.
pub(crate) fn scalar_quantizer_info(v: f64, q: f64) -> f64 {
    (1.0 + v / q).log2()
}

/// Outcome of the interfered-user relay strategy.
#[derive(Debug, Clone)]
pub struct InterferedImprovement {
    pub w_r: Vector2<Complex64>,
    pub q: f64,
    pub q_at_bound: bool,
    pub report: GhfReport,
}

/// Relay strategy for the user encoded first (the interfered user).
///
/// The relay projects its observation along `w_r` (default: the MMSE
/// combiner for the interfering stream, which maximizes the relay's view
/// of the interference), tunes the quantizer so the link is exactly
/// filled given that user's observation, and evaluates the
/// quantize-and-forward rate.
pub fn interfered_user_improvement(
    spec: &ChannelSpec,
    plan: &BeamformingPlan,
    r0: f64,
    w_r: Option<Vector2<Complex64>>,
) -> Result<InterferedImprovement> {
    let base = crate::bc::build_two_stage_system(spec, plan)?;
    let (first_stream, own_rx) = match plan.order {
        EncodingOrder::User1First => ("U1", "Y1"),
        EncodingOrder::User2First => ("U2", "Y2"),
    };
    let interferer = match plan.order {
        EncodingOrder::User1First => "U2",
        EncodingOrder::User2First => "U1",
    };
    let (w, useless) = match w_r {
        Some(w) => {
            if w.norm() == 0.0 {
                return Err(Error::invalid("w_r", "relay beamformer must be nonzero"));
            }
            (w.normalize(), false)
        }
        None => mmse_interference_combiner(&base, interferer)?,
    };
    if useless {
        // Relay carries nothing about the interference: park the
        // quantizer at the coarsest distortion and report the (empty)
        // gain honestly.
        let sys = with_quantizer(&base, &w, DISTORTION_BRACKET.1)?;
        let report = ghf_rate(
            &sys,
            &[first_stream],
            &[own_rx],
            &[PROJECTED],
            &[QUANTIZED],
            r0,
        )?;
        return Ok(InterferedImprovement {
            w_r: w,
            q: DISTORTION_BRACKET.1,
            q_at_bound: true,
            report,
        });
    }
    let projected = with_projection(&base, &w)?;
    let v = projected.conditional_variance(PROJECTED, &[own_rx])?;
    let solve = solve_distortion(|q| Ok(scalar_quantizer_info(v, q)), r0, DISTORTION_BRACKET)?;
    let sys = with_quantizer(&base, &w, solve.q)?;
    let report = ghf_rate(
        &sys,
        &[first_stream],
        &[own_rx],
        &[PROJECTED],
        &[QUANTIZED],
        r0,
    )?;
    Ok(InterferedImprovement {
        w_r: w,
        q: solve.q,
        q_at_bound: solve.at_upper_bound,
        report,
    })
}

/// MMSE combiner for estimating `stream` from the relay observation pair.
/// Returns the normalized combiner and whether the relay observation is
/// uncorrelated with the stream (combiner numerically zero).
fn mmse_interference_combiner(
    system: &GaussianSystem,
    stream: &str,
) -> Result<(Vector2<Complex64>, bool)> {
    let k = system.covariance(&["Yr1", "Yr2", stream])?;
    let kyy = nalgebra::Matrix2::new(k[(0, 0)], k[(0, 1)], k[(1, 0)], k[(1, 1)]);
    let cross = Vector2::new(k[(0, 2)], k[(1, 2)]);
    let scale = kyy[(0, 0)].re.max(kyy[(1, 1)].re).max(f64::MIN_POSITIVE);
    if cross.norm() <= 1e-12 * (scale * k[(2, 2)].re.max(f64::MIN_POSITIVE)).sqrt() {
        return Ok((Vector2::new(Complex64::ONE, Complex64::ZERO), true));
    }
    let w = kyy
        .lu()
        .solve(&cross)
        .ok_or_else(|| Error::SingularCovariance("relay covariance not invertible".into()))?;
    if w.norm() == 0.0 {
        return Ok((Vector2::new(Complex64::ONE, Complex64::ZERO), true));
    }
    Ok((w.normalize(), false))
}

/// Outcome of re-using the interfered-user quantizer for the user encoded
/// second.
#[derive(Debug, Clone)]
pub struct NonInterferedOutcome {
    /// Dirty-paper scaling factor of the second-encoded user.
    pub k: f64,
    pub report: GhfReport,
}

const DPC_AUX: &str = "Utilde_2";
const DPC_SIDE_INFO: &str = "S_dpc";

/// Rate improvement the interfered-user relay strategy leaves for the
/// user encoded second (expected to vanish at high SNR: the dirty-paper
/// auxiliary converges to that user's own observation, so the penalty
/// cancels the bonus).
///
/// Requires the `User1First` order; `w_r` and `q` are the quantizer
/// designed for user one.
pub fn failing_noninterfered_improvement(
    spec: &ChannelSpec,
    plan: &BeamformingPlan,
    r0: f64,
    w_r: &Vector2<Complex64>,
    q: f64,
) -> Result<NonInterferedOutcome> {
    if plan.order != EncodingOrder::User1First {
        return Err(Error::PreconditionFailed(
            "the second-user evaluation assumes the first user is encoded first".into(),
        ));
    }
    QuantizerConfig { w_r: *w_r, q }.validate()?;
    let base = crate::bc::build_two_stage_system(spec, plan)?;
    let b21 = crate::bc::rx_coeff(spec.h.row(1).into_owned(), &plan.v1);
    let b22 = crate::bc::rx_coeff(spec.h.row(1).into_owned(), &plan.v2);
    let k = b22.norm_sqr() * plan.p2 / (b22.norm_sqr() * plan.p2 + spec.noise_power);
    let mut builder = with_quantizer(&base, w_r, q)?.to_builder();
    builder.signal(DPC_SIDE_INFO, &[("U1", b21)]);
    builder.signal(DPC_AUX, &[("U1", k * b21), ("U2", b22)]);
    let sys = builder.build()?;
    let report = ghf_rate_with_side_info(
        &sys,
        &[DPC_AUX],
        &[DPC_SIDE_INFO],
        &["Y2"],
        &[PROJECTED],
        &[QUANTIZED],
        r0,
    )?;
    Ok(NonInterferedOutcome { k, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::SystemBuilder;
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn noise_observing(p: f64, n: f64, q: f64) -> GaussianSystem {
        let mut b = SystemBuilder::new();
        b.source("X", p).source("Z", n).source("eta_q", q);
        b.signal("Y", &[("X", c(1.0)), ("Z", c(1.0))]);
        b.signal("Yr", &[("Z", c(1.0))]);
        b.signal("Yhat", &[("Z", c(1.0)), ("eta_q", c(1.0))]);
        b.build().unwrap()
    }

    #[test]
    fn noise_observing_channel_doubles_its_rate() {
        let sys = noise_observing(1.0, 1.0, 0.5);
        let rep = ghf_rate(&sys, &["X"], &["Y"], &["Yr"], &["Yhat"], 1.0).unwrap();
        assert_abs_diff_eq!(rep.base, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rep.bonus, 1.0, epsilon = 1e-9);
        assert!(rep.penalty < 1e-9);
        assert_abs_diff_eq!(rep.total, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_link_rate_means_base_rate() {
        let sys = noise_observing(1.0, 1.0, 0.5);
        let rep = ghf_rate(&sys, &["X"], &["Y"], &["Yr"], &["Yhat"], 0.0).unwrap();
        assert_abs_diff_eq!(rep.total, rep.base, epsilon = 1e-12);
    }

    #[test]
    fn useless_quantizer_means_no_bonus() {
        let sys = noise_observing(1.0, 1.0, 1e12);
        let rep = ghf_rate(&sys, &["X"], &["Y"], &["Yr"], &["Yhat"], 1.0).unwrap();
        assert!(rep.bonus <= 1e-6);
        assert_abs_diff_eq!(rep.total, rep.base, epsilon = 1e-6);
    }

    #[test]
    fn vacuous_side_information_reduces_to_plain_ghf() {
        let mut b = SystemBuilder::new();
        b.source("X", 1.0)
            .source("Z", 1.0)
            .source("eta_q", 0.5)
            .source("S", 2.0);
        b.signal("Y", &[("X", c(1.0)), ("Z", c(1.0))]);
        b.signal("Yr", &[("Z", c(1.0))]);
        b.signal("Yhat", &[("Z", c(1.0)), ("eta_q", c(1.0))]);
        let sys = b.build().unwrap();
        let plain = ghf_rate(&sys, &["X"], &["Y"], &["Yr"], &["Yhat"], 1.0).unwrap();
        let with_s =
            ghf_rate_with_side_info(&sys, &["X"], &["S"], &["Y"], &["Yr"], &["Yhat"], 1.0).unwrap();
        assert_abs_diff_eq!(plain.total, with_s.total, epsilon = 1e-9);
    }

    /// Dirty-paper encoding against known interference recovers the
    /// interference-free rate when the auxiliary scaling is the MMSE one.
    #[test]
    fn dirty_paper_reaches_the_clean_channel_rate() {
        let (p, qvar, n) = (1.0, 3.0, 0.5);
        let k = p / (p + n);
        let mut b = SystemBuilder::new();
        b.source("X", p).source("S", qvar).source("Z", n);
        b.signal("U", &[("X", c(1.0)), ("S", c(k))]);
        b.signal("Y", &[("X", c(1.0)), ("S", c(1.0)), ("Z", c(1.0))]);
        let sys = b.build().unwrap();
        let base =
            sys.mutual_info(&["U"], &["Y"]).unwrap() - sys.mutual_info(&["U"], &["S"]).unwrap();
        assert_abs_diff_eq!(base, (1.0 + p / n).log2(), epsilon = 1e-7);
    }

    #[test]
    fn distortion_solver_inverts_the_scalar_formula() {
        // Var(Yr | Y) = 0.5 and a 1-bit link give q = 0.5.
        let sol = solve_distortion(
            |q| Ok(((0.5 + q) / q).log2()),
            1.0,
            DISTORTION_BRACKET,
        )
        .unwrap();
        assert_abs_diff_eq!(sol.q, 0.5, epsilon = 1e-6);
        assert!(!sol.at_upper_bound);
    }

    #[test]
    fn zero_target_parks_at_the_upper_bound() {
        let sol = solve_distortion(
            |q| Ok(((0.5 + q) / q).log2()),
            0.0,
            DISTORTION_BRACKET,
        )
        .unwrap();
        assert!(sol.at_upper_bound);
        assert_abs_diff_eq!(sol.q, DISTORTION_BRACKET.1, epsilon = 1e-3);
    }

    #[test]
    fn deterministic_observation_is_infeasible() {
        // Var(Yr | Y) = 0: nothing new to forward.
        let result = solve_distortion(|q| Ok(((0.0 + q) / q).log2()), 1.0, DISTORTION_BRACKET);
        assert!(matches!(result, Err(Error::Infeasible(_))));
    }

    fn pinned_spec(n: f64) -> ChannelSpec {
        ChannelSpec {
            h: Matrix2::new(c(1.0), c(0.5), c(0.5), c(1.0)),
            g: Matrix2::new(c(1.0), c(0.3), c(0.3), c(1.0)),
            noise_power: n,
            total_power: 10.0,
            relay_rate: 1.0,
        }
    }

    #[test]
    fn interfered_user_gains_nearly_the_link_rate_at_high_snr() {
        let spec = pinned_spec(1e-6);
        let plan = BeamformingPlan::identity_split(&spec);
        let out = interfered_user_improvement(&spec, &plan, 1.0, None).unwrap();
        assert!(
            out.report.delta >= 0.95,
            "delta {} too small",
            out.report.delta
        );
        assert!(out.report.penalty <= 0.05);
        // Penalty agrees with a direct conditional-information evaluation.
        let sys = with_quantizer(
            &crate::bc::build_two_stage_system(&spec, &plan).unwrap(),
            &out.w_r,
            out.q,
        )
        .unwrap();
        let direct = sys
            .cond_mutual_info(&[QUANTIZED], &[PROJECTED], &["U1", "Y1"])
            .unwrap();
        assert_abs_diff_eq!(direct.min(1.0).max(0.0), out.report.penalty, epsilon = 1e-9);
    }

    #[test]
    fn interfered_user_pays_a_positive_penalty_at_finite_snr() {
        let spec = pinned_spec(1.0);
        let plan = BeamformingPlan::identity_split(&spec);
        let out = interfered_user_improvement(&spec, &plan, 1.0, None).unwrap();
        assert!(out.report.delta >= 0.0);
        assert!(out.report.delta < 1.0);
        assert!(out.report.penalty > 0.0);
    }

    #[test]
    fn disconnected_relay_brings_nothing() {
        let mut spec = pinned_spec(1.0);
        spec.g = Matrix2::zeros();
        let plan = BeamformingPlan::identity_split(&spec);
        let out = interfered_user_improvement(&spec, &plan, 1.0, None).unwrap();
        assert!(out.report.bonus <= 1e-6);
        assert!(out.report.delta.abs() <= 1e-6);
        assert!(out.q_at_bound);
    }

    #[test]
    fn second_user_gain_vanishes_at_high_snr() {
        let spec = pinned_spec(1e-6);
        let plan = BeamformingPlan::identity_split(&spec);
        let first = interfered_user_improvement(&spec, &plan, 1.0, None).unwrap();
        let second =
            failing_noninterfered_improvement(&spec, &plan, 1.0, &first.w_r, first.q).unwrap();
        assert!(second.k >= 0.999);
        assert!(
            second.report.delta <= 0.05,
            "second-user delta {} should be near zero",
            second.report.delta
        );
    }

    #[test]
    fn second_user_gain_is_nonnegative_at_low_snr() {
        let spec = pinned_spec(100.0);
        let plan = BeamformingPlan::identity_split(&spec);
        let first = interfered_user_improvement(&spec, &plan, 1.0, None).unwrap();
        let second =
            failing_noninterfered_improvement(&spec, &plan, 1.0, &first.w_r, first.q).unwrap();
        assert!(second.k < 0.1);
        assert!(second.report.delta >= -1e-9);
    }

    #[test]
    fn zero_link_rate_gives_zero_improvement_for_both_users() {
        let spec = pinned_spec(1.0);
        let plan = BeamformingPlan::identity_split(&spec);
        let first = interfered_user_improvement(&spec, &plan, 0.0, None).unwrap();
        assert_abs_diff_eq!(first.report.delta, 0.0, epsilon = 1e-12);
        let second =
            failing_noninterfered_improvement(&spec, &plan, 0.0, &first.w_r, first.q).unwrap();
        assert_abs_diff_eq!(second.report.delta, 0.0, epsilon = 1e-12);
    }
}
