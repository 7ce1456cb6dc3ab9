//! Three-stage dirty-paper construction: the second user's message is
//! split across two streams, and a relay receive beamformer paired with a
//! virtual destination-side beamformer makes the relay projection an
//! asymptotically deterministic function of the second user's decoded
//! auxiliary and its own observation. That cross-determinism drives the
//! quantization penalty to zero and hands the second-encoded user the
//! full link rate at high SNR.

use nalgebra::{DMatrix, Matrix3, Matrix3x2, Vector2, Vector3};
use num_complex::Complex64;

use crate::bc::{rx_coeff, BeamformingPlan, ChannelSpec};
use crate::error::{Error, Result};
use crate::gaussian::GaussianSystem;
use crate::ghf::{
    ghf_rate_with_side_info, scalar_quantizer_info, solve_distortion, with_projection,
    with_quantizer, GhfReport, DISTORTION_BRACKET, PROJECTED, QUANTIZED,
};

/// Condition number above which a normalization system is not used
/// directly.
const DIRECT_SOLVE_COND: f64 = 1e10;
/// Condition number above which a system counts as numerically singular.
const SINGULAR_COND: f64 = 1e12;
/// Relative singular-value threshold for numerical rank decisions.
const RANK_EPS: f64 = 1e-10;

/// Three-stream transmit plan with the derived per-receiver effective
/// channels and dirty-paper scalars (which depend on the noise power, so
/// the plan is constructed against a concrete [`ChannelSpec`]).
#[derive(Debug, Clone)]
pub struct ThreeStagePlan {
    pub v1: Vector2<Complex64>,
    pub v2: Vector2<Complex64>,
    pub v3: Vector2<Complex64>,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// `h_eff[i][j]` is the coefficient of stream `j` at destination `i`.
    pub h_eff: [[Complex64; 3]; 2],
    /// `g_eff[i][j]` is the coefficient of stream `j` at relay antenna `i`.
    pub g_eff: [[Complex64; 3]; 2],
    /// Dirty-paper scaling of the first split stream (stream 3 treated as
    /// noise).
    pub k: f64,
    /// Dirty-paper scaling of the second split stream.
    pub l: f64,
    /// Coefficient column of the second user's auxiliary variable:
    /// `Utilde_2 = h_hat^* U`.
    pub h_hat: Vector3<Complex64>,
}

impl ThreeStagePlan {
    pub fn new(
        spec: &ChannelSpec,
        v1: Vector2<Complex64>,
        v2: Vector2<Complex64>,
        v3: Vector2<Complex64>,
        p1: f64,
        p2: f64,
        p3: f64,
    ) -> Result<Self> {
        spec.validate()?;
        for (name, v) in [("v1", &v1), ("v2", &v2), ("v3", &v3)] {
            if (v.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(name, "beam must have unit norm"));
            }
        }
        for (name, p) in [("p1", p1), ("p2", p2), ("p3", p3)] {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::invalid(name, "power must be finite and >= 0"));
            }
        }
        let total = p1 + p2 + p3;
        if (total - spec.total_power).abs() > 1e-9 * spec.total_power {
            return Err(Error::invalid(
                "p1+p2+p3",
                format!("powers sum to {total}, budget is {}", spec.total_power),
            ));
        }
        let n = spec.noise_power;
        let eff = |m: &nalgebra::Matrix2<Complex64>, i: usize| {
            [
                rx_coeff(m.row(i).into_owned(), &v1),
                rx_coeff(m.row(i).into_owned(), &v2),
                rx_coeff(m.row(i).into_owned(), &v3),
            ]
        };
        let h_eff = [eff(&spec.h, 0), eff(&spec.h, 1)];
        let g_eff = [eff(&spec.g, 0), eff(&spec.g, 1)];
        let s2 = h_eff[1][1].norm_sqr() * p2;
        let s3 = h_eff[1][2].norm_sqr() * p3;
        let k = s2 / (s2 + s3 + n);
        let l = s3 / (s3 + n);
        let h_hat = Vector3::new(
            Complex64::new(k, 0.0) * h_eff[1][0].conj(),
            h_eff[1][1].conj(),
            Complex64::ZERO,
        );
        Ok(ThreeStagePlan {
            v1,
            v2,
            v3,
            p1,
            p2,
            p3,
            h_eff,
            g_eff,
            k,
            l,
            h_hat,
        })
    }

    /// Split a two-stage plan's second stream into two streams sharing the
    /// same beam (`v3 = v2`), with `split` of the power kept on stream 2.
    pub fn from_two_stage(
        spec: &ChannelSpec,
        plan: &BeamformingPlan,
        split: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&split) {
            return Err(Error::invalid("power_split", "must lie in [0, 1]"));
        }
        Self::new(
            spec,
            plan.v1,
            plan.v2,
            plan.v2,
            plan.p1,
            plan.p2 * split,
            plan.p2 * (1.0 - split),
        )
    }

    /// Second user's effective channel as a column vector.
    pub fn h2_col(&self) -> Vector3<Complex64> {
        Vector3::new(
            self.h_eff[1][0].conj(),
            self.h_eff[1][1].conj(),
            self.h_eff[1][2].conj(),
        )
    }

    /// Relay effective channel columns.
    pub fn g_cols(&self) -> (Vector3<Complex64>, Vector3<Complex64>) {
        (
            Vector3::new(
                self.g_eff[0][0].conj(),
                self.g_eff[0][1].conj(),
                self.g_eff[0][2].conj(),
            ),
            Vector3::new(
                self.g_eff[1][0].conj(),
                self.g_eff[1][1].conj(),
                self.g_eff[1][2].conj(),
            ),
        )
    }
}

/// Names of the auxiliary signals declared by the three-stage system.
pub const AUX_STREAM2: &str = "Utilde_2";
pub const AUX_STREAM3: &str = "Utilde_3";
pub const SIDE_INFO: &str = "S_2";

/// Declare the three-stage system: streams, observations, relay
/// observations, both dirty-paper auxiliaries, and the second user's
/// known-interference signal.
pub fn build_three_stage_system(
    spec: &ChannelSpec,
    plan: &ThreeStagePlan,
) -> Result<GaussianSystem> {
    let n = spec.noise_power;
    let mut b = crate::gaussian::SystemBuilder::new();
    b.source("U1", plan.p1)
        .source("U2", plan.p2)
        .source("U3", plan.p3);
    b.source("Z1", n).source("Z2", n);
    b.source("Zr1", n).source("Zr2", n);
    for (sig, row, noise) in [
        ("Y1", plan.h_eff[0], "Z1"),
        ("Y2", plan.h_eff[1], "Z2"),
        ("Yr1", plan.g_eff[0], "Zr1"),
        ("Yr2", plan.g_eff[1], "Zr2"),
    ] {
        b.signal(
            sig,
            &[
                ("U1", row[0]),
                ("U2", row[1]),
                ("U3", row[2]),
                (noise, Complex64::ONE),
            ],
        );
    }
    b.group("Y_r", &["Yr1", "Yr2"]);
    let h2 = plan.h_eff[1];
    b.signal(SIDE_INFO, &[("U1", h2[0])]);
    // Utilde_2 = h_hat^* U.
    b.signal(
        AUX_STREAM2,
        &[("U1", plan.k * h2[0]), ("U2", h2[1])],
    );
    // Utilde_3 = (h2*v3) U3 + l ((h2*v2) U2 + (h2*v1) U1).
    b.signal(
        AUX_STREAM3,
        &[
            ("U1", plan.l * h2[0]),
            ("U2", plan.l * h2[1]),
            ("U3", h2[2]),
        ],
    );
    b.build()
}

/// Which relay-combiner entry was pinned to one when solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `w_r = [w_r1; 1]`
    UnitSecond,
    /// `w_r = [1; w_r2]`
    UnitFirst,
    /// Solution recovered from the null space of the joint system.
    NullSpace,
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Normalization::UnitSecond => write!(f, "wr2=1"),
            Normalization::UnitFirst => write!(f, "wr1=1"),
            Normalization::NullSpace => write!(f, "nullspace"),
        }
    }
}

/// Relay receive beamformer and destination-side virtual beamformer
/// reproducing the relay projection from `(Y2, Utilde_2)`.
#[derive(Debug, Clone)]
pub struct BeamformerSolution {
    pub w_r: Vector2<Complex64>,
    pub w_2: Vector2<Complex64>,
    pub normalization: Normalization,
    /// Relative defect of the reproduction identity.
    pub residual: f64,
}

fn cond3(m: &Matrix3<Complex64>) -> f64 {
    let sv = m.svd(false, false).singular_values;
    let mx = sv.iter().cloned().fold(0.0_f64, f64::max);
    let mn = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if mn <= 0.0 {
        f64::INFINITY
    } else {
        mx / mn
    }
}

fn relative_residual(plan: &ThreeStagePlan, w_r: &Vector2<Complex64>, w_2: &Vector2<Complex64>) -> f64 {
    let (g1, g2) = plan.g_cols();
    let g_tilde = Matrix3x2::from_columns(&[g1, g2]);
    let targets = Matrix3x2::from_columns(&[plan.h2_col(), plan.h_hat]);
    let defect = g_tilde * w_r - targets * w_2;
    defect.norm() / (g_tilde.norm() * w_r.norm()).max(f64::MIN_POSITIVE)
}

/// Solve for a nonzero relay combiner `w_r` and virtual combiner `w_2`
/// with `G_tilde w_r = [h2_col h_hat] w_2`.
///
/// The two pinned-entry 3x3 systems are tried first; when both are
/// numerically singular the joint null space is searched, which still
/// succeeds in geometries where the pinned systems degenerate (for
/// example when the relay columns coincide with the target columns).
/// [`Error::RankDeficient`] is returned when the relay observes no
/// direction of the second user's signal that is independent of its
/// effective channel, i.e. both `[h2_col g1]` and `[h2_col g2]` are
/// rank deficient.
pub fn solve_relay_beamformer(plan: &ThreeStagePlan) -> Result<BeamformerSolution> {
    let h2 = plan.h2_col();
    let (g1, g2) = plan.g_cols();

    let m_a = Matrix3::from_columns(&[h2, plan.h_hat, -g1]);
    let m_b = Matrix3::from_columns(&[h2, plan.h_hat, -g2]);
    let (cond_a, cond_b) = (cond3(&m_a), cond3(&m_b));

    let direct = |m: &Matrix3<Complex64>, rhs: &Vector3<Complex64>, norm: Normalization| {
        m.lu().solve(rhs).map(|x| {
            let w_2 = Vector2::new(x[0], x[1]);
            let w_r = match norm {
                Normalization::UnitSecond => Vector2::new(x[2], Complex64::ONE),
                _ => Vector2::new(Complex64::ONE, x[2]),
            };
            (w_r, w_2, norm)
        })
    };

    let attempt = if cond_a <= DIRECT_SOLVE_COND {
        direct(&m_a, &g2, Normalization::UnitSecond)
    } else if cond_b <= DIRECT_SOLVE_COND {
        direct(&m_b, &g1, Normalization::UnitFirst)
    } else if cond_a.min(cond_b) <= SINGULAR_COND {
        if cond_a <= cond_b {
            direct(&m_a, &g2, Normalization::UnitSecond)
        } else {
            direct(&m_b, &g1, Normalization::UnitFirst)
        }
    } else {
        None
    };

    let (w_r, w_2, normalization) = match attempt {
        Some(sol) => sol,
        None => nullspace_solution(plan, &h2, &g1, &g2)?,
    };
    let residual = relative_residual(plan, &w_r, &w_2);
    if !residual.is_finite() || residual > 1e-9 {
        return Err(Error::RankDeficient(format!(
            "no accurate combiner pair: relative residual {residual:.3e}"
        )));
    }
    Ok(BeamformerSolution {
        w_r,
        w_2,
        normalization,
        residual,
    })
}

fn full_column_rank_3x2(a: &Vector3<Complex64>, b: &Vector3<Complex64>) -> bool {
    let m = Matrix3x2::from_columns(&[*a, *b]);
    let sv = m.svd(false, false).singular_values;
    let mx = sv.iter().cloned().fold(0.0_f64, f64::max);
    let mn = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    mn > RANK_EPS * mx.max(f64::MIN_POSITIVE)
}

fn nullspace_solution(
    plan: &ThreeStagePlan,
    h2: &Vector3<Complex64>,
    g1: &Vector3<Complex64>,
    g2: &Vector3<Complex64>,
) -> Result<(Vector2<Complex64>, Vector2<Complex64>, Normalization)> {
    // Degenerate geometry: the relay's view of the second user's signal is
    // collinear with the user's own effective channel, so any reproduced
    // projection carries nothing the destination lacks.
    if !full_column_rank_3x2(h2, g1) && !full_column_rank_3x2(h2, g2) {
        return Err(Error::RankDeficient(
            "both pinned systems are singular and neither relay column is \
             independent of the second user's effective channel"
                .into(),
        ));
    }
    // Null space of the 3x4 joint system [h2 h_hat -g1 -g2].
    let mut m = DMatrix::<Complex64>::zeros(3, 4);
    for i in 0..3 {
        m[(i, 0)] = h2[i];
        m[(i, 1)] = plan.h_hat[i];
        m[(i, 2)] = -g1[i];
        m[(i, 3)] = -g2[i];
    }
    let gram = m.adjoint() * &m;
    let eig = nalgebra::SymmetricEigen::new(gram);
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    // Gram eigenvalues of exact null directions sit at the rounding floor
    // (~1e-16 of the largest), well below this threshold.
    let thr = 1e-12 * lmax.max(f64::MIN_POSITIVE);
    let null_cols: Vec<usize> = (0..4).filter(|&i| eig.eigenvalues[i] <= thr).collect();
    if null_cols.is_empty() {
        return Err(Error::RankDeficient("joint system has no null space".into()));
    }
    let basis = DMatrix::from_fn(4, null_cols.len(), |i, j| {
        eig.eigenvectors[(i, null_cols[j])]
    });
    // Pick the null direction with the largest relay component.
    let tail = basis.rows(2, 2).into_owned();
    let tail_gram = tail.adjoint() * &tail;
    let tail_eig = nalgebra::SymmetricEigen::new(tail_gram);
    let (best, sigma2) = (0..tail_eig.eigenvalues.len())
        .map(|i| (i, tail_eig.eigenvalues[i]))
        .fold((0, f64::NEG_INFINITY), |acc, cur| {
            if cur.1 > acc.1 {
                cur
            } else {
                acc
            }
        });
    if sigma2.max(0.0).sqrt() <= 1e-8 {
        return Err(Error::RankDeficient(
            "every exact combiner pair has a zero relay component".into(),
        ));
    }
    let coeff = tail_eig.eigenvectors.column(best).into_owned();
    let w = &basis * coeff;
    let w_r = Vector2::new(w[2], w[3]);
    let w_2 = Vector2::new(w[0], w[1]);
    // Normalize so the larger relay entry is one, for reproducibility.
    let (scale, _norm_tag) = if w_r[1].norm() >= w_r[0].norm() {
        (w_r[1], Normalization::UnitSecond)
    } else {
        (w_r[0], Normalization::UnitFirst)
    };
    Ok((w_r / scale, w_2 / scale, Normalization::NullSpace))
}

/// Numerical ranks of the two pinned normalization systems; the relay
/// beamformer has a guaranteed direct solution when either is full rank.
#[derive(Debug, Clone, Copy)]
pub struct RankConditionReport {
    /// Rank of `[h2_col h_hat -g1]` (the `wr2=1` system).
    pub rank_unit_second: usize,
    /// Rank of `[h2_col h_hat -g2]` (the `wr1=1` system).
    pub rank_unit_first: usize,
    pub feasible: bool,
}

pub fn rank_condition_check(plan: &ThreeStagePlan) -> RankConditionReport {
    let h2 = plan.h2_col();
    let (g1, g2) = plan.g_cols();
    let rank_of = |m: &Matrix3<Complex64>| {
        let sv = m.svd(false, false).singular_values;
        let mx = sv.iter().cloned().fold(0.0_f64, f64::max);
        sv.iter().filter(|&&s| s > RANK_EPS * mx.max(f64::MIN_POSITIVE)).count()
    };
    let ra = rank_of(&Matrix3::from_columns(&[h2, plan.h_hat, -g1]));
    let rb = rank_of(&Matrix3::from_columns(&[h2, plan.h_hat, -g2]));
    RankConditionReport {
        rank_unit_second: ra,
        rank_unit_first: rb,
        feasible: ra == 3 || rb == 3,
    }
}

/// Power of the reproduction defect `w_r^* Y_r - w_2^* [Y2; Utilde_2]`,
/// evaluated in the declared Gaussian system. When the combiner identity
/// holds exactly on the signal part, this is a noise-only quadratic form
/// proportional to the noise power.
pub fn cross_determinism_residual(
    spec: &ChannelSpec,
    plan: &ThreeStagePlan,
    solution: &BeamformerSolution,
) -> Result<f64> {
    let sys = build_three_stage_system(spec, plan)?;
    let mut b = sys.to_builder();
    b.signal(
        "defect",
        &[
            ("Yr1", solution.w_r[0].conj()),
            ("Yr2", solution.w_r[1].conj()),
            ("Y2", -solution.w_2[0].conj()),
            (AUX_STREAM2, -solution.w_2[1].conj()),
        ],
    );
    let sys = b.build()?;
    sys.variance("defect")
}

/// Outcome of the three-stage relay strategy for the second-encoded user.
#[derive(Debug, Clone)]
pub struct ThreeStageImprovement {
    pub solution: BeamformerSolution,
    pub q: f64,
    pub q_at_bound: bool,
    /// Rate report of the boosted split stream (dirty-paper base, relay
    /// bonus and penalty).
    pub report: GhfReport,
    /// Rate of the second split stream (encoded last, no relay boost).
    pub stream3_rate: f64,
    /// Power of the reproduction defect at this scenario's noise level.
    pub defect_power: f64,
}

/// Evaluate the second user's relay improvement: solve the beamformer
/// pair, fill the link exactly given `Y2`, and evaluate the dirty-paper
/// quantize-and-forward rate of the boosted stream.
pub fn noninterfered_improvement(
    spec: &ChannelSpec,
    plan: &ThreeStagePlan,
    r0: f64,
) -> Result<ThreeStageImprovement> {
    let solution = solve_relay_beamformer(plan)?;
    let base = build_three_stage_system(spec, plan)?;
    let projected = with_projection(&base, &solution.w_r)?;
    let v = projected.conditional_variance(PROJECTED, &["Y2"])?;
    let solve = solve_distortion(|q| Ok(scalar_quantizer_info(v, q)), r0, DISTORTION_BRACKET)?;
    let sys = with_quantizer(&base, &solution.w_r, solve.q)?;
    let report = ghf_rate_with_side_info(
        &sys,
        &[AUX_STREAM2],
        &[SIDE_INFO],
        &["Y2"],
        &[PROJECTED],
        &[QUANTIZED],
        r0,
    )?;
    let s3 = plan.h_eff[1][2].norm_sqr() * plan.p3;
    let stream3_rate = (1.0 + s3 / spec.noise_power).log2();
    let defect_power = cross_determinism_residual(spec, plan, &solution)?;
    Ok(ThreeStageImprovement {
        solution,
        q: solve.q,
        q_at_bound: solve.at_upper_bound,
        report,
        stream3_rate,
        defect_power,
    })
}

/// No-relay rates of the three streams under successive encoding:
/// stream 1 treats both later streams as noise, stream 2 treats stream 3
/// as noise with stream 1 pre-cancelled, stream 3 is interference free.
pub fn stream_rates_no_relay(spec: &ChannelSpec, plan: &ThreeStagePlan) -> (f64, f64, f64) {
    let n = spec.noise_power;
    let a1 = plan.h_eff[0][0].norm_sqr() * plan.p1;
    let i1 = plan.h_eff[0][1].norm_sqr() * plan.p2 + plan.h_eff[0][2].norm_sqr() * plan.p3;
    let s2 = plan.h_eff[1][1].norm_sqr() * plan.p2;
    let s3 = plan.h_eff[1][2].norm_sqr() * plan.p3;
    (
        (1.0 + a1 / (i1 + n)).log2(),
        (1.0 + s2 / (s3 + n)).log2(),
        (1.0 + s3 / n).log2(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bc::EncodingOrder;
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix2;
    use rand::Rng;
    use rand::SeedableRng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
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

    fn pinned_plan(spec: &ChannelSpec) -> ThreeStagePlan {
        crate::fixtures::pinned_three_stage_plan(spec)
    }

    #[test]
    fn effective_channel_of_user_two() {
        let spec = pinned_spec(1.0);
        let e1 = Vector2::new(Complex64::ONE, Complex64::ZERO);
        let e2 = Vector2::new(Complex64::ZERO, Complex64::ONE);
        let shared = ThreeStagePlan::new(&spec, e1, e2, e2, 5.0, 2.5, 2.5).unwrap();
        assert_eq!(shared.h_eff[1], [c(0.5), c(1.0), c(1.0)]);
    }

    /// With a shared second beam the combiner identity can only reproduce
    /// the user's own observation: the solve succeeds with a zero
    /// auxiliary component and the relay gain collapses.
    #[test]
    fn shared_second_beam_degenerates_the_relay_gain() {
        let spec = pinned_spec(1e-6);
        let e1 = Vector2::new(Complex64::ONE, Complex64::ZERO);
        let e2 = Vector2::new(Complex64::ZERO, Complex64::ONE);
        let shared = ThreeStagePlan::new(&spec, e1, e2, e2, 5.0, 2.5, 2.5).unwrap();
        let sol = solve_relay_beamformer(&shared).unwrap();
        assert!(sol.w_2[1].norm() < 1e-9, "auxiliary weight {}", sol.w_2[1]);
        let out = noninterfered_improvement(&spec, &shared, 1.0).unwrap();
        assert!(out.report.delta.abs() < 1e-3, "delta {}", out.report.delta);
    }

    #[test]
    fn zero_third_power_collapses_to_the_two_stage_scaling() {
        let spec = pinned_spec(1.0);
        let e1 = Vector2::new(Complex64::ONE, Complex64::ZERO);
        let e2 = Vector2::new(Complex64::ZERO, Complex64::ONE);
        let plan = ThreeStagePlan::new(&spec, e1, e2, e2, 5.0, 5.0, 0.0).unwrap();
        let two_stage_k = 5.0 / (5.0 + 1.0);
        assert_abs_diff_eq!(plan.k, two_stage_k, epsilon = 1e-15);
        let sys = build_three_stage_system(&spec, &plan).unwrap();
        assert_abs_diff_eq!(sys.variance(AUX_STREAM3).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn third_auxiliary_converges_to_the_observation_signal_part() {
        let spec = pinned_spec(1e-9);
        let plan = pinned_plan(&spec);
        assert!(plan.l > 1.0 - 1e-6);
        // Coefficients of Utilde_3 approach the signal part of Y2.
        let coeffs = [
            plan.l * plan.h_eff[1][0],
            plan.l * plan.h_eff[1][1],
            plan.h_eff[1][2],
        ];
        for (a, b) in coeffs.iter().zip(plan.h_eff[1].iter()) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn direct_solve_has_negligible_residual() {
        let spec = pinned_spec(1e-3);
        let plan = pinned_plan(&spec);
        let sol = solve_relay_beamformer(&plan).unwrap();
        assert!(sol.residual <= 1e-12, "residual {}", sol.residual);
        assert!(sol.w_r.norm() > 0.0);
    }

    #[test]
    fn relay_columns_equal_to_targets_solve_with_matching_combiners() {
        let spec = pinned_spec(1.0);
        let mut plan = pinned_plan(&spec);
        // g1 = h2_col and g2 = h_hat (conjugated back into row storage).
        let h2 = plan.h2_col();
        for j in 0..3 {
            plan.g_eff[0][j] = h2[j].conj();
            plan.g_eff[1][j] = plan.h_hat[j].conj();
        }
        let sol = solve_relay_beamformer(&plan).unwrap();
        assert!(sol.residual <= 1e-9);
        assert!((sol.w_r - sol.w_2).norm() < 1e-9, "w_2 should equal w_r");
    }

    #[test]
    fn collinear_relay_geometry_is_rank_deficient() {
        let spec = pinned_spec(1.0);
        let mut plan = pinned_plan(&spec);
        let h2 = plan.h2_col();
        for j in 0..3 {
            plan.g_eff[0][j] = (h2[j] * c(0.7)).conj();
            plan.g_eff[1][j] = (h2[j] * c(0.7)).conj();
            plan.h_hat[j] = h2[j] * c(0.2);
        }
        assert!(matches!(
            solve_relay_beamformer(&plan),
            Err(Error::RankDeficient(_))
        ));
        let report = rank_condition_check(&plan);
        assert!(!report.feasible);
    }

    #[test]
    fn random_plans_solve_with_tiny_residual() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut solved = 0;
        for _ in 0..100 {
            let spec = crate::fixtures::random_channel(&mut rng, 1.0);
            let plan = crate::fixtures::random_three_stage_plan(&mut rng, &spec);
            match solve_relay_beamformer(&plan) {
                Ok(sol) => {
                    assert!(sol.residual <= 1e-9, "residual {}", sol.residual);
                    solved += 1;
                }
                Err(Error::RankDeficient(_)) => {}
                Err(other) => panic!("unexpected error {other:?}"),
            }
            let _ = rng.random::<f64>();
        }
        assert!(solved >= 99, "only {solved}/100 draws solved");
    }

    #[test]
    fn random_geometry_is_feasible() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut feasible = 0;
        for _ in 0..200 {
            let spec = crate::fixtures::random_channel(&mut rng, 1.0);
            let plan = crate::fixtures::random_three_stage_plan(&mut rng, &spec);
            if rank_condition_check(&plan).feasible {
                feasible += 1;
            }
        }
        assert!(feasible >= 199, "only {feasible}/200 feasible");
    }

    #[test]
    fn disconnected_relay_fails_the_rank_condition() {
        let mut spec = pinned_spec(1.0);
        spec.g = Matrix2::zeros();
        let plan = pinned_plan(&spec);
        let report = rank_condition_check(&plan);
        assert!(report.rank_unit_second <= 2);
        assert!(report.rank_unit_first <= 2);
        assert!(!report.feasible);
    }

    #[test]
    fn defect_power_scales_linearly_with_noise() {
        let mut ratios = Vec::new();
        for n in [1.0, 1e-3, 1e-6] {
            let spec = pinned_spec(n);
            let plan = pinned_plan(&spec);
            let sol = solve_relay_beamformer(&plan).unwrap();
            let defect = cross_determinism_residual(&spec, &plan, &sol).unwrap();
            ratios.push(defect / n);
        }
        let first = ratios[0];
        for r in &ratios {
            assert!(
                (r - first).abs() <= 1e-6 * first.abs(),
                "defect/noise ratios diverge: {ratios:?}"
            );
        }
    }

    #[test]
    fn perturbed_combiner_leaves_a_noise_independent_floor() {
        let spec = pinned_spec(1e-6);
        let plan = pinned_plan(&spec);
        let mut sol = solve_relay_beamformer(&plan).unwrap();
        sol.w_r[0] += c(1e-3);
        let defect = cross_determinism_residual(&spec, &plan, &sol).unwrap();
        // The signal-part defect dominates the c * N noise term.
        assert!(defect > 1e-7, "defect {defect} should have a floor");
    }

    #[test]
    fn second_user_gains_nearly_the_link_rate_at_high_snr() {
        let spec = pinned_spec(1e-6);
        let plan = pinned_plan(&spec);
        let out = noninterfered_improvement(&spec, &plan, 1.0).unwrap();
        assert!(
            out.report.delta >= 0.95,
            "delta {} too small",
            out.report.delta
        );
        assert!(out.report.penalty <= 0.05);
    }

    #[test]
    fn second_user_gain_is_bounded_at_finite_snr() {
        let spec = pinned_spec(1.0);
        let plan = pinned_plan(&spec);
        let out = noninterfered_improvement(&spec, &plan, 1.0).unwrap();
        assert!(out.report.delta >= -1e-9);
        assert!(out.report.delta <= 1.0 + 1e-9);
    }

    #[test]
    fn zero_link_rate_gives_zero_improvement() {
        let spec = pinned_spec(1.0);
        let plan = pinned_plan(&spec);
        let out = noninterfered_improvement(&spec, &plan, 0.0).unwrap();
        assert_abs_diff_eq!(out.report.delta, 0.0, epsilon = 1e-12);
    }

    /// With a shared beam and successive encoding, the split streams
    /// together recover the two-stage rate for the same total power.
    #[test]
    fn split_streams_match_the_two_stage_rates() {
        let spec = pinned_spec(1.0);
        let two_stage = BeamformingPlan {
            v1: Vector2::new(Complex64::ONE, Complex64::ZERO),
            v2: Vector2::new(Complex64::ZERO, Complex64::ONE),
            p1: 5.0,
            p2: 5.0,
            order: EncodingOrder::User1First,
        };
        let (c1, c2) = crate::bc::dpc_rates_no_relay(&spec, &two_stage).unwrap();
        for split in [0.5, 0.3, 0.9] {
            let plan = ThreeStagePlan::from_two_stage(&spec, &two_stage, split).unwrap();
            let (r1, r2a, r2b) = stream_rates_no_relay(&spec, &plan);
            assert_abs_diff_eq!(r1, c1, epsilon = 1e-7);
            assert_abs_diff_eq!(r2a + r2b, c2, epsilon = 1e-7);
        }
    }

    /// The dirty-paper base of the boosted stream matches the closed-form
    /// stream rate.
    #[test]
    fn dirty_paper_base_matches_the_sinr_formula() {
        let spec = pinned_spec(0.1);
        let plan = pinned_plan(&spec);
        let out = noninterfered_improvement(&spec, &plan, 1.0).unwrap();
        let (_, r2a, _) = stream_rates_no_relay(&spec, &plan);
        assert_abs_diff_eq!(out.report.base, r2a, epsilon = 1e-7);
    }
}
