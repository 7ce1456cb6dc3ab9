//! Mutual-information calculus for jointly circularly-symmetric complex
//! Gaussian variables declared through linear structural equations.
//!
//! A [`GaussianSystem`] is a set of independent zero-mean complex Gaussian
//! sources plus named signals, each a finite linear combination of sources.
//! Covariances are assembled exactly from the structural coefficients, and
//! every information quantity reduces to log-determinant ratios of
//! Hermitian covariance blocks (log base 2, so results are in bits).
//!
//! Degenerate directions (exact linear dependences among the requested
//! signals) are projected out onto the support of the covariance before any
//! factorization, so a variable that is deterministically fixed by the
//! conditioning set contributes exactly zero bits instead of producing a
//! 0/0 log-det ratio. A dependence *between* the two sides of a mutual
//! information (infinite information) is reported as
//! [`Error::SingularCovariance`].

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DMatrixView};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Conditioning-side covariances with condition number above this are
/// treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Eigenvalue threshold below which a direction of a correlation-scaled
/// covariance is considered part of the null space. Every information
/// query rescales its variables to unit variance first (information is
/// invariant under per-variable scaling), so this threshold is absolute.
const SUPPORT_EPS: f64 = 1e-12;

/// Tolerance for the internal Schur-complement vs chain-rule cross-check.
const CROSS_CHECK_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
struct Source {
    name: String,
    variance: f64,
}

#[derive(Debug, Clone)]
struct Signal {
    name: String,
    /// Dense coefficient row over the declared sources.
    row: Vec<Complex64>,
}

/// An immutable jointly Gaussian vector system.
///
/// Construct through [`SystemBuilder`]. Every source is implicitly also a
/// signal (the identity combination), so sources can be referenced directly
/// in information queries.
#[derive(Debug, Clone)]
pub struct GaussianSystem {
    sources: Vec<Source>,
    signals: Vec<Signal>,
    signal_index: BTreeMap<String, usize>,
    groups: BTreeMap<String, Vec<usize>>,
    jitter: bool,
}

/// Builder for [`GaussianSystem`].
#[derive(Debug, Clone, Default)]
pub struct SystemBuilder {
    sources: Vec<Source>,
    signals: Vec<(String, Vec<(String, Complex64)>)>,
    groups: Vec<(String, Vec<String>)>,
    jitter: bool,
}

impl SystemBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declare an independent zero-mean source with the given power.
    pub fn source(&mut self, name: &str, variance: f64) -> &mut Self {
        self.sources.push(Source {
            name: name.to_string(),
            variance,
        });
        self
    }

    /// Declare a signal as a linear combination of previously declared
    /// sources and signals.
    pub fn signal(&mut self, name: &str, terms: &[(&str, Complex64)]) -> &mut Self {
        self.signals.push((
            name.to_string(),
            terms.iter().map(|(s, c)| (s.to_string(), *c)).collect(),
        ));
        self
    }

    /// Declare a named tuple of signals.
    pub fn group(&mut self, name: &str, members: &[&str]) -> &mut Self {
        self.groups.push((
            name.to_string(),
            members.iter().map(|m| m.to_string()).collect(),
        ));
        self
    }

    /// Enable diagonal jitter of magnitude `1e-12 * trace` on every joint
    /// covariance before factorization. Intended for near-singular sweeps
    /// at noise powers at or below 1e-9; results computed with jitter
    /// should be flagged as such in any emitted output.
    pub fn jitter(&mut self, on: bool) -> &mut Self {
        self.jitter = on;
        self
    }

    pub fn build(&self) -> Result<GaussianSystem> {
        let mut seen = BTreeMap::new();
        for s in &self.sources {
            if !s.variance.is_finite() || s.variance < 0.0 {
                return Err(Error::invalid(
                    "source.variance",
                    format!("`{}` must be finite and >= 0, got {}", s.name, s.variance),
                ));
            }
            if seen.insert(s.name.clone(), ()).is_some() {
                return Err(Error::DuplicateName(s.name.clone()));
            }
        }
        let n_src = self.sources.len();
        let mut signals: Vec<Signal> = Vec::with_capacity(n_src + self.signals.len());
        let mut signal_index = BTreeMap::new();
        // Identity signal for each source.
        for (i, s) in self.sources.iter().enumerate() {
            let mut row = vec![Complex64::ZERO; n_src];
            row[i] = Complex64::ONE;
            signal_index.insert(s.name.clone(), signals.len());
            signals.push(Signal {
                name: s.name.clone(),
                row,
            });
        }
        for (name, terms) in &self.signals {
            if seen.insert(name.clone(), ()).is_some() {
                return Err(Error::DuplicateName(name.clone()));
            }
            let mut row = vec![Complex64::ZERO; n_src];
            for (referenced, c) in terms {
                if !c.re.is_finite() || !c.im.is_finite() {
                    return Err(Error::invalid(
                        "signal.coefficient",
                        format!("non-finite coefficient in `{name}`"),
                    ));
                }
                let &idx = signal_index
                    .get(referenced)
                    .ok_or_else(|| Error::UnknownSignal(referenced.clone()))?;
                let base_row = signals[idx].row.clone();
                for (slot, b) in row.iter_mut().zip(base_row) {
                    *slot += c * b;
                }
            }
            signal_index.insert(name.clone(), signals.len());
            signals.push(Signal {
                name: name.clone(),
                row,
            });
        }
        let mut groups = BTreeMap::new();
        for (name, members) in &self.groups {
            if seen.insert(name.clone(), ()).is_some() {
                return Err(Error::DuplicateName(name.clone()));
            }
            let idxs = members
                .iter()
                .map(|m| {
                    signal_index
                        .get(m)
                        .copied()
                        .ok_or_else(|| Error::UnknownSignal(m.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            groups.insert(name.clone(), idxs);
        }
        Ok(GaussianSystem {
            sources: self.sources.clone(),
            signals,
            signal_index,
            groups,
            jitter: self.jitter,
        })
    }
}

impl GaussianSystem {
    /// Reopen the system for extension (declaring further sources/signals).
    pub fn to_builder(&self) -> SystemBuilder {
        let mut b = SystemBuilder::new();
        for s in &self.sources {
            b.source(&s.name, s.variance);
        }
        let n_src = self.sources.len();
        for sig in self.signals.iter().skip(n_src) {
            let terms: Vec<(String, Complex64)> = sig
                .row
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != Complex64::ZERO)
                .map(|(i, c)| (self.sources[i].name.clone(), *c))
                .collect();
            b.signals.push((sig.name.clone(), terms));
        }
        for (name, idxs) in &self.groups {
            b.groups.push((
                name.clone(),
                idxs.iter().map(|&i| self.signals[i].name.clone()).collect(),
            ));
        }
        b.jitter = self.jitter;
        b
    }

    pub fn jitter_enabled(&self) -> bool {
        self.jitter
    }

    pub fn source_variance(&self, name: &str) -> Option<f64> {
        self.source_index(name).map(|i| self.sources[i].variance)
    }

    fn source_index(&self, name: &str) -> Option<usize> {
        self.sources.iter().position(|s| s.name == name)
    }

    /// Resolve a list of signal or group names into signal indices.
    /// Duplicates are preserved in order.
    fn resolve(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for &n in names {
            if let Some(&i) = self.signal_index.get(n) {
                out.push(i);
            } else if let Some(idxs) = self.groups.get(n) {
                out.extend_from_slice(idxs);
            } else {
                return Err(Error::UnknownSignal(n.to_string()));
            }
        }
        Ok(out)
    }

    /// Covariance matrix `K[i][j] = E[X_i X_j^*]` of the named signals,
    /// Hermitian by conjugate-symmetric assembly.
    pub fn covariance(&self, vars: &[&str]) -> Result<DMatrix<Complex64>> {
        let idx = self.resolve(vars)?;
        Ok(self.cov_of(&idx))
    }

    /// Variance (in power units) of a single signal.
    pub fn variance(&self, var: &str) -> Result<f64> {
        let k = self.covariance(&[var])?;
        Ok(k[(0, 0)].re)
    }

    /// Conditional variance of a single signal given a set of signals,
    /// via the Schur complement of the conditioning block.
    pub fn conditional_variance(&self, var: &str, given: &[&str]) -> Result<f64> {
        let iv = self.resolve(&[var])?;
        let ic = self.resolve(given)?;
        if ic.is_empty() {
            return self.variance(var);
        }
        let all: Vec<usize> = iv.iter().chain(ic.iter()).copied().collect();
        let k = self.jittered_cov(&all);
        let v = k[(0, 0)].re;
        if v <= 0.0 {
            return Ok(0.0);
        }
        let (norm, _) = to_correlation(&k);
        let n = norm.nrows();
        let kcc = norm.view((1, 1), (n - 1, n - 1)).into_owned();
        let chol_c = nalgebra::Cholesky::new(kcc).ok_or_else(|| {
            Error::SingularCovariance("conditioning covariance failed Cholesky".into())
        })?;
        let k_vc = norm.view((0, 1), (1, n - 1)).into_owned();
        let k_cv = norm.view((1, 0), (n - 1, 1)).into_owned();
        let solved = chol_c.solve(&k_cv);
        let schur = (norm.view((0, 0), (1, 1)).into_owned() - k_vc * solved)[(0, 0)].re;
        Ok((schur.max(0.0)) * v)
    }

    fn cov_of(&self, idx: &[usize]) -> DMatrix<Complex64> {
        let n = idx.len();
        let mut k = DMatrix::<Complex64>::zeros(n, n);
        for (i, &ii) in idx.iter().enumerate() {
            for (j, &jj) in idx.iter().enumerate().skip(i) {
                let mut acc = Complex64::ZERO;
                let (ri, rj) = (&self.signals[ii].row, &self.signals[jj].row);
                for (s, src) in self.sources.iter().enumerate() {
                    acc += src.variance * ri[s] * rj[s].conj();
                }
                if i == j {
                    k[(i, i)] = Complex64::new(acc.re, 0.0);
                } else {
                    k[(i, j)] = acc;
                    k[(j, i)] = acc.conj();
                }
            }
        }
        k
    }

    fn jittered_cov(&self, idx: &[usize]) -> DMatrix<Complex64> {
        let mut k = self.cov_of(idx);
        if self.jitter {
            let eps = 1e-12 * trace_re(&k);
            for i in 0..k.nrows() {
                k[(i, i)] += Complex64::new(eps, 0.0);
            }
        }
        k
    }

    /// Mutual information `I(A;B)` in bits.
    ///
    /// Evaluates `log2 det K_AA - log2 det (K_AA - K_AB K_BB^-1 K_BA)` with
    /// the inversion applied to whichever side is better conditioned;
    /// symmetric in `A`, `B` within 1e-9 bits.
    pub fn mutual_info(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        let ia = self.resolve(a)?;
        let ib = self.resolve(b)?;
        if ia.is_empty() || ib.is_empty() {
            return Ok(0.0);
        }
        let all: Vec<usize> = ia.iter().chain(ib.iter()).copied().collect();
        let k = self.jittered_cov(&all);
        let (norm, _) = to_correlation(&k);
        mi_split(&norm, ia.len())
    }

    /// Conditional mutual information `I(A;B|C)` in bits.
    ///
    /// Computed two ways and cross-checked internally: (i) by conditioning
    /// the joint covariance on `C` via a Schur complement and applying
    /// [`Self::mutual_info`] arithmetic to the conditional blocks, and (ii)
    /// as the chain-rule difference `I(A;BC) - I(A;C)`. Returns route (i);
    /// raises [`Error::OracleMismatch`] if the routes disagree by more than
    /// 1e-7 bits.
    pub fn cond_mutual_info(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
        let ic = self.resolve(c)?;
        if ic.is_empty() {
            return self.mutual_info(a, b);
        }
        let ia = self.resolve(a)?;
        let ib = self.resolve(b)?;
        if ia.is_empty() || ib.is_empty() {
            return Ok(0.0);
        }
        let (na, nb, nc) = (ia.len(), ib.len(), ic.len());
        let all: Vec<usize> = ia
            .iter()
            .chain(ib.iter())
            .chain(ic.iter())
            .copied()
            .collect();
        let raw = self.jittered_cov(&all);
        let (k, _) = to_correlation(&raw);
        let nab = na + nb;

        // Route (i): condition every variable on C, then mutual information
        // on the conditional covariance blocks.
        let kcc = k.view((nab, nab), (nc, nc)).into_owned();
        let eig = hermitian_eigen(&kcc);
        let lmax = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
        let lmin = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if lmin <= SUPPORT_EPS || lmax / lmin > CONDITION_LIMIT {
            return Err(Error::SingularCovariance(format!(
                "conditioning covariance is singular (scaled eigenvalues in [{lmin:.3e}, {lmax:.3e}])"
            )));
        }
        let chol_c = nalgebra::Cholesky::new(kcc).ok_or_else(|| {
            Error::SingularCovariance("conditioning covariance failed Cholesky".into())
        })?;
        let k_ab_c = k.view((0, nab), (nab, nc)).into_owned();
        let k_c_ab = k.view((nab, 0), (nc, nab)).into_owned();
        let solved = chol_c.solve(&k_c_ab);
        let mut cond_cov = k.view((0, 0), (nab, nab)).into_owned() - k_ab_c * solved;
        hermitianize(&mut cond_cov);
        let i_schur = mi_split(&cond_cov, na)?;

        // Route (ii): chain-rule difference on the same joint covariance.
        let i_a_bc = mi_split(&k, na)?;
        let ac_idx: Vec<usize> = (0..na).chain(nab..nab + nc).collect();
        let k_ac = select_square(&k, &ac_idx);
        let i_a_c = mi_split(&k_ac, na)?;
        let i_chain = i_a_bc - i_a_c;

        if (i_schur - i_chain).abs() > CROSS_CHECK_TOL {
            return Err(Error::OracleMismatch {
                route_schur: i_schur,
                route_chain: i_chain,
                tol: CROSS_CHECK_TOL,
            });
        }
        Ok(i_schur)
    }
}

fn trace_re(k: &DMatrix<Complex64>) -> f64 {
    (0..k.nrows()).map(|i| k[(i, i)].re).sum()
}

/// Rescale a covariance to unit diagonal. Zero-variance variables keep
/// scale one (their rows are identically zero, so they land in the null
/// space of their block). Returns the scaled matrix and the scales.
fn to_correlation(k: &DMatrix<Complex64>) -> (DMatrix<Complex64>, Vec<f64>) {
    let n = k.nrows();
    let scales: Vec<f64> = (0..n)
        .map(|i| {
            let v = k[(i, i)].re;
            if v > 0.0 {
                v.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = k[(i, j)] / (scales[i] * scales[j]);
        }
    }
    hermitianize(&mut out);
    (out, scales)
}

fn hermitianize(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

fn select_square(k: &DMatrix<Complex64>, idx: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| k[(idx[i], idx[j])])
}

fn hermitian_eigen(m: &DMatrix<Complex64>) -> nalgebra::SymmetricEigen<Complex64, nalgebra::Dyn> {
    nalgebra::SymmetricEigen::new(m.clone())
}

/// Basis of the numerical support (eigenvectors with eigenvalue above
/// [`SUPPORT_EPS`]) together with the retained eigenvalues. Expects a
/// correlation-scaled input.
fn support_basis(m: &DMatrix<Complex64>) -> (DMatrix<Complex64>, Vec<f64>) {
    let eig = hermitian_eigen(m);
    let keep: Vec<usize> = (0..m.nrows())
        .filter(|&i| eig.eigenvalues[i] > SUPPORT_EPS)
        .collect();
    let basis = DMatrix::from_fn(m.nrows(), keep.len(), |i, j| eig.eigenvectors[(i, keep[j])]);
    let vals = keep.iter().map(|&i| eig.eigenvalues[i]).collect();
    (basis, vals)
}

/// `log2 det` of a Hermitian positive definite matrix via Cholesky.
fn log2_det(m: &DMatrix<Complex64>, what: &str) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let chol = nalgebra::Cholesky::new(m.clone()).ok_or_else(|| {
        Error::SingularCovariance(format!("{what} failed Cholesky factorization"))
    })?;
    let l = chol.l();
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        let d = l[(i, i)].re;
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::SingularCovariance(format!(
                "{what} has nonpositive Cholesky pivot"
            )));
        }
        acc += d.log2();
    }
    Ok(2.0 * acc)
}

/// Mutual information between the first `na` rows of `k` and the rest.
/// `k` must be correlation scaled (unit or zero diagonal).
fn mi_split(k: &DMatrix<Complex64>, na: usize) -> Result<f64> {
    let n = k.nrows();
    let kaa = k.view((0, 0), (na, na));
    let kbb = k.view((na, na), (n - na, n - na));
    let kab = k.view((0, na), (na, n - na));
    mi_from_parts(kaa, kab, kbb)
}

fn mi_from_parts(
    kaa: DMatrixView<Complex64>,
    kab: DMatrixView<Complex64>,
    kbb: DMatrixView<Complex64>,
) -> Result<f64> {
    let (ua, la) = support_basis(&kaa.into_owned());
    let (ub, lb) = support_basis(&kbb.into_owned());
    if ua.ncols() == 0 || ub.ncols() == 0 {
        // A side that is deterministic (zero covariance on its support)
        // carries no information.
        return Ok(0.0);
    }
    let mut ka = ua.adjoint() * kaa * &ua;
    let mut kb = ub.adjoint() * kbb * &ub;
    hermitianize(&mut ka);
    hermitianize(&mut kb);
    let kab_r = ua.adjoint() * kab * &ub;

    let cond_of = |vals: &[f64]| {
        let mx = vals.iter().cloned().fold(0.0_f64, f64::max);
        let mn = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        mx / mn
    };
    let (cond_a, cond_b) = (cond_of(&la), cond_of(&lb));

    let compute = |kx: &DMatrix<Complex64>,
                   kxy: &DMatrix<Complex64>,
                   ky: &DMatrix<Complex64>|
     -> Result<f64> {
        // I = log2 det Kx - log2 det (Kx - Kxy Ky^-1 Kyx)
        let chol_y = nalgebra::Cholesky::new(ky.clone()).ok_or_else(|| {
            Error::SingularCovariance("conditioning side failed Cholesky".into())
        })?;
        let kyx = kxy.adjoint();
        let solved = chol_y.solve(&kyx);
        let mut schur = kx - kxy * solved;
        hermitianize(&mut schur);
        let ld_x = log2_det(kx, "marginal covariance")?;
        let ld_s = log2_det(&schur, "conditional covariance").map_err(|_| {
            Error::SingularCovariance(
                "deterministic linear dependence between the two sides; \
                 use a reduced representation"
                    .into(),
            )
        })?;
        Ok(ld_x - ld_s)
    };

    if cond_b <= CONDITION_LIMIT {
        compute(&ka, &kab_r, &kb)
    } else if cond_a <= CONDITION_LIMIT {
        compute(&kb, &kab_r.adjoint(), &ka)
    } else {
        Err(Error::SingularCovariance(
            "both marginal covariances are singular".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn covariance_of_duplicated_signal() {
        let mut b = SystemBuilder::new();
        b.source("a", 1.0);
        b.signal("X", &[("a", c(1.0))]);
        let sys = b.build().unwrap();
        let k = sys.covariance(&["X", "X"]).unwrap();
        assert_eq!(k[(0, 0)], c(1.0));
        assert_eq!(k[(0, 1)], c(1.0));
        assert_eq!(k[(1, 0)], c(1.0));
        assert_eq!(k[(1, 1)], c(1.0));
    }

    #[test]
    fn covariance_direct_sum() {
        let mut b = SystemBuilder::new();
        b.source("a", 2.0).source("b", 3.0);
        b.signal("X", &[("a", c(1.0))]);
        b.signal("Y", &[("a", c(1.0)), ("b", c(1.0))]);
        let sys = b.build().unwrap();
        let k = sys.covariance(&["X", "Y"]).unwrap();
        assert_eq!(k[(0, 0)], c(2.0));
        assert_eq!(k[(0, 1)], c(2.0));
        assert_eq!(k[(1, 1)], c(5.0));
    }

    /// Two-user system with unit beams, cross gain 0.5, per-user power 5:
    /// Var(Y1) expands to p1 + 0.25 p2 + N by hand.
    #[test]
    fn covariance_two_user_quadratic_form() {
        let mut b = SystemBuilder::new();
        b.source("U1", 5.0).source("U2", 5.0).source("Z1", 1.0);
        b.signal("Y1", &[("U1", c(1.0)), ("U2", c(0.5)), ("Z1", c(1.0))]);
        let sys = b.build().unwrap();
        assert_abs_diff_eq!(sys.variance("Y1").unwrap(), 7.25, epsilon = 1e-12);
    }

    #[test]
    fn scalar_awgn_capacity() {
        let mut b = SystemBuilder::new();
        b.source("X", 1.0).source("Z", 1.0);
        b.signal("Y", &[("X", c(1.0)), ("Z", c(1.0))]);
        let sys = b.build().unwrap();
        let i = sys.mutual_info(&["X"], &["Y"]).unwrap();
        assert_abs_diff_eq!(i, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn independent_signals_share_nothing() {
        let mut b = SystemBuilder::new();
        b.source("X", 1.0).source("W", 2.5);
        let sys = b.build().unwrap();
        let i = sys.mutual_info(&["X"], &["W"]).unwrap();
        assert_abs_diff_eq!(i, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn interference_channel_log_det_ratio() {
        let mut b = SystemBuilder::new();
        b.source("U1", 5.0).source("U2", 5.0).source("Z1", 1.0);
        b.signal("Y1", &[("U1", c(1.0)), ("U2", c(0.5)), ("Z1", c(1.0))]);
        let sys = b.build().unwrap();
        let i = sys.mutual_info(&["U1"], &["Y1"]).unwrap();
        assert_abs_diff_eq!(i, (7.25_f64 / 2.25).log2(), epsilon = 1e-12);
    }

    fn noise_observing(q: f64) -> GaussianSystem {
        let mut b = SystemBuilder::new();
        b.source("X", 1.0).source("Z", 1.0).source("eta", q);
        b.signal("Y", &[("X", c(1.0)), ("Z", c(1.0))]);
        b.signal("Yr", &[("Z", c(1.0))]);
        b.signal("Yhat", &[("Z", c(1.0)), ("eta", c(1.0))]);
        b.build().unwrap()
    }

    #[test]
    fn conditional_info_through_quantizer() {
        let sys = noise_observing(0.5);
        // Var(Z|Y) = 0.5, so I = log2((0.5 + 0.5)/0.5) = 1 bit.
        let i = sys.cond_mutual_info(&["Yhat"], &["Yr"], &["Y"]).unwrap();
        assert_abs_diff_eq!(i, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn exact_cross_determinism_zeroes_the_penalty() {
        let sys = noise_observing(0.5);
        // Z is a deterministic function of (X, Y).
        let i = sys
            .cond_mutual_info(&["Yhat"], &["Yr"], &["X", "Y"])
            .unwrap();
        assert!(i.abs() < 1e-9, "penalty {i} should vanish");
    }

    #[test]
    fn empty_conditioning_degenerates_to_plain_mi() {
        let sys = noise_observing(0.5);
        let a = sys.cond_mutual_info(&["Yhat"], &["Yr"], &[]).unwrap();
        let b = sys.mutual_info(&["Yhat"], &["Yr"]).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn unknown_name_is_reported() {
        let sys = noise_observing(0.5);
        match sys.mutual_info(&["X"], &["nope"]) {
            Err(Error::UnknownSignal(n)) => assert_eq!(n, "nope"),
            other => panic!("expected UnknownSignal, got {other:?}"),
        }
    }

    #[test]
    fn self_information_is_singular() {
        let sys = noise_observing(0.5);
        assert!(matches!(
            sys.mutual_info(&["X"], &["X"]),
            Err(Error::SingularCovariance(_))
        ));
    }

    #[test]
    fn duplicated_components_project_to_the_same_information() {
        let mut b = SystemBuilder::new();
        b.source("a", 1.0).source("z", 0.3);
        b.signal("X", &[("a", c(1.0))]);
        b.signal("Y", &[("a", c(1.0)), ("z", c(1.0))]);
        let sys = b.build().unwrap();
        let plain = sys.mutual_info(&["X"], &["Y"]).unwrap();
        let doubled = sys.mutual_info(&["X", "X"], &["Y", "Y"]).unwrap();
        assert_abs_diff_eq!(plain, doubled, epsilon = 1e-9);
    }

    #[test]
    fn chain_rule_on_a_fixed_system() {
        let mut b = SystemBuilder::new();
        b.source("u", 2.0).source("v", 1.0).source("z", 0.5);
        b.signal("A", &[("u", c(1.0)), ("v", Complex64::new(0.2, 0.4))]);
        b.signal("B", &[("v", c(1.0)), ("z", c(1.0))]);
        b.signal("C", &[("u", Complex64::new(0.0, 1.0)), ("z", c(2.0))]);
        let sys = b.build().unwrap();
        let lhs = sys.mutual_info(&["A"], &["B", "C"]).unwrap();
        let rhs = sys.mutual_info(&["A"], &["C"]).unwrap()
            + sys.cond_mutual_info(&["A"], &["B"], &["C"]).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-7);
    }

    #[test]
    fn group_names_expand_to_members() {
        let mut b = SystemBuilder::new();
        b.source("a", 1.0).source("z1", 0.1).source("z2", 0.1);
        b.signal("R1", &[("a", c(1.0)), ("z1", c(1.0))]);
        b.signal("R2", &[("a", c(0.5)), ("z2", c(1.0))]);
        b.group("R", &["R1", "R2"]);
        let sys = b.build().unwrap();
        let via_group = sys.mutual_info(&["a"], &["R"]).unwrap();
        let via_list = sys.mutual_info(&["a"], &["R1", "R2"]).unwrap();
        assert_abs_diff_eq!(via_group, via_list, epsilon = 1e-12);
    }

    #[test]
    fn scaling_a_signal_row_preserves_information() {
        let mut b = SystemBuilder::new();
        b.source("u", 2.0).source("z", 0.7);
        b.signal("Y", &[("u", c(1.0)), ("z", c(1.0))]);
        b.signal(
            "Ys",
            &[("u", Complex64::new(0.0, -3.0)), ("z", Complex64::new(0.0, -3.0))],
        );
        let sys = b.build().unwrap();
        let i1 = sys.mutual_info(&["u"], &["Y"]).unwrap();
        let i2 = sys.mutual_info(&["u"], &["Ys"]).unwrap();
        assert_abs_diff_eq!(i1, i2, epsilon = 1e-9);
    }
}
