//! Reference estimators: alternating least squares and a two-stage
//! LS-plus-rank-one factorisation.
//!
//! Both work on `Y = ΦS` with `S = (Hᵀ⊙G)ᵀ`, i.e. column `j = k·M + m` of `Y`
//! is `Φ·diag(g_m)·h_k = Φ·diag(h_k)·g_m` where `g_m` is row `m` of `G` and
//! `h_k` is column `k` of `H`.

use crate::dims::SystemDims;
use crate::error::{Error, Result};
use crate::estimate::ChannelEstimate;
use crate::linalg::{frob2, rel_frob_diff, CMat, C64, ZERO};
use crate::model::{build_signal_matrix, ChannelPair, RisPhaseMatrix};
use crate::rng::{complex_normal_matrix, seeded};
use nalgebra::Cholesky;

/// Ridge used when a normal matrix is not numerically positive definite,
/// relative to its mean diagonal.
const FORCED_RIDGE_REL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub ridge: f64,
    pub beta_cap: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            max_iterations: 30,
            tolerance: 1e-3,
            ridge: 0.0,
            beta_cap: 1e12,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !(self.ridge >= 0.0) || !self.ridge.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "ridge must be finite and ≥ 0, got {}",
                self.ridge
            )));
        }
        if !(self.beta_cap > 0.0) {
            return Err(Error::InvalidConfig("beta_cap must be positive".into()));
        }
        Ok(())
    }
}

fn check_shapes(y: &CMat, phase: &RisPhaseMatrix, dims: &SystemDims) -> Result<()> {
    if phase.l() != dims.l() || phase.n() != dims.n() {
        return Err(Error::Shape {
            what: "phase matrix (L×N)",
            expected: (dims.l(), dims.n()),
            actual: (phase.l(), phase.n()),
        });
    }
    if y.shape() != (dims.l(), dims.j()) {
        return Err(Error::Shape {
            what: "observations Y (L×J)",
            expected: (dims.l(), dims.j()),
            actual: y.shape(),
        });
    }
    Ok(())
}

/// Solves `(a + ridge·I)·x = b` for Hermitian PSD `a`. Falls back to a
/// forced ridge when the Cholesky factorisation fails.
fn solve_hermitian(
    a: &CMat,
    b: &CMat,
    ridge: f64,
    diagnostics: &mut Vec<String>,
    what: &str,
) -> CMat {
    let n = a.nrows();
    let mut lhs = a.clone();
    for i in 0..n {
        lhs[(i, i)] += C64::new(ridge, 0.0);
    }
    if let Some(ch) = Cholesky::new(lhs.clone()) {
        return ch.solve(b);
    }
    let scale = (0..n).map(|i| a[(i, i)].re.abs()).sum::<f64>() / n.max(1) as f64;
    let forced = (FORCED_RIDGE_REL * scale.max(f64::MIN_POSITIVE)).max(ridge);
    diagnostics.push(format!(
        "{what}: normal matrix not positive definite, ridge forced to {forced:.3e}"
    ));
    let mut mult = 1.0;
    loop {
        let mut lhs = a.clone();
        for i in 0..n {
            lhs[(i, i)] += C64::new(forced * mult, 0.0);
        }
        if let Some(ch) = Cholesky::new(lhs) {
            return ch.solve(b);
        }
        mult *= 10.0;
        if mult > 1e12 {
            // nothing sensible left; treat as no information
            return CMat::zeros(b.nrows(), b.ncols());
        }
    }
}

fn beta_from_residual(res: f64, count: usize, cap: f64) -> f64 {
    if res > 0.0 {
        (count as f64 / res).min(cap)
    } else {
        cap
    }
}

/// Alternating least squares in resumable form.
pub struct AlsRun<'a> {
    y: &'a CMat,
    phase: &'a RisPhaseMatrix,
    dims: SystemDims,
    cfg: BaselineConfig,
    gram: CMat,
    t: CMat,
    h: CMat,
    g: CMat,
    sweeps: usize,
    converged: bool,
    diagnostics: Vec<String>,
}

impl<'a> AlsRun<'a> {
    pub fn new(
        y: &'a CMat,
        phase: &'a RisPhaseMatrix,
        dims: &SystemDims,
        cfg: &BaselineConfig,
        seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        check_shapes(y, phase, dims)?;
        let phi = phase.matrix();
        let mut rng = seeded(seed);
        let g = complex_normal_matrix(&mut rng, dims.m(), dims.n(), 1.0);
        Ok(Self {
            y,
            phase,
            dims: *dims,
            cfg: cfg.clone(),
            gram: phi.adjoint() * phi,
            t: phi.adjoint() * y,
            h: CMat::zeros(dims.n(), dims.k()),
            g,
            sweeps: 0,
            converged: false,
            diagnostics: Vec::new(),
        })
    }

    pub fn h(&self) -> &CMat {
        &self.h
    }

    pub fn g(&self) -> &CMat {
        &self.g
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// `‖Y − Φ·S(Ĥ, Ĝ)‖_F²`.
    pub fn objective(&self) -> f64 {
        let s = signal(&self.h, &self.g, &self.dims);
        frob2(&(self.y - self.phase.matrix() * s))
    }

    fn solve_h(&mut self) {
        let (k_len, m_len, n_len) = (self.dims.k(), self.dims.m(), self.dims.n());
        let ggram = self.g.adjoint() * &self.g;
        let normal = self.gram.component_mul(&ggram);
        let mut rhs = CMat::zeros(n_len, k_len);
        for k in 0..k_len {
            for n in 0..n_len {
                let mut acc = ZERO;
                for m in 0..m_len {
                    acc += self.g[(m, n)].conj() * self.t[(n, k * m_len + m)];
                }
                rhs[(n, k)] = acc;
            }
        }
        self.h = solve_hermitian(
            &normal,
            &rhs,
            self.cfg.ridge,
            &mut self.diagnostics,
            "H step",
        );
    }

    fn solve_g(&mut self) {
        let (k_len, m_len, n_len) = (self.dims.k(), self.dims.m(), self.dims.n());
        let hgram = (self.h.conjugate() * self.h.transpose()).map(|z| z);
        let normal = self.gram.component_mul(&hgram);
        let mut rhs = CMat::zeros(n_len, m_len);
        for m in 0..m_len {
            for n in 0..n_len {
                let mut acc = ZERO;
                for k in 0..k_len {
                    acc += self.h[(n, k)].conj() * self.t[(n, k * m_len + m)];
                }
                rhs[(n, m)] = acc;
            }
        }
        let sol = solve_hermitian(
            &normal,
            &rhs,
            self.cfg.ridge,
            &mut self.diagnostics,
            "G step",
        );
        self.g = sol.transpose();
    }

    /// One `H` solve followed by one `G` solve. Returns the relative changes.
    pub fn sweep(&mut self) -> (f64, f64) {
        let (h_old, g_old) = (self.h.clone(), self.g.clone());
        self.solve_h();
        self.solve_g();
        self.sweeps += 1;
        let dh = rel_frob_diff(&self.h, &h_old);
        let dg = rel_frob_diff(&self.g, &g_old);
        if dh <= self.cfg.tolerance && dg <= self.cfg.tolerance {
            self.converged = true;
        }
        (dh, dg)
    }

    pub fn run(mut self) -> ChannelEstimate {
        while self.sweeps < self.cfg.max_iterations && !self.converged {
            self.sweep();
        }
        let res = self.objective();
        ChannelEstimate {
            beta_hat: beta_from_residual(res, self.y.len(), self.cfg.beta_cap),
            iterations: self.sweeps,
            converged: self.converged,
            oracle_stop: None,
            diagnostics: self.diagnostics,
            h: self.h,
            g: self.g,
        }
    }
}

fn signal(h: &CMat, g: &CMat, dims: &SystemDims) -> CMat {
    match ChannelPair::new(h.clone(), g.clone()) {
        Ok(pair) => build_signal_matrix(&pair),
        // non-finite iterates; keep the objective meaningful
        Err(_) => CMat::from_element(dims.n(), dims.j(), C64::new(f64::NAN, f64::NAN)),
    }
}

/// Alternating least squares on `Y = Φ·(Hᵀ⊙G)ᵀ`, starting from a random `G`.
pub fn als_estimator(
    y: &CMat,
    phase: &RisPhaseMatrix,
    dims: &SystemDims,
    cfg: &BaselineConfig,
    seed: u64,
) -> Result<ChannelEstimate> {
    Ok(AlsRun::new(y, phase, dims, cfg, seed)?.run())
}

/// Dominant singular triplet of `x` split symmetrically: returns `(u, v)`
/// with `x ≈ u·vᵀ`. A zero matrix gives zeros.
pub fn rank1_factor(x: &CMat) -> (Vec<C64>, Vec<C64>) {
    let (rows, cols) = x.shape();
    if frob2(x) == 0.0 {
        return (vec![ZERO; rows], vec![ZERO; cols]);
    }
    let svd = x.clone().svd(true, true);
    let (u, vt) = (svd.u.expect("requested U"), svd.v_t.expect("requested Vᴴ"));
    let (idx, sigma) =
        svd.singular_values
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::MIN),
                |best, (i, s)| if s > best.1 { (i, s) } else { best },
            );
    let root = sigma.sqrt();
    let left = (0..rows).map(|r| u[(r, idx)] * root).collect();
    let right = (0..cols).map(|c| vt[(idx, c)] * root).collect();
    (left, right)
}

/// Plain (or ridge) LS for `S`, then a rank-one split of each row of `Ŝ`.
pub fn ls_rank1_estimator(
    y: &CMat,
    phase: &RisPhaseMatrix,
    dims: &SystemDims,
    cfg: &BaselineConfig,
) -> Result<ChannelEstimate> {
    cfg.validate()?;
    check_shapes(y, phase, dims)?;
    let (k_len, m_len, n_len) = (dims.k(), dims.m(), dims.n());
    let mut diagnostics = Vec::new();
    if dims.l() < n_len {
        if cfg.ridge == 0.0 {
            return Err(Error::Underdetermined {
                l: dims.l(),
                n: n_len,
            });
        }
        diagnostics.push(format!(
            "L = {} < N = {}: S is only ridge-identified (ridge {:.3e})",
            dims.l(),
            n_len,
            cfg.ridge
        ));
    }
    let phi = phase.matrix();
    let s_hat = solve_hermitian(
        &(phi.adjoint() * phi),
        &(phi.adjoint() * y),
        cfg.ridge,
        &mut diagnostics,
        "LS stage",
    );

    let mut h = CMat::zeros(n_len, k_len);
    let mut g = CMat::zeros(m_len, n_len);
    for n in 0..n_len {
        let x = CMat::from_fn(m_len, k_len, |m, k| s_hat[(n, k * m_len + m)]);
        let (gn, hn) = rank1_factor(&x);
        for m in 0..m_len {
            g[(m, n)] = gn[m];
        }
        for k in 0..k_len {
            h[(n, k)] = hn[k];
        }
    }
    let res = frob2(&(y - phi * signal(&h, &g, dims)));
    Ok(ChannelEstimate {
        beta_hat: beta_from_residual(res, y.len(), cfg.beta_cap),
        iterations: 1,
        converged: true,
        oracle_stop: None,
        diagnostics,
        h,
        g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::nmse_with_ambiguity_removal;
    use crate::model::{generate_channels, simulate_observations, PhaseKind};
    use crate::rng::complex_normal;

    fn noiseless(
        dims: &SystemDims,
        kind: PhaseKind,
        seed: u64,
    ) -> (ChannelPair, RisPhaseMatrix, CMat) {
        let ch = generate_channels(dims, seed);
        let phase = crate::model::generate_phase_matrix(dims, kind, seed + 1).unwrap();
        let y = simulate_observations(&ch, &phase, f64::INFINITY, seed + 2).unwrap();
        (ch, phase, y)
    }

    #[test]
    fn ls_rank1_exact_on_invertible_dft() {
        let dims = SystemDims::new(3, 2, 4, 4).unwrap();
        let (ch, phase, y) = noiseless(&dims, PhaseKind::PartialDft, 11);
        let est = ls_rank1_estimator(&y, &phase, &dims, &BaselineConfig::default()).unwrap();
        let (eh, eg) = nmse_with_ambiguity_removal(&ch, &est.channels().unwrap()).unwrap();
        assert!(eh < 1e-10 && eg < 1e-10, "{eh} {eg}");
    }

    #[test]
    fn ls_rank1_requires_ridge_when_short() {
        let dims = SystemDims::new(2, 2, 4, 3).unwrap();
        let (_, phase, y) = noiseless(&dims, PhaseKind::PartialDft, 3);
        let err = ls_rank1_estimator(&y, &phase, &dims, &BaselineConfig::default()).unwrap_err();
        assert_eq!(err, Error::Underdetermined { l: 3, n: 4 });
        let cfg = BaselineConfig {
            ridge: 1e-3,
            ..Default::default()
        };
        let est = ls_rank1_estimator(&y, &phase, &dims, &cfg).unwrap();
        assert!(!est.diagnostics.is_empty());
    }

    #[test]
    fn rank1_zero_and_fixed_point() {
        let (u, v) = rank1_factor(&CMat::zeros(3, 2));
        assert!(u.iter().chain(&v).all(|z| *z == ZERO));

        let a = [C64::new(1.0, 2.0), C64::new(-0.5, 0.1), C64::new(0.0, 3.0)];
        let b = [C64::new(0.3, -1.0), C64::new(2.0, 0.5)];
        let x = CMat::from_fn(3, 2, |r, c| a[r] * b[c]);
        let (u, v) = rank1_factor(&x);
        let back = CMat::from_fn(3, 2, |r, c| u[r] * v[c]);
        assert!((back - &x).norm() < 1e-12 * x.norm());
    }

    #[test]
    fn rank1_beats_random_candidates() {
        let mut rng = seeded(5);
        let x = complex_normal_matrix(&mut rng, 4, 3, 1.0);
        let (u, v) = rank1_factor(&x);
        let best = (CMat::from_fn(4, 3, |r, c| u[r] * v[c]) - &x).norm_squared();
        for _ in 0..200 {
            let a: Vec<C64> = (0..4).map(|_| complex_normal(&mut rng, 1.0)).collect();
            let b: Vec<C64> = (0..3).map(|_| complex_normal(&mut rng, 1.0)).collect();
            let cand = (CMat::from_fn(4, 3, |r, c| a[r] * b[c]) - &x).norm_squared();
            assert!(best <= cand + 1e-12);
        }
    }

    #[test]
    fn als_noiseless_recovery() {
        let dims = SystemDims::new(8, 8, 8, 8).unwrap();
        let (ch, phase, y) = noiseless(&dims, PhaseKind::PartialDft, 21);
        let cfg = BaselineConfig {
            max_iterations: 200,
            tolerance: 1e-12,
            ..Default::default()
        };
        let est = als_estimator(&y, &phase, &dims, &cfg, 4).unwrap();
        let (eh, eg) = nmse_with_ambiguity_removal(&ch, &est.channels().unwrap()).unwrap();
        assert!(eh < 1e-6 && eg < 1e-6, "{eh} {eg}");
    }

    #[test]
    fn als_objective_non_increasing() {
        let dims = SystemDims::new(3, 4, 6, 5).unwrap();
        let ch = generate_channels(&dims, 8);
        let phase = crate::model::generate_phase_matrix(&dims, PhaseKind::PartialDft, 9).unwrap();
        let y = simulate_observations(&ch, &phase, 10.0, 10).unwrap();
        let cfg = BaselineConfig {
            max_iterations: 50,
            ..Default::default()
        };
        let mut run = AlsRun::new(&y, &phase, &dims, &cfg, 1).unwrap();
        run.sweep();
        let mut prev = run.objective();
        for _ in 0..30 {
            run.sweep();
            let cur = run.objective();
            assert!(cur <= prev * (1.0 + 1e-10) + 1e-12, "{cur} > {prev}");
            prev = cur;
        }
    }

    #[test]
    fn als_single_sweep_and_determinism() {
        let dims = SystemDims::new(2, 3, 4, 4).unwrap();
        let (_, phase, y) = noiseless(&dims, PhaseKind::BinaryRandom, 2);
        let cfg = BaselineConfig {
            max_iterations: 1,
            ..Default::default()
        };
        let a = als_estimator(&y, &phase, &dims, &cfg, 77).unwrap();
        assert_eq!(a.iterations, 1);
        let b = als_estimator(&y, &phase, &dims, &cfg, 77).unwrap();
        assert_eq!(a, b);
    }
}
