//! Log-moment-generating functions of finite random variables and their
//! Legendre–Fenchel conjugates.
//!
//! A [`ScoredPmf`] is a pair `(P, f)`; its log-MGF is
//! `psi(lambda) = log sum_z P(z) exp(lambda f(z))` and its conjugate is
//! `psi*(theta) = sup_lambda theta lambda - psi(lambda)`.
//!
//! [`MixedLogMgf`] is a non-negative combination `sum_i w_i psi_i`. This is the
//! per-letter log-MGF of a sum of independent, non-identically distributed
//! scores whose empirical mix of letter types is `w`; its conjugate gives the
//! exponent of such a sum. A single `ScoredPmf` is the one-component case.
//!
//! Scores may be `+inf` or `-inf`. An atom with score `-inf` gets zero tilt
//! weight for `lambda > 0` and forces `psi = +inf` for `lambda < 0`
//! (symmetrically for `+inf`); atoms of zero probability never matter.

use crate::error::{Error, Result};
use crate::optimize::bisect_monotone;
use crate::prob::Pmf;

/// Residual tolerance on `psi'(lambda) = theta` inside the conjugate.
pub const CONJUGATE_TOL: f64 = 1e-10;
/// Largest `|lambda|` explored before the boundary formula is used.
pub const LAMBDA_CAP: f64 = 1e6;

/// A PMF paired with an extended-real score per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPmf {
    base: Pmf,
    scores: Vec<f64>,
}

impl ScoredPmf {
    pub fn new(base: Pmf, scores: Vec<f64>) -> Result<Self> {
        if scores.len() != base.len() {
            return Err(Error::Input(format!(
                "{} scores for an alphabet of {} symbols",
                scores.len(),
                base.len()
            )));
        }
        if let Some(i) = scores.iter().position(|s| s.is_nan()) {
            return Err(Error::Input(format!("score {i} is NaN")));
        }
        Ok(ScoredPmf { base, scores })
    }

    pub fn base(&self) -> &Pmf {
        &self.base
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Same scores under a different base PMF on the same alphabet.
    pub fn rebased(&self, base: Pmf) -> Result<Self> {
        if base.alphabet() != self.base.alphabet() {
            return Err(Error::AlphabetMismatch("rebased scored pmf".into()));
        }
        ScoredPmf::new(base, self.scores.clone())
    }

    pub fn log_mgf(&self, lambda: f64) -> f64 {
        Component::new(&self.base, &self.scores).psi(lambda)
    }

    pub fn tilted_mean(&self, lambda: f64) -> f64 {
        Component::new(&self.base, &self.scores).dpsi(lambda, Side::Exact)
    }

    /// `E_P[f]`.
    pub fn mean(&self) -> f64 {
        self.tilted_mean(0.0)
    }

    pub fn conjugate(&self, theta: f64) -> ConjugateResult {
        MixedLogMgf::single(self.clone()).conjugate(theta)
    }

    pub fn to_mixture(&self) -> MixedLogMgf {
        MixedLogMgf::single(self.clone())
    }
}

/// `base = P`, scores `log(Q(z)/P(z))`.
///
/// Symbols with `P(z) > 0 = Q(z)` score `-inf`; symbols with
/// `P(z) = 0 < Q(z)` score `+inf` (they carry no base mass).
pub fn loglik_scores(p: &Pmf, q: &Pmf) -> Result<ScoredPmf> {
    if p.alphabet() != q.alphabet() {
        return Err(Error::AlphabetMismatch(format!("{:?} vs {:?}", p.alphabet(), q.alphabet())));
    }
    let scores = p.probs().iter().zip(q.probs()).map(|(&a, &b)| loglik(a, b)).collect();
    ScoredPmf::new(p.clone(), scores)
}

/// `log(num/den)` with the support conventions used for likelihood ratios.
pub fn loglik(den: f64, num: f64) -> f64 {
    match (den > 0.0, num > 0.0) {
        (true, true) => (num / den).ln(),
        (true, false) => f64::NEG_INFINITY,
        (false, true) => f64::INFINITY,
        (false, false) => 0.0,
    }
}

/// Where the supremum defining the conjugate is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Maximizer {
    Finite(f64),
    NegInfinity,
    PosInfinity,
}

impl Maximizer {
    pub fn value(&self) -> f64 {
        match self {
            Maximizer::Finite(l) => *l,
            Maximizer::NegInfinity => f64::NEG_INFINITY,
            Maximizer::PosInfinity => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateResult {
    pub value: f64,
    pub maximizer: Maximizer,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Exact,
    Below,
    Above,
}

/// Borrowed view of one scored PMF, split into finite and infinite atoms.
#[derive(Debug, Clone)]
struct Component {
    probs: Vec<f64>,
    scores: Vec<f64>,
    neg_inf_mass: f64,
    pos_inf_mass: f64,
}

impl Component {
    fn new(base: &Pmf, scores: &[f64]) -> Self {
        let mut c = Component { probs: Vec::new(), scores: Vec::new(), neg_inf_mass: 0.0, pos_inf_mass: 0.0 };
        for (&p, &f) in base.probs().iter().zip(scores) {
            if p <= 0.0 {
                continue;
            }
            if f == f64::NEG_INFINITY {
                c.neg_inf_mass += p;
            } else if f == f64::INFINITY {
                c.pos_inf_mass += p;
            } else {
                c.probs.push(p);
                c.scores.push(f);
            }
        }
        c
    }

    /// `log sum p e^{lambda f}` over finite atoms.
    fn finite_lse(&self, lambda: f64) -> f64 {
        if self.probs.is_empty() {
            return f64::NEG_INFINITY;
        }
        let m = self
            .probs
            .iter()
            .zip(&self.scores)
            .map(|(p, f)| p.ln() + lambda * f)
            .fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = self.probs.iter().zip(&self.scores).map(|(p, f)| (p.ln() + lambda * f - m).exp()).sum();
        m + s.ln()
    }

    fn psi(&self, lambda: f64) -> f64 {
        if lambda == 0.0 {
            return 0.0;
        }
        if (lambda > 0.0 && self.pos_inf_mass > 0.0) || (lambda < 0.0 && self.neg_inf_mass > 0.0) {
            return f64::INFINITY;
        }
        self.finite_lse(lambda)
    }

    fn tilted_mean_finite(&self, lambda: f64) -> f64 {
        if self.probs.is_empty() {
            return f64::NAN;
        }
        let m = self
            .probs
            .iter()
            .zip(&self.scores)
            .map(|(p, f)| p.ln() + lambda * f)
            .fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for (p, f) in self.probs.iter().zip(&self.scores) {
            let w = (p.ln() + lambda * f - m).exp();
            num += w * f;
            den += w;
        }
        num / den
    }

    fn dpsi(&self, lambda: f64, side: Side) -> f64 {
        let effective = if lambda != 0.0 {
            if lambda > 0.0 { Side::Above } else { Side::Below }
        } else {
            side
        };
        match effective {
            Side::Exact => {
                if self.neg_inf_mass > 0.0 && self.pos_inf_mass > 0.0 {
                    f64::NAN
                } else if self.neg_inf_mass > 0.0 {
                    f64::NEG_INFINITY
                } else if self.pos_inf_mass > 0.0 {
                    f64::INFINITY
                } else {
                    self.tilted_mean_finite(0.0)
                }
            }
            Side::Above => {
                if self.pos_inf_mass > 0.0 {
                    f64::INFINITY
                } else {
                    self.tilted_mean_finite(lambda)
                }
            }
            Side::Below => {
                if self.neg_inf_mass > 0.0 {
                    f64::NEG_INFINITY
                } else {
                    self.tilted_mean_finite(lambda)
                }
            }
        }
    }

    fn min_score(&self) -> f64 {
        self.scores.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn max_score(&self) -> f64 {
        self.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `log P(f = min f)` over finite atoms.
    fn log_mass_at(&self, target: f64) -> f64 {
        self.probs
            .iter()
            .zip(&self.scores)
            .filter(|(_, &f)| f == target)
            .map(|(p, _)| p)
            .sum::<f64>()
            .ln()
    }
}

/// Non-negative combination of log-MGFs, `psi(lambda) = sum_i w_i psi_i(lambda)`.
#[derive(Debug, Clone)]
pub struct MixedLogMgf {
    parts: Vec<(f64, Component)>,
}

impl MixedLogMgf {
    pub fn single(sp: ScoredPmf) -> Self {
        MixedLogMgf { parts: vec![(1.0, Component::new(&sp.base, &sp.scores))] }
    }

    /// Components with zero weight are dropped.
    pub fn new<'a, I>(parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, &'a ScoredPmf)>,
    {
        let mut out = Vec::new();
        for (w, sp) in parts {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Input(format!("mixture weight {w} is not a finite non-negative number")));
            }
            if w > 0.0 {
                out.push((w, Component::new(&sp.base, &sp.scores)));
            }
        }
        Ok(MixedLogMgf { parts: out })
    }

    pub fn log_mgf(&self, lambda: f64) -> f64 {
        let mut total = 0.0;
        for (w, c) in &self.parts {
            total += w * c.psi(lambda);
        }
        total
    }

    pub fn tilted_mean(&self, lambda: f64) -> f64 {
        self.dpsi(lambda, Side::Exact)
    }

    /// `psi'(0)`, the mean of the mixed score.
    pub fn mean(&self) -> f64 {
        self.tilted_mean(0.0)
    }

    fn dpsi(&self, lambda: f64, side: Side) -> f64 {
        self.parts.iter().map(|(w, c)| w * c.dpsi(lambda, side)).sum()
    }

    fn has_neg_inf(&self) -> bool {
        self.parts.iter().any(|(_, c)| c.neg_inf_mass > 0.0)
    }

    fn has_pos_inf(&self) -> bool {
        self.parts.iter().any(|(_, c)| c.pos_inf_mass > 0.0)
    }

    /// `sum_i w_i min f_i` and `sum_i w_i max f_i` over finite atoms.
    pub fn score_range(&self) -> (f64, f64) {
        let lo = self.parts.iter().map(|(w, c)| w * c.min_score()).sum();
        let hi = self.parts.iter().map(|(w, c)| w * c.max_score()).sum();
        (lo, hi)
    }

    /// `sup_lambda theta lambda - psi(lambda)`.
    ///
    /// Inside the range of `psi'` the maximizer solves `psi'(lambda) = theta`
    /// by bisection; at or beyond the ends of that range the limiting value is
    /// returned in closed form.
    pub fn conjugate(&self, theta: f64) -> ConjugateResult {
        if self.parts.is_empty() {
            // psi == 0
            let value = if theta == 0.0 { 0.0 } else { f64::INFINITY };
            return ConjugateResult { value, maximizer: Maximizer::Finite(0.0), converged: true };
        }
        let lam_lo_closed = self.has_neg_inf();
        let lam_hi_closed = self.has_pos_inf();
        if lam_lo_closed && lam_hi_closed {
            // psi = +inf off zero.
            return ConjugateResult { value: 0.0, maximizer: Maximizer::Finite(0.0), converged: true };
        }
        if self.parts.iter().any(|(_, c)| c.probs.is_empty()) {
            // A component with all its mass on infinite scores: psi = -inf on
            // one side, so the supremum is unbounded.
            return ConjugateResult { value: f64::INFINITY, maximizer: Maximizer::Finite(0.0), converged: true };
        }

        // Limits of psi' at the two ends of the open domain.
        let d_lo = if lam_lo_closed { self.dpsi(0.0, Side::Above) } else { self.score_range().0 };
        let d_hi = if lam_hi_closed { self.dpsi(0.0, Side::Below) } else { self.score_range().1 };

        if theta <= d_lo {
            return self.lower_boundary(theta, d_lo, lam_lo_closed);
        }
        if theta >= d_hi {
            return self.upper_boundary(theta, d_hi, lam_hi_closed);
        }

        // Bracket: grow geometrically from [-1, 1] within the domain.
        let g_at = |l: f64, side: Side| self.dpsi(l, side) - theta;
        let g = |l: f64| {
            if l == 0.0 && lam_lo_closed {
                g_at(0.0, Side::Above)
            } else if l == 0.0 && lam_hi_closed {
                g_at(0.0, Side::Below)
            } else {
                g_at(l, Side::Exact)
            }
        };
        let mut lo = if lam_lo_closed { 0.0 } else { -1.0 };
        let mut hi = if lam_hi_closed { 0.0 } else { 1.0 };
        while g(lo) > 0.0 {
            if lo <= -LAMBDA_CAP {
                return self.lower_boundary(theta, d_lo, false);
            }
            hi = lo;
            lo *= 2.0;
        }
        while g(hi) < 0.0 {
            if hi >= LAMBDA_CAP {
                return self.upper_boundary(theta, d_hi, false);
            }
            lo = hi;
            hi *= 2.0;
        }
        let lambda = match bisect_monotone(g, lo, hi, CONJUGATE_TOL) {
            Ok(l) => l,
            Err(_) => {
                return ConjugateResult { value: f64::NAN, maximizer: Maximizer::Finite(f64::NAN), converged: false }
            }
        };
        let value = if lambda == 0.0 {
            if lam_lo_closed {
                -self.psi_limit_at_zero(Side::Above)
            } else if lam_hi_closed {
                -self.psi_limit_at_zero(Side::Below)
            } else {
                0.0
            }
        } else {
            theta * lambda - self.log_mgf(lambda)
        };
        let converged = g(lambda).abs() <= 1e-8;
        ConjugateResult { value: value.max(0.0), maximizer: Maximizer::Finite(lambda), converged }
    }

    /// `lim psi(lambda)` as `lambda -> 0` from one side: the log of the mass
    /// that keeps a finite score on that side.
    fn psi_limit_at_zero(&self, side: Side) -> f64 {
        self.parts
            .iter()
            .map(|(w, c)| {
                let m = match side {
                    Side::Above => 1.0 - c.neg_inf_mass,
                    _ => 1.0 - c.pos_inf_mass,
                };
                w * m.ln()
            })
            .sum()
    }

    fn lower_boundary(&self, theta: f64, d_lo: f64, closed_at_zero: bool) -> ConjugateResult {
        if closed_at_zero {
            // Supremum approached as lambda -> 0+; theta lambda vanishes.
            let value = (-self.psi_limit_at_zero(Side::Above)).max(0.0);
            return ConjugateResult { value, maximizer: Maximizer::Finite(0.0), converged: true };
        }
        // lambda -> -inf: theta lambda - psi(lambda) ~ lambda (theta - d_lo)
        //                 - sum_i w_i log P_i(argmin f_i).
        let value = if theta < d_lo {
            f64::INFINITY
        } else {
            -self.parts.iter().map(|(w, c)| w * c.log_mass_at(c.min_score())).sum::<f64>()
        };
        ConjugateResult { value: value.max(0.0), maximizer: Maximizer::NegInfinity, converged: true }
    }

    fn upper_boundary(&self, theta: f64, d_hi: f64, closed_at_zero: bool) -> ConjugateResult {
        if closed_at_zero {
            let value = (-self.psi_limit_at_zero(Side::Below)).max(0.0);
            return ConjugateResult { value, maximizer: Maximizer::Finite(0.0), converged: true };
        }
        let value = if theta > d_hi {
            f64::INFINITY
        } else {
            -self.parts.iter().map(|(w, c)| w * c.log_mass_at(c.max_score())).sum::<f64>()
        };
        ConjugateResult { value: value.max(0.0), maximizer: Maximizer::PosInfinity, converged: true }
    }
}
