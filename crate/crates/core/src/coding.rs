//! Channel-coding exponent ingredients for the separation schemes:
//! the expurgated exponent `E_x`, the special-message exponent `E_sp`, and
//! its threshold interval `(-theta_L, theta_U)`.
//!
//! An [`InputDesign`] is a joint law `P_{SX}` where `S` shares the channel
//! input alphabet and `S - X - Y` is Markov.

use crate::error::{Error, Result};
use crate::legendre::{loglik_scores, MixedLogMgf, ScoredPmf};
use crate::optimize::{bisect_monotone, maximize_1d, maximize_on_simplices, SimplexSearch};
use crate::prob::{kl, Channel, JointPmf, Pmf};

/// Largest `rho` examined by the expurgated-exponent search.
pub const RHO_MAX: f64 = 1e4;
const RHO_GRID: usize = 41;

#[derive(Debug, Clone, PartialEq)]
pub struct InputDesign {
    joint: JointPmf,
}

impl InputDesign {
    pub fn new(joint: JointPmf) -> Result<Self> {
        if joint.nrows() != joint.ncols() {
            return Err(Error::AlphabetMismatch(format!(
                "design is {}x{}; S and X must share the input alphabet",
                joint.nrows(),
                joint.ncols()
            )));
        }
        Ok(InputDesign { joint })
    }

    /// Row-major `P_{SX}(s, x)` over `n * n` cells.
    pub fn from_probs(n: usize, probs: Vec<f64>) -> Result<Self> {
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        InputDesign::new(JointPmf::new(labels.clone(), labels, probs)?)
    }

    /// `P_S` and `P_{X|S}` given separately.
    pub fn from_parts(p_s: &Pmf, p_x_given_s: &Channel) -> Result<Self> {
        InputDesign::new(p_x_given_s.joint(p_s)?)
    }

    /// `S` uniform and `X = S`.
    pub fn deterministic(n: usize) -> Self {
        let mut probs = vec![0.0; n * n];
        for s in 0..n {
            probs[s * n + s] = 1.0 / n as f64;
        }
        InputDesign::from_probs(n, probs).expect("valid design")
    }

    /// `S` uniform and `X` uniform independent of `S`.
    pub fn uniform(n: usize) -> Self {
        InputDesign::from_probs(n, vec![1.0 / (n * n) as f64; n * n]).expect("valid design")
    }

    pub fn size(&self) -> usize {
        self.joint.nrows()
    }

    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    pub fn p_s(&self) -> Pmf {
        self.joint.row_marginal()
    }

    pub fn p_x_given_s(&self) -> Channel {
        self.joint.conditional_cols_given_rows()
    }

    fn check(&self, ch: &Channel) -> Result<()> {
        if self.size() != ch.num_inputs() {
            return Err(Error::AlphabetMismatch(format!(
                "design over {} symbols vs channel with {} inputs",
                self.size(),
                ch.num_inputs()
            )));
        }
        Ok(())
    }

    /// `P_{Y|S=s}` for every `s`.
    pub fn output_given_s(&self, ch: &Channel) -> Result<Vec<Pmf>> {
        self.check(ch)?;
        let cond = self.p_x_given_s();
        cond.rows()
            .iter()
            .map(|row| Pmf::new(ch.output_labels().to_vec(), ch.output_dist(row.probs())))
            .collect()
    }

    /// `w(x, x~) = sum_s P_S(s) P(x|s) P(x~|s)`, row-major.
    pub fn pair_weights(&self) -> Vec<f64> {
        let n = self.size();
        let p_s = self.p_s();
        let cond = self.p_x_given_s();
        let mut w = vec![0.0; n * n];
        for (s, &ps) in p_s.probs().iter().enumerate() {
            if ps == 0.0 {
                continue;
            }
            let r = cond.row(s).probs();
            for a in 0..n {
                for b in 0..n {
                    w[a * n + b] += ps * r[a] * r[b];
                }
            }
        }
        w
    }
}

/// Bhattacharyya coefficients `B(x, x~) = sum_y sqrt(P(y|x) P(y|x~))`, row-major.
pub fn bhattacharyya(ch: &Channel) -> Vec<f64> {
    let n = ch.num_inputs();
    let mut out = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            out[a * n + b] = if a == b {
                1.0
            } else {
                ch.row(a).probs().iter().zip(ch.row(b).probs()).map(|(p, q)| (p * q).sqrt()).sum()
            };
        }
    }
    out
}

/// Weighted Bhattacharyya kernel for one design.
#[derive(Debug, Clone)]
struct Kernel {
    /// `(w, ln B)` for pairs with `w > 0` and `B > 0`.
    terms: Vec<(f64, f64)>,
    /// Total weight on pairs with `B > 0`.
    mass: f64,
}

impl Kernel {
    fn new(design: &InputDesign, ch: &Channel) -> Self {
        let b = bhattacharyya(ch);
        let terms: Vec<(f64, f64)> = design
            .pair_weights()
            .into_iter()
            .zip(b)
            .filter(|&(w, b)| w > 0.0 && b > 0.0)
            .map(|(w, b)| (w, b.min(1.0).ln()))
            .collect();
        let mass = terms.iter().map(|t| t.0).sum();
        Kernel { terms, mass }
    }

    fn objective(&self, r: f64, rho: f64) -> f64 {
        let k: f64 = self.terms.iter().map(|&(w, lb)| w * (lb / rho).exp()).sum();
        -rho * r - rho * k.ln()
    }

    /// Limit of the objective as `rho -> inf`, when it is finite.
    fn limit(&self, r: f64) -> Option<f64> {
        let excess = r + self.mass.ln();
        if excess.abs() > 1e-15 {
            return None;
        }
        Some(-self.terms.iter().map(|&(w, lb)| w * lb).sum::<f64>() / self.mass)
    }
}

/// Objective of the expurgated exponent at a fixed `rho >= 1`.
pub fn expurgated_objective(r: f64, design: &InputDesign, ch: &Channel, rho: f64) -> Result<f64> {
    design.check(ch)?;
    Ok(Kernel::new(design, ch).objective(r, rho))
}

/// `E_x(R, P_SX)`: the maximum over `rho >= 1` of the expurgated objective.
///
/// The objective is concave in `rho`. Its behaviour as `rho -> inf` is
/// decided analytically from the mass `m` on pairs with nonzero
/// Bhattacharyya coefficient: `R < -ln m` diverges to `+inf`, `R = -ln m`
/// approaches a finite limit from below, and `R > -ln m` eventually
/// decreases. Otherwise a log-spaced grid on `[1, RHO_MAX]` is refined by
/// golden section.
pub fn expurgated_exponent(r: f64, design: &InputDesign, ch: &Channel) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain { what: "R", value: r, lo: 0.0, hi: f64::INFINITY });
    }
    design.check(ch)?;
    let kernel = Kernel::new(design, ch);
    if kernel.mass <= 0.0 || r < -kernel.mass.ln() - 1e-15 {
        return Ok(f64::INFINITY);
    }
    let g = |t: f64| kernel.objective(r, t.exp());
    let t_max = RHO_MAX.ln();
    let grid: Vec<f64> = (0..RHO_GRID).map(|i| t_max * i as f64 / (RHO_GRID - 1) as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| g(t)).collect();
    let best = (0..RHO_GRID).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(RHO_GRID - 1)];
    let mut value = maximize_1d(g, lo, hi, 1e-10).value.max(vals[best]);
    if let Some(lim) = kernel.limit(r) {
        value = value.max(lim);
    }
    Ok(value)
}

/// Closed form `-ln(4p(1-p))/4` of the zero-rate expurgated exponent of a BSC.
pub fn bsc_expurgated_zero_rate(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain { what: "p", value: p, lo: 0.0, hi: 1.0 });
    }
    if p == 0.0 || p == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-0.25 * (4.0 * p * (1.0 - p)).ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignOptimum {
    pub design: InputDesign,
    pub value: f64,
    pub grid_resolution: u32,
}

/// Maximizes `value(design)` over all designs for the channel's input size.
pub fn maximize_over_designs<F>(ch: &Channel, search: &SimplexSearch, value: F) -> Result<DesignOptimum>
where
    F: Fn(&InputDesign) -> f64 + Sync,
{
    let n = ch.num_inputs();
    search.check_alphabet(n)?;
    let opt = maximize_on_simplices(
        |p| match InputDesign::from_probs(n, p[0].clone()) {
            Ok(d) => value(&d),
            Err(_) => f64::NEG_INFINITY,
        },
        &[n * n],
        search,
    );
    let design = InputDesign::from_probs(n, opt.point[0].clone())?;
    Ok(DesignOptimum { design, value: opt.value, grid_resolution: opt.grid_resolution })
}

/// `max_{P_SX} E_x(R, P_SX)`.
pub fn max_expurgated_exponent(r: f64, ch: &Channel, search: &SimplexSearch) -> Result<DesignOptimum> {
    design_check_rate(r)?;
    maximize_over_designs(ch, search, |d| expurgated_exponent(r, d, ch).unwrap_or(f64::NEG_INFINITY))
}

fn design_check_rate(r: f64) -> Result<()> {
    if r >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain { what: "R", value: r, lo: 0.0, hi: f64::INFINITY })
    }
}

/// `(theta_L, theta_U)`: `sum_s P_S(s) D(P_{Y|S=s} || P_{Y|X=s})` and the
/// reverse divergence.
pub fn theta_bounds(design: &InputDesign, ch: &Channel) -> Result<(f64, f64)> {
    ch.require_absolutely_continuous()?;
    let outs = design.output_given_s(ch)?;
    let (mut lo, mut hi) = (0.0, 0.0);
    for (s, &ps) in design.p_s().probs().iter().enumerate() {
        if ps > 0.0 {
            lo += ps * kl(outs[s].probs(), ch.row(s).probs());
            hi += ps * kl(ch.row(s).probs(), outs[s].probs());
        }
    }
    Ok((lo, hi))
}

/// Special-message exponent machinery for a fixed design.
///
/// The log-MGF is the `P_S`-weighted sum over `s` of the log-MGFs of
/// `log(P_{Y|X=s} / P_{Y|S=s})` under `P_{Y|S=s}`.
#[derive(Debug, Clone)]
pub struct SpecialMessage {
    mgf: MixedLogMgf,
    theta_l: f64,
    theta_u: f64,
}

impl SpecialMessage {
    pub fn new(design: &InputDesign, ch: &Channel) -> Result<Self> {
        let (theta_l, theta_u) = theta_bounds(design, ch)?;
        let outs = design.output_given_s(ch)?;
        let parts: Vec<(f64, ScoredPmf)> = design
            .p_s()
            .probs()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(s, &w)| Ok((w, loglik_scores(&outs[s], ch.row(s))?)))
            .collect::<Result<_>>()?;
        let mgf = MixedLogMgf::new(parts.iter().map(|(w, sp)| (*w, sp)))?;
        Ok(SpecialMessage { mgf, theta_l, theta_u })
    }

    /// `[-theta_L, theta_U]`.
    pub fn interval(&self) -> (f64, f64) {
        (-self.theta_l, self.theta_u)
    }

    pub fn exponent(&self, theta: f64) -> Result<f64> {
        let (lo, hi) = self.interval();
        if !(theta >= lo && theta <= hi) {
            return Err(Error::Domain { what: "theta", value: theta, lo, hi });
        }
        Ok(self.mgf.conjugate(theta).value)
    }

    /// Smallest `theta` in the interval with `E_sp(theta) >= kappa`, or
    /// `None` when `kappa` exceeds `theta_U` (the largest value on it).
    pub fn threshold_for(&self, kappa: f64) -> Option<f64> {
        let (lo, hi) = self.interval();
        if kappa <= 0.0 {
            return Some(lo);
        }
        if kappa > hi {
            return None;
        }
        if kappa == hi {
            return Some(hi);
        }
        bisect_monotone(|t| self.mgf.conjugate(t).value - kappa, lo, hi, 1e-12).ok()
    }
}

/// `E_sp(P_SX, theta)` on the closed interval `[-theta_L, theta_U]`.
pub fn special_message_exponent(design: &InputDesign, ch: &Channel, theta: f64) -> Result<f64> {
    SpecialMessage::new(design, ch)?.exponent(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bsc(p: f64) -> Channel {
        Channel::bsc(p).unwrap()
    }

    fn grid_conjugate(psi: impl Fn(f64) -> f64, theta: f64) -> f64 {
        (0..=400_000)
            .map(|i| {
                let l = -20.0 + i as f64 * 1e-4;
                theta * l - psi(l)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn bsc_zero_rate_closed_form() {
        assert!((bsc_expurgated_zero_rate(0.35).unwrap() - 0.0236).abs() < 5e-5);
        assert_eq!(bsc_expurgated_zero_rate(0.5).unwrap(), 0.0);
        assert!((bsc_expurgated_zero_rate(0.1).unwrap() + 0.25 * 0.36f64.ln()).abs() < 1e-15);
        assert!((bsc_expurgated_zero_rate(0.1).unwrap() - 0.2554).abs() < 1e-4);
        assert_eq!(bsc_expurgated_zero_rate(0.0).unwrap(), f64::INFINITY);
        assert_eq!(bsc_expurgated_zero_rate(1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn uniform_design_attains_bsc_zero_rate() {
        for p in [0.1, 0.25, 0.35] {
            let v = expurgated_exponent(0.0, &InputDesign::uniform(2), &bsc(p)).unwrap();
            assert!((v - bsc_expurgated_zero_rate(p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn design_maximum_matches_closed_form() {
        for p in [0.1, 0.25, 0.35] {
            let opt = max_expurgated_exponent(0.0, &bsc(p), &SimplexSearch::default()).unwrap();
            assert!((opt.value - bsc_expurgated_zero_rate(p).unwrap()).abs() < 2e-3, "p={p}: {}", opt.value);
        }
    }

    #[test]
    fn identical_rows_give_zero() {
        let ch = Channel::from_rows(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        assert_eq!(expurgated_exponent(0.0, &InputDesign::uniform(2), &ch).unwrap(), 0.0);
    }

    #[test]
    fn identity_channel_diverges_below_ln2() {
        let ch = Channel::identity(2);
        let d = InputDesign::uniform(2);
        // Oracle: objective is rho (ln 2 - R), growing without bound.
        let vals: Vec<f64> = [1.0, 10.0, 100.0].iter().map(|&r| expurgated_objective(0.1, &d, &ch, r).unwrap()).collect();
        for (v, rho) in vals.iter().zip([1.0, 10.0, 100.0]) {
            assert!((v - rho * (2f64.ln() - 0.1)).abs() < 1e-12);
        }
        assert_eq!(expurgated_exponent(0.1, &d, &ch).unwrap(), f64::INFINITY);
        // Above ln 2 the maximum sits at rho = 1.
        let v = expurgated_exponent(0.8, &d, &ch).unwrap();
        assert!((v - (2f64.ln() - 0.8)).abs() < 1e-9);
    }

    #[test]
    fn expurgated_non_increasing_in_rate() {
        let ch = Channel::from_rows(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.6, 0.3], vec![0.2, 0.2, 0.6]]).unwrap();
        let d = InputDesign::from_probs(3, vec![0.2, 0.1, 0.0, 0.05, 0.25, 0.05, 0.1, 0.0, 0.25]).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..60 {
            let v = expurgated_exponent(0.02 * i as f64, &d, &ch).unwrap();
            assert!(v <= prev + 1e-12, "R={} {v} > {prev}", 0.02 * i as f64);
            prev = v;
        }
    }

    #[test]
    fn expurgated_dominates_rho_samples() {
        let ch = bsc(0.2);
        let d = InputDesign::from_probs(2, vec![0.3, 0.2, 0.1, 0.4]).unwrap();
        for r in [0.0, 0.01, 0.05, 0.2] {
            let v = expurgated_exponent(r, &d, &ch).unwrap();
            for rho in [1.0, 1.5, 3.0, 10.0, 100.0, 1e4] {
                assert!(v >= expurgated_objective(r, &d, &ch, rho).unwrap() - 1e-12);
            }
        }
    }

    #[test]
    fn theta_bounds_examples() {
        let ch = bsc(0.35);
        assert_eq!(theta_bounds(&InputDesign::deterministic(2), &ch).unwrap(), (0.0, 0.0));
        let same = Channel::from_rows(vec![vec![0.4, 0.6], vec![0.4, 0.6]]).unwrap();
        let (lo, hi) = theta_bounds(&InputDesign::uniform(2), &same).unwrap();
        assert!(lo.abs() < 1e-15 && hi.abs() < 1e-15);

        // S uniform, X = S w.p. 0.9: P_{Y|S=0} = (0.9*0.65 + 0.1*0.35, ...).
        let d = InputDesign::from_probs(2, vec![0.45, 0.05, 0.05, 0.45]).unwrap();
        let a = 0.9 * 0.65 + 0.1 * 0.35;
        let ys: [f64; 2] = [a, 1.0 - a];
        let yx = [0.65f64, 0.35];
        let want_l: f64 = ys.iter().zip(&yx).map(|(p, q)| p * (p / q).ln()).sum();
        let want_u: f64 = yx.iter().zip(&ys).map(|(p, q)| p * (p / q).ln()).sum();
        let (lo, hi) = theta_bounds(&d, &ch).unwrap();
        assert!((lo - want_l).abs() < 1e-15 && (hi - want_u).abs() < 1e-15);
    }

    #[test]
    fn special_message_endpoints_and_grid() {
        let ch = bsc(0.35);
        let d = InputDesign::from_probs(2, vec![0.35, 0.15, 0.1, 0.4]).unwrap();
        let sm = SpecialMessage::new(&d, &ch).unwrap();
        let (lo, hi) = sm.interval();
        assert!(sm.exponent(lo).unwrap().abs() < 1e-6);
        assert!((sm.exponent(hi).unwrap() - hi).abs() < 1e-6);
        assert!(sm.exponent(hi + 1e-3).is_err());

        // Grid oracle on the P_S-weighted log-MGF.
        let outs = d.output_given_s(&ch).unwrap();
        let ps = d.p_s();
        let comps: Vec<ScoredPmf> = (0..2).map(|s| loglik_scores(&outs[s], ch.row(s)).unwrap()).collect();
        let psi = |l: f64| (0..2).map(|s| ps.probs()[s] * comps[s].log_mgf(l)).sum::<f64>();
        let theta = 0.3 * lo + 0.7 * hi;
        let got = sm.exponent(theta).unwrap();
        assert!((got - grid_conjugate(psi, theta)).abs() < 1e-6);
    }

    #[test]
    fn threshold_inverts_exponent() {
        let ch = bsc(0.2);
        let d = InputDesign::from_probs(2, vec![0.4, 0.1, 0.15, 0.35]).unwrap();
        let sm = SpecialMessage::new(&d, &ch).unwrap();
        let (lo, hi) = sm.interval();
        assert_eq!(sm.threshold_for(0.0), Some(lo));
        assert_eq!(sm.threshold_for(hi + 1e-6), None);
        let k = 0.4 * hi;
        let t = sm.threshold_for(k).unwrap();
        assert!((sm.exponent(t).unwrap() - k).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn special_message_convex_nonnegative(
            raw in proptest::collection::vec(0.01f64..1.0, 4),
            p in 0.05f64..0.45,
        ) {
            let total: f64 = raw.iter().sum();
            let d = InputDesign::from_probs(2, raw.iter().map(|x| x / total).collect()).unwrap();
            let sm = SpecialMessage::new(&d, &bsc(p)).unwrap();
            let (lo, hi) = sm.interval();
            prop_assert!(sm.exponent(lo).unwrap().abs() < 1e-6);
            prop_assert!((sm.exponent(hi).unwrap() - hi).abs() < 1e-6);
            let pts: Vec<f64> = (0..=10).map(|i| (lo + (hi - lo) * i as f64 / 10.0).clamp(lo, hi)).collect();
            let vals: Vec<f64> = pts.iter().map(|&t| sm.exponent(t).unwrap()).collect();
            for v in &vals {
                prop_assert!(*v >= -1e-12);
            }
            for i in 1..10 {
                prop_assert!(vals[i] <= 0.5 * (vals[i - 1] + vals[i + 1]) + 1e-9);
            }
        }

        #[test]
        fn expurgated_rate_monotone(
            raw in proptest::collection::vec(0.01f64..1.0, 4),
            p in 0.05f64..0.45,
            r1 in 0.0f64..0.5,
            dr in 0.0f64..0.5,
        ) {
            let total: f64 = raw.iter().sum();
            let d = InputDesign::from_probs(2, raw.iter().map(|x| x / total).collect()).unwrap();
            let a = expurgated_exponent(r1, &d, &bsc(p)).unwrap();
            let b = expurgated_exponent(r1 + dr, &d, &bsc(p)).unwrap();
            prop_assert!(b <= a + 1e-10);
        }
    }
}
