//! Exact error-exponent regions.
//!
//! * Direct testing of `P` against `Q` from i.i.d. samples: the boundary is
//!   `(psi*(theta), psi*(theta) - theta)` for the log-likelihood score
//!   `log(Q/P)` under `P`, with `theta` in `(-D(P||Q), D(Q||P))`.
//! * Testing two fixed channel input sequences whose joint type tends to a
//!   law `P_{X0X1}`: same form, with the law-weighted log-MGF of the per-pair
//!   scores `log(P(y|x')/P(y|x~))`, on `(-d_min, d_max)`.
//! * Remote testing (observer tests locally, then signals one bit over the
//!   channel): the trade-off is the smaller of the two branches above,
//!   maximized over the pair law.

use crate::error::{Error, Result};
use crate::legendre::{loglik_scores, MixedLogMgf, ScoredPmf};
use crate::optimize::{bisect_monotone, maximize_on_simplices, SimplexSearch};
use crate::prob::{kl, kl_divergence, Channel, JointPmf, Pmf};

/// Tolerance used when inverting a branch `kappa_alpha = psi*(theta)`.
pub const INVERSION_TOL: f64 = 1e-12;

/// An error-exponent pair and the threshold(s) producing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPoint {
    pub kappa_alpha: f64,
    pub kappa_beta: f64,
    pub theta0: f64,
    pub theta1: Option<f64>,
}

/// Boundary of an error-exponent region, ordered by `kappa_alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    pub label: String,
    pub points: Vec<ExponentPoint>,
}

impl TradeoffCurve {
    pub fn new(label: impl Into<String>, mut points: Vec<ExponentPoint>) -> Self {
        points.sort_by(|a, b| a.kappa_alpha.total_cmp(&b.kappa_alpha));
        points.dedup_by(|a, b| a.kappa_alpha == b.kappa_alpha);
        TradeoffCurve { label: label.into(), points }
    }

    /// `kappa_alpha` strictly increasing and `kappa_beta` non-increasing,
    /// allowing `slack` on the latter.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.points.windows(2).all(|w| {
            w[1].kappa_alpha > w[0].kappa_alpha && w[1].kappa_beta <= w[0].kappa_beta + slack
        })
    }
}

/// Joint law of a pair of channel inputs `(X0, X1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPairLaw {
    joint: JointPmf,
}

impl ChannelPairLaw {
    pub fn new(joint: JointPmf) -> Result<Self> {
        if joint.row_labels() != joint.col_labels() {
            return Err(Error::AlphabetMismatch("pair law must be over input x input".into()));
        }
        Ok(ChannelPairLaw { joint })
    }

    /// Row-major probabilities over `nx * nx` pairs.
    pub fn from_probs(nx: usize, probs: Vec<f64>) -> Result<Self> {
        let labels: Vec<String> = (0..nx).map(|i| i.to_string()).collect();
        ChannelPairLaw::new(JointPmf::new(labels.clone(), labels, probs)?)
    }

    pub fn point_mass(nx: usize, a: usize, b: usize) -> Self {
        let mut probs = vec![0.0; nx * nx];
        probs[a * nx + b] = 1.0;
        ChannelPairLaw::from_probs(nx, probs).expect("point mass is a valid law")
    }

    pub fn num_inputs(&self) -> usize {
        self.joint.nrows()
    }

    pub fn probs(&self) -> &[f64] {
        self.joint.probs()
    }

    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    /// Pairs with positive mass, in row-major order.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let nx = self.num_inputs();
        self.probs()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(move |(i, &w)| (i / nx, i % nx, w))
    }
}

fn require_mutual_ac(p: &Pmf, q: &Pmf) -> Result<()> {
    for (i, (&a, &b)) in p.probs().iter().zip(q.probs()).enumerate() {
        if (a > 0.0) != (b > 0.0) {
            return Err(Error::AbsoluteContinuity {
                first: format!("P({})", p.alphabet()[i]),
                second: format!("Q({})", q.alphabet()[i]),
            });
        }
    }
    Ok(())
}

fn check_open(what: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value > lo && value < hi {
        Ok(())
    } else {
        Err(Error::Domain { what, value, lo, hi })
    }
}

/// Direct-testing exponent machinery for a fixed pair `(P, Q)`.
#[derive(Debug, Clone)]
pub struct DirectPair {
    score: ScoredPmf,
    d_pq: f64,
    d_qp: f64,
}

impl DirectPair {
    pub fn new(p: &Pmf, q: &Pmf) -> Result<Self> {
        kl_divergence(p, q)?;
        require_mutual_ac(p, q)?;
        Ok(DirectPair { score: loglik_scores(p, q)?, d_pq: kl(p.probs(), q.probs()), d_qp: kl(q.probs(), p.probs()) })
    }

    /// `(-D(P||Q), D(Q||P))`.
    pub fn interval(&self) -> (f64, f64) {
        (-self.d_pq, self.d_qp)
    }

    pub fn point(&self, theta: f64) -> Result<ExponentPoint> {
        let (lo, hi) = self.interval();
        check_open("theta", theta, lo, hi)?;
        let a = self.score.conjugate(theta).value;
        Ok(ExponentPoint { kappa_alpha: a, kappa_beta: (a - theta).max(0.0), theta0: theta, theta1: None })
    }

    /// Boundary point with the given type-I exponent, clamped to the corners.
    pub fn tradeoff_point(&self, kappa_alpha: f64) -> ExponentPoint {
        let (lo, hi) = self.interval();
        if kappa_alpha <= 0.0 {
            return ExponentPoint { kappa_alpha: 0.0, kappa_beta: self.d_pq, theta0: lo, theta1: None };
        }
        if kappa_alpha >= self.d_qp {
            return ExponentPoint { kappa_alpha, kappa_beta: 0.0, theta0: hi, theta1: None };
        }
        let theta = invert_branch(&self.score.to_mixture(), kappa_alpha, lo, hi);
        ExponentPoint { kappa_alpha, kappa_beta: (kappa_alpha - theta).max(0.0), theta0: theta, theta1: None }
    }
}

/// Solve `psi*(theta) = kappa` for `theta` on the increasing branch `[lo, hi]`.
fn invert_branch(mgf: &MixedLogMgf, kappa: f64, lo: f64, hi: f64) -> f64 {
    bisect_monotone(|t| mgf.conjugate(t).value - kappa, lo, hi, INVERSION_TOL).unwrap_or(hi)
}

pub fn direct_region_point(p: &Pmf, q: &Pmf, theta: f64) -> Result<ExponentPoint> {
    DirectPair::new(p, q)?.point(theta)
}

/// `kappa_beta` on the direct-testing boundary at type-I exponent `kappa_alpha`.
///
/// `kappa_alpha <= 0` gives the Stein value `D(P||Q)`; `kappa_alpha >= D(Q||P)`
/// gives 0.
pub fn direct_tradeoff(p: &Pmf, q: &Pmf, kappa_alpha: f64) -> Result<f64> {
    Ok(DirectPair::new(p, q)?.tradeoff_point(kappa_alpha).kappa_beta)
}

/// Uniform sweep of `theta` over the open interval, `n` interior points.
pub fn direct_curve(p: &Pmf, q: &Pmf, n: usize) -> Result<TradeoffCurve> {
    let pair = DirectPair::new(p, q)?;
    let (lo, hi) = pair.interval();
    let pts = (1..=n)
        .map(|i| pair.point(lo + (hi - lo) * i as f64 / (n + 1) as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(TradeoffCurve::new("direct", pts))
}

/// Law-weighted log-MGF of the channel scores `log(P(y|x')/P(y|x~))` under
/// `P(.|x~)`.
pub fn channel_log_mgf(ch: &Channel, law: &ChannelPairLaw) -> Result<MixedLogMgf> {
    if law.num_inputs() != ch.num_inputs() {
        return Err(Error::AlphabetMismatch("pair law vs channel inputs".into()));
    }
    let parts = law
        .support()
        .map(|(a, b, w)| Ok((w, loglik_scores(ch.row(a), ch.row(b))?)))
        .collect::<Result<Vec<_>>>()?;
    MixedLogMgf::new(parts.iter().map(|(w, s)| (*w, s)))
}

/// `(d_min, d_max)`: law-averaged `D(P(.|X0)||P(.|X1))` and `D(P(.|X1)||P(.|X0))`.
pub fn channel_d_bounds(ch: &Channel, law: &ChannelPairLaw) -> Result<(f64, f64)> {
    ch.require_absolutely_continuous()?;
    if law.num_inputs() != ch.num_inputs() {
        return Err(Error::AlphabetMismatch("pair law vs channel inputs".into()));
    }
    let (mut dmin, mut dmax) = (0.0, 0.0);
    for (a, b, w) in law.support() {
        dmin += w * kl(ch.row(a).probs(), ch.row(b).probs());
        dmax += w * kl(ch.row(b).probs(), ch.row(a).probs());
    }
    Ok((dmin, dmax))
}

/// Channel-testing exponent machinery for a fixed channel and pair law.
#[derive(Debug, Clone)]
pub struct ChannelPair {
    mgf: MixedLogMgf,
    d_min: f64,
    d_max: f64,
}

impl ChannelPair {
    pub fn new(ch: &Channel, law: &ChannelPairLaw) -> Result<Self> {
        let (d_min, d_max) = channel_d_bounds(ch, law)?;
        Ok(ChannelPair { mgf: channel_log_mgf(ch, law)?, d_min, d_max })
    }

    pub fn interval(&self) -> (f64, f64) {
        (-self.d_min, self.d_max)
    }

    pub fn point(&self, theta: f64) -> Result<ExponentPoint> {
        let (lo, hi) = self.interval();
        check_open("theta1", theta, lo, hi)?;
        let a = self.mgf.conjugate(theta).value;
        Ok(ExponentPoint { kappa_alpha: a, kappa_beta: (a - theta).max(0.0), theta0: theta, theta1: None })
    }

    /// `(kappa_beta, theta1)` at type-I exponent `kappa_alpha`.
    pub fn tradeoff(&self, kappa_alpha: f64) -> (f64, f64) {
        let (lo, hi) = self.interval();
        if kappa_alpha <= 0.0 {
            return (self.d_min, lo);
        }
        if kappa_alpha >= self.d_max {
            return (0.0, hi);
        }
        let theta = invert_branch(&self.mgf, kappa_alpha, lo, hi);
        ((kappa_alpha - theta).max(0.0), theta)
    }
}

pub fn channel_region_point(ch: &Channel, law: &ChannelPairLaw, theta: f64) -> Result<ExponentPoint> {
    ChannelPair::new(ch, law)?.point(theta)
}

pub fn channel_curve(ch: &Channel, law: &ChannelPairLaw, n: usize) -> Result<TradeoffCurve> {
    let pair = ChannelPair::new(ch, law)?;
    let (lo, hi) = pair.interval();
    if hi - lo <= 0.0 {
        return Ok(TradeoffCurve::new("channel", Vec::new()));
    }
    let pts = (1..=n)
        .map(|i| pair.point(lo + (hi - lo) * i as f64 / (n + 1) as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(TradeoffCurve::new("channel", pts))
}

/// Largest pairwise row divergence `E_c` and the lexicographically first
/// pair attaining it.
pub fn channel_max_divergence(ch: &Channel) -> Result<(f64, (usize, usize))> {
    ch.require_absolutely_continuous()?;
    let nx = ch.num_inputs();
    let mut best = (0.0, (0, 0));
    for a in 0..nx {
        for b in 0..nx {
            let d = kl(ch.row(a).probs(), ch.row(b).probs());
            if d > best.0 {
                best = (d, (a, b));
            }
        }
    }
    Ok(best)
}

/// `min{D(P_U||Q_U), E_c}`: the remote-testing Stein exponent.
pub fn rht_stein(p_u: &Pmf, q_u: &Pmf, ch: &Channel) -> Result<f64> {
    let d = DirectPair::new(p_u, q_u)?.d_pq;
    Ok(d.min(channel_max_divergence(ch)?.0))
}

/// Search configuration over pair laws `P_{X0X1}`.
pub type LawSearch = SimplexSearch;

/// Best law found for the channel branch at a given `kappa_alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct LawOptimum {
    pub law: Vec<f64>,
    pub kappa_beta: f64,
    pub theta1: f64,
    pub grid_resolution: u32,
}

/// Maximizes the channel branch `kappa_beta` over pair laws.
///
/// Lattice evaluation followed by pattern search from the best lattice
/// points. The value is a lower bound on the supremum over all laws.
pub fn maximize_channel_branch(ch: &Channel, kappa_alpha: f64, search: &LawSearch) -> Result<LawOptimum> {
    ch.require_absolutely_continuous()?;
    let nx = ch.num_inputs();
    search.check_alphabet(nx)?;
    let branch = |w: &[f64]| -> (f64, f64) {
        match ChannelPairLaw::from_probs(nx, w.to_vec()).and_then(|l| ChannelPair::new(ch, &l)) {
            Ok(pair) => pair.tradeoff(kappa_alpha),
            Err(_) => (f64::NEG_INFINITY, f64::NAN),
        }
    };
    let opt = maximize_on_simplices(|p| branch(&p[0]).0, &[nx * nx], search);
    let law = opt.point.into_iter().next().expect("one block");
    let theta1 = branch(&law).1;
    Ok(LawOptimum { law, kappa_beta: opt.value.max(0.0), theta1, grid_resolution: opt.grid_resolution })
}

/// Result of the remote-testing trade-off at one `kappa_alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhtPoint {
    pub kappa_alpha: f64,
    /// `min` of the two branches; a certified lower bound on the exact value
    /// (the law search is finite).
    pub kappa_beta: f64,
    pub source_kappa_beta: f64,
    pub channel_kappa_beta: f64,
    pub theta0: f64,
    pub theta1: f64,
    pub law: Vec<f64>,
    pub grid_resolution: u32,
}

/// Remote-testing trade-off `kappa(kappa_alpha)`.
///
/// Both the local test and the channel test must meet `kappa_alpha`; the
/// type-II exponent is the smaller of the two branch values, and only the
/// channel branch depends on the pair law.
pub fn rht_tradeoff(p_u: &Pmf, q_u: &Pmf, ch: &Channel, kappa_alpha: f64, search: &LawSearch) -> Result<RhtPoint> {
    let source = DirectPair::new(p_u, q_u)?;
    let src = source.tradeoff_point(kappa_alpha);
    let chan = maximize_channel_branch(ch, kappa_alpha, search)?;
    Ok(RhtPoint {
        kappa_alpha,
        kappa_beta: src.kappa_beta.min(chan.kappa_beta),
        source_kappa_beta: src.kappa_beta,
        channel_kappa_beta: chan.kappa_beta,
        theta0: src.theta0,
        theta1: chan.theta1,
        law: chan.law,
        grid_resolution: chan.grid_resolution,
    })
}

pub fn rht_curve(p_u: &Pmf, q_u: &Pmf, ch: &Channel, kappa_grid: &[f64], search: &LawSearch) -> Result<TradeoffCurve> {
    let pts = kappa_grid
        .iter()
        .map(|&k| {
            rht_tradeoff(p_u, q_u, ch, k, search).map(|r| ExponentPoint {
                kappa_alpha: k,
                kappa_beta: r.kappa_beta,
                theta0: r.theta0,
                theta1: Some(r.theta1),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TradeoffCurve::new("rht", pts))
}
