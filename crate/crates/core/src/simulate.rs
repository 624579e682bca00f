//! Monte Carlo estimates of the error probabilities of the Neyman–Pearson
//! test (direct testing) and of the two-codeword remote scheme, plus a
//! log-linear fit of the empirical exponents.
//!
//! Only counts matter to both tests, so each trial draws multinomial symbol
//! counts instead of full sequences. This has the same law as drawing the
//! symbols one by one.
//!
//! Every trial owns a ChaCha stream keyed by `(seed, n, trial, hypothesis)`,
//! so the output does not depend on how trials are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::legendre::loglik;
use crate::prob::{kl, Channel, Pmf};
use crate::regions::{channel_log_mgf, ChannelPairLaw, DirectPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Hypothesis {
    H0,
    H1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    blocklengths: Vec<usize>,
    trials: u64,
    seed: u64,
}

impl SimConfig {
    pub fn new(blocklengths: Vec<usize>, trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::Input("trials must be at least 1".into()));
        }
        if blocklengths.is_empty() || blocklengths[0] == 0 {
            return Err(Error::Input("blocklengths must be non-empty and positive".into()));
        }
        if blocklengths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input("blocklengths must be strictly increasing".into()));
        }
        Ok(SimConfig { blocklengths, trials, seed })
    }

    pub fn blocklengths(&self) -> &[usize] {
        &self.blocklengths
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Error counts at one blocklength.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRow {
    pub n: usize,
    pub trials: u64,
    pub alpha_errors: u64,
    pub beta_errors: u64,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    /// Realized joint type of the two codewords, row-major counts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_counts: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub rows: Vec<SimRow>,
}

impl SimReport {
    pub fn alpha_fit(&self) -> Result<SlopeFit> {
        let (ns, rates): (Vec<_>, Vec<_>) = self.rows.iter().map(|r| (r.n, r.alpha_hat)).unzip();
        fit_exponent(&ns, &rates)
    }

    pub fn beta_fit(&self) -> Result<SlopeFit> {
        let (ns, rates): (Vec<_>, Vec<_>) = self.rows.iter().map(|r| (r.n, r.beta_hat)).unzip();
        fit_exponent(&ns, &rates)
    }
}

/// Least-squares line `-log(rate) = intercept + slope * n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub points_used: usize,
    /// Some rates were zero and were left out.
    pub censored: bool,
}

pub fn fit_exponent(ns: &[usize], rates: &[f64]) -> Result<SlopeFit> {
    if ns.len() != rates.len() {
        return Err(Error::Input(format!("{} blocklengths but {} rates", ns.len(), rates.len())));
    }
    if let Some(r) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::Input(format!("error rate {r} outside [0, 1]")));
    }
    let pts: Vec<(f64, f64)> =
        ns.iter().zip(rates).filter(|(_, &r)| r > 0.0).map(|(&n, &r)| (n as f64, -r.ln())).collect();
    if pts.len() < 3 {
        return Err(Error::Estimation(format!(
            "{} of {} error rates are positive; at least 3 are needed",
            pts.len(),
            rates.len()
        )));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(SlopeFit {
        slope,
        intercept,
        std_error: (ssr / (m - 2.0) / sxx).sqrt(),
        residual: (ssr / m).sqrt(),
        points_used: pts.len(),
        censored: pts.len() < rates.len(),
    })
}

/// Sums integer tallies against a fixed score list, grouping equal scores
/// first so that symmetric scores cancel exactly and ties stay ties.
#[derive(Debug, Clone)]
struct Scorer {
    values: Vec<f64>,
    slot: Vec<usize>,
}

impl Scorer {
    fn new(scores: &[f64]) -> Self {
        let mut values: Vec<f64> = scores.to_vec();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let slot = scores.iter().map(|s| values.iter().position(|v| v == s).unwrap()).collect();
        Scorer { values, slot }
    }

    fn statistic(&self, counts: &[u64]) -> f64 {
        let mut grouped = vec![0u64; self.values.len()];
        for (&c, &k) in counts.iter().zip(&self.slot) {
            grouped[k] += c;
        }
        grouped.iter().zip(&self.values).filter(|(&c, _)| c > 0).map(|(&c, &v)| c as f64 * v).sum()
    }
}

fn decide(statistic: f64, n: usize, theta: f64) -> Hypothesis {
    if statistic >= n as f64 * theta {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    }
}

fn source_scores(p: &Pmf, q: &Pmf) -> Result<Vec<f64>> {
    if p.alphabet() != q.alphabet() {
        return Err(Error::AlphabetMismatch("P and Q alphabets differ".into()));
    }
    Ok(p.probs().iter().zip(q.probs()).map(|(&a, &b)| loglik(a, b)).collect())
}

/// Neyman–Pearson decision on a sequence of symbol indices: `H1` iff
/// `sum log(Q(z)/P(z)) >= n theta`.
pub fn np_decide(seq: &[usize], p: &Pmf, q: &Pmf, theta: f64) -> Result<Hypothesis> {
    let scores = source_scores(p, q)?;
    let mut counts = vec![0u64; scores.len()];
    for &z in seq {
        if z >= scores.len() {
            return Err(Error::Input(format!("symbol {z} outside an alphabet of {}", scores.len())));
        }
        if p.probs()[z] == 0.0 && q.probs()[z] == 0.0 {
            return Err(Error::Input(format!("symbol {} has zero probability under both", p.alphabet()[z])));
        }
        counts[z] += 1;
    }
    let stat = Scorer::new(&scores).statistic(&counts);
    if stat.is_nan() {
        return Err(Error::Input("sequence is impossible under both hypotheses".into()));
    }
    Ok(decide(stat, seq.len(), theta))
}

/// Largest-remainder apportionment of `n` over the pairs of `law`, row-major.
/// Equal remainders go to the lexicographically smaller pair.
pub fn pair_counts(law: &ChannelPairLaw, n: usize) -> Vec<usize> {
    let quotas: Vec<f64> = law.probs().iter().map(|&w| w * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..quotas.len()).filter(|&i| law.probs()[i] > 0.0).collect();
    order.sort_by(|&i, &j| (quotas[j] - quotas[j].floor()).total_cmp(&(quotas[i] - quotas[i].floor())).then(i.cmp(&j)));
    for &i in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Codewords `(x~, x')` whose joint type apportions `law`, pairs laid out
/// in lexicographic order.
pub fn build_type_sequences(law: &ChannelPairLaw, n: usize) -> (Vec<usize>, Vec<usize>) {
    let nx = law.num_inputs();
    let (mut xt, mut xp) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for (i, c) in pair_counts(law, n).into_iter().enumerate() {
        xt.extend(std::iter::repeat(i / nx).take(c));
        xp.extend(std::iter::repeat(i % nx).take(c));
    }
    (xt, xp)
}

fn trial_rng(seed: u64, n: usize, trial: u64, tag: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(n as u64).to_le_bytes());
    key[16..24].copy_from_slice(&trial.to_le_bytes());
    key[24..].copy_from_slice(&tag.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Multinomial counts via successive conditional binomials.
fn multinomial<R: Rng>(rng: &mut R, n: u64, probs: &[f64], out: &mut [u64]) {
    out.iter_mut().for_each(|c| *c = 0);
    let Some(last) = probs.iter().rposition(|&p| p > 0.0) else { return };
    let (mut rem, mut mass) = (n, 1.0);
    for i in 0..last {
        if rem == 0 {
            return;
        }
        let p = if mass > 0.0 { (probs[i] / mass).clamp(0.0, 1.0) } else { 0.0 };
        let c = if p >= 1.0 {
            rem
        } else if p <= 0.0 {
            0
        } else {
            Binomial::new(rem, p).expect("valid binomial").sample(rng)
        };
        out[i] = c;
        rem -= c;
        mass -= probs[i];
    }
    out[last] = rem;
}

fn count_errors(trials: u64, err: impl Fn(u64) -> bool + Sync) -> u64 {
    (0..trials).into_par_iter().map(|t| err(t) as u64).sum()
}

fn row(n: usize, trials: u64, alpha_errors: u64, beta_errors: u64, pairs: Option<Vec<usize>>) -> SimRow {
    SimRow {
        n,
        trials,
        alpha_errors,
        beta_errors,
        alpha_hat: alpha_errors as f64 / trials as f64,
        beta_hat: beta_errors as f64 / trials as f64,
        pair_counts: pairs,
    }
}

const TAG_NULL: u64 = 0;
const TAG_ALT: u64 = 1;

/// Error rates of the NP test at threshold `theta`: type I under `P`,
/// type II under `Q`.
pub fn simulate_direct(p: &Pmf, q: &Pmf, theta: f64, cfg: &SimConfig) -> Result<SimReport> {
    let scorer = Scorer::new(&source_scores(p, q)?);
    let k = p.len();
    let run = |n: usize, dist: &Pmf, tag: u64, wrong: Hypothesis| {
        count_errors(cfg.trials, |t| {
            let mut rng = trial_rng(cfg.seed, n, t, tag);
            let mut counts = vec![0u64; k];
            multinomial(&mut rng, n as u64, dist.probs(), &mut counts);
            decide(scorer.statistic(&counts), n, theta) == wrong
        })
    };
    let rows = cfg
        .blocklengths
        .iter()
        .map(|&n| row(n, cfg.trials, run(n, p, TAG_NULL, Hypothesis::H1), run(n, q, TAG_ALT, Hypothesis::H0), None))
        .collect();
    Ok(SimReport { rows })
}

/// Remote scheme: the observer runs the NP test on `u` with `theta0` and
/// sends `x~` (decided `H0`) or `x'` (decided `H1`); the decision maker runs
/// the NP test for `x~` against `x'` on the channel output with `theta1`.
pub fn simulate_rht(
    p_u: &Pmf,
    q_u: &Pmf,
    ch: &Channel,
    theta0: f64,
    theta1: f64,
    law: &ChannelPairLaw,
    cfg: &SimConfig,
) -> Result<SimReport> {
    DirectPair::new(p_u, q_u)?;
    if law.num_inputs() != ch.num_inputs() {
        return Err(Error::AlphabetMismatch("pair law vs channel inputs".into()));
    }
    let src = Scorer::new(&source_scores(p_u, q_u)?);
    let (nx, ny) = (ch.num_inputs(), ch.num_outputs());
    // Channel scores per (pair, output), flattened.
    let mut ch_scores = Vec::with_capacity(nx * nx * ny);
    for a in 0..nx {
        for b in 0..nx {
            ch_scores.extend((0..ny).map(|y| loglik(ch.prob(a, y), ch.prob(b, y))));
        }
    }
    let chs = Scorer::new(&ch_scores);
    let ku = p_u.len();

    let run = |n: usize, pairs: &[usize], dist: &Pmf, tag: u64, wrong: Hypothesis| {
        count_errors(cfg.trials, |t| {
            let mut rng = trial_rng(cfg.seed, n, t, tag);
            let mut u = vec![0u64; ku];
            multinomial(&mut rng, n as u64, dist.probs(), &mut u);
            let local = decide(src.statistic(&u), n, theta0);
            let mut y = vec![0u64; nx * nx * ny];
            for (i, &m) in pairs.iter().enumerate().filter(|(_, &m)| m > 0) {
                let sent = if local == Hypothesis::H0 { i / nx } else { i % nx };
                multinomial(&mut rng, m as u64, ch.row(sent).probs(), &mut y[i * ny..(i + 1) * ny]);
            }
            decide(chs.statistic(&y), n, theta1) == wrong
        })
    };
    let rows = cfg
        .blocklengths
        .iter()
        .map(|&n| {
            let pairs = pair_counts(law, n);
            let a = run(n, &pairs, p_u, TAG_NULL, Hypothesis::H1);
            let b = run(n, &pairs, q_u, TAG_ALT, Hypothesis::H0);
            row(n, cfg.trials, a, b, Some(pairs))
        })
        .collect();
    Ok(SimReport { rows })
}

/// Exponent pair `(psi*(theta), psi*(theta) - theta)` of the NP test.
pub fn direct_prediction(p: &Pmf, q: &Pmf, theta: f64) -> Result<(f64, f64)> {
    let pt = DirectPair::new(p, q)?.point(theta)?;
    Ok((pt.kappa_alpha, pt.kappa_beta))
}

/// Exponents of the remote scheme and of its two stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaPrediction {
    pub zeta0: f64,
    pub zeta1: f64,
    pub source: (f64, f64),
    pub channel: (f64, f64),
}

/// Analytic exponents of [`simulate_rht`]'s scheme. Channels with
/// non-overlapping rows are allowed; their channel stage may be infinite.
pub fn rht_prediction(
    p_u: &Pmf,
    q_u: &Pmf,
    ch: &Channel,
    theta0: f64,
    theta1: f64,
    law: &ChannelPairLaw,
) -> Result<ZetaPrediction> {
    let source = direct_prediction(p_u, q_u, theta0)?;
    let mgf = channel_log_mgf(ch, law)?;
    let (mut d_min, mut d_max) = (0.0, 0.0);
    for (a, b, w) in law.support() {
        d_min += w * kl(ch.row(a).probs(), ch.row(b).probs());
        d_max += w * kl(ch.row(b).probs(), ch.row(a).probs());
    }
    if !(theta1 > -d_min && theta1 < d_max) {
        return Err(Error::Domain { what: "theta1", value: theta1, lo: -d_min, hi: d_max });
    }
    let a = mgf.conjugate(theta1).value;
    let channel = (a, (a - theta1).max(0.0));
    Ok(ZetaPrediction { zeta0: source.0.min(channel.0), zeta1: source.1.min(channel.1), source, channel })
}

/// One `gamma = exp(-n theta)` instance of the weighted-sum lower bound
/// `alpha + gamma beta >= P_P(log(P/Q) <= log gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConverseRow {
    pub theta: f64,
    pub gamma: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Three combined binomial standard errors.
    pub slack: f64,
    pub holds: bool,
}

fn std_err(p: f64, trials: f64) -> f64 {
    (p.max(1.0 / trials) * (1.0 - p) / trials).sqrt()
}

/// Checks the weighted-sum bound for the NP rule at `rule_theta` against
/// every `theta` in `thetas`, at blocklength `n`.
pub fn weighted_sum_converse(
    p: &Pmf,
    q: &Pmf,
    rule_theta: f64,
    thetas: &[f64],
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<ConverseRow>> {
    let cfg = SimConfig::new(vec![n], trials, seed)?;
    let scorer = Scorer::new(&source_scores(p, q)?);
    let k = p.len();
    let stats = |dist: &Pmf, tag: u64| -> Vec<f64> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, n, t, tag);
                let mut counts = vec![0u64; k];
                multinomial(&mut rng, n as u64, dist.probs(), &mut counts);
                scorer.statistic(&counts)
            })
            .collect()
    };
    let under_p = stats(p, TAG_NULL);
    let under_q = stats(q, TAG_ALT);
    let tr = trials as f64;
    let frac = |v: &[f64], f: &dyn Fn(f64) -> bool| v.iter().filter(|&&s| f(s)).count() as f64 / tr;
    let alpha = frac(&under_p, &|s| decide(s, n, rule_theta) == Hypothesis::H1);
    let beta = frac(&under_q, &|s| decide(s, n, rule_theta) == Hypothesis::H0);
    Ok(thetas
        .iter()
        .map(|&theta| {
            let gamma = (-(n as f64) * theta).exp();
            let rhs = frac(&under_p, &|s| s >= n as f64 * theta);
            let lhs = alpha + gamma * beta;
            let slack = 3.0
                * (std_err(alpha, tr).powi(2) + (gamma * std_err(beta, tr)).powi(2) + std_err(rhs, tr).powi(2))
                    .sqrt();
            ConverseRow { theta, gamma, lhs, rhs, slack, holds: lhs + slack >= rhs }
        })
        .collect())
}
