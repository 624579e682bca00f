//! Finite-alphabet probability primitives.
//!
//! All information quantities are in nats. The conventions `0 log(0/q) = 0`
//! and `p log(p/0) = +inf` hold throughout; `f64::INFINITY` is a legitimate
//! return value and propagates through sums.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Tolerance on `sum(p) == 1` for PMFs handed to the constructors.
pub const PMF_TOL: f64 = 1e-12;

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn check_probs(probs: &[f64], what: &str) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::Input(format!("{what}: empty probability vector")));
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::Input(format!("{what}: entry {i} = {p} is not a probability")));
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PMF_TOL {
        return Err(Error::Input(format!("{what}: probabilities sum to {total}, not 1")));
    }
    Ok(())
}

fn check_labels(labels: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::Input(format!("{what}: duplicate label {l:?}")));
        }
    }
    Ok(())
}

/// A probability mass function over a labelled finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    alphabet: Vec<String>,
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(alphabet: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if alphabet.len() != probs.len() {
            return Err(Error::Input(format!(
                "pmf has {} labels but {} probabilities",
                alphabet.len(),
                probs.len()
            )));
        }
        check_labels(&alphabet, "pmf")?;
        check_probs(&probs, "pmf")?;
        Ok(Pmf { alphabet, probs })
    }

    /// PMF over the alphabet `{"0", "1", ...}`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        Pmf::new(default_labels(probs.len()), probs)
    }

    /// Normalizes non-negative weights. This is the only place where
    /// renormalization happens.
    pub fn normalized(alphabet: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Input("weights must be non-negative with positive sum".into()));
        }
        let probs = weights.iter().map(|w| w / total).collect();
        Pmf::new(alphabet, probs)
    }

    pub fn uniform(n: usize) -> Self {
        Pmf { alphabet: default_labels(n), probs: vec![1.0 / n as f64; n] }
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Pmf { alphabet: default_labels(n), probs }
    }

    /// Bernoulli PMF on `{"0", "1"}` with `P(1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Pmf::from_probs(vec![1.0 - p, p])
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.alphabet.iter().position(|l| l == label)
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.probs)
    }

    fn same_alphabet(&self, other: &Pmf) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(format!(
                "{:?} vs {:?}",
                self.alphabet, other.alphabet
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Pmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.probs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Joint PMF of two finite random variables, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    rows: Vec<String>,
    cols: Vec<String>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(rows: Vec<String>, cols: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if rows.len() * cols.len() != probs.len() {
            return Err(Error::Input(format!(
                "joint pmf is {}x{} but has {} entries",
                rows.len(),
                cols.len(),
                probs.len()
            )));
        }
        check_labels(&rows, "joint pmf rows")?;
        check_labels(&cols, "joint pmf columns")?;
        check_probs(&probs, "joint pmf")?;
        Ok(JointPmf { rows, cols, probs })
    }

    pub fn from_matrix(matrix: &[Vec<f64>]) -> Result<Self> {
        let nrows = matrix.len();
        let ncols = matrix.first().map_or(0, Vec::len);
        if matrix.iter().any(|r| r.len() != ncols) {
            return Err(Error::Input("ragged joint pmf matrix".into()));
        }
        JointPmf::new(
            default_labels(nrows),
            default_labels(ncols),
            matrix.iter().flatten().copied().collect(),
        )
    }

    /// `P_X ⊗ P_Y`.
    pub fn product(px: &Pmf, py: &Pmf) -> Self {
        let probs = px
            .probs
            .iter()
            .flat_map(|a| py.probs.iter().map(move |b| a * b))
            .collect();
        JointPmf { rows: px.alphabet.clone(), cols: py.alphabet.clone(), probs }
    }

    /// Builds the joint from a flat probability vector laid out like `self`.
    pub fn with_probs(&self, probs: Vec<f64>) -> Result<Self> {
        JointPmf::new(self.rows.clone(), self.cols.clone(), probs)
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.rows
    }

    pub fn col_labels(&self) -> &[String] {
        &self.cols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.probs[r * self.cols.len() + c]
    }

    pub fn row_marginal(&self) -> Pmf {
        let nc = self.cols.len();
        let probs = self.probs.chunks(nc).map(|row| row.iter().sum()).collect();
        Pmf { alphabet: self.rows.clone(), probs }
    }

    pub fn col_marginal(&self) -> Pmf {
        let nc = self.cols.len();
        let mut probs = vec![0.0; nc];
        for row in self.probs.chunks(nc) {
            for (acc, p) in probs.iter_mut().zip(row) {
                *acc += p;
            }
        }
        Pmf { alphabet: self.cols.clone(), probs }
    }

    pub fn transpose(&self) -> Self {
        let (nr, nc) = (self.rows.len(), self.cols.len());
        let mut probs = vec![0.0; nr * nc];
        for r in 0..nr {
            for c in 0..nc {
                probs[c * nr + r] = self.probs[r * nc + c];
            }
        }
        JointPmf { rows: self.cols.clone(), cols: self.rows.clone(), probs }
    }

    /// Flattened view as a PMF over `"row,col"` labels.
    pub fn flatten(&self) -> Pmf {
        let alphabet = self
            .rows
            .iter()
            .flat_map(|r| self.cols.iter().map(move |c| format!("{r},{c}")))
            .collect();
        Pmf { alphabet, probs: self.probs.clone() }
    }

    /// Conditional law of the column variable given the row variable.
    /// Rows with zero marginal mass are filled with the column marginal.
    pub fn conditional_cols_given_rows(&self) -> Channel {
        let nc = self.cols.len();
        let fallback = self.col_marginal();
        let rows = self
            .probs
            .chunks(nc)
            .map(|row| {
                let total: f64 = row.iter().sum();
                if total > 0.0 {
                    Pmf { alphabet: self.cols.clone(), probs: row.iter().map(|p| p / total).collect() }
                } else {
                    fallback.clone()
                }
            })
            .collect();
        Channel { inputs: self.rows.clone(), outputs: self.cols.clone(), rows }
    }

    pub fn is_product(&self, tol: f64) -> bool {
        let prod = JointPmf::product(&self.row_marginal(), &self.col_marginal());
        self.probs.iter().zip(&prod.probs).all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// A discrete memoryless channel: one output PMF per input symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    inputs: Vec<String>,
    outputs: Vec<String>,
    rows: Vec<Pmf>,
}

impl Channel {
    pub fn new(inputs: Vec<String>, outputs: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.len() != rows.len() {
            return Err(Error::Input(format!(
                "channel has {} input labels but {} rows",
                inputs.len(),
                rows.len()
            )));
        }
        check_labels(&inputs, "channel inputs")?;
        let rows = rows
            .into_iter()
            .map(|r| Pmf::new(outputs.clone(), r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Channel { inputs, outputs, rows })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let nout = rows.first().map_or(0, Vec::len);
        Channel::new(default_labels(rows.len()), default_labels(nout), rows)
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        Channel::from_rows(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Noiseless channel on `n` symbols.
    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| Pmf::point_mass(n, i)).collect();
        Channel { inputs: default_labels(n), outputs: default_labels(n), rows }
    }

    pub fn input_labels(&self) -> &[String] {
        &self.inputs
    }

    pub fn output_labels(&self) -> &[String] {
        &self.outputs
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn row(&self, x: usize) -> &Pmf {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Pmf] {
        &self.rows
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x].probs[y]
    }

    /// First pair of rows (lexicographic) whose supports differ, if any.
    pub fn support_violation(&self) -> Option<(usize, usize)> {
        let supp = |p: &Pmf| p.probs.iter().map(|v| *v > 0.0).collect::<Vec<_>>();
        let supports: Vec<_> = self.rows.iter().map(supp).collect();
        for a in 0..supports.len() {
            for b in (a + 1)..supports.len() {
                if supports[a] != supports[b] {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Whether every pair of rows shares its support.
    pub fn is_absolutely_continuous(&self) -> bool {
        self.support_violation().is_none()
    }

    pub fn require_absolutely_continuous(&self) -> Result<()> {
        match self.support_violation() {
            None => Ok(()),
            Some((a, b)) => Err(Error::AbsoluteContinuity {
                first: self.inputs[a].clone(),
                second: self.inputs[b].clone(),
            }),
        }
    }

    /// Output distribution `sum_x P_X(x) P(.|x)`.
    pub fn output_dist(&self, input: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.outputs.len()];
        for (w, row) in input.iter().zip(&self.rows) {
            for (o, p) in out.iter_mut().zip(&row.probs) {
                *o += w * p;
            }
        }
        out
    }

    /// Joint `P_X(x) P(y|x)`.
    pub fn joint(&self, input: &Pmf) -> Result<JointPmf> {
        if input.alphabet != self.inputs {
            return Err(Error::AlphabetMismatch("input pmf vs channel inputs".into()));
        }
        let probs = input
            .probs
            .iter()
            .zip(&self.rows)
            .flat_map(|(w, row)| row.probs.iter().map(move |p| w * p))
            .collect();
        Ok(JointPmf { rows: self.inputs.clone(), cols: self.outputs.clone(), probs })
    }

    /// Series composition `self` followed by `next`.
    pub fn compose(&self, next: &Channel) -> Result<Channel> {
        if self.outputs != next.inputs {
            return Err(Error::AlphabetMismatch("channel composition".into()));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| Pmf { alphabet: next.outputs.clone(), probs: next.output_dist(&r.probs) })
            .collect();
        Ok(Channel { inputs: self.inputs.clone(), outputs: next.outputs.clone(), rows })
    }
}

/// Counts of each alphabet symbol in a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalType {
    counts: Vec<u64>,
    n: u64,
}

impl EmpiricalType {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn blocklength(&self) -> u64 {
        self.n
    }

    pub fn to_pmf(&self) -> Pmf {
        let n = self.n as f64;
        Pmf {
            alphabet: default_labels(self.counts.len()),
            probs: self.counts.iter().map(|&c| c as f64 / n).collect(),
        }
    }
}

pub fn empirical_type<T: PartialEq + fmt::Debug>(seq: &[T], alphabet: &[T]) -> Result<EmpiricalType> {
    if seq.is_empty() {
        return Err(Error::Input("empirical type needs a non-empty sequence".into()));
    }
    let mut counts = vec![0u64; alphabet.len()];
    for s in seq {
        let i = alphabet
            .iter()
            .position(|a| a == s)
            .ok_or_else(|| Error::Input(format!("symbol {s:?} is not in the alphabet")))?;
        counts[i] += 1;
    }
    Ok(EmpiricalType { counts, n: seq.len() as u64 })
}

/// Shannon entropy in nats.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum()
}

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

/// `sum p log(p/q)` on raw slices, with the support conventions.
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            d += a * (a / b).ln();
        }
    }
    d.max(0.0)
}

pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    p.same_alphabet(q)?;
    Ok(kl(&p.probs, &q.probs))
}

/// `sum_x P_X(x) D(P(.|x) || Q(.|x))`.
pub fn conditional_kl(p: &Channel, q: &Channel, px: &Pmf) -> Result<f64> {
    if p.inputs != q.inputs || p.outputs != q.outputs {
        return Err(Error::AlphabetMismatch("conditional kl channels".into()));
    }
    if px.alphabet != p.inputs {
        return Err(Error::AlphabetMismatch("conditioning pmf vs channel inputs".into()));
    }
    let mut total = 0.0;
    for (x, &w) in px.probs.iter().enumerate() {
        if w > 0.0 {
            total += w * kl(&p.rows[x].probs, &q.rows[x].probs);
        }
    }
    Ok(total)
}

/// `I(X;Y)` on a row-major joint of shape `nr x nc`.
pub fn mutual_information_raw(joint: &[f64], nc: usize) -> f64 {
    let nr = joint.len() / nc;
    let mut px = vec![0.0; nr];
    let mut py = vec![0.0; nc];
    for r in 0..nr {
        for c in 0..nc {
            let v = joint[r * nc + c];
            px[r] += v;
            py[c] += v;
        }
    }
    let mut mi = 0.0;
    for r in 0..nr {
        for c in 0..nc {
            let v = joint[r * nc + c];
            if v > 0.0 {
                mi += v * (v / (px[r] * py[c])).ln();
            }
        }
    }
    mi.max(0.0)
}

pub fn mutual_information(joint: &JointPmf) -> f64 {
    mutual_information_raw(&joint.probs, joint.cols.len())
}

/// Capacity-achieving input and capacity of a DMC.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub capacity: f64,
    pub input: Pmf,
    pub iterations: usize,
}

pub const CAPACITY_TOL: f64 = 1e-9;
const CAPACITY_MAX_ITER: usize = 100_000;

/// Alternating maximization (Blahut–Arimoto) from the uniform input.
///
/// Stops when the gap between the upper bound `max_x D(W(.|x) || q)` and the
/// lower bound `I(p, W)` drops below [`CAPACITY_TOL`].
pub fn capacity_with_input(ch: &Channel) -> CapacityResult {
    let nx = ch.num_inputs();
    let mut p = vec![1.0 / nx as f64; nx];
    let mut d = vec![0.0; nx];
    let mut iterations = 0;
    let mut lower = 0.0;
    while iterations < CAPACITY_MAX_ITER {
        iterations += 1;
        let q = ch.output_dist(&p);
        for (x, dx) in d.iter_mut().enumerate() {
            *dx = kl(&ch.rows[x].probs, &q);
        }
        lower = p.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower < CAPACITY_TOL {
            break;
        }
        let mut z = 0.0;
        for (px, dx) in p.iter_mut().zip(&d) {
            *px *= dx.exp();
            z += *px;
        }
        p.iter_mut().for_each(|v| *v /= z);
    }
    CapacityResult {
        capacity: lower.max(0.0),
        input: Pmf { alphabet: ch.inputs.clone(), probs: p },
        iterations,
    }
}

pub fn capacity(ch: &Channel) -> f64 {
    capacity_with_input(ch).capacity
}
