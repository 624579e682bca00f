//! Computable inner bounds for distributed testing over a noisy channel.
//!
//! Separation-based bounds (quantize, then send the index with an
//! unequal-error-protection code) are specialized to testing against
//! independence (`Q_UV = P_U P_V`) and testing against dependence
//! (`P_UV = Q_U Q_V`). The joint bound sends `U` uncoded through a test
//! channel `P_{X|U,S}`.
//!
//! The quantizer test channel `P_{W|U}` is held fixed across the KL ball of
//! source types, so every reported separation value is a lower bound on the
//! optimum over type-dependent test channels. The KL ball over
//! `(U^, V^, W^)` then collapses to `D(P_{U^V^} || P_UV) <= kappa_alpha`.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::coding::{expurgated_exponent, max_expurgated_exponent, InputDesign, SpecialMessage};
use crate::error::{Error, Result};
use crate::optimize::{
    bisect_monotone, maximize_on_simplices, pattern_search, product_lattice, retract_to_level, SimplexPoint,
    SimplexSearch,
};
use crate::prob::{capacity, kl, mutual_information_raw, Channel, JointPmf};

/// Tolerance for the independence flags of a [`SourceModel`].
pub const PRODUCT_TOL: f64 = 1e-12;

/// Null and alternative joint laws of `(U, V)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    p_uv: JointPmf,
    q_uv: JointPmf,
}

impl SourceModel {
    pub fn new(p_uv: JointPmf, q_uv: JointPmf) -> Result<Self> {
        if p_uv.row_labels() != q_uv.row_labels() || p_uv.col_labels() != q_uv.col_labels() {
            return Err(Error::AlphabetMismatch("P_UV and Q_UV must share alphabets".into()));
        }
        Ok(SourceModel { p_uv, q_uv })
    }

    pub fn p_uv(&self) -> &JointPmf {
        &self.p_uv
    }

    pub fn q_uv(&self) -> &JointPmf {
        &self.q_uv
    }

    pub fn nu(&self) -> usize {
        self.p_uv.nrows()
    }

    pub fn nv(&self) -> usize {
        self.p_uv.ncols()
    }

    /// Testing against independence: `Q_UV = P_U P_V`.
    pub fn is_tai(&self) -> bool {
        let prod = JointPmf::product(&self.p_uv.row_marginal(), &self.p_uv.col_marginal());
        close(self.q_uv.probs(), prod.probs())
    }

    /// Testing against dependence: `P_UV = Q_U Q_V`.
    pub fn is_tad(&self) -> bool {
        let prod = JointPmf::product(&self.q_uv.row_marginal(), &self.q_uv.col_marginal());
        close(self.p_uv.probs(), prod.probs())
    }
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= PRODUCT_TOL)
}

/// Search settings for the three nested optimizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSearch {
    /// Over the test channel `P_{W|U}` (or the uncoded map `P_{X|U,S}`).
    pub outer: SimplexSearch,
    /// Over source types inside the KL ball.
    pub ball: SimplexSearch,
    /// Over channel input designs `P_SX`.
    pub design: SimplexSearch,
}

impl Default for BoundSearch {
    fn default() -> Self {
        let base = SimplexSearch::default();
        BoundSearch {
            outer: SimplexSearch { resolution: 10, max_grid_points: 1_000, refine_starts: 2, min_step: 1e-3, ..base },
            ball: SimplexSearch { resolution: 8, max_grid_points: 200, refine_starts: 1, min_step: 1e-3, ..base },
            design: SimplexSearch { resolution: 10, max_grid_points: 300, refine_starts: 1, ..base },
        }
    }
}

impl BoundSearch {
    /// Uses `k` as the outer lattice resolution.
    pub fn with_resolution(mut self, k: u32) -> Self {
        self.outer.resolution = k;
        self
    }
}

/// Which membership conditions of the feasible set held at the achiever.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Feasibility {
    /// Quantization rate below the channel rate `I(X;Y|S)`.
    pub rate: bool,
    /// `E_sp(P_SX, theta) >= kappa_alpha`.
    pub special_message: bool,
    /// `E_x(zeta, P_SX) >= kappa_alpha`.
    pub expurgated: bool,
}

impl Feasibility {
    pub fn all(&self) -> bool {
        self.rate && self.special_message && self.expurgated
    }
}

/// Parameters of the best design found.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Achiever {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_channel: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_design: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_sharing: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uncoded_maps: Option<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound: String,
    pub kappa_alpha: f64,
    pub value: f64,
    /// False when no searched design met the feasibility conditions; `value`
    /// is then 0 and `achiever` is empty.
    pub feasible: bool,
    pub flags: Feasibility,
    pub achiever: Achiever,
    pub grid_resolution: u32,
}

impl BoundReport {
    fn infeasible(bound: &str, kappa_alpha: f64, grid_resolution: u32) -> Self {
        BoundReport {
            bound: bound.into(),
            kappa_alpha,
            value: 0.0,
            feasible: false,
            flags: Feasibility::default(),
            achiever: Achiever::default(),
            grid_resolution,
        }
    }

    /// Zero bound for a model whose hypotheses coincide on `V`-side
    /// information (no test channel can help).
    fn trivial(bound: &str, kappa_alpha: f64) -> Self {
        BoundReport { feasible: true, ..BoundReport::infeasible(bound, kappa_alpha, 0) }
    }

    /// First 16 hex digits of the SHA-256 of the achiever's JSON form.
    pub fn achiever_digest(&self) -> String {
        let json = serde_json::to_string(&self.achiever).expect("achiever serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn check_test_channel(model: &SourceModel, w: &[Vec<f64>]) -> Result<()> {
    if w.len() != model.nu() {
        return Err(Error::AlphabetMismatch(format!("test channel has {} rows, U has {} symbols", w.len(), model.nu())));
    }
    let nw = w.first().map_or(0, Vec::len);
    if nw == 0 || nw > model.nu() + 1 || w.iter().any(|r| r.len() != nw) {
        return Err(Error::Input(format!("test channel output size must be in 1..={}", model.nu() + 1)));
    }
    Ok(())
}

/// `P_{UW}(u, w) = P_U(u) W(w|u)` for a joint over `(U, V)` stored row-major.
fn joint_uw(p: &[f64], nv: usize, w: &[Vec<f64>]) -> Vec<f64> {
    let nw = w[0].len();
    let mut out = vec![0.0; w.len() * nw];
    for (u, row) in w.iter().enumerate() {
        let pu: f64 = p[u * nv..(u + 1) * nv].iter().sum();
        for (k, &x) in row.iter().enumerate() {
            out[u * nw + k] = pu * x;
        }
    }
    out
}

/// `P_{VW}(v, w) = sum_u P(u, v) W(w|u)`.
fn joint_vw(p: &[f64], nv: usize, w: &[Vec<f64>]) -> Vec<f64> {
    let nw = w[0].len();
    let mut out = vec![0.0; nv * nw];
    for (u, row) in w.iter().enumerate() {
        for v in 0..nv {
            let puv = p[u * nv + v];
            if puv == 0.0 {
                continue;
            }
            for (k, &x) in row.iter().enumerate() {
                out[v * nw + k] += puv * x;
            }
        }
    }
    out
}

fn v_marginal(p: &[f64], nv: usize) -> Vec<f64> {
    let mut out = vec![0.0; nv];
    for (i, &x) in p.iter().enumerate() {
        out[i % nv] += x;
    }
    out
}

/// Product of the two marginals of a row-major joint.
fn product_of_marginals(joint: &[f64], nc: usize) -> Vec<f64> {
    let nr = joint.len() / nc;
    let mut pr = vec![0.0; nr];
    let mut pc = vec![0.0; nc];
    for r in 0..nr {
        for c in 0..nc {
            pr[r] += joint[r * nc + c];
            pc[c] += joint[r * nc + c];
        }
    }
    (0..nr * nc).map(|i| pr[i / nc] * pc[i % nc]).collect()
}

/// KL ball `{P : D(P || center) <= radius}` over source types.
struct Ball<'a> {
    center: &'a [f64],
    radius: f64,
}

impl Ball<'_> {
    fn retract(&self, p: &[f64]) -> Vec<f64> {
        retract_to_level(self.center, p, |x| kl(x, self.center), self.radius)
    }

    fn extremum<F>(&self, f: F, maximize: bool, search: &SimplexSearch) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let at_center = f(self.center);
        if self.radius <= 0.0 {
            return at_center;
        }
        let sign = if maximize { 1.0 } else { -1.0 };
        let opt = maximize_on_simplices(|p| sign * f(&self.retract(&p[0])), &[self.center.len()], search);
        if maximize {
            opt.value.max(at_center)
        } else {
            (-opt.value).min(at_center)
        }
    }
}

/// `(zeta, rho)`: the largest `I(U^;W^)` and smallest `I(V^;W^)` over the
/// KL ball of radius `kappa_alpha` around `P_UV`, with `W^` drawn through
/// the fixed test channel.
pub fn zeta_rho(model: &SourceModel, w: &Channel, kappa_alpha: f64, search: &SimplexSearch) -> Result<(f64, f64)> {
    let rows: Vec<Vec<f64>> = w.rows().iter().map(|r| r.probs().to_vec()).collect();
    check_test_channel(model, &rows)?;
    Ok(zeta_rho_raw(model, &rows, kappa_alpha, search))
}

fn zeta_rho_raw(model: &SourceModel, w: &[Vec<f64>], kappa_alpha: f64, search: &SimplexSearch) -> (f64, f64) {
    let nv = model.nv();
    let nw = w[0].len();
    let ball = Ball { center: model.p_uv.probs(), radius: kappa_alpha };
    let zeta = ball.extremum(|p| mutual_information_raw(&joint_uw(p, nv, w), nw), true, search);
    let rho = ball.extremum(|p| mutual_information_raw(&joint_vw(p, nv, w), nw), false, search);
    (zeta, rho)
}

/// Channel-side ingredients of the separation bounds on a lattice of input
/// designs.
struct DesignTable<'a> {
    ch: &'a Channel,
    kappa_alpha: f64,
    entries: Vec<DesignEntry>,
}

struct DesignEntry {
    design: InputDesign,
    rate: f64,
    theta: f64,
    ex0: f64,
    /// `min(E_x(0), kappa_alpha - theta)`, an upper bound on the entry's term.
    cap: f64,
}

/// Channel term for one design at quantization rate `zeta`.
#[derive(Debug, Clone)]
struct ChannelTerm {
    value: f64,
    theta: f64,
    ex: f64,
}

fn conditional_rate(design: &InputDesign, ch: &Channel) -> f64 {
    let ps = design.p_s();
    let cond = design.p_x_given_s();
    ps.probs()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(s, &w)| {
            let row = cond.row(s).probs();
            let joint: Vec<f64> = (0..ch.num_inputs())
                .flat_map(|x| ch.row(x).probs().iter().map(move |&y| row[x] * y))
                .collect();
            w * mutual_information_raw(&joint, ch.num_outputs())
        })
        .sum()
}

/// `I(X;Y|S)` for the channel driven by the design.
pub fn design_rate(design: &InputDesign, ch: &Channel) -> f64 {
    conditional_rate(design, ch)
}

fn channel_term(design: &InputDesign, ch: &Channel, kappa_alpha: f64, zeta: f64, strict: bool) -> Option<ChannelTerm> {
    let rate = conditional_rate(design, ch);
    let rate_ok = if strict { zeta < rate } else { zeta <= rate };
    if !rate_ok {
        return None;
    }
    let theta = SpecialMessage::new(design, ch).ok()?.threshold_for(kappa_alpha)?;
    let ex = expurgated_exponent(zeta.max(0.0), design, ch).ok()?;
    if ex < kappa_alpha {
        return None;
    }
    Some(ChannelTerm { value: ex.min(kappa_alpha - theta), theta, ex })
}

impl<'a> DesignTable<'a> {
    fn new(ch: &'a Channel, kappa_alpha: f64, search: &SimplexSearch) -> Result<Self> {
        let n = ch.num_inputs();
        search.check_alphabet(n)?;
        let k = search.effective_resolution(&[n * n]);
        let mut entries: Vec<DesignEntry> = product_lattice(&[n * n], k)
            .into_iter()
            .filter_map(|p| {
                let design = InputDesign::from_probs(n, p[0].clone()).ok()?;
                let theta = SpecialMessage::new(&design, ch).ok()?.threshold_for(kappa_alpha)?;
                let ex0 = expurgated_exponent(0.0, &design, ch).ok()?;
                let rate = conditional_rate(&design, ch);
                let cap = ex0.min(kappa_alpha - theta);
                Some(DesignEntry { design, rate, theta, ex0, cap })
            })
            .collect();
        // Stable: equal caps keep lattice order.
        entries.sort_by(|a, b| b.cap.total_cmp(&a.cap));
        Ok(DesignTable { ch, kappa_alpha, entries })
    }

    /// Best feasible entry at rate `zeta`.
    fn best(&self, zeta: f64, strict: bool) -> Option<(usize, ChannelTerm)> {
        let mut best: Option<(usize, ChannelTerm)> = None;
        for (i, e) in self.entries.iter().enumerate() {
            if let Some((_, b)) = &best {
                if e.cap <= b.value {
                    break;
                }
            }
            let rate_ok = if strict { zeta < e.rate } else { zeta <= e.rate };
            if !rate_ok || e.ex0 < self.kappa_alpha {
                continue;
            }
            let ex = match expurgated_exponent(zeta.max(0.0), &e.design, self.ch) {
                Ok(v) if v >= self.kappa_alpha => v,
                _ => continue,
            };
            let value = ex.min(self.kappa_alpha - e.theta);
            if best.as_ref().map_or(true, |(_, b)| value > b.value) {
                best = Some((i, ChannelTerm { value, theta: e.theta, ex }));
            }
        }
        best
    }

    /// Pattern-search refinement of the design starting from entry `start`.
    fn refine(&self, zeta: f64, strict: bool, start: usize, search: &SimplexSearch) -> (InputDesign, ChannelTerm) {
        let n = self.ch.num_inputs();
        let eval = |p: &SimplexPoint| {
            InputDesign::from_probs(n, p[0].clone())
                .ok()
                .and_then(|d| channel_term(&d, self.ch, self.kappa_alpha, zeta, strict))
                .map_or(f64::NEG_INFINITY, |t| t.value)
        };
        let start_point = vec![self.entries[start].design.joint().probs().to_vec()];
        let r = pattern_search(eval, start_point, search.initial_step, search.min_step);
        let design = InputDesign::from_probs(n, r.point[0].clone()).expect("searched point is a design");
        let term = channel_term(&design, self.ch, self.kappa_alpha, zeta, strict).expect("refined point is feasible");
        (design, term)
    }
}

fn report_from(
    bound: &str,
    kappa_alpha: f64,
    value: f64,
    test_channel: Vec<Vec<f64>>,
    design: &InputDesign,
    term: &ChannelTerm,
    resolution: u32,
) -> BoundReport {
    BoundReport {
        bound: bound.into(),
        kappa_alpha,
        value,
        feasible: true,
        flags: Feasibility { rate: true, special_message: true, expurgated: term.ex >= kappa_alpha },
        achiever: Achiever {
            test_channel: Some(test_channel),
            input_design: Some(design.joint().probs().to_vec()),
            theta: Some(term.theta),
            ..Achiever::default()
        },
        grid_resolution: resolution,
    }
}

/// Separation bound shared by the two specializations: maximize
/// `first(w, zeta)` against the channel term over test channels.
fn separation_bound<F>(
    bound: &str,
    model: &SourceModel,
    ch: &Channel,
    kappa_alpha: f64,
    strict: bool,
    search: &BoundSearch,
    source_side: F,
) -> Result<BoundReport>
where
    F: Fn(&[Vec<f64>]) -> SourceSide + Sync,
{
    ch.require_absolutely_continuous()?;
    search.outer.check_alphabet(model.nu())?;
    let table = DesignTable::new(ch, kappa_alpha, &search.design)?;
    let dims = vec![model.nu() + 1; model.nu()];
    let eval = |p: &SimplexPoint| -> f64 {
        let s = source_side(p);
        match table.best(s.zeta, strict) {
            Some((_, t)) => s.combine(t.value),
            None => f64::NEG_INFINITY,
        }
    };
    let opt = maximize_on_simplices(eval, &dims, &search.outer);
    if opt.value == f64::NEG_INFINITY {
        return Ok(BoundReport::infeasible(bound, kappa_alpha, opt.grid_resolution));
    }
    let w = opt.point.clone();
    let s = source_side(&w);
    let (start, _) = table.best(s.zeta, strict).expect("optimum is feasible");
    let (design, term) = table.refine(s.zeta, strict, start, &search.design);
    // Refinement starts at the lattice optimum and only accepts improvements.
    let value = s.combine(term.value);
    Ok(report_from(bound, kappa_alpha, value, w, &design, &term, opt.grid_resolution))
}

/// Source-side quantities for one test channel.
#[derive(Debug, Clone, Copy)]
struct SourceSide {
    zeta: f64,
    /// Additive offset on the channel term (`rho` for independence testing).
    offset: f64,
    /// Source-only exponent term.
    first: f64,
}

impl SourceSide {
    fn combine(&self, channel: f64) -> f64 {
        self.first.min(self.offset + channel)
    }
}

fn require_tai(model: &SourceModel) -> Result<()> {
    if model.is_tai() {
        Ok(())
    } else {
        Err(Error::Input("model is not testing against independence (Q_UV != P_U P_V)".into()))
    }
}

fn require_tad(model: &SourceModel) -> Result<()> {
    if model.is_tad() {
        Ok(())
    } else {
        Err(Error::Input("model is not testing against dependence (P_UV != Q_U Q_V)".into()))
    }
}

fn flat(rows: &[Vec<f64>]) -> Vec<f64> {
    rows.iter().flatten().copied().collect()
}

fn unflat(v: &[f64], n: usize) -> Vec<Vec<f64>> {
    v.chunks(n).map(<[f64]>::to_vec).collect()
}

/// Stein exponent for testing against independence:
/// `max I(V;W)` over `P_{W|U}` with `I(U;W) <= C`, `|W| <= |U| + 1`.
///
/// Smaller `|W|` is covered by test channels with unused outputs.
pub fn shtcc_tai_stein(model: &SourceModel, ch: &Channel, search: &SimplexSearch) -> Result<BoundReport> {
    require_tai(model)?;
    search.check_alphabet(model.nu())?;
    let cap = capacity(ch);
    let (nu, nv, nw) = (model.nu(), model.nv(), model.nu() + 1);
    let p = model.p_uv.probs();
    if mutual_information_raw(p, nv) == 0.0 || model.p_uv.is_product(PRODUCT_TOL) {
        return Ok(stein_report("shtcc_tai_stein", 0.0, vec![vec![1.0 / nw as f64; nw]; nu], 0));
    }
    let center = vec![1.0 / nw as f64; nu * nw];
    let retract = |w: &[f64]| retract_to_level(&center, w, |x| mutual_information_raw(&joint_uw(p, nv, &unflat(x, nw)), nw), cap);
    let value_of = |rows: &[Vec<f64>]| mutual_information_raw(&joint_vw(p, nv, rows), nw);
    let opt = maximize_on_simplices(|pt| value_of(&unflat(&retract(&flat(pt)), nw)), &vec![nw; nu], search);
    let w = unflat(&retract(&flat(&opt.point)), nw);
    Ok(stein_report("shtcc_tai_stein", value_of(&w), w, opt.grid_resolution))
}

fn stein_report(bound: &str, value: f64, w: Vec<Vec<f64>>, resolution: u32) -> BoundReport {
    BoundReport {
        bound: bound.into(),
        kappa_alpha: 0.0,
        value,
        feasible: true,
        flags: Feasibility { rate: true, special_message: true, expurgated: true },
        achiever: Achiever { test_channel: Some(w), ..Achiever::default() },
        grid_resolution: resolution,
    }
}

/// Separation bound for testing against independence at `kappa_alpha`.
pub fn shtcc_tai(model: &SourceModel, ch: &Channel, kappa_alpha: f64, search: &BoundSearch) -> Result<BoundReport> {
    require_tai(model)?;
    let nv = model.nv();
    let p_v = model.p_uv.col_marginal().probs().to_vec();
    if model.p_uv.is_product(PRODUCT_TOL) {
        return Ok(BoundReport::trivial("shtcc_tai", kappa_alpha));
    }
    let ball = Ball { center: model.p_uv.probs(), radius: kappa_alpha };
    separation_bound("shtcc_tai", model, ch, kappa_alpha, true, search, |w| {
        let nw = w[0].len();
        let (zeta, rho) = zeta_rho_raw(model, w, kappa_alpha, &search.ball);
        let first = ball.extremum(
            |p| mutual_information_raw(&joint_vw(p, nv, w), nw) + kl(&v_marginal(p, nv), &p_v),
            false,
            &search.ball,
        );
        SourceSide { zeta, offset: rho, first }
    })
}

/// Stein-regime separation bound for testing against dependence:
/// `max min{D(Q_V Q_W || Q_VW), E_x(I_Q(U;W)), theta_L}` subject to
/// `I_Q(U;W) <= I(X;Y|S)`.
pub fn shtcc_tad_stein(model: &SourceModel, ch: &Channel, search: &BoundSearch) -> Result<BoundReport> {
    require_tad(model)?;
    if model.q_uv.is_product(PRODUCT_TOL) {
        return Ok(stein_report("shtcc_tad_stein", 0.0, vec![vec![1.0]; model.nu()], 0));
    }
    let nv = model.nv();
    let q = model.q_uv.probs();
    separation_bound("shtcc_tad_stein", model, ch, 0.0, false, search, |w| {
        let nw = w[0].len();
        let q_vw = joint_vw(q, nv, w);
        let lautum = kl(&product_of_marginals(&q_vw, nw), &q_vw);
        SourceSide { zeta: mutual_information_raw(&joint_uw(q, nv, w), nw), offset: 0.0, first: lautum }
    })
    .map(|mut r| {
        r.kappa_alpha = 0.0;
        r
    })
}

/// Separation bound for testing against dependence at `kappa_alpha`, with
/// the first exponent replaced by its lower surrogate
/// `min over the ball of D(P_{V^W^} || Q_{VW^})`.
pub fn shtcc_tad(model: &SourceModel, ch: &Channel, kappa_alpha: f64, search: &BoundSearch) -> Result<BoundReport> {
    require_tad(model)?;
    if model.q_uv.is_product(PRODUCT_TOL) {
        return Ok(BoundReport::trivial("shtcc_tad", kappa_alpha));
    }
    let nv = model.nv();
    let q = model.q_uv.probs();
    let ball = Ball { center: model.p_uv.probs(), radius: kappa_alpha };
    separation_bound("shtcc_tad", model, ch, kappa_alpha, true, search, |w| {
        let nw = w[0].len();
        let q_vw = joint_vw(q, nv, w);
        let zeta = ball.extremum(|p| mutual_information_raw(&joint_uw(p, nv, w), nw), true, &search.ball);
        let first = ball.extremum(|p| kl(&joint_vw(p, nv, w), &q_vw), false, &search.ball);
        SourceSide { zeta, offset: 0.0, first }
    })
}

/// Independent re-check of a separation report's feasibility conditions.
pub fn verify_separation_report(model: &SourceModel, ch: &Channel, report: &BoundReport, search: &SimplexSearch) -> Result<bool> {
    if !report.feasible {
        return Ok(report.achiever == Achiever::default());
    }
    let (Some(w), Some(d), Some(theta)) =
        (&report.achiever.test_channel, &report.achiever.input_design, report.achiever.theta)
    else {
        return Ok(false);
    };
    let design = InputDesign::from_probs(ch.num_inputs(), d.clone())?;
    let base = if report.bound.starts_with("shtcc_tad") { &model.q_uv } else { &model.p_uv };
    let nw = w[0].len();
    let zeta = if report.bound == "shtcc_tad_stein" {
        mutual_information_raw(&joint_uw(base.probs(), model.nv(), w), nw)
    } else {
        let ball = Ball { center: model.p_uv.probs(), radius: report.kappa_alpha };
        ball.extremum(|p| mutual_information_raw(&joint_uw(p, model.nv(), w), nw), true, search)
    };
    let rate = conditional_rate(&design, ch);
    let sm = SpecialMessage::new(&design, ch)?;
    let e_sp = sm.exponent(theta)?;
    let ex = expurgated_exponent(zeta.max(0.0), &design, ch)?;
    let k = report.kappa_alpha;
    let rate_ok = if report.bound == "shtcc_tad_stein" { zeta <= rate + 1e-9 } else { zeta < rate + 1e-9 };
    Ok(rate_ok && e_sp >= k - 1e-7 && ex >= k - 1e-9)
}

/// Result of projecting onto a (conditional) KL ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// One minimizing PMF per conditioning symbol.
    pub minimizer: Vec<Vec<f64>>,
    pub value: f64,
    /// Mixture weight on the reference: `P ~ P_ref^t Q^(1-t)`.
    pub t: f64,
}

/// Normalized geometric mixture `P_ref^t Q^(1-t)`.
pub fn geometric_mixture(p_ref: &[f64], q: &[f64], t: f64) -> Vec<f64> {
    let logs: Vec<f64> = p_ref
        .iter()
        .zip(q)
        .map(|(&a, &b)| {
            if t >= 1.0 {
                if a > 0.0 { a.ln() } else { f64::NEG_INFINITY }
            } else if t <= 0.0 {
                if b > 0.0 { b.ln() } else { f64::NEG_INFINITY }
            } else if a > 0.0 && b > 0.0 {
                t * a.ln() + (1.0 - t) * b.ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return vec![0.0; p_ref.len()];
    }
    let w: Vec<f64> = logs.iter().map(|&l| (l - m).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// `min sum_s P_S(s) D(P_s || Q_s)` subject to
/// `sum_s P_S(s) D(P_s || P_ref,s) <= kappa_alpha`.
///
/// The Lagrangian separates over `s` with one shared multiplier, and each
/// component is a geometric mixture `P_ref,s^t Q_s^(1-t)`. `t` is found by
/// bisection so the constraint is active. An empty feasible support gives
/// `+inf`.
pub fn conditional_ball_projection(p_s: &[f64], refs: &[Vec<f64>], targets: &[Vec<f64>], kappa_alpha: f64) -> Projection {
    let mix = |t: f64| -> Vec<Vec<f64>> { refs.iter().zip(targets).map(|(r, q)| geometric_mixture(r, q, t)).collect() };
    let weighted = |ps: &[Vec<f64>], others: &[Vec<f64>]| -> f64 {
        p_s.iter()
            .zip(ps.iter().zip(others))
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, (a, b))| if a.iter().all(|&x| x == 0.0) { f64::INFINITY } else { w * kl(a, b) })
            .sum()
    };
    let at_ref = Projection { minimizer: refs.to_vec(), value: weighted(refs, targets), t: 1.0 };
    if kappa_alpha <= 0.0 {
        return at_ref;
    }
    if weighted(targets, refs) <= kappa_alpha {
        return Projection { minimizer: targets.to_vec(), value: 0.0, t: 0.0 };
    }
    let constraint = |t: f64| weighted(&mix(t), refs);
    // Just below t = 1 the mixture lives on the shared support.
    let t_hi = 1.0 - 1e-15;
    if !(constraint(t_hi) <= kappa_alpha) {
        return Projection { minimizer: refs.to_vec(), value: f64::INFINITY, t: 1.0 };
    }
    let (mut lo, mut hi) = (0.0, t_hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if constraint(mid) > kappa_alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let minimizer = mix(hi);
    let value = weighted(&minimizer, targets);
    Projection { minimizer, value, t: hi }
}

/// `min D(P || Q_target)` over `D(P || P_ref) <= kappa_alpha`.
pub fn kl_ball_projection(p_ref: &JointPmf, q_target: &JointPmf, kappa_alpha: f64) -> Result<(JointPmf, f64)> {
    if p_ref.row_labels() != q_target.row_labels() || p_ref.col_labels() != q_target.col_labels() {
        return Err(Error::AlphabetMismatch("projection needs a shared alphabet".into()));
    }
    let pr = conditional_ball_projection(&[1.0], &[p_ref.probs().to_vec()], &[q_target.probs().to_vec()], kappa_alpha);
    let minimizer = p_ref.with_probs(pr.minimizer.into_iter().next().expect("one component"))?;
    Ok((minimizer, pr.value))
}

/// Time-sharing law `P_S` and uncoded maps `P_{X|U,S=s}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncodedDesign {
    pub p_s: Vec<f64>,
    /// `maps[s][u][x]`.
    pub maps: Vec<Vec<Vec<f64>>>,
}

impl UncodedDesign {
    /// `X = U`, no time sharing.
    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|u| (0..n).map(|x| if x == u { 1.0 } else { 0.0 }).collect()).collect();
        UncodedDesign { p_s: vec![1.0], maps: vec![rows] }
    }

    fn check(&self, model: &SourceModel, ch: &Channel) -> Result<()> {
        if self.p_s.len() != self.maps.len() || self.p_s.is_empty() {
            return Err(Error::Input("one map per time-sharing symbol is required".into()));
        }
        for m in &self.maps {
            if m.len() != model.nu() || m.iter().any(|r| r.len() != ch.num_inputs()) {
                return Err(Error::AlphabetMismatch("uncoded map must be U -> channel inputs".into()));
            }
        }
        Ok(())
    }
}

/// `P_{VY}` induced by sending `U` through `map` then the channel.
fn vy_joint(puv: &[f64], nv: usize, map: &[Vec<f64>], ch: &Channel) -> Vec<f64> {
    let ny = ch.num_outputs();
    let mut out = vec![0.0; nv * ny];
    for (u, row) in map.iter().enumerate() {
        let py = ch.output_dist(row);
        for v in 0..nv {
            let w = puv[u * nv + v];
            if w == 0.0 {
                continue;
            }
            for (y, &p) in py.iter().enumerate() {
                out[v * ny + y] += w * p;
            }
        }
    }
    out
}

/// Uncoded-transmission exponent for a fixed design.
pub fn jhtcc_uncoded(model: &SourceModel, ch: &Channel, kappa_alpha: f64, design: &UncodedDesign) -> Result<f64> {
    design.check(model, ch)?;
    Ok(uncoded_value(model, ch, kappa_alpha, design))
}

fn uncoded_value(model: &SourceModel, ch: &Channel, kappa_alpha: f64, design: &UncodedDesign) -> f64 {
    let nv = model.nv();
    let refs: Vec<Vec<f64>> = design.maps.iter().map(|m| vy_joint(model.p_uv.probs(), nv, m, ch)).collect();
    let targets: Vec<Vec<f64>> = design.maps.iter().map(|m| vy_joint(model.q_uv.probs(), nv, m, ch)).collect();
    conditional_ball_projection(&design.p_s, &refs, &targets, kappa_alpha).value
}

/// Uncoded exponent maximized over maps (and `P_S` when `time_sharing > 1`).
pub fn jhtcc_uncoded_opt(
    model: &SourceModel,
    ch: &Channel,
    kappa_alpha: f64,
    time_sharing: usize,
    search: &SimplexSearch,
) -> Result<BoundReport> {
    if !(1..=2).contains(&time_sharing) {
        return Err(Error::Input("time sharing supports 1 or 2 symbols".into()));
    }
    search.check_alphabet(ch.num_inputs())?;
    let (nu, nx) = (model.nu(), ch.num_inputs());
    let ts = time_sharing;
    let mut dims = Vec::new();
    if ts > 1 {
        dims.push(ts);
    }
    dims.extend(std::iter::repeat(nx).take(nu * ts));
    let decode = |p: &SimplexPoint| -> UncodedDesign {
        let (p_s, rest) = if ts > 1 { (p[0].clone(), &p[1..]) } else { (vec![1.0], &p[..]) };
        let maps = rest.chunks(nu).map(<[Vec<f64>]>::to_vec).collect();
        UncodedDesign { p_s, maps }
    };
    let value = |p: &SimplexPoint| uncoded_value(model, ch, kappa_alpha, &decode(p));
    let opt = maximize_on_simplices(value, &dims, search);
    let design = decode(&opt.point);
    Ok(BoundReport {
        bound: "jhtcc_uncoded".into(),
        kappa_alpha,
        value: opt.value,
        feasible: true,
        flags: Feasibility { rate: true, special_message: true, expurgated: true },
        achiever: Achiever {
            time_sharing: (ts > 1).then(|| design.p_s.clone()),
            uncoded_maps: Some(design.maps),
            ..Achiever::default()
        },
        grid_resolution: opt.grid_resolution,
    })
}

/// Per-`kappa_alpha` comparison of the uncoded and separation bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub kappa_alpha: f64,
    pub uncoded: BoundReport,
    /// Separation bound, when it was computed.
    pub separation: Option<BoundReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    /// `max_P_SX E_x(0, P_SX)`, an upper bound on the dependence-testing
    /// separation bound at every `kappa_alpha`.
    pub expurgated_zero_rate: f64,
    /// `kappa_alpha` at which the uncoded bound falls to the line above.
    pub crossover: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    pub search: BoundSearch,
    /// Also compute the separation bound per row (slow).
    pub separation: bool,
    pub time_sharing: usize,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions { search: BoundSearch::default(), separation: false, time_sharing: 1 }
    }
}

/// Tabulates both schemes over a grid of `kappa_alpha` and locates the
/// crossover of the uncoded curve with the zero-rate expurgated line.
pub fn compare_schemes(model: &SourceModel, ch: &Channel, kappas: &[f64], opts: &CompareOptions) -> Result<Comparison> {
    let ex0 = max_expurgated_exponent(0.0, ch, &SimplexSearch::default())?.value;
    let uncoded = |k: f64| jhtcc_uncoded_opt(model, ch, k, opts.time_sharing, &opts.search.outer);
    let rows = kappas
        .iter()
        .map(|&k| {
            let separation = if opts.separation {
                Some(if model.is_tad() {
                    shtcc_tad(model, ch, k, &opts.search)?
                } else {
                    shtcc_tai(model, ch, k, &opts.search)?
                })
            } else {
                None
            };
            Ok(ComparisonRow { kappa_alpha: k, uncoded: uncoded(k)?, separation })
        })
        .collect::<Result<Vec<_>>>()?;
    let crossover = uncoded_crossover(|k| uncoded(k).map(|r| r.value), ex0)?;
    Ok(Comparison { rows, expurgated_zero_rate: ex0, crossover })
}

/// Smallest `kappa_alpha` where a non-increasing curve drops to `level`.
fn uncoded_crossover<F>(curve: F, level: f64) -> Result<Option<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    if !level.is_finite() || curve(0.0)? < level {
        return Ok(None);
    }
    let mut hi = 0.01;
    let mut grown = 0;
    while curve(hi)? >= level {
        hi *= 2.0;
        grown += 1;
        if grown > 30 {
            return Ok(None);
        }
    }
    let g = |k: f64| curve(k).map_or(f64::NAN, |v| v - level);
    Ok(Some(bisect_monotone(g, 0.0, hi, 1e-7)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::{simplex_grid, GridSpec};
    use crate::prob::Pmf;

    /// Q_UV anti-diagonal, P_UV uniform.
    fn example1() -> SourceModel {
        let q = JointPmf::from_matrix(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        let p = JointPmf::product(&q.row_marginal(), &q.col_marginal());
        SourceModel::new(p, q).unwrap()
    }

    fn dsbs(corr: f64) -> SourceModel {
        let a = 0.5 * (1.0 + corr) / 2.0;
        let b = 0.5 * (1.0 - corr) / 2.0;
        let p = JointPmf::from_matrix(&[vec![a, b], vec![b, a]]).unwrap();
        let q = JointPmf::product(&p.row_marginal(), &p.col_marginal());
        SourceModel::new(p, q).unwrap()
    }

    fn example1_kl() -> f64 {
        0.5 * (0.25f64 / 0.325).ln() + 0.5 * (0.25f64 / 0.175).ln()
    }

    #[test]
    fn model_flags() {
        let m = example1();
        assert!(m.is_tad() && !m.is_tai());
        let t = dsbs(0.8);
        assert!(t.is_tai() && !t.is_tad());
    }

    #[test]
    fn projection_corners() {
        let p = JointPmf::from_matrix(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let q = JointPmf::from_matrix(&[vec![0.175, 0.325], vec![0.325, 0.175]]).unwrap();
        let (m, v) = kl_ball_projection(&p, &q, 0.0).unwrap();
        assert_eq!(m, p);
        assert!((v - example1_kl()).abs() < 1e-15);
        assert!((example1_kl() - 0.0471).abs() < 1e-4);
        let dqp = kl(q.probs(), p.probs());
        let (m, v) = kl_ball_projection(&p, &q, dqp).unwrap();
        assert_eq!((m, v), (q, 0.0));
    }

    fn kkt_holds(p_ref: &[f64], q: &[f64], kappa: f64, pr: &Projection) -> bool {
        let m = &pr.minimizer[0];
        // On the geometric family: log m - t log p - (1 - t) log q is constant.
        let c: Vec<f64> = (0..m.len())
            .filter(|&i| m[i] > 0.0)
            .map(|i| m[i].ln() - pr.t * p_ref[i].ln() - (1.0 - pr.t) * q[i].ln())
            .collect();
        let on_family = c.iter().all(|x| (x - c[0]).abs() < 1e-7);
        let active = pr.value == 0.0 || kappa >= kl(q, p_ref) || (kl(m, p_ref) - kappa).abs() < 1e-7;
        on_family && active
    }

    #[test]
    fn projection_kkt_and_brute_force() {
        let p = vec![0.25; 4];
        let q = vec![0.175, 0.325, 0.325, 0.175];
        for kappa in [1e-4, 1e-3, 0.005, 0.02, 0.04] {
            let pr = conditional_ball_projection(&[1.0], &[p.clone()], &[q.clone()], kappa);
            assert!(kkt_holds(&p, &q, kappa, &pr), "kappa={kappa}");
            // Brute force over the 1/200 lattice inside the ball.
            let mut best = f64::INFINITY;
            for pt in simplex_grid(GridSpec::new(4, 200).unwrap()) {
                if kl(&pt, &p) <= kappa {
                    best = best.min(kl(&pt, &q));
                }
            }
            assert!(pr.value <= best + 1e-12, "kappa={kappa}: {} > {best}", pr.value);
            assert!(best - pr.value < 5e-3);
        }
    }

    #[test]
    fn projection_shared_multiplier_beats_allocations() {
        let ps = [0.4, 0.6];
        let refs = vec![vec![0.5, 0.5], vec![0.2, 0.8]];
        let targets = vec![vec![0.8, 0.2], vec![0.6, 0.4]];
        let kappa = 0.03;
        let pr = conditional_ball_projection(&ps, &refs, &targets, kappa);
        // Any split of the budget across s does no better.
        for i in 0..=50 {
            let share = i as f64 / 50.0;
            let k0 = share * kappa / ps[0];
            let k1 = (1.0 - share) * kappa / ps[1];
            let a = conditional_ball_projection(&[1.0], &refs[..1], &targets[..1], k0).value;
            let b = conditional_ball_projection(&[1.0], &refs[1..], &targets[1..], k1).value;
            assert!(pr.value <= ps[0] * a + ps[1] * b + 1e-10);
        }
        let used: f64 = (0..2).map(|s| ps[s] * kl(&pr.minimizer[s], &refs[s])).sum();
        assert!((used - kappa).abs() < 1e-7);
    }

    #[test]
    fn projection_disjoint_support_is_infinite() {
        let pr = conditional_ball_projection(&[1.0], &[vec![1.0, 0.0]], &[vec![0.0, 1.0]], 0.1);
        assert_eq!(pr.value, f64::INFINITY);
    }

    #[test]
    fn example1_uncoded_at_zero() {
        let m = example1();
        let ch = Channel::bsc(0.35).unwrap();
        let v = jhtcc_uncoded(&m, &ch, 0.0, &UncodedDesign::identity(2)).unwrap();
        assert!((v - example1_kl()).abs() < 1e-12);
        let dqp = {
            let p = vec![0.25; 4];
            let q = vec![0.175, 0.325, 0.325, 0.175];
            kl(&q, &p)
        };
        assert_eq!(jhtcc_uncoded(&m, &ch, dqp, &UncodedDesign::identity(2)).unwrap(), 0.0);
    }

    #[test]
    fn example1_uncoded_matches_symmetric_oracle() {
        // Oracle: the minimizer stays symmetric, (a/2, (1-a)/2, (1-a)/2, a/2),
        // with a moving from 1/2 toward Q's diagonal mass 0.35 until it hits
        // the ball boundary. Bisect on a.
        let p = vec![0.25; 4];
        let q = vec![0.175, 0.325, 0.325, 0.175];
        let ph = |a: f64| vec![a / 2.0, (1.0 - a) / 2.0, (1.0 - a) / 2.0, a / 2.0];
        let m = example1();
        let ch = Channel::bsc(0.35).unwrap();
        for kappa in [0.003, 0.004, 0.005] {
            let (mut lo, mut hi) = (0.35, 0.5);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if kl(&ph(mid), &p) > kappa {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let oracle = kl(&ph(hi), &q);
            let r = jhtcc_uncoded_opt(&m, &ch, kappa, 1, &SimplexSearch::default()).unwrap();
            assert!((r.value - oracle).abs() < 1e-9, "kappa={kappa}: {} vs {oracle}", r.value);
        }
        let k0 = jhtcc_uncoded_opt(&m, &ch, 0.0, 1, &SimplexSearch::default()).unwrap();
        assert!(k0.value >= example1_kl() - 1e-12);
    }

    #[test]
    fn uncoded_curve_non_increasing() {
        let m = example1();
        let ch = Channel::bsc(0.35).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..15 {
            let v = jhtcc_uncoded(&m, &ch, 0.003 * i as f64, &UncodedDesign::identity(2)).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn zeta_rho_examples() {
        let m = dsbs(0.8);
        let s = SimplexSearch::default();
        let w = Channel::from_rows(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let (z, r) = zeta_rho(&m, &w, 0.0, &s).unwrap();
        let rows: Vec<Vec<f64>> = w.rows().iter().map(|x| x.probs().to_vec()).collect();
        let p = m.p_uv().probs();
        assert!((z - mutual_information_raw(&joint_uw(p, 2, &rows), 2)).abs() < 1e-15);
        assert!((r - mutual_information_raw(&joint_vw(p, 2, &rows), 2)).abs() < 1e-15);
        let flat_w = Channel::from_rows(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        let (z, r) = zeta_rho(&m, &flat_w, 0.05, &s).unwrap();
        assert!(z.abs() < 1e-12 && r.abs() < 1e-12);
    }

    #[test]
    fn zeta_rho_matches_exhaustive_grid() {
        let m = dsbs(0.6);
        let w = Channel::from_rows(vec![vec![0.85, 0.15], vec![0.3, 0.7]]).unwrap();
        let rows: Vec<Vec<f64>> = w.rows().iter().map(|x| x.probs().to_vec()).collect();
        let kappa = 0.01;
        let (mut zmax, mut rmin) = (f64::NEG_INFINITY, f64::INFINITY);
        for pt in simplex_grid(GridSpec::new(4, 100).unwrap()) {
            if kl(&pt, m.p_uv().probs()) <= kappa {
                zmax = zmax.max(mutual_information_raw(&joint_uw(&pt, 2, &rows), 2));
                rmin = rmin.min(mutual_information_raw(&joint_vw(&pt, 2, &rows), 2));
            }
        }
        let (z, r) = zeta_rho(&m, &w, kappa, &SimplexSearch::default()).unwrap();
        // The lattice samples the ball from inside, so the search must do at
        // least as well; the gap is bounded by the lattice spacing.
        assert!(z >= zmax - 1e-9 && z <= zmax + 5e-3, "{z} vs {zmax}");
        assert!(r <= rmin + 1e-9 && r >= rmin - 5e-3, "{r} vs {rmin}");
    }

    #[test]
    fn tai_stein_examples() {
        let s = SimplexSearch::default();
        let prod = SourceModel::new(
            JointPmf::product(&Pmf::bernoulli(0.3).unwrap(), &Pmf::bernoulli(0.6).unwrap()),
            JointPmf::product(&Pmf::bernoulli(0.3).unwrap(), &Pmf::bernoulli(0.6).unwrap()),
        )
        .unwrap();
        assert_eq!(shtcc_tai_stein(&prod, &Channel::bsc(0.1).unwrap(), &s).unwrap().value, 0.0);
        let m = dsbs(0.9);
        let iuv = mutual_information_raw(m.p_uv().probs(), 2);
        let v = shtcc_tai_stein(&m, &Channel::identity(2), &s).unwrap().value;
        assert!((v - iuv).abs() < 2e-3, "{v} vs {iuv}");
        assert!(shtcc_tai(&dsbs(0.9), &Channel::identity(2), 0.0, &BoundSearch::default()).is_err());
    }

    #[test]
    fn tai_stein_matches_grid_oracle() {
        let m = dsbs(0.9);
        let ch = Channel::bsc(0.35).unwrap();
        let cap = capacity(&ch);
        let p = m.p_uv().probs();
        let rows: Vec<Vec<f64>> = simplex_grid(GridSpec::new(3, 50).unwrap()).collect();
        let mut oracle = 0.0f64;
        for a in &rows {
            for b in &rows {
                let w = vec![a.clone(), b.clone()];
                if mutual_information_raw(&joint_uw(p, 2, &w), 3) <= cap {
                    oracle = oracle.max(mutual_information_raw(&joint_vw(p, 2, &w), 3));
                }
            }
        }
        let v = shtcc_tai_stein(&m, &ch, &SimplexSearch::default()).unwrap().value;
        assert!(v >= oracle - 1e-3 && v <= oracle + 2e-3, "{v} vs {oracle}");
    }

    #[test]
    fn tai_at_zero_matches_stein_on_clean_channel() {
        // Skewed U keeps H(U) below both capacity and the zero crossing of E_x.
        let p = JointPmf::from_matrix(&[vec![0.8, 0.05], vec![0.03, 0.12]]).unwrap();
        let q = JointPmf::product(&p.row_marginal(), &p.col_marginal());
        let m = SourceModel::new(p, q).unwrap();
        let ch = Channel::bsc(1e-3).unwrap();
        let stein = shtcc_tai_stein(&m, &ch, &SimplexSearch::default()).unwrap().value;
        let r = shtcc_tai(&m, &ch, 0.0, &BoundSearch::default()).unwrap();
        assert!(r.feasible);
        assert!((r.value - stein).abs() < 2e-3, "{} vs {stein}", r.value);
    }

    #[test]
    fn tai_noisy_channel_below_stein() {
        let m = dsbs(0.9);
        let ch = Channel::bsc(0.2).unwrap();
        let stein = shtcc_tai_stein(&m, &ch, &SimplexSearch::default()).unwrap().value;
        let search = BoundSearch::default();
        let mut prev = f64::INFINITY;
        for k in [0.0, 0.005, 0.02] {
            let r = shtcc_tai(&m, &ch, k, &search).unwrap();
            assert!(r.value <= stein + 2e-3);
            assert!(r.value <= prev + 2e-3);
            assert!(verify_separation_report(&m, &ch, &r, &search.ball).unwrap());
            prev = r.value;
        }
    }

    #[test]
    fn tad_stein_examples() {
        let search = BoundSearch::default();
        let m = example1();
        let ch = Channel::bsc(0.35).unwrap();
        let r = shtcc_tad_stein(&m, &ch, &search).unwrap();
        assert!(r.value <= 0.0236 + 1e-4 && r.value > 0.0, "{}", r.value);
        assert!(verify_separation_report(&m, &ch, &r, &search.ball).unwrap());
        let useless = Channel::from_rows(vec![vec![0.4, 0.6], vec![0.4, 0.6]]).unwrap();
        assert!(shtcc_tad_stein(&m, &useless, &search).unwrap().value.abs() < 1e-12);
        let prod = SourceModel::new(
            JointPmf::product(&Pmf::uniform(2), &Pmf::uniform(2)),
            JointPmf::product(&Pmf::uniform(2), &Pmf::uniform(2)),
        )
        .unwrap();
        assert_eq!(shtcc_tad_stein(&prod, &ch, &search).unwrap().value, 0.0);
    }

    #[test]
    fn tad_bounded_by_expurgated_line() {
        let search = BoundSearch::default();
        let m = example1();
        let ch = Channel::bsc(0.35).unwrap();
        let stein = shtcc_tad_stein(&m, &ch, &search).unwrap().value;
        let r0 = shtcc_tad(&m, &ch, 0.0, &search).unwrap();
        assert!((r0.value - stein).abs() < 2e-3, "{} vs {stein}", r0.value);
        let r = shtcc_tad(&m, &ch, 0.01, &search).unwrap();
        assert!(r.value <= 0.0236 + 1e-4);
        assert!(verify_separation_report(&m, &ch, &r, &search.ball).unwrap());
        let useless = Channel::from_rows(vec![vec![0.4, 0.6], vec![0.4, 0.6]]).unwrap();
        assert!(shtcc_tad(&m, &useless, 0.01, &search).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn digest_is_stable() {
        let r = BoundReport::infeasible("x", 0.0, 1);
        assert_eq!(r.achiever_digest(), r.clone().achiever_digest());
        assert_eq!(r.achiever_digest().len(), 16);
    }
}
