//! Independent checks for the closed forms.
//!
//! Nothing here calls into [`crate::demand`]: the brute-force minimizer only
//! evaluates utility, and the finite-difference helpers only evaluate the
//! function they are handed.
//!
//! Random instances come from a ChaCha stream seeded per sample with a
//! mix of the master seed and the sample index, so a report is a pure
//! function of the configuration regardless of how many threads run it.
//!
//! Random trees: the target depth is `1 + G` with `G ~ Geometric(1/2)`
//! (mean 2), capped at the requested maximum. Every node above the target
//! depth splits its goods into 2–4 nonempty groups; singleton groups become
//! leaves, larger groups become subtrees. A node at the target depth takes
//! its goods as leaves. Each node is Cobb-Douglas with probability
//! `cd_probability`, otherwise CES with `r` uniform on `r_range` (redrawn
//! while `|r| < zero_band`), carrying weights with probability
//! `weighted_ces_probability`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::lr::{self, Exponent, InequalityGapReport, PositiveVector, WeightVector};
use crate::tree::{NestTree, Side, ValidatedTree};

/// Relative slack below which an inequality instance counts as violated.
pub const VIOLATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub seed: u64,
    pub n_samples: usize,
    /// Inclusive range of goods per random instance.
    pub dim_range: (usize, usize),
    pub r_range: (f64, f64),
    /// Finite-`r` draws with `|r|` below this are redrawn.
    pub zero_band: f64,
    pub cd_probability: f64,
    pub weighted_ces_probability: f64,
    pub max_depth: usize,
    pub fd_step_rel: f64,
    pub refine_iters: usize,
    /// Random simplex directions tried before local refinement.
    pub simplex_draws: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            seed: 42,
            n_samples: 10_000,
            dim_range: (2, 8),
            r_range: (-5.0, 0.99),
            zero_band: 1e-3,
            cd_probability: 0.25,
            weighted_ces_probability: 0.25,
            max_depth: 3,
            fd_step_rel: 1e-5,
            refine_iters: 60,
            simplex_draws: 2_000,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        let (lo, hi) = self.dim_range;
        if lo == 0 || lo > hi {
            return fail(format!(
                "dim_range ({lo}, {hi}) must satisfy 1 <= min <= max"
            ));
        }
        let (rlo, rhi) = self.r_range;
        if !(rlo.is_finite() && rhi.is_finite() && rlo < rhi) {
            return fail(format!(
                "r_range ({rlo}, {rhi}) must be finite with min < max"
            ));
        }
        if rlo < -5.0 || rhi > 0.99 {
            return fail(format!("r_range ({rlo}, {rhi}) must lie within [-5, 0.99]"));
        }
        if self.zero_band.is_nan()
            || self.zero_band < 0.0
            || (rlo > -self.zero_band && rhi < self.zero_band)
        {
            return fail(format!(
                "zero_band {} leaves no admissible r",
                self.zero_band
            ));
        }
        for (name, p) in [
            ("cd_probability", self.cd_probability),
            ("weighted_ces_probability", self.weighted_ces_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} = {p} is not a probability"));
            }
        }
        if !(self.fd_step_rel > 0.0 && self.fd_step_rel < 1.0) {
            return fail(format!(
                "fd_step_rel = {} must be in (0, 1)",
                self.fd_step_rel
            ));
        }
        if self.max_depth == 0 || self.refine_iters == 0 || self.simplex_draws == 0 {
            return fail("max_depth, refine_iters and simplex_draws must be positive".into());
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.n_samples = n;
        self
    }

    pub fn with_zero_band(mut self, band: f64) -> Self {
        self.zero_band = band;
        self
    }

    pub fn with_r_range(mut self, lo: f64, hi: f64) -> Self {
        self.r_range = (lo, hi);
        self
    }

    pub fn with_dim_range(mut self, lo: usize, hi: usize) -> Self {
        self.dim_range = (lo, hi);
        self
    }

    /// Generator for sample `index`, independent of every other sample.
    pub fn sample_rng(&self, index: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ splitmix64(index)))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Aggregate result of a sampling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n_tested: usize,
    /// Instances whose relative gap fell below `-VIOLATION_TOLERANCE`.
    pub n_violations: usize,
    /// Smallest relative gap seen; `None` when nothing was tested.
    pub worst_relative_gap: Option<f64>,
    pub worst_case_inputs: Option<serde_json::Value>,
}

impl OracleReport {
    pub fn empty() -> Self {
        OracleReport {
            n_tested: 0,
            n_violations: 0,
            worst_relative_gap: None,
            worst_case_inputs: None,
        }
    }

    fn record(&mut self, gap: &InequalityGapReport, inputs: impl FnOnce() -> serde_json::Value) {
        self.n_tested += 1;
        if !gap.holds(VIOLATION_TOLERANCE) {
            self.n_violations += 1;
        }
        // a NaN gap counts as a violation above but never becomes the worst case
        let worse = match self.worst_relative_gap {
            _ if gap.relative_gap.is_nan() => false,
            None => true,
            Some(w) => gap.relative_gap < w,
        };
        if worse {
            self.worst_relative_gap = Some(gap.relative_gap);
            self.worst_case_inputs = Some(inputs());
        }
    }

    fn merge(&mut self, other: &OracleReport) {
        self.n_tested += other.n_tested;
        self.n_violations += other.n_violations;
        if let Some(g) = other.worst_relative_gap {
            if self.worst_relative_gap.is_none_or(|w| g < w) {
                self.worst_relative_gap = Some(g);
                self.worst_case_inputs = other.worst_case_inputs.clone();
            }
        }
    }
}

/// Per-inequality reports from [`sample_inequality_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalitySuiteReport {
    pub young: OracleReport,
    pub reverse_holder: OracleReport,
    pub l0_holder: OracleReport,
    pub direct_sum_holder: OracleReport,
}

impl InequalitySuiteReport {
    pub fn combined(&self) -> OracleReport {
        let mut all = OracleReport::empty();
        for r in [
            &self.young,
            &self.reverse_holder,
            &self.l0_holder,
            &self.direct_sum_holder,
        ] {
            all.merge(r);
        }
        all
    }
}

pub fn draw_r<R: Rng>(rng: &mut R, cfg: &OracleConfig) -> f64 {
    loop {
        let r = rng.gen_range(cfg.r_range.0..cfg.r_range.1);
        if r.abs() >= cfg.zero_band {
            return r;
        }
    }
}

pub fn random_weights<R: Rng>(rng: &mut R, n: usize) -> WeightVector {
    let masses: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    WeightVector::from_masses(&masses).expect("masses are positive")
}

/// Entries log-uniform on `[lo, hi]`.
pub fn random_positive<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|_| rng.gen_range(a..=b).exp()).collect()
}

fn random_aggregator<R: Rng>(
    rng: &mut R,
    n_children: usize,
    cfg: &OracleConfig,
) -> (Exponent, Option<WeightVector>) {
    if rng.gen_bool(cfg.cd_probability) {
        (Exponent::CobbDouglas, Some(random_weights(rng, n_children)))
    } else {
        let r = draw_r(rng, cfg);
        let weights = rng
            .gen_bool(cfg.weighted_ces_probability)
            .then(|| random_weights(rng, n_children));
        (Exponent::Finite(r), weights)
    }
}

/// Random tree over goods `0..n_goods` (shuffled across leaves) with at most
/// `max_depth` levels of aggregators.
pub fn random_tree<R: Rng>(
    rng: &mut R,
    n_goods: usize,
    max_depth: usize,
    cfg: &OracleConfig,
) -> NestTree {
    let mut depth = 1;
    while depth < max_depth && rng.gen_bool(0.5) {
        depth += 1;
    }
    let mut goods: Vec<usize> = (0..n_goods).collect();
    goods.shuffle(rng);
    build_subtree(rng, goods, 1, depth, cfg)
}

fn build_subtree<R: Rng>(
    rng: &mut R,
    goods: Vec<usize>,
    level: usize,
    depth: usize,
    cfg: &OracleConfig,
) -> NestTree {
    let children: Vec<NestTree> = if level >= depth || goods.len() == 1 {
        goods.into_iter().map(NestTree::Leaf).collect()
    } else {
        let k = rng.gen_range(2..=4).min(goods.len());
        let mut cuts: Vec<usize> = (1..goods.len()).collect();
        cuts.shuffle(rng);
        let mut cuts = cuts[..k - 1].to_vec();
        cuts.sort_unstable();
        let mut groups = Vec::with_capacity(k);
        let mut start = 0;
        for cut in cuts.into_iter().chain(std::iter::once(goods.len())) {
            groups.push(goods[start..cut].to_vec());
            start = cut;
        }
        groups
            .into_iter()
            .map(|g| {
                if g.len() == 1 {
                    NestTree::Leaf(g[0])
                } else {
                    build_subtree(rng, g, level + 1, depth, cfg)
                }
            })
            .collect()
    };
    let (aggregator, weights) = random_aggregator(rng, children.len(), cfg);
    NestTree::node(aggregator, weights, children)
}

/// Best bundle found by [`minimize_expenditure_bruteforce`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForceResult {
    pub bundle: PositiveVector,
    pub cost: f64,
    pub log_cost: f64,
}

/// Directions a coordinate move may scale: each good alone, plus the goods
/// under every non-root node.
fn search_blocks(tree: &ValidatedTree) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = (0..tree.n_goods()).map(|g| vec![g]).collect();
    blocks.extend(
        tree.indexing()
            .nodes
            .iter()
            .skip(1)
            .filter(|n| n.goods.len() > 1)
            .map(|n| n.goods.clone()),
    );
    blocks
}

/// Minimizes `p·x` subject to `U(x) = u` without using any closed form.
///
/// `U` is homogeneous of degree one, so along the ray `t·d` the cost of
/// reaching `u` is `u (p·d) / U(d)`. The ray ratio is minimized over the
/// open simplex: first by `simplex_draws` uniform directions, then by
/// `refine_iters` rounds of multiplicative moves on single goods and on
/// whole nests, with an expanding step inside a round and a shrinking step
/// between rounds. Iterates stay strictly positive by construction.
pub fn minimize_expenditure_bruteforce(
    tree: &ValidatedTree,
    u: f64,
    p: &PositiveVector,
    cfg: &OracleConfig,
) -> Result<BruteForceResult> {
    if !(u.is_finite() && u > 0.0) {
        return Err(Error::domain(format!(
            "utility must be finite and > 0, got {u}"
        )));
    }
    Error::check_len(tree.n_goods(), p.len())?;
    let n = tree.n_goods();
    let prices = p.as_slice();

    let log_ratio = |d: &[f64]| -> Result<f64> {
        let bundle = PositiveVector::quantities(d.to_vec())?;
        Ok(lr::dot(prices, d).ln() - tree.evaluate_log(&bundle, Side::Quantity)?.root)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(cfg.seed ^ 0xB0B5_1DE5));
    let mut best = vec![1.0 / n as f64; n];
    let mut best_val = log_ratio(&best)?;
    let mut candidate = vec![0.0; n];
    for _ in 0..cfg.simplex_draws {
        let mut total = 0.0;
        for c in candidate.iter_mut() {
            // exponential spacings give a uniform point on the simplex
            *c = -(1.0 - rng.gen::<f64>()).ln() + f64::MIN_POSITIVE;
            total += *c;
        }
        candidate.iter_mut().for_each(|c| *c /= total);
        let val = log_ratio(&candidate)?;
        if val < best_val {
            best_val = val;
            best.copy_from_slice(&candidate);
        }
    }

    if n > 1 {
        let blocks = search_blocks(tree);
        let mut step = 1.0f64;
        let mut trial = best.clone();
        for _ in 0..cfg.refine_iters {
            for block in &blocks {
                for direction in [1.0, -1.0] {
                    let mut improved = false;
                    let mut mult = step;
                    for _ in 0..40 {
                        trial.copy_from_slice(&best);
                        let factor = (direction * mult).exp();
                        for &g in block {
                            trial[g] *= factor;
                        }
                        if trial.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                            break;
                        }
                        let val = log_ratio(&trial)?;
                        if val < best_val {
                            best_val = val;
                            best.copy_from_slice(&trial);
                            improved = true;
                            mult *= 2.0;
                        } else {
                            break;
                        }
                    }
                    if improved {
                        break;
                    }
                }
            }
            let total: f64 = best.iter().sum();
            best.iter_mut().for_each(|v| *v /= total);
            best_val = log_ratio(&best)?;
            step *= 0.7;
        }
    }

    let direction = PositiveVector::quantities(best.clone())?;
    let log_u_dir = tree.evaluate_log(&direction, Side::Quantity)?.root;
    let scale = (u.ln() - log_u_dir).exp();
    let bundle = PositiveVector::quantities(best.iter().map(|d| d * scale).collect())
        .map_err(|e| Error::domain(format!("brute-force bundle not representable: {e}")))?;
    let log_cost = u.ln() + best_val;
    Ok(BruteForceResult {
        bundle,
        cost: log_cost.exp(),
        log_cost,
    })
}

/// Central differences with step `h_i = fd_step_rel · p_i` per coordinate.
pub fn finite_diff_gradient<F>(f: F, p: &PositiveVector, fd_step_rel: f64) -> Result<Vec<f64>>
where
    F: Fn(&PositiveVector) -> Result<f64>,
{
    if !(fd_step_rel > 0.0 && fd_step_rel < 1.0) {
        return Err(Error::domain(format!(
            "relative step {fd_step_rel} would leave the positive orthant"
        )));
    }
    let mut point = p.as_slice().to_vec();
    let mut grad = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        let x = point[i];
        let h = fd_step_rel * x;
        point[i] = x + h;
        let up = f(&PositiveVector::new(point.clone(), p.role())?)?;
        point[i] = x - h;
        let down = f(&PositiveVector::new(point.clone(), p.role())?)?;
        point[i] = x;
        // the realized step, which can differ from h by rounding
        grad.push((up - down) / ((x + h) - (x - h)));
    }
    Ok(grad)
}

/// Central difference of a scalar function at `x > 0`.
pub fn finite_diff_scalar<F>(f: F, x: f64, fd_step_rel: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let h = fd_step_rel * x;
    if !(h > 0.0 && x - h > 0.0) {
        return Err(Error::domain(format!("step {h} at {x} leaves the domain")));
    }
    Ok((f(x + h)? - f(x - h)?) / ((x + h) - (x - h)))
}

/// Runs every inequality family on `cfg.n_samples` seeded instances each.
pub fn sample_inequality_suite(cfg: &OracleConfig) -> Result<InequalitySuiteReport> {
    cfg.validate()?;
    let per_sample: Vec<[(InequalityGapReport, serde_json::Value); 4]> = (0..cfg.n_samples as u64)
        .into_par_iter()
        .map(|i| sample_one(cfg, i))
        .collect::<Result<_>>()?;

    let mut reports = [
        OracleReport::empty(),
        OracleReport::empty(),
        OracleReport::empty(),
        OracleReport::empty(),
    ];
    for sample in per_sample {
        for (report, (gap, inputs)) in reports.iter_mut().zip(sample) {
            report.record(&gap, || inputs);
        }
    }
    let [young, reverse_holder, l0_holder, direct_sum_holder] = reports;
    Ok(InequalitySuiteReport {
        young,
        reverse_holder,
        l0_holder,
        direct_sum_holder,
    })
}

/// All four inequality families pooled into one report.
pub fn sample_inequalities(cfg: &OracleConfig) -> Result<OracleReport> {
    Ok(sample_inequality_suite(cfg)?.combined())
}

fn sample_one(
    cfg: &OracleConfig,
    index: u64,
) -> Result<[(InequalityGapReport, serde_json::Value); 4]> {
    let mut rng = cfg.sample_rng(index);
    let (lo, hi) = cfg.dim_range;

    let a = 10.0 * (1.0 - rng.gen::<f64>());
    let b = 10.0 * (1.0 - rng.gen::<f64>());
    let r = draw_r(&mut rng, cfg);
    let young = (
        lr::young_gap(a, b, r)?,
        json!({"kind": "young", "index": index, "a": a, "b": b, "r": r}),
    );

    let n = rng.gen_range(lo..=hi);
    let x = random_positive(&mut rng, n, 1e-2, 1e2);
    let y = random_positive(&mut rng, n, 1e-2, 1e2);
    let r = draw_r(&mut rng, cfg);
    let holder = (
        lr::reverse_holder_gap(
            &PositiveVector::quantities(x.clone())?,
            &PositiveVector::prices(y.clone())?,
            r,
        )?,
        json!({"kind": "reverse_holder", "index": index, "x": x, "y": y, "r": r}),
    );

    let n = rng.gen_range(lo..=hi);
    let x = random_positive(&mut rng, n, 1e-2, 1e2);
    let y = random_positive(&mut rng, n, 1e-2, 1e2);
    let theta = random_weights(&mut rng, n);
    let l0 = (
        lr::l0_holder_gap(
            &PositiveVector::quantities(x.clone())?,
            &PositiveVector::prices(y.clone())?,
            &theta,
        )?,
        json!({"kind": "l0_holder", "index": index, "x": x, "y": y, "theta": theta.as_slice()}),
    );

    let n = rng.gen_range(lo..=hi);
    let tree = random_tree(&mut rng, n, cfg.max_depth, cfg);
    let x = random_positive(&mut rng, n, 1e-2, 1e2);
    let p = random_positive(&mut rng, n, 1e-2, 1e2);
    let validated = tree.clone().validate(n)?;
    let direct = (
        validated.direct_sum_holder_gap(
            &PositiveVector::quantities(x.clone())?,
            &PositiveVector::prices(p.clone())?,
        )?,
        json!({
            "kind": "direct_sum_holder",
            "index": index,
            "tree": serde_json::to_value(&tree).unwrap_or_default(),
            "x": x,
            "p": p,
        }),
    );
    Ok([young, holder, l0, direct])
}

/// Outcome of comparing the brute-force minimum with the closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub n_tested: usize,
    /// Instances off by more than `cost_tolerance` in relative cost.
    pub n_mismatches: usize,
    /// Instances where the search beat the closed form by more than
    /// `VIOLATION_TOLERANCE`, i.e. counterexamples to the bound.
    pub n_undercuts: usize,
    pub max_relative_error: f64,
    /// Most negative `(bruteforce - closed) / closed`.
    pub min_signed_error: f64,
    pub cost_tolerance: f64,
}

/// One random (tree, u, p) instance for the demand-level checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandInstance {
    pub tree: NestTree,
    pub u: f64,
    pub prices: Vec<f64>,
}

impl DemandInstance {
    pub fn validated(&self) -> Result<ValidatedTree> {
        self.tree.clone().validate(self.prices.len())
    }

    pub fn price_vector(&self) -> Result<PositiveVector> {
        PositiveVector::prices(self.prices.clone())
    }
}

/// Random instance with `u` and prices uniform on `[0.5, 2]`.
pub fn random_demand_instance(cfg: &OracleConfig, index: u64) -> DemandInstance {
    let mut rng = cfg.sample_rng(index);
    let n = rng.gen_range(cfg.dim_range.0..=cfg.dim_range.1);
    let tree = random_tree(&mut rng, n, cfg.max_depth, cfg);
    let u = rng.gen_range(0.5..=2.0);
    let prices = (0..n).map(|_| rng.gen_range(0.5..=2.0)).collect();
    DemandInstance { tree, u, prices }
}

/// Brute force against the closed form over `cfg.n_samples` instances.
/// Costs are compared through their logarithms.
pub fn oracle_agreement(cfg: &OracleConfig, cost_tolerance: f64) -> Result<AgreementReport> {
    cfg.validate()?;
    let errors: Vec<f64> = (0..cfg.n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let inst = random_demand_instance(cfg, i);
            let tree = inst.validated()?;
            let p = inst.price_vector()?;
            let brute = minimize_expenditure_bruteforce(&tree, inst.u, &p, cfg)?;
            let closed = crate::demand::log_expenditure(&tree, inst.u, &p)?;
            Ok((brute.log_cost - closed).exp_m1())
        })
        .collect::<Result<_>>()?;
    Ok(AgreementReport {
        n_tested: errors.len(),
        n_mismatches: errors.iter().filter(|e| e.abs() > cost_tolerance).count(),
        n_undercuts: errors.iter().filter(|e| **e < -VIOLATION_TOLERANCE).count(),
        max_relative_error: errors.iter().fold(0.0, |m, e| m.max(e.abs())),
        min_signed_error: errors.iter().copied().fold(f64::INFINITY, f64::min),
        cost_tolerance,
    })
}
