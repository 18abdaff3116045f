//! Nest trees: recursive CES / Cobb-Douglas aggregators over a partition of
//! goods.
//!
//! A node applies its norm to the values of its children, so a tree over
//! goods evaluates to a norm of norms (an Armington function). Quantities
//! propagate with each node's exponent `r`; prices propagate with the dual
//! exponent `s`, and for weighted nodes with the price transform
//! `‖θ^{1/s}(θ^{-1}P)‖_s` (Cobb-Douglas: `‖θ^{-1}P‖_{0,θ}`).
//!
//! Internal nodes are addressed by their pre-order index (root = 0) in every
//! report; leaves are addressed by good id.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lr::{self, Exponent, InequalityGapReport, PositiveVector, WeightVector};

/// Depth above which validation logs a warning.
pub const DEPTH_WARNING: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NestTree {
    Leaf(usize),
    Node {
        aggregator: Exponent,
        weights: Option<WeightVector>,
        children: Vec<NestTree>,
    },
}

impl NestTree {
    pub fn leaf(good: usize) -> Self {
        NestTree::Leaf(good)
    }

    pub fn node(
        aggregator: Exponent,
        weights: Option<WeightVector>,
        children: Vec<NestTree>,
    ) -> Self {
        NestTree::Node {
            aggregator,
            weights,
            children,
        }
    }

    pub fn ces(r: f64, children: Vec<NestTree>) -> Self {
        Self::node(Exponent::Finite(r), None, children)
    }

    pub fn weighted_ces(r: f64, weights: WeightVector, children: Vec<NestTree>) -> Self {
        Self::node(Exponent::Finite(r), Some(weights), children)
    }

    pub fn cobb_douglas(weights: WeightVector, children: Vec<NestTree>) -> Self {
        Self::node(Exponent::CobbDouglas, Some(weights), children)
    }

    /// Depth-1 CES over goods `0..n`.
    pub fn flat_ces(r: f64, n: usize) -> Self {
        Self::ces(r, (0..n).map(NestTree::Leaf).collect())
    }

    /// Depth-1 Cobb-Douglas over goods `0..weights.len()`.
    pub fn flat_cobb_douglas(weights: WeightVector) -> Self {
        let n = weights.len();
        Self::cobb_douglas(weights, (0..n).map(NestTree::Leaf).collect())
    }

    pub fn validate(self, n_goods: usize) -> Result<ValidatedTree> {
        ValidatedTree::new(self, n_goods)
    }

    /// Number of leaves.
    pub fn leaf_count(&self) -> usize {
        match self {
            NestTree::Leaf(_) => 1,
            NestTree::Node { children, .. } => children.iter().map(NestTree::leaf_count).sum(),
        }
    }

    /// Levels of internal nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            NestTree::Leaf(_) => 0,
            NestTree::Node { children, .. } => {
                1 + children.iter().map(NestTree::depth).max().unwrap_or(0)
            }
        }
    }
}

/// A child slot of an internal node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Child {
    Node(usize),
    Leaf(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeInfo {
    pub parent: Option<usize>,
    pub depth: usize,
    pub children: Vec<Child>,
    /// Goods beneath this node, sorted.
    pub goods: Vec<usize>,
}

/// Pre-order layout of the internal nodes with the goods each one spans.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeIndexing {
    pub nodes: Vec<NodeInfo>,
    /// Internal node directly above each good.
    pub leaf_parent: Vec<usize>,
    pub depth: usize,
}

impl NodeIndexing {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Checks the partition, exponent domain and weight arity invariants for a
/// good set of size `n_goods`.
pub fn validate_tree(tree: &NestTree, n_goods: usize) -> Result<NodeIndexing> {
    if let NestTree::Leaf(_) = tree {
        return Err(Error::InvalidTree("root must be an aggregator node".into()));
    }
    let mut indexing = NodeIndexing {
        nodes: Vec::new(),
        leaf_parent: vec![usize::MAX; n_goods],
        depth: 0,
    };
    index_node(tree, None, 1, &mut indexing)?;
    if let Some(missing) = indexing.leaf_parent.iter().position(|&p| p == usize::MAX) {
        return Err(Error::InvalidTree(format!(
            "good {missing} does not appear in the tree"
        )));
    }
    if indexing.depth > DEPTH_WARNING {
        log::warn!(
            "nest tree depth {} exceeds {DEPTH_WARNING}; check the configuration",
            indexing.depth
        );
    }
    Ok(indexing)
}

fn index_node(
    tree: &NestTree,
    parent: Option<usize>,
    depth: usize,
    out: &mut NodeIndexing,
) -> Result<usize> {
    let NestTree::Node {
        aggregator,
        weights,
        children,
    } = tree
    else {
        unreachable!("leaves are handled by the caller");
    };
    let id = out.nodes.len();
    check_aggregator(id, *aggregator, weights.as_ref(), children.len())?;
    out.depth = out.depth.max(depth);
    out.nodes.push(NodeInfo {
        parent,
        depth,
        children: Vec::with_capacity(children.len()),
        goods: Vec::new(),
    });
    let mut goods = Vec::new();
    for child in children {
        match child {
            NestTree::Leaf(good) => {
                let n_goods = out.leaf_parent.len();
                let slot = out.leaf_parent.get_mut(*good).ok_or_else(|| {
                    Error::InvalidTree(format!("good {good} is out of range for {n_goods} goods"))
                })?;
                if *slot != usize::MAX {
                    return Err(Error::InvalidTree(format!(
                        "good {good} appears more than once"
                    )));
                }
                *slot = id;
                goods.push(*good);
                out.nodes[id].children.push(Child::Leaf(*good));
            }
            NestTree::Node { .. } => {
                let child_id = index_node(child, Some(id), depth + 1, out)?;
                goods.extend_from_slice(&out.nodes[child_id].goods);
                out.nodes[id].children.push(Child::Node(child_id));
            }
        }
    }
    goods.sort_unstable();
    out.nodes[id].goods = goods;
    Ok(id)
}

fn check_aggregator(
    node: usize,
    aggregator: Exponent,
    weights: Option<&WeightVector>,
    n_children: usize,
) -> Result<()> {
    if n_children == 0 {
        return Err(Error::InvalidTree(format!("node {node} has no children")));
    }
    match aggregator {
        Exponent::Finite(r) if !r.is_finite() || r == 0.0 => {
            return Err(Error::InvalidTree(format!(
                "node {node}: finite exponent must be nonzero and finite, got {r}"
            )))
        }
        Exponent::Finite(r) if r > 1.0 => {
            return Err(Error::InvalidTree(format!(
                "node {node}: aggregators need r <= 1, got {r}"
            )))
        }
        Exponent::PosInfinity => {
            return Err(Error::InvalidTree(format!(
                "node {node}: aggregators need r <= 1, got +inf"
            )))
        }
        Exponent::CobbDouglas if weights.is_none() => {
            return Err(Error::InvalidTree(format!(
                "node {node}: Cobb-Douglas aggregator needs weights"
            )))
        }
        _ => {}
    }
    if let Some(w) = weights {
        if w.len() != n_children {
            return Err(Error::InvalidTree(format!(
                "node {node}: {} weights for {n_children} children",
                w.len()
            )));
        }
    }
    Ok(())
}

/// Which side of the duality a bottom-up pass evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Node exponent `r` applied to child quantities.
    Quantity,
    /// Dual exponent `s` applied to child prices.
    Price,
}

/// Root value plus the value at every internal node, in pre-order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeValues {
    pub root: f64,
    pub per_node: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct Aggregator {
    exponent: Exponent,
    weights: Option<WeightVector>,
}

/// An immutable, validated tree ready for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedTree {
    tree: NestTree,
    indexing: NodeIndexing,
    aggregators: Vec<Aggregator>,
}

impl ValidatedTree {
    pub fn new(tree: NestTree, n_goods: usize) -> Result<Self> {
        let indexing = validate_tree(&tree, n_goods)?;
        let mut aggregators = Vec::with_capacity(indexing.len());
        collect_aggregators(&tree, &mut aggregators);
        Ok(ValidatedTree {
            tree,
            indexing,
            aggregators,
        })
    }

    pub fn tree(&self) -> &NestTree {
        &self.tree
    }

    pub fn indexing(&self) -> &NodeIndexing {
        &self.indexing
    }

    pub fn n_goods(&self) -> usize {
        self.indexing.leaf_parent.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.indexing.len()
    }

    pub fn exponent(&self, node: usize) -> Exponent {
        self.aggregators[node].exponent
    }

    pub fn weights(&self, node: usize) -> Option<&WeightVector> {
        self.aggregators[node].weights.as_ref()
    }

    /// Exponent the price pass uses at `node`.
    pub fn price_exponent(&self, node: usize) -> Result<Exponent> {
        self.exponent(node).dual().map_err(|e| match e {
            Error::Domain(msg) => Error::Domain(format!("node {node}: {msg}")),
            other => other,
        })
    }

    /// `true` if every node admits the closed-form demand system.
    pub fn admits_demand(&self) -> bool {
        self.aggregators.iter().all(|a| a.exponent.admits_demand())
    }

    fn check_dim(&self, v: &PositiveVector) -> Result<()> {
        Error::check_len(self.n_goods(), v.len())
    }

    fn child_value(child: Child, leaf: &[f64], nodes: &[f64]) -> f64 {
        match child {
            Child::Node(i) => nodes[i],
            Child::Leaf(g) => leaf[g],
        }
    }

    /// Bottom-up pass in linear space using the `lr` norms directly, so a
    /// depth-1 tree reproduces [`lr::lr_norm`] / [`lr::weighted_norm`] exactly.
    pub fn evaluate(&self, leaf_values: &PositiveVector, side: Side) -> Result<NodeValues> {
        self.check_dim(leaf_values)?;
        let leaf = leaf_values.as_slice();
        let mut values = vec![0.0; self.n_nodes()];
        let mut buf = Vec::new();
        for id in (0..self.n_nodes()).rev() {
            buf.clear();
            buf.extend(
                self.indexing.nodes[id]
                    .children
                    .iter()
                    .map(|&c| Self::child_value(c, leaf, &values)),
            );
            let agg = &self.aggregators[id];
            values[id] = match (side, &agg.weights) {
                (Side::Quantity, None) => lr::norm_of(&buf, agg.exponent)?,
                (Side::Quantity, Some(w)) => {
                    lr::weighted_norm_of(&buf, w.as_slice(), agg.exponent)?
                }
                (Side::Price, None) => lr::norm_of(&buf, self.price_exponent(id)?)?,
                (Side::Price, Some(w)) => {
                    let t = w.as_slice();
                    for (v, t) in buf.iter_mut().zip(t) {
                        *v /= t;
                    }
                    lr::weighted_norm_of(&buf, t, self.price_exponent(id)?)?
                }
            };
        }
        Ok(NodeValues {
            root: values[0],
            per_node: values,
        })
    }

    /// Bottom-up pass on logarithms; finite wherever the inputs are, even
    /// when an aggregate overflows f64 (e.g. unweighted CES nests with `r`
    /// close to zero, whose scale grows like `n^{1/r}`).
    pub fn evaluate_log(&self, leaf_values: &PositiveVector, side: Side) -> Result<NodeValues> {
        self.check_dim(leaf_values)?;
        let leaf_logs: Vec<f64> = leaf_values.as_slice().iter().map(|v| v.ln()).collect();
        let mut logs = vec![0.0; self.n_nodes()];
        let mut buf = Vec::new();
        for id in (0..self.n_nodes()).rev() {
            buf.clear();
            buf.extend(
                self.indexing.nodes[id]
                    .children
                    .iter()
                    .map(|&c| Self::child_value(c, &leaf_logs, &logs)),
            );
            let agg = &self.aggregators[id];
            let theta = agg.weights.as_ref().map(WeightVector::as_slice);
            let exponent = match side {
                Side::Quantity => agg.exponent,
                Side::Price => {
                    if let Some(t) = theta {
                        for (l, t) in buf.iter_mut().zip(t) {
                            *l -= t.ln();
                        }
                    }
                    self.price_exponent(id)?
                }
            };
            logs[id] = lr::log_norm_from_logs(&buf, theta, exponent)?;
        }
        Ok(NodeValues {
            root: logs[0],
            per_node: logs,
        })
    }

    /// Utility `U(x)` and the aggregate quantity at every node.
    pub fn aggregate_quantity(&self, x: &PositiveVector) -> Result<NodeValues> {
        self.evaluate(x, Side::Quantity)
    }

    /// Unit-utility cost `‖p‖•` and the aggregate price at every node.
    pub fn aggregate_price(&self, p: &PositiveVector) -> Result<NodeValues> {
        self.evaluate(p, Side::Price)
    }

    pub fn utility(&self, x: &PositiveVector) -> Result<f64> {
        Ok(self.aggregate_quantity(x)?.root)
    }

    pub fn unit_cost(&self, p: &PositiveVector) -> Result<f64> {
        Ok(self.aggregate_price(p)?.root)
    }

    /// Direct-sum Hölder `x·p >= U(x) ‖p‖•`, with the right side assembled
    /// from log aggregates.
    pub fn direct_sum_holder_gap(
        &self,
        x: &PositiveVector,
        p: &PositiveVector,
    ) -> Result<InequalityGapReport> {
        self.check_dim(x)?;
        self.check_dim(p)?;
        let log_rhs =
            self.evaluate_log(x, Side::Quantity)?.root + self.evaluate_log(p, Side::Price)?.root;
        Ok(InequalityGapReport::new(x.dot(p)?, log_rhs.exp()))
    }
}

fn collect_aggregators(tree: &NestTree, out: &mut Vec<Aggregator>) {
    if let NestTree::Node {
        aggregator,
        weights,
        children,
    } = tree
    {
        out.push(Aggregator {
            exponent: *aggregator,
            weights: weights.clone(),
        });
        for child in children {
            collect_aggregators(child, out);
        }
    }
}

pub fn aggregate_quantity(tree: &ValidatedTree, x: &PositiveVector) -> Result<NodeValues> {
    tree.aggregate_quantity(x)
}

pub fn aggregate_price(tree: &ValidatedTree, p: &PositiveVector) -> Result<NodeValues> {
    tree.aggregate_price(p)
}

pub fn direct_sum_holder_gap(
    tree: &ValidatedTree,
    x: &PositiveVector,
    p: &PositiveVector,
) -> Result<InequalityGapReport> {
    tree.direct_sum_holder_gap(x, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lr::{lr_norm, weighted_norm};
    use crate::oracle::{random_tree, OracleConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(v: &[f64]) -> PositiveVector {
        PositiveVector::quantities(v.to_vec()).unwrap()
    }

    fn p(v: &[f64]) -> PositiveVector {
        PositiveVector::prices(v.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(NestTree::flat_ces(0.5, 3).validate(3).is_ok());
        let dup = NestTree::ces(
            0.5,
            vec![NestTree::Leaf(0), NestTree::Leaf(2), NestTree::Leaf(2)],
        );
        assert!(matches!(dup.validate(3), Err(Error::InvalidTree(_))));
        let cd = NestTree::cobb_douglas(w(&[0.5, 0.5]), (0..3).map(NestTree::Leaf).collect());
        assert!(matches!(cd.validate(3), Err(Error::InvalidTree(_))));
    }

    #[test]
    fn validation_errors() {
        let missing = NestTree::flat_ces(0.5, 2);
        assert!(missing.validate(3).is_err());
        let out_of_range = NestTree::ces(0.5, vec![NestTree::Leaf(0), NestTree::Leaf(5)]);
        assert!(out_of_range.validate(2).is_err());
        assert!(NestTree::Leaf(0).validate(1).is_err());
        assert!(NestTree::ces(0.5, vec![]).validate(0).is_err());
        assert!(NestTree::flat_ces(1.5, 2).validate(2).is_err());
        assert!(NestTree::flat_ces(0.0, 2).validate(2).is_err());
        assert!(
            NestTree::node(Exponent::PosInfinity, None, vec![NestTree::Leaf(0)])
                .validate(1)
                .is_err()
        );
        assert!(
            NestTree::node(Exponent::CobbDouglas, None, vec![NestTree::Leaf(0)])
                .validate(1)
                .is_err()
        );
        // r = 1 and Leontief are fine for quantities
        assert!(NestTree::flat_ces(1.0, 2).validate(2).is_ok());
        assert!(
            NestTree::node(Exponent::NegInfinity, None, vec![NestTree::Leaf(0)])
                .validate(1)
                .is_ok()
        );
    }

    #[test]
    fn indexing_is_preorder_with_disjoint_spans() {
        let tree = NestTree::ces(
            0.5,
            vec![
                NestTree::ces(-1.0, vec![NestTree::Leaf(3), NestTree::Leaf(0)]),
                NestTree::Leaf(1),
                NestTree::cobb_douglas(
                    w(&[0.4, 0.6]),
                    vec![
                        NestTree::Leaf(2),
                        NestTree::ces(0.2, vec![NestTree::Leaf(4)]),
                    ],
                ),
            ],
        );
        let idx = validate_tree(&tree, 5).unwrap();
        assert_eq!(idx.len(), 4);
        assert_eq!(idx.depth, 3);
        assert_eq!(idx.nodes[0].goods, vec![0, 1, 2, 3, 4]);
        assert_eq!(idx.nodes[1].goods, vec![0, 3]);
        assert_eq!(idx.nodes[2].goods, vec![2, 4]);
        assert_eq!(idx.nodes[3].goods, vec![4]);
        assert_eq!(idx.nodes[3].parent, Some(2));
        assert_eq!(idx.leaf_parent, vec![1, 0, 2, 1, 3]);
        assert_eq!(
            idx.nodes[0].children,
            vec![Child::Node(1), Child::Leaf(1), Child::Node(2)]
        );
    }

    #[test]
    fn aggregate_quantity_examples() {
        let flat = NestTree::flat_ces(0.5, 2).validate(2).unwrap();
        assert_eq!(flat.utility(&q(&[1.0, 1.0])).unwrap(), 4.0);

        // two singleton nests: the root norm of x itself
        let x = q(&[1.3, 0.4]);
        let singles = NestTree::ces(
            -2.0,
            vec![
                NestTree::ces(0.7, vec![NestTree::Leaf(0)]),
                NestTree::node(Exponent::NegInfinity, None, vec![NestTree::Leaf(1)]),
            ],
        )
        .validate(2)
        .unwrap();
        let expected = lr_norm(&x, Exponent::Finite(-2.0)).unwrap();
        assert!(close(singles.utility(&x).unwrap(), expected, 1e-15));

        let nested = NestTree::ces(
            0.5,
            vec![
                NestTree::ces(-1.0, vec![NestTree::Leaf(0), NestTree::Leaf(1)]),
                NestTree::ces(-1.0, vec![NestTree::Leaf(2), NestTree::Leaf(3)]),
            ],
        )
        .validate(4)
        .unwrap();
        let vals = nested
            .aggregate_quantity(&q(&[1.0, 1.0, 2.0, 2.0]))
            .unwrap();
        assert!(close(vals.per_node[1], 0.5, 1e-15));
        assert!(close(vals.per_node[2], 1.0, 1e-15));
        let expected = (0.5f64.sqrt() + 1.0).powi(2);
        assert!(close(vals.root, expected, 1e-14));
        assert!(close(vals.root, 2.914213562373095, 1e-12));
    }

    #[test]
    fn aggregate_price_examples() {
        let flat = NestTree::flat_ces(0.5, 2).validate(2).unwrap();
        assert!(close(flat.unit_cost(&p(&[1.0, 4.0])).unwrap(), 0.8, 1e-15));

        let cd = NestTree::flat_cobb_douglas(w(&[0.5, 0.5]))
            .validate(2)
            .unwrap();
        assert!(close(cd.unit_cost(&p(&[1.0, 4.0])).unwrap(), 4.0, 1e-15));

        // uniform prices: c·n^{1/s}
        for (r, n, c) in [(0.5, 2, 1.0), (-1.5, 5, 2.5), (0.3, 7, 0.4)] {
            let t = NestTree::flat_ces(r, n).validate(n).unwrap();
            let s = r / (r - 1.0);
            let got = t.unit_cost(&p(&vec![c; n])).unwrap();
            assert!(
                close(got, c * (n as f64).powf(1.0 / s), 1e-14),
                "r={r} n={n}"
            );
        }
    }

    #[test]
    fn price_pass_rejects_nonadmissible_aggregators() {
        let lin = NestTree::flat_ces(1.0, 2).validate(2).unwrap();
        assert!(matches!(
            lin.unit_cost(&p(&[1.0, 2.0])),
            Err(Error::Domain(_))
        ));
        let leon = NestTree::node(
            Exponent::NegInfinity,
            None,
            vec![NestTree::Leaf(0), NestTree::Leaf(1)],
        )
        .validate(2)
        .unwrap();
        assert!(leon.unit_cost(&p(&[1.0, 2.0])).is_err());
        assert!(leon.utility(&q(&[1.0, 2.0])).is_ok());
    }

    #[test]
    fn flat_tree_matches_lr_norms_bitwise() {
        let x = q(&[0.3, 2.2, 1.1, 7.5]);
        for r in [-3.0, -0.5, 0.25, 0.9, 1.0] {
            let t = NestTree::flat_ces(r, 4).validate(4).unwrap();
            assert_eq!(
                t.utility(&x).unwrap(),
                lr_norm(&x, Exponent::Finite(r)).unwrap()
            );
        }
        let theta = w(&[0.1, 0.2, 0.3, 0.4]);
        for e in [
            Exponent::CobbDouglas,
            Exponent::Finite(-2.0),
            Exponent::Finite(0.6),
        ] {
            let t = NestTree::node(e, Some(theta.clone()), (0..4).map(NestTree::Leaf).collect())
                .validate(4)
                .unwrap();
            assert_eq!(
                t.utility(&x).unwrap(),
                weighted_norm(&x, &theta, e).unwrap()
            );
        }
    }

    #[test]
    fn singleton_wrapping_is_identity() {
        let cfg = OracleConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(2..=6);
            let tree = random_tree(&mut rng, n, 3, &cfg);
            let x = q(&(0..n).map(|_| rng.gen_range(0.5..2.0)).collect::<Vec<_>>());
            let pr = p(&(0..n).map(|_| rng.gen_range(0.5..2.0)).collect::<Vec<_>>());
            let base = tree.clone().validate(n).unwrap();
            let r = rng.gen_range(-3.0..0.9);
            let wrapped = NestTree::ces(r, vec![tree]).validate(n).unwrap();
            let (u0, u1) = (
                base.evaluate_log(&x, Side::Quantity).unwrap(),
                wrapped.evaluate_log(&x, Side::Quantity).unwrap(),
            );
            let (p0, p1) = (
                base.evaluate_log(&pr, Side::Price).unwrap(),
                wrapped.evaluate_log(&pr, Side::Price).unwrap(),
            );
            assert!((u0.root - u1.root).abs() <= 1e-12 * u0.root.abs().max(1.0));
            assert!((p0.root - p1.root).abs() <= 1e-12 * p0.root.abs().max(1.0));
        }
    }

    #[test]
    fn log_pass_agrees_with_linear_pass() {
        let cfg = OracleConfig::default().with_zero_band(0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(1..=8);
            let tree = random_tree(&mut rng, n, 3, &cfg).validate(n).unwrap();
            let x = q(&(0..n).map(|_| rng.gen_range(0.2..5.0)).collect::<Vec<_>>());
            for side in [Side::Quantity, Side::Price] {
                let lin = tree.evaluate(&x, side).unwrap();
                let log = tree.evaluate_log(&x, side).unwrap();
                for (a, b) in lin.per_node.iter().zip(&log.per_node) {
                    assert!(close(*a, b.exp(), 1e-11), "{side:?}: {a} vs {}", b.exp());
                }
            }
        }
    }

    #[test]
    fn aggregates_are_homogeneous() {
        let cfg = OracleConfig::default().with_zero_band(0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(1..=8);
            let tree = random_tree(&mut rng, n, 3, &cfg).validate(n).unwrap();
            let x = q(&(0..n).map(|_| rng.gen_range(0.5..2.0)).collect::<Vec<_>>());
            let alpha = rng.gen_range(0.1..10.0);
            let xs = x.scaled(alpha).unwrap();
            for side in [Side::Quantity, Side::Price] {
                let a = tree.evaluate(&xs, side).unwrap().root;
                let b = alpha * tree.evaluate(&x, side).unwrap().root;
                assert!(close(a, b, 1e-12), "{side:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn price_pass_uses_dual_exponents() {
        let tree = NestTree::ces(
            -0.5,
            vec![
                NestTree::ces(0.4, vec![NestTree::Leaf(0), NestTree::Leaf(1)]),
                NestTree::cobb_douglas(w(&[0.3, 0.7]), vec![NestTree::Leaf(2), NestTree::Leaf(3)]),
            ],
        )
        .validate(4)
        .unwrap();
        for id in 0..tree.n_nodes() {
            assert_eq!(
                tree.price_exponent(id).unwrap(),
                tree.exponent(id).dual().unwrap()
            );
        }
        assert_eq!(
            tree.price_exponent(1).unwrap(),
            Exponent::Finite(0.4 / (0.4 - 1.0))
        );
        assert_eq!(tree.price_exponent(2).unwrap(), Exponent::CobbDouglas);
    }

    #[test]
    fn direct_sum_examples() {
        let x = q(&[1.2]);
        let pr = p(&[3.4]);
        let single = NestTree::ces(0.3, vec![NestTree::Leaf(0)])
            .validate(1)
            .unwrap();
        let rep = single.direct_sum_holder_gap(&x, &pr).unwrap();
        assert!(rep.relative_gap.abs() < 1e-15);

        let flat = NestTree::flat_ces(0.5, 2).validate(2).unwrap();
        let rep = flat
            .direct_sum_holder_gap(&q(&[0.64, 0.04]), &p(&[1.0, 4.0]))
            .unwrap();
        assert!(close(rep.lhs, 0.8, 1e-15));
        assert!(rep.gap.abs() < 1e-15);
    }
}
