//! Closed-form demand systems on nest trees.
//!
//! Everything is driven by the unit-utility cost `‖p‖•` (the root of the
//! price pass in [`crate::tree`]):
//!
//! - expenditure `e(u, p) = u ‖p‖•`,
//! - indirect utility `ν(m, p) = m / ‖p‖•`,
//! - Marshallian demand by cascading the budget down the tree: a CES node
//!   with dual exponent `s` hands child `i` the share `P_i^s / ‖P‖_s^s`
//!   (weighted: `θ_i (P_i/θ_i)^s / ‖θ^{1/s}(θ^{-1}P)‖_s^s`), a Cobb-Douglas
//!   node hands out `θ_i`, and a good with budget `b` and price `p_i`
//!   demands `b / p_i`,
//! - Hicksian demand as the Marshallian demand at income `e(u, p)`.
//!
//! Shares are computed on log prices and never by differentiation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lr::{Exponent, PositiveVector};
use crate::tree::{Child, Side, ValidatedTree};

/// Output of a demand query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandReport {
    pub quantities: PositiveVector,
    /// Share of each internal node in its parent's budget, pre-order; the
    /// root holds `1`.
    pub node_budget_shares: Vec<f64>,
    /// Share of total budget spent on each good.
    pub leaf_budget_shares: Vec<f64>,
    pub expenditure: f64,
    pub utility: f64,
    /// Unit-utility cost (aggregate price) of every internal node.
    pub price_index_per_node: Vec<f64>,
}

/// Budget shares, which do not depend on income.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetShares {
    /// Share of each internal node within its parent, pre-order; root `1`.
    pub node: Vec<f64>,
    /// Share of each good within the node directly above it.
    pub leaf_within_parent: Vec<f64>,
    /// Share of each good in total expenditure.
    pub leaf: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriceIndexResult {
    pub index: f64,
    pub numerator_cost: f64,
    pub denominator_cost: f64,
}

fn check_tree(tree: &ValidatedTree) -> Result<()> {
    if tree.admits_demand() {
        return Ok(());
    }
    let bad = (0..tree.n_nodes())
        .find(|&i| !tree.exponent(i).admits_demand())
        .unwrap_or(0);
    Err(Error::domain(format!(
        "node {bad} has aggregator {:?}; closed-form demand needs r < 1 (r = 0 only as weighted Cobb-Douglas)",
        tree.exponent(bad)
    )))
}

fn check_positive(value: f64, what: &str) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{what} must be finite and > 0, got {value}"
        )))
    }
}

fn check_prices(tree: &ValidatedTree, p: &PositiveVector) -> Result<()> {
    check_tree(tree)?;
    Error::check_len(tree.n_goods(), p.len())
}

/// `e(u, p) = u ‖p‖•`, the minimum of `p·x` over bundles with `U(x) = u`.
pub fn expenditure(tree: &ValidatedTree, u: f64, p: &PositiveVector) -> Result<f64> {
    check_positive(u, "utility")?;
    check_prices(tree, p)?;
    if tree.n_goods() == 1 {
        return Ok(u * p[0]);
    }
    Ok(u * tree.unit_cost(p)?)
}

/// `ln e(u, p)`; stays finite when the expenditure itself would not be
/// representable.
pub fn log_expenditure(tree: &ValidatedTree, u: f64, p: &PositiveVector) -> Result<f64> {
    check_positive(u, "utility")?;
    check_prices(tree, p)?;
    Ok(u.ln() + tree.evaluate_log(p, Side::Price)?.root)
}

/// `ν(m, p) = m / ‖p‖•`.
pub fn indirect_utility(tree: &ValidatedTree, m: f64, p: &PositiveVector) -> Result<f64> {
    check_positive(m, "income")?;
    check_prices(tree, p)?;
    if tree.n_goods() == 1 {
        return Ok(m / p[0]);
    }
    Ok(m / tree.unit_cost(p)?)
}

/// Budget shares at every node and good.
pub fn budget_shares(tree: &ValidatedTree, p: &PositiveVector) -> Result<BudgetShares> {
    check_prices(tree, p)?;
    let log_p: Vec<f64> = p.as_slice().iter().map(|v| v.ln()).collect();
    let log_node = tree.evaluate_log(p, Side::Price)?.per_node;
    let indexing = tree.indexing();

    let mut node = vec![0.0; tree.n_nodes()];
    let mut leaf_within_parent = vec![0.0; tree.n_goods()];
    let mut leaf = vec![0.0; tree.n_goods()];
    let mut absolute = vec![0.0; tree.n_nodes()];
    node[0] = 1.0;
    absolute[0] = 1.0;

    let mut raw = Vec::new();
    // pre-order visits every parent before its children
    for id in 0..tree.n_nodes() {
        let children = &indexing.nodes[id].children;
        let weights = tree.weights(id).map(|w| w.as_slice());
        let exponent = tree.price_exponent(id)?;
        raw.clear();
        for (k, &child) in children.iter().enumerate() {
            let log_child = match child {
                Child::Node(c) => log_node[c],
                Child::Leaf(g) => log_p[g],
            };
            let share = match (exponent, weights) {
                (Exponent::CobbDouglas, Some(t)) => t[k],
                (Exponent::Finite(s), None) => (s * (log_child - log_node[id])).exp(),
                (Exponent::Finite(s), Some(t)) => {
                    let lt = t[k].ln();
                    (lt + s * (log_child - lt - log_node[id])).exp()
                }
                (e, _) => return Err(Error::domain(format!("node {id}: no shares for {e:?}"))),
            };
            raw.push(share);
        }
        // the raw shares already sum to one analytically; renormalizing removes round-off
        let total: f64 = raw.iter().sum();
        for (&child, share) in children.iter().zip(&raw) {
            let share = share / total;
            match child {
                Child::Node(c) => {
                    node[c] = share;
                    absolute[c] = absolute[id] * share;
                }
                Child::Leaf(g) => {
                    leaf_within_parent[g] = share;
                    leaf[g] = absolute[id] * share;
                }
            }
        }
    }
    Ok(BudgetShares {
        node,
        leaf_within_parent,
        leaf,
    })
}

fn allocate(
    tree: &ValidatedTree,
    m: f64,
    p: &PositiveVector,
    utility: f64,
) -> Result<DemandReport> {
    let shares = budget_shares(tree, p)?;
    let quantities: Vec<f64> = shares
        .leaf
        .iter()
        .zip(p.as_slice())
        .map(|(share, price)| m * share / price)
        .collect();
    let quantities = PositiveVector::quantities(quantities)
        .map_err(|e| Error::domain(format!("demand is not representable: {e}")))?;
    Ok(DemandReport {
        quantities,
        node_budget_shares: shares.node,
        leaf_budget_shares: shares.leaf,
        expenditure: m,
        utility,
        price_index_per_node: tree.aggregate_price(p)?.per_node,
    })
}

/// Utility-maximizing bundle at income `m`.
pub fn marshallian_demand(
    tree: &ValidatedTree,
    m: f64,
    p: &PositiveVector,
) -> Result<DemandReport> {
    let utility = indirect_utility(tree, m, p)?;
    allocate(tree, m, p, utility)
}

/// Cost-minimizing bundle at utility `u`, computed as the Marshallian
/// demand at income `e(u, p)`.
pub fn hicksian_demand(tree: &ValidatedTree, u: f64, p: &PositiveVector) -> Result<DemandReport> {
    let e = expenditure(tree, u, p)?;
    if tree.n_goods() == 1 {
        let mut report = allocate(tree, e, p, u)?;
        report.quantities = PositiveVector::quantities(vec![u])?;
        return Ok(report);
    }
    allocate(tree, e, p, u)
}

/// Konüs cost-of-living index `e(u, p_new) / e(u, p_old)`, which does not
/// depend on `u` for these homothetic preferences.
pub fn konus_index(
    tree: &ValidatedTree,
    p_new: &PositiveVector,
    p_old: &PositiveVector,
) -> Result<PriceIndexResult> {
    let numerator_cost = expenditure(tree, 1.0, p_new)?;
    let denominator_cost = expenditure(tree, 1.0, p_old)?;
    Ok(PriceIndexResult {
        index: numerator_cost / denominator_cost,
        numerator_cost,
        denominator_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lr::WeightVector;
    use crate::tree::NestTree;

    fn p(v: &[f64]) -> PositiveVector {
        PositiveVector::prices(v.to_vec()).unwrap()
    }

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    fn flat_half() -> ValidatedTree {
        NestTree::flat_ces(0.5, 2).validate(2).unwrap()
    }

    #[test]
    fn expenditure_examples() {
        let t = flat_half();
        assert!(close(
            expenditure(&t, 1.0, &p(&[1.0, 4.0])).unwrap(),
            0.8,
            1e-15
        ));
        let e1 = expenditure(&t, 1.0, &p(&[1.3, 0.2])).unwrap();
        let e2 = expenditure(&t, 2.0, &p(&[1.3, 0.2])).unwrap();
        assert_eq!(e2, 2.0 * e1);
        // Π(p_i/θ_i)^{θ_i} = 0.3^{-0.3} 0.7^{-0.7}
        let cd = NestTree::flat_cobb_douglas(w(&[0.3, 0.7]))
            .validate(2)
            .unwrap();
        let e = expenditure(&cd, 1.0, &p(&[1.0, 1.0])).unwrap();
        assert!(close(e, 1.842_022_775_037_313, 1e-12), "{e}");
    }

    #[test]
    fn nonadmissible_inputs_are_rejected() {
        let lin = NestTree::flat_ces(1.0, 2).validate(2).unwrap();
        assert!(matches!(
            expenditure(&lin, 1.0, &p(&[1.0, 2.0])),
            Err(Error::Domain(_))
        ));
        let leon = NestTree::node(
            Exponent::NegInfinity,
            None,
            vec![NestTree::Leaf(0), NestTree::Leaf(1)],
        )
        .validate(2)
        .unwrap();
        assert!(hicksian_demand(&leon, 1.0, &p(&[1.0, 2.0])).is_err());
        let t = flat_half();
        assert!(expenditure(&t, 0.0, &p(&[1.0, 2.0])).is_err());
        assert!(expenditure(&t, -1.0, &p(&[1.0, 2.0])).is_err());
        assert!(marshallian_demand(&t, 0.0, &p(&[1.0, 2.0])).is_err());
        assert!(expenditure(&t, 1.0, &p(&[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn hicksian_examples() {
        let t = flat_half();
        let rep = hicksian_demand(&t, 1.0, &p(&[1.0, 4.0])).unwrap();
        assert!(close(rep.quantities[0], 0.64, 1e-14));
        assert!(close(rep.quantities[1], 0.04, 1e-14));
        assert!(close(t.utility(&rep.quantities).unwrap(), 1.0, 1e-14));
        assert!(close(rep.expenditure, 0.8, 1e-14));

        let single = NestTree::ces(0.5, vec![NestTree::Leaf(0)])
            .validate(1)
            .unwrap();
        let rep = hicksian_demand(&single, 3.5, &p(&[2.0])).unwrap();
        assert_eq!(rep.quantities.as_slice(), &[3.5]);
        assert_eq!(rep.expenditure, 7.0);

        // uniform prices: every coordinate u·n^{-1/r}
        for (r, n) in [(0.5, 2), (-2.0, 5), (0.8, 3)] {
            let t = NestTree::flat_ces(r, n).validate(n).unwrap();
            let rep = hicksian_demand(&t, 1.0, &p(&vec![1.7; n])).unwrap();
            for x in rep.quantities.as_slice() {
                assert!(close(*x, (n as f64).powf(-1.0 / r), 1e-13), "r={r}: {x}");
            }
        }
    }

    #[test]
    fn indirect_utility_examples() {
        let t = flat_half();
        let pr = p(&[1.0, 4.0]);
        assert!(close(indirect_utility(&t, 0.8, &pr).unwrap(), 1.0, 1e-15));
        let e = expenditure(&t, 2.7, &pr).unwrap();
        assert!(close(indirect_utility(&t, e, &pr).unwrap(), 2.7, 1e-15));
        let v1 = indirect_utility(&t, 3.0, &pr).unwrap();
        let v2 = indirect_utility(&t, 6.0, &pr).unwrap();
        assert_eq!(v2, 2.0 * v1);
    }

    #[test]
    fn marshallian_examples() {
        let t = flat_half();
        let rep = marshallian_demand(&t, 0.8, &p(&[1.0, 4.0])).unwrap();
        assert!(close(rep.quantities[0], 0.64, 1e-14));
        assert!(close(rep.quantities[1], 0.04, 1e-14));

        let cd = NestTree::flat_cobb_douglas(w(&[0.3, 0.7]))
            .validate(2)
            .unwrap();
        let rep = marshallian_demand(&cd, 10.0, &p(&[1.0, 1.0])).unwrap();
        assert!(close(rep.quantities[0], 3.0, 1e-14));
        assert!(close(rep.quantities[1], 7.0, 1e-14));

        let nested = NestTree::cobb_douglas(
            w(&[0.5, 0.5]),
            vec![
                NestTree::ces(-0.7, vec![NestTree::Leaf(0)]),
                NestTree::ces(0.6, vec![NestTree::Leaf(1)]),
            ],
        )
        .validate(2)
        .unwrap();
        let rep = marshallian_demand(&nested, 8.0, &p(&[1.0, 4.0])).unwrap();
        assert!(close(rep.quantities[0], 4.0, 1e-14));
        assert!(close(rep.quantities[1], 1.0, 1e-14));
        assert_eq!(rep.node_budget_shares, vec![1.0, 0.5, 0.5]);
    }

    #[test]
    fn budget_share_examples() {
        let t = flat_half();
        let sh = budget_shares(&t, &p(&[1.0, 4.0])).unwrap();
        assert!(close(sh.leaf[0], 0.8, 1e-15) && close(sh.leaf[1], 0.2, 1e-14));

        let cd = NestTree::flat_cobb_douglas(w(&[0.15, 0.35, 0.5]))
            .validate(3)
            .unwrap();
        let sh = budget_shares(&cd, &p(&[9.0, 0.1, 3.0])).unwrap();
        assert_eq!(sh.leaf, vec![0.15, 0.35, 0.5]);

        let t = NestTree::flat_ces(-1.3, 4).validate(4).unwrap();
        let sh = budget_shares(&t, &p(&[2.0; 4])).unwrap();
        for s in sh.leaf {
            assert!(close(s, 0.25, 1e-15));
        }
    }

    #[test]
    fn weighted_ces_shares_follow_the_price_transform() {
        // share_i = θ_i (p_i/θ_i)^s / Σ_j θ_j (p_j/θ_j)^s
        let theta = [0.2, 0.5, 0.3];
        let prices = [1.5, 0.7, 2.2];
        let r = -0.6;
        let s = r / (r - 1.0);
        let t = NestTree::weighted_ces(r, w(&theta), (0..3).map(NestTree::Leaf).collect())
            .validate(3)
            .unwrap();
        let sh = budget_shares(&t, &p(&prices)).unwrap();
        let terms: Vec<f64> = theta
            .iter()
            .zip(prices)
            .map(|(t, p)| t * (p / t).powf(s))
            .collect();
        let total: f64 = terms.iter().sum();
        for (got, term) in sh.leaf.iter().zip(terms) {
            assert!(close(*got, term / total, 1e-14));
        }
    }

    #[test]
    fn konus_examples() {
        let t = flat_half();
        let base = p(&[1.0, 4.0]);
        let idx = konus_index(&t, &base.scaled(2.0).unwrap(), &base).unwrap();
        assert!(close(idx.index, 2.0, 1e-15));
        assert_eq!(konus_index(&t, &base, &base).unwrap().index, 1.0);
        let idx = konus_index(&t, &p(&[4.0, 1.0]), &base).unwrap();
        assert!(close(idx.index, 1.0, 1e-15));
        assert_eq!(idx.index, idx.numerator_cost / idx.denominator_cost);
    }
}
