//! Two sectors, each an Armington nest of a domestic and an imported
//! variety, joined by a Cobb-Douglas top level.
//!
//! Goods: 0 = food (domestic), 1 = food (imported),
//!        2 = textiles (domestic), 3 = textiles (imported).

use ces_demand::demand;
use ces_demand::{NestTree, PositiveVector, WeightVector};

fn run() -> ces_demand::Result<()> {
    let food = NestTree::ces(0.6, vec![NestTree::leaf(0), NestTree::leaf(1)]);
    let textiles = NestTree::ces(-0.5, vec![NestTree::leaf(2), NestTree::leaf(3)]);
    let tree = NestTree::cobb_douglas(WeightVector::new(vec![0.7, 0.3])?, vec![food, textiles])
        .validate(4)?;

    let p = PositiveVector::prices(vec![1.0, 1.2, 2.0, 1.5])?;
    let income = 100.0;
    let report = demand::marshallian_demand(&tree, income, &p)?;

    println!("utility           {:.6}", report.utility);
    println!("sector price idx  {:?}", &report.price_index_per_node[1..]);
    println!("sector shares     {:?}", &report.node_budget_shares[1..]);
    for (g, (x, s)) in report
        .quantities
        .as_slice()
        .iter()
        .zip(&report.leaf_budget_shares)
        .enumerate()
    {
        println!("good {g}: quantity {x:>9.4}  share {s:.4}");
    }

    // the optimal bundle costs exactly the income and reaches v(m, p)
    let spent = p.dot(&report.quantities)?;
    let u = tree.utility(&report.quantities)?;
    println!(
        "spent {spent:.12}, U(x) - v(m,p) = {:.2e}",
        u - report.utility
    );

    // a 10% tariff on both imports
    let tariff = PositiveVector::prices(vec![1.0, 1.32, 2.0, 1.65])?;
    let index = demand::konus_index(&tree, &tariff, &p)?;
    println!(
        "cost-of-living change from the tariff: {:+.3}%",
        (index.index - 1.0) * 100.0
    );
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
