//! Weighted Cobb-Douglas: fixed budget shares and the weighted CES limit.

use ces_demand::demand;
use ces_demand::lr::{self, Exponent};
use ces_demand::{NestTree, PositiveVector, WeightVector};

fn run() -> ces_demand::Result<()> {
    let theta = WeightVector::new(vec![0.3, 0.7])?;
    let tree = NestTree::flat_cobb_douglas(theta.clone()).validate(2)?;

    let p = PositiveVector::prices(vec![1.0, 1.0])?;
    println!("e(1, (1,1)) = {}", demand::expenditure(&tree, 1.0, &p)?);

    for prices in [[1.0, 1.0], [2.0, 0.5], [10.0, 0.1]] {
        let p = PositiveVector::prices(prices.to_vec())?;
        let shares = demand::budget_shares(&tree, &p)?;
        println!("p = {prices:?}: shares {:?}", shares.leaf);
    }

    let x = PositiveVector::quantities(vec![0.8, 1.9])?;
    let cd = lr::weighted_norm(&x, &theta, Exponent::CobbDouglas)?;
    println!("Cobb-Douglas value {cd:.12}");
    for r in [0.5, 0.1, 1e-2, 1e-3, -1e-3, -0.1] {
        let v = lr::weighted_norm(&x, &theta, Exponent::Finite(r))?;
        println!("  weighted CES r = {r:>7}: {v:.12}  (diff {:+.2e})", v - cd);
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
