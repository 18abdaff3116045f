//! Two goods, `r = 0.5`, prices `(1, 4)`: expenditure, both demands,
//! budget shares and the Konüs index.

use ces_demand::demand;
use ces_demand::{NestTree, PositiveVector};

fn run() -> ces_demand::Result<()> {
    let tree = NestTree::flat_ces(0.5, 2).validate(2)?;
    let p = PositiveVector::prices(vec![1.0, 4.0])?;

    let e = demand::expenditure(&tree, 1.0, &p)?;
    println!("e(1, p)          = {e}");

    let hicks = demand::hicksian_demand(&tree, 1.0, &p)?;
    println!("hicksian x(1, p) = {:?}", hicks.quantities.as_slice());
    println!("budget shares    = {:?}", hicks.leaf_budget_shares);

    let nu = demand::indirect_utility(&tree, e, &p)?;
    let marsh = demand::marshallian_demand(&tree, e, &p)?;
    println!("v(e, p)          = {nu}");
    println!("marshallian      = {:?}", marsh.quantities.as_slice());

    let swapped = PositiveVector::prices(vec![4.0, 1.0])?;
    let konus = demand::konus_index(&tree, &p, &swapped)?;
    println!("konus((4,1) -> (1,4)) = {}", konus.index);
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
