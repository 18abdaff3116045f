//! The four inequalities behind the closed forms, evaluated on a few inputs.

use ces_demand::lr::{self, InequalityGapReport};
use ces_demand::{NestTree, PositiveVector, WeightVector};

fn show(name: &str, g: &InequalityGapReport) {
    println!(
        "{name:<28} lhs {:>12.6}  rhs {:>12.6}  relative gap {:.3e}",
        g.lhs, g.rhs, g.relative_gap
    );
}

fn run() -> ces_demand::Result<()> {
    for (a, b, r) in [(1.0, 1.0, 0.5), (2.0, 0.3, -1.0), (0.7, 5.0, 0.9)] {
        show(
            &format!("young a={a} b={b} r={r}"),
            &lr::young_gap(a, b, r)?,
        );
    }

    let x = PositiveVector::quantities(vec![1.0, 2.0, 0.5])?;
    let y = PositiveVector::prices(vec![3.0, 0.4, 1.1])?;
    for r in [0.5, -2.0] {
        show(
            &format!("reverse holder r={r}"),
            &lr::reverse_holder_gap(&x, &y, r)?,
        );
    }
    // the bound is attained at y proportional to x^{r-1}
    let r = 0.5;
    let tight = PositiveVector::prices(x.as_slice().iter().map(|v| v.powf(r - 1.0)).collect())?;
    show(
        "reverse holder (tight)",
        &lr::reverse_holder_gap(&x, &tight, r)?,
    );

    let theta = WeightVector::new(vec![0.2, 0.5, 0.3])?;
    show("L0 holder", &lr::l0_holder_gap(&x, &y, &theta)?);

    let tree = NestTree::ces(
        -1.0,
        vec![
            NestTree::ces(0.5, vec![NestTree::leaf(0), NestTree::leaf(1)]),
            NestTree::leaf(2),
        ],
    )
    .validate(3)?;
    show("direct-sum holder", &tree.direct_sum_holder_gap(&x, &y)?);
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
