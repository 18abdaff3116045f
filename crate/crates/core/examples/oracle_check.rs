//! Seeded verification: inequality sampling and brute-force cost
//! minimization against the closed-form expenditure.

use ces_demand::demand;
use ces_demand::oracle::{self, OracleConfig};

fn run() -> ces_demand::Result<()> {
    let cfg = OracleConfig::default().with_seed(2024).with_samples(2000);
    let suite = oracle::sample_inequality_suite(&cfg)?;
    for (name, r) in [
        ("young", &suite.young),
        ("reverse holder", &suite.reverse_holder),
        ("L0 holder", &suite.l0_holder),
        ("direct-sum holder", &suite.direct_sum_holder),
    ] {
        println!(
            "{name:<18} tested {:>5}  violations {}  smallest gap {:.3e}",
            r.n_tested,
            r.n_violations,
            r.worst_relative_gap.unwrap_or(f64::NAN)
        );
    }

    let cfg = OracleConfig::default()
        .with_seed(2024)
        .with_samples(5)
        .with_dim_range(2, 5)
        .with_zero_band(0.05);
    for i in 0..5 {
        let inst = oracle::random_demand_instance(&cfg, i);
        let tree = inst.validated()?;
        let p = inst.price_vector()?;
        let brute = oracle::minimize_expenditure_bruteforce(&tree, inst.u, &p, &cfg)?;
        let closed = demand::expenditure(&tree, inst.u, &p)?;
        println!(
            "instance {i}: {} goods, depth {}, brute {:.10}  closed {:.10}",
            p.len(),
            inst.tree.depth(),
            brute.cost,
            closed
        );
    }

    let report = oracle::oracle_agreement(&cfg.clone().with_samples(50), 1e-4)?;
    println!(
        "agreement over {} instances: max relative error {:.2e}",
        report.n_tested, report.max_relative_error
    );
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
