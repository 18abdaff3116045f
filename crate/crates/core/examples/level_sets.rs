//! CSV points on `‖x‖ = 1` for several exponents, ready for plotting.
//!
//! `cargo run --example level_sets > balls.csv`

use ces_demand::ball::{self, BallNorm};
use ces_demand::lr::Exponent;

fn run() -> ces_demand::Result<()> {
    let norms = vec![
        BallNorm::finite(-2.0)?,
        BallNorm::finite(-1.0)?,
        BallNorm::cobb_douglas([0.5, 0.5])?,
        BallNorm::finite(0.5)?,
        BallNorm::finite(1.0)?,
        BallNorm::finite(2.0)?,
        BallNorm::new(Exponent::NegInfinity, None)?,
        BallNorm::new(Exponent::PosInfinity, None)?,
    ];
    println!("x1,x2,r");
    for norm in &norms {
        let points = ball::ball_points(norm, 25)?;
        let csv = ball::to_csv(norm, &points);
        print!("{}", csv.split_once('\n').map_or("", |(_, body)| body));
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
