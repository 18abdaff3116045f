//! Loading a JSON scenario file and running CLI subcommands in-process.

use ces_demand::cli;
use ces_demand::scenario::ScenarioFile;

const SCENARIO: &str = r#"{
  "goods": [
    {"id": "wheat_dom", "name": "domestic wheat"},
    {"id": "wheat_imp", "name": "imported wheat"},
    {"id": "cloth"}
  ],
  "tree": {
    "aggregator": "ces", "r": -0.5,
    "children": [
      {"aggregator": "ces", "r": 0.75, "children": [{"good": "wheat_dom"}, {"good": "wheat_imp"}]},
      {"good": "cloth"}
    ]
  },
  "scenarios": [
    {"name": "2023", "prices": {"wheat_dom": 1.0, "wheat_imp": 0.9, "cloth": 2.0}, "income": 50},
    {"name": "2024", "prices": {"wheat_dom": 1.1, "wheat_imp": 1.2, "cloth": 2.1}, "income": 50}
  ]
}"#;

fn run() -> Result<(), Box<dyn std::error::Error>> {
    let model = ScenarioFile::from_json_str(SCENARIO)?.build()?;
    println!(
        "{} goods, {} nodes",
        model.goods.len(),
        model.tree.n_nodes()
    );

    // malformed input is rejected with a location
    let typo = SCENARIO.replace("\"r\": 0.75", "\"r\": \"0.75\"");
    if let Err(e) = ScenarioFile::from_json_str(&typo) {
        println!("rejected: {e}");
    }

    let path = std::env::temp_dir().join(format!("ces-demand-example-{}.json", std::process::id()));
    std::fs::write(&path, SCENARIO)?;
    let config = path.to_str().ok_or("temp path is not UTF-8")?;
    for args in [
        vec!["marshallian", "--config", config, "--scenario", "2024"],
        vec![
            "index", "--config", config, "--from", "2023", "--to", "2024",
        ],
    ] {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["ces-demand", "--deterministic"];
        full.extend(args);
        let code = cli::run_with(full, &mut out, &mut err);
        print!("{}", String::from_utf8_lossy(&out));
        eprint!("{}", String::from_utf8_lossy(&err));
        if code != cli::EXIT_OK {
            return Err(format!("exit code {code}").into());
        }
    }
    std::fs::remove_file(&path)?;
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
