// Parses, executes and exports a circuit plan.
//
// `cargo run --example run_plan -- examples/plans/scissors.toml /tmp/out`

use std::path::PathBuf;

use qlight::plan::{execute_plan, export_outputs, parse_plan, print_plan};

const DEFAULT_PLAN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/plans/scissors.toml");

pub fn run_example() -> qlight::Result<()> {
    run(&[])
}

fn run(args: &[String]) -> qlight::Result<()> {
    let path = args.first().map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_PLAN));
    let text = std::fs::read_to_string(&path)?;
    let plan = parse_plan(&text)?;
    println!("{}", print_plan(&plan));
    let report = execute_plan(&plan)?;
    print!("{}", report.metrics_text());
    if let Some(dir) = args.get(1) {
        for f in export_outputs(&report, dir.as_ref())? {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let Err(e) = run(&args) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
