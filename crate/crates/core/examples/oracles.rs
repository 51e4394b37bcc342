// Prints the reference values of every built-in oracle.

use qlight::oracle;

pub fn run_example() -> qlight::Result<()> {
    for name in oracle::NAMES {
        for (key, value) in oracle::run(name)? {
            println!("{name}.{key} = {value:.10}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
