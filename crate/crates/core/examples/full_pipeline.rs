//! The whole pipeline over the bundled toy files, reports written to a
//! directory given on the command line (a temporary one otherwise).

use std::path::{Path, PathBuf};

use treecut::{run_pipeline, PipelineConfig};

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy");
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("treecut-toy-reports"));
    let cfg = PipelineConfig::new(
        data.join("grammar.txt"),
        data.join("train.trees"),
        data.join("test.trees"),
        &out,
    );

    let outcome = run_pipeline(&cfg).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(1);
    });
    println!(
        "threshold {:.4}, {} rules, coverage {:.2}",
        outcome.threshold,
        outcome.rules.len(),
        outcome.coverage.coverage
    );
    for path in &outcome.written {
        println!("  {}", path.display());
    }
    std::process::exit(outcome.exit_code());
}
