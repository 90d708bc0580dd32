use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use treecut::coverage::{coverage_report, reduction_stats};
use treecut::cut::{select, select_iterative, IterationStop, SelectionConfig};
use treecut::extract::{extract, ExtractionMode};
use treecut::node_entropy::{EntropyScheme, NodeEntropyMap};
use treecut::pipeline::{
    load_inventory, load_rules, load_trees, render_search, run_pipeline, Model, PipelineConfig,
    ThresholdChoice,
};
use treecut::threshold::{find_threshold, BisectionConfig, SearchMode};
use treecut::Error;

#[derive(Parser)]
#[command(
    name = "treecut",
    version,
    about = "Specialize a grammar by cutting a treebank at high-entropy nodes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GrammarArgs {
    /// Rule inventory, one `<id> <lhs> -> <rhs ...>` per line.
    #[arg(long)]
    grammar: PathBuf,
    /// Top category every tree root must have.
    #[arg(long)]
    top: String,
    /// Require every RHS category to be some rule's LHS.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    grammar: GrammarArgs,
    /// Training treebank.
    #[arg(long)]
    train: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long, default_value = "mixed")]
    scheme: EntropyScheme,
    #[arg(long)]
    neighbor_restrictions: bool,
}

impl SelectArgs {
    fn config(&self) -> SelectionConfig {
        SelectionConfig {
            scheme: self.scheme,
            neighbor_restrictions: self.neighbor_restrictions,
            ..Default::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Phrase-entropy table of the training trees.
    EntropyTable(TrainArgs),
    /// The and-or tree of the training trees.
    Index {
        #[command(flatten)]
        input: TrainArgs,
        /// Print the full indented tree.
        #[arg(long)]
        dump: bool,
    },
    /// Entropy of every or-node.
    Entropy {
        #[command(flatten)]
        input: TrainArgs,
        #[arg(long, default_value = "mixed")]
        scheme: EntropyScheme,
    },
    /// Cutnode classes for a threshold.
    Cut {
        #[command(flatten)]
        input: TrainArgs,
        #[command(flatten)]
        select: SelectArgs,
        #[arg(long)]
        threshold: f64,
    },
    /// Search the highest threshold reaching a coverage on the test trees.
    Bisect {
        #[command(flatten)]
        input: TrainArgs,
        #[command(flatten)]
        select: SelectArgs,
        /// Test treebank.
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        coverage: f64,
        #[arg(long, default_value_t = 0.01)]
        delta_s: f64,
        /// Defaults to unimodal with neighbor restrictions, monotone otherwise.
        #[arg(long)]
        search: Option<SearchMode>,
        #[arg(long, default_value = "training-cut")]
        mode: ExtractionMode,
    },
    /// Specialized rules for a threshold.
    Extract {
        #[command(flatten)]
        input: TrainArgs,
        #[command(flatten)]
        select: SelectArgs,
        #[arg(long)]
        threshold: f64,
        #[arg(long, default_value = "training-cut")]
        mode: ExtractionMode,
        /// Write the rule file here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Coverage of a rule file on test trees.
    Evaluate {
        #[command(flatten)]
        grammar: GrammarArgs,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
    /// Reduction-length distribution of a rule file.
    Stats {
        #[command(flatten)]
        grammar: GrammarArgs,
        #[arg(long)]
        rules: PathBuf,
        /// Also count rule uses in the tilings of these test trees.
        #[arg(long)]
        test: Option<PathBuf>,
    },
    /// Every stage, with reports written to a directory.
    Run {
        #[command(flatten)]
        input: TrainArgs,
        #[command(flatten)]
        select: SelectArgs,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, conflicts_with = "threshold")]
        coverage: Option<f64>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        delta_s: f64,
        #[arg(long)]
        search: Option<SearchMode>,
        #[arg(long, default_value = "training-cut")]
        mode: ExtractionMode,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn model(input: &TrainArgs, test: Option<&Path>) -> Result<Model, Error> {
    let g = &input.grammar;
    Model::load(&g.grammar, &input.train, test, &g.top, g.strict)
}

fn default_search(explicit: Option<SearchMode>, restricted: bool) -> SearchMode {
    explicit.unwrap_or(if restricted {
        SearchMode::Unimodal
    } else {
        SearchMode::Monotone
    })
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::EntropyTable(input) => {
            let m = model(&input, None)?;
            print!("{}", m.table.render_tsv(&m.inventory));
        }
        Command::Index { input, dump } => {
            let m = model(&input, None)?;
            let lex_only = m.aot.nodes().iter().filter(|n| n.is_lex_only()).count();
            println!("or-nodes\t{}\nlexical-only\t{lex_only}", m.aot.len());
            if dump {
                print!("{}", m.aot.dump());
            }
        }
        Command::Entropy { input, scheme } => {
            let m = model(&input, None)?;
            print!(
                "{}",
                NodeEntropyMap::compute(&m.aot, &m.table, scheme, None).render_tsv(&m.aot)
            );
        }
        Command::Cut {
            input,
            select: sel,
            threshold,
        } => {
            let m = model(&input, None)?;
            let cfg = sel.config();
            let cut = if cfg.scheme == EntropyScheme::ArcFrequency {
                let out = select_iterative(threshold, &m.aot, &m.table, &cfg)?;
                match out.stop {
                    IterationStop::Repeated { at } => println!("# settled after {at} iterations"),
                    IterationStop::NearCycle { earlier, at } => {
                        println!(
                            "# iterate {at} came back near iterate {earlier}; returning {earlier}"
                        )
                    }
                }
                out.cutnodes
            } else {
                select(threshold, &m.aot, &m.table, &cfg)?
            };
            let entropies = NodeEntropyMap::compute(&m.aot, &m.table, cfg.scheme, Some(&cut));
            let nodes: Vec<&str> = cut
                .cut_nodes()
                .into_iter()
                .map(|n| m.aot.label(n))
                .collect();
            println!("cutnodes\t{}", nodes.join(" "));
            print!("{}", cut.render(&m.aot, Some(&entropies)));
        }
        Command::Bisect {
            input,
            select: sel,
            test,
            coverage,
            delta_s,
            search,
            mode,
        } => {
            let m = model(&input, Some(&test))?;
            let cfg = BisectionConfig {
                target_coverage: coverage,
                delta_s,
                mode: default_search(search, sel.neighbor_restrictions),
                ..Default::default()
            };
            let r = find_threshold(&m.probe(sel.config(), mode), &cfg)?;
            let rules = extract(mode, &m.training, &r.cutnodes, &m.aot)?;
            print!("{}", render_search(&r, rules.len()));
            if !r.attainable {
                return Ok(2);
            }
        }
        Command::Extract {
            input,
            select: sel,
            threshold,
            mode,
            output,
        } => {
            let m = model(&input, None)?;
            let cfg = sel.config();
            let cut = select(threshold, &m.aot, &m.table, &cfg)?;
            let rules = extract(mode, &m.training, &cut, &m.aot)?;
            let header = vec![format!(
                "scheme={} neighbor_restrictions={} threshold={threshold}",
                cfg.scheme, cfg.neighbor_restrictions
            )];
            let text = rules.render(&header);
            match output {
                Some(path) => std::fs::write(&path, text).map_err(|source| Error::Io {
                    path: path.display().to_string(),
                    source,
                })?,
                None => print!("{text}"),
            }
        }
        Command::Evaluate {
            grammar,
            rules,
            test,
        } => {
            let inv = load_inventory(&grammar.grammar, &grammar.top, grammar.strict)?;
            let rules = load_rules(&rules, &inv)?;
            let test = load_trees(&test, &inv)?;
            print!("{}", coverage_report(&rules, &test).render(&test));
            print!("{}", reduction_stats(&rules, &test, false).render());
            print!("{}", reduction_stats(&rules, &test, true).render());
        }
        Command::Stats {
            grammar,
            rules,
            test,
        } => {
            let inv = load_inventory(&grammar.grammar, &grammar.top, grammar.strict)?;
            let rules = load_rules(&rules, &inv)?;
            print!("{}", reduction_stats(&rules, &[], false).render());
            if let Some(test) = test {
                let test = load_trees(&test, &inv)?;
                print!("{}", reduction_stats(&rules, &test, true).render());
            }
        }
        Command::Run {
            input,
            select: sel,
            test,
            coverage,
            threshold,
            delta_s,
            search,
            mode,
            out,
            seed,
        } => {
            let mut cfg = PipelineConfig::new(&input.grammar.grammar, &input.train, &test, &out);
            cfg.top = input.grammar.top.clone();
            cfg.strict = input.grammar.strict;
            cfg.scheme = sel.scheme;
            cfg.neighbor_restrictions = sel.neighbor_restrictions;
            cfg.threshold = match threshold {
                Some(s) => ThresholdChoice::Fixed(s),
                None => ThresholdChoice::Coverage(coverage.unwrap_or(1.0)),
            };
            cfg.delta_s = delta_s;
            cfg.search = default_search(search, sel.neighbor_restrictions);
            cfg.extraction = mode;
            cfg.seed = seed;
            let outcome = run_pipeline(&cfg)?;
            println!(
                "threshold\t{:.6}\nrules\t{}\ncoverage\t{:.4}\nattainable\t{}\nreports\t{}",
                outcome.threshold,
                outcome.rules.len(),
                outcome.coverage.coverage,
                outcome.attainable(),
                out.display()
            );
            return Ok(outcome.exit_code() as u8);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("treecut: {e}");
            ExitCode::from(1)
        }
    }
}
