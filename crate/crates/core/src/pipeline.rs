//! The whole scheme end to end: index the training trees, compute entropies,
//! pick a threshold, cut, extract rules, and measure coverage, writing a
//! report file for each stage.

use std::fs;
use std::path::{Path, PathBuf};

use crate::coverage::{coverage_report, reduction_stats, CoverageReport};
use crate::cut::{select, CutnodeSet, SelectionConfig};
use crate::error::{Error, Result};
use crate::extract::{extract, ExtractionMode, RuleSet};
use crate::grammar::{
    parse_rule_inventory_with, parse_treebank, Category, ParseTree, RuleInventory,
};
use crate::index::{index_treebank, AndOrTree};
use crate::node_entropy::{EntropyScheme, NodeEntropyMap};
use crate::phrase::{build_phrase_table, PhraseEntropyTable};
use crate::threshold::{
    find_threshold, BisectionConfig, CoverageProbe, SearchMode, ThresholdResult,
};

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn in_file(path: &Path) -> impl FnOnce(Error) -> Error + '_ {
    move |e| Error::InFile {
        path: path.display().to_string(),
        source: Box::new(e),
    }
}

pub fn load_inventory(path: &Path, top: &str, strict: bool) -> Result<RuleInventory> {
    parse_rule_inventory_with(&read_file(path)?, Category::from(top), strict).map_err(in_file(path))
}

pub fn load_trees(path: &Path, inv: &RuleInventory) -> Result<Vec<ParseTree>> {
    parse_treebank(&read_file(path)?, inv).map_err(in_file(path))
}

pub fn load_rules(path: &Path, inv: &RuleInventory) -> Result<RuleSet> {
    crate::extract::parse_rules(&read_file(path)?, inv).map_err(in_file(path))
}

/// How the threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdChoice {
    Fixed(f64),
    Coverage(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub grammar: PathBuf,
    pub training: PathBuf,
    pub test: PathBuf,
    pub top: String,
    pub strict: bool,
    pub scheme: EntropyScheme,
    pub neighbor_restrictions: bool,
    pub threshold: ThresholdChoice,
    pub delta_s: f64,
    pub search: SearchMode,
    pub extraction: ExtractionMode,
    pub out_dir: PathBuf,
    /// Recorded in the report headers; the pipeline itself is deterministic.
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(
        grammar: impl Into<PathBuf>,
        training: impl Into<PathBuf>,
        test: impl Into<PathBuf>,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        PipelineConfig {
            grammar: grammar.into(),
            training: training.into(),
            test: test.into(),
            top: "s".into(),
            strict: false,
            scheme: EntropyScheme::Mixed,
            neighbor_restrictions: false,
            threshold: ThresholdChoice::Coverage(1.0),
            delta_s: 0.01,
            search: SearchMode::Monotone,
            extraction: ExtractionMode::TrainingCut,
            out_dir: out_dir.into(),
            seed: 0,
        }
    }

    pub fn selection(&self) -> SelectionConfig {
        SelectionConfig {
            scheme: self.scheme,
            neighbor_restrictions: self.neighbor_restrictions,
            ..Default::default()
        }
    }

    /// Provenance lines repeated at the top of every report.
    pub fn header(&self) -> Vec<String> {
        let name = |p: &Path| {
            p.file_name().map_or_else(
                || p.display().to_string(),
                |n| n.to_string_lossy().into_owned(),
            )
        };
        let threshold = match self.threshold {
            ThresholdChoice::Fixed(s) => format!("threshold={s}"),
            ThresholdChoice::Coverage(c) => format!(
                "target_coverage={c} delta_s={} search={}",
                self.delta_s, self.search
            ),
        };
        vec![
            format!(
                "grammar={} train={} test={} top={}",
                name(&self.grammar),
                name(&self.training),
                name(&self.test),
                self.top
            ),
            format!(
                "scheme={} neighbor_restrictions={} {threshold} extraction={} seed={}",
                self.scheme, self.neighbor_restrictions, self.extraction, self.seed
            ),
        ]
    }
}

/// Parsed inputs plus everything derived from the training trees alone.
pub struct Model {
    pub inventory: RuleInventory,
    pub training: Vec<ParseTree>,
    pub test: Vec<ParseTree>,
    pub table: PhraseEntropyTable,
    pub aot: AndOrTree,
}

impl Model {
    pub fn new(inventory: RuleInventory, training: Vec<ParseTree>, test: Vec<ParseTree>) -> Self {
        let table = build_phrase_table(&training, &inventory);
        let aot = index_treebank(&training, &inventory);
        Model {
            inventory,
            training,
            test,
            table,
            aot,
        }
    }

    pub fn load(
        grammar: &Path,
        training: &Path,
        test: Option<&Path>,
        top: &str,
        strict: bool,
    ) -> Result<Self> {
        let inventory = load_inventory(grammar, top, strict)?;
        let training = load_trees(training, &inventory)?;
        let test = match test {
            Some(p) => load_trees(p, &inventory)?,
            None => Vec::new(),
        };
        Ok(Model::new(inventory, training, test))
    }

    pub fn probe(
        &self,
        selection: SelectionConfig,
        extraction: ExtractionMode,
    ) -> CoverageProbe<'_> {
        CoverageProbe {
            aot: &self.aot,
            table: &self.table,
            training: &self.training,
            test: &self.test,
            selection,
            extraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub threshold: f64,
    pub cutnodes: CutnodeSet,
    pub rules: RuleSet,
    pub coverage: CoverageReport,
    /// `None` when the threshold was fixed rather than searched for.
    pub search: Option<ThresholdResult>,
    pub written: Vec<PathBuf>,
}

impl PipelineOutcome {
    pub fn attainable(&self) -> bool {
        self.search.as_ref().is_none_or(|s| s.attainable)
    }

    /// 0 on success, 2 when the coverage target could not be reached.
    pub fn exit_code(&self) -> i32 {
        if self.attainable() {
            0
        } else {
            2
        }
    }
}

/// One line summarizing a threshold search.
pub fn render_search(r: &ThresholdResult, rule_count: usize) -> String {
    let mut out = format!(
        "threshold\t{:.6}\ncut classes\t{}\ncoverage\t{:.4}\nattainable\t{}\nrules\t{}\nsteps\t{}\n",
        r.threshold,
        r.cutnodes.class_count(),
        r.achieved_coverage,
        r.attainable,
        rule_count,
        r.steps
    );
    if let Some((s, c)) = r.upper {
        out.push_str(&format!(
            "upper threshold\t{s:.6}\nupper coverage\t{c:.4}\n"
        ));
    }
    out
}

fn with_header(header: &[String], body: &str) -> String {
    let mut out: String = header.iter().map(|l| format!("# {l}\n")).collect();
    out.push_str(body);
    out
}

/// Runs every stage. All inputs are read and validated before the output
/// directory is touched, so a bad input leaves nothing behind.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    let model = Model::load(
        &cfg.grammar,
        &cfg.training,
        Some(&cfg.test),
        &cfg.top,
        cfg.strict,
    )?;
    let selection = cfg.selection();
    let probe = model.probe(selection, cfg.extraction);

    let (threshold, cutnodes, search) = match cfg.threshold {
        ThresholdChoice::Fixed(s) => (s, select(s, &model.aot, &model.table, &selection)?, None),
        ThresholdChoice::Coverage(c0) => {
            let bc = BisectionConfig {
                target_coverage: c0,
                delta_s: cfg.delta_s,
                mode: cfg.search,
                ..Default::default()
            };
            let r = find_threshold(&probe, &bc)?;
            (r.threshold, r.cutnodes.clone(), Some(r))
        }
    };
    let rules = extract(cfg.extraction, &model.training, &cutnodes, &model.aot)?;
    let report = coverage_report(&rules, &model.test);

    let entropies = NodeEntropyMap::compute(&model.aot, &model.table, cfg.scheme, Some(&cutnodes));
    let header = cfg.header();
    let mut threshold_text = match &search {
        Some(r) => render_search(r, rules.len()),
        None => format!(
            "threshold\t{threshold:.6}\ncut classes\t{}\ncoverage\t{:.4}\nrules\t{}\n",
            cutnodes.class_count(),
            report.coverage,
            rules.len()
        ),
    };
    if report.empty_test_set {
        threshold_text.push_str("# warning: empty test set\n");
    }
    let stats = format!(
        "{}\n{}",
        reduction_stats(&rules, &model.test, false).render(),
        reduction_stats(&rules, &model.test, true).render()
    );
    let files = [
        (
            "entropy_table.tsv",
            with_header(&header, &model.table.render_tsv(&model.inventory)),
        ),
        ("index.txt", with_header(&header, &model.aot.dump())),
        (
            "node_entropies.tsv",
            with_header(&header, &entropies.render_tsv(&model.aot)),
        ),
        ("threshold.txt", with_header(&header, &threshold_text)),
        (
            "cut_classes.tsv",
            with_header(&header, &cutnodes.render(&model.aot, Some(&entropies))),
        ),
        ("rules.txt", rules.render(&header)),
        (
            "coverage.txt",
            with_header(&header, &report.render(&model.test)),
        ),
        ("stats.txt", with_header(&header, &stats)),
    ];

    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(&cfg.out_dir).map_err(io(&cfg.out_dir))?;
    let mut written = Vec::new();
    for (name, text) in files {
        let path = cfg.out_dir.join(name);
        fs::write(&path, text).map_err(io(&path))?;
        written.push(path);
    }
    Ok(PipelineOutcome {
        threshold,
        cutnodes,
        rules,
        coverage: report,
        search,
        written,
    })
}
