//! Finding the highest entropy threshold whose cutnodes still give a
//! required test-set coverage.
//!
//! Coverage falls as the threshold rises (fewer cutnodes, longer rules), so
//! plain interval bisection applies. With neighbor restrictions coverage is
//! only assumed to rise and then fall; a coarse grid finds the peak first.

use std::fmt;
use std::str::FromStr;

use crate::coverage::coverage;
use crate::cut::{select, CutnodeSet, SelectionConfig};
use crate::error::Result;
use crate::extract::{extract, ExtractionMode};
use crate::grammar::ParseTree;
use crate::index::AndOrTree;
use crate::node_entropy::NodeEntropyMap;
use crate::phrase::PhraseEntropyTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Monotone,
    Unimodal,
}

impl SearchMode {
    pub fn name(self) -> &'static str {
        match self {
            SearchMode::Monotone => "monotone",
            SearchMode::Unimodal => "unimodal",
        }
    }
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SearchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "monotone" => Ok(SearchMode::Monotone),
            "unimodal" => Ok(SearchMode::Unimodal),
            other => Err(format!(
                "unknown search mode `{other}` (expected monotone or unimodal)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionConfig {
    pub target_coverage: f64,
    pub delta_s: f64,
    /// Upper end of the search; `None` means the largest node entropy plus 1.
    pub s_high_init: Option<f64>,
    pub max_steps: usize,
    pub mode: SearchMode,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        BisectionConfig {
            target_coverage: 1.0,
            delta_s: 0.01,
            s_high_init: None,
            max_steps: 200,
            mode: SearchMode::Monotone,
        }
    }
}

impl BisectionConfig {
    pub fn targeting(c0: f64) -> Self {
        BisectionConfig {
            target_coverage: c0,
            ..Default::default()
        }
    }

    pub fn grid_step(&self) -> f64 {
        self.delta_s * 16.0
    }
}

/// Outcome of a search over any coverage profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Search<T> {
    pub threshold: f64,
    pub value: T,
    pub coverage: f64,
    pub attainable: bool,
    /// The closest evaluated threshold above the result whose coverage fell
    /// short, with that coverage.
    pub upper: Option<(f64, f64)>,
    /// Number of profile evaluations.
    pub steps: usize,
}

struct Point<T> {
    s: f64,
    value: T,
    coverage: f64,
}

/// Bisects between a `low` point meeting `c0` and a `high` one missing it.
fn narrow<T>(
    c0: f64,
    mut low: Point<T>,
    mut high: (f64, f64),
    delta_s: f64,
    max_steps: usize,
    mut steps: usize,
    eval: &mut impl FnMut(f64) -> Result<(T, f64)>,
) -> Result<Search<T>> {
    while high.0 - low.s >= delta_s && steps < max_steps {
        let mid = (low.s + high.0) / 2.0;
        let (value, coverage) = eval(mid)?;
        steps += 1;
        if coverage >= c0 {
            low = Point {
                s: mid,
                value,
                coverage,
            };
        } else {
            high = (mid, coverage);
        }
    }
    Ok(Search {
        threshold: low.s,
        value: low.value,
        coverage: low.coverage,
        attainable: true,
        upper: Some(high),
        steps,
    })
}

/// Interval bisection over a profile that decreases with the threshold.
/// `eval` maps a threshold to some value and its coverage.
pub fn bisect_profile<T>(
    c0: f64,
    s_high: f64,
    delta_s: f64,
    max_steps: usize,
    mut eval: impl FnMut(f64) -> Result<(T, f64)>,
) -> Result<Search<T>> {
    let (hi_value, hi_cov) = eval(s_high)?;
    if hi_cov >= c0 {
        return Ok(Search {
            threshold: s_high,
            value: hi_value,
            coverage: hi_cov,
            attainable: true,
            upper: None,
            steps: 1,
        });
    }
    let (value, coverage) = eval(0.0)?;
    if coverage < c0 {
        return Ok(Search {
            threshold: 0.0,
            value,
            coverage,
            attainable: false,
            upper: Some((s_high, hi_cov)),
            steps: 2,
        });
    }
    let low = Point {
        s: 0.0,
        value,
        coverage,
    };
    narrow(c0, low, (s_high, hi_cov), delta_s, max_steps, 2, &mut eval)
}

/// Grid scan for the coverage peak, then bisection on its high-threshold
/// side. Ties for the peak go to the largest threshold.
pub fn unimodal_profile<T>(
    c0: f64,
    s_high: f64,
    delta_s: f64,
    grid_step: f64,
    max_steps: usize,
    mut eval: impl FnMut(f64) -> Result<(T, f64)>,
) -> Result<Search<T>> {
    let n = (s_high / grid_step).ceil() as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|i| (i as f64 * grid_step).min(s_high))
        .collect();
    let mut points = Vec::with_capacity(grid.len());
    for &s in &grid {
        let (value, coverage) = eval(s)?;
        points.push(Some(Point { s, value, coverage }));
    }
    let steps = points.len();
    let coverage_at = |p: &Option<Point<T>>| p.as_ref().map_or(f64::NEG_INFINITY, |p| p.coverage);
    let peak = (0..points.len())
        .max_by(|&a, &b| {
            coverage_at(&points[a])
                .total_cmp(&coverage_at(&points[b]))
                .then(a.cmp(&b))
        })
        .expect("grid has at least one point");
    if coverage_at(&points[peak]) < c0 {
        let p = points[peak].take().expect("present");
        return Ok(Search {
            threshold: p.s,
            value: p.value,
            coverage: p.coverage,
            attainable: false,
            upper: None,
            steps,
        });
    }
    let mut last = peak;
    while last + 1 < points.len() && coverage_at(&points[last + 1]) >= c0 {
        last += 1;
    }
    let low = points[last].take().expect("present");
    if last + 1 == points.len() {
        return Ok(Search {
            threshold: low.s,
            value: low.value,
            coverage: low.coverage,
            attainable: true,
            upper: None,
            steps,
        });
    }
    let high = points[last + 1]
        .as_ref()
        .map(|p| (p.s, p.coverage))
        .expect("present");
    narrow(c0, low, high, delta_s, max_steps + steps, steps, &mut eval)
}

/// Everything needed to turn a threshold into a coverage value: select
/// cutnodes, extract rules from the training trees, tile the test trees.
#[derive(Debug, Clone, Copy)]
pub struct CoverageProbe<'a> {
    pub aot: &'a AndOrTree,
    pub table: &'a PhraseEntropyTable,
    pub training: &'a [ParseTree],
    pub test: &'a [ParseTree],
    pub selection: SelectionConfig,
    pub extraction: ExtractionMode,
}

impl CoverageProbe<'_> {
    pub fn evaluate(&self, s_min: f64) -> Result<(CutnodeSet, f64)> {
        let cutnodes = select(s_min, self.aot, self.table, &self.selection)?;
        let rules = extract(self.extraction, self.training, &cutnodes, self.aot)?;
        let c = coverage(&rules, self.test);
        Ok((cutnodes, c))
    }

    /// Largest node entropy plus 1: no node lies above it, so nothing is cut.
    pub fn default_s_high(&self) -> f64 {
        NodeEntropyMap::compute(self.aot, self.table, self.selection.scheme, None).max() + 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub threshold: f64,
    pub cutnodes: CutnodeSet,
    pub achieved_coverage: f64,
    pub attainable: bool,
    /// The nearest evaluated threshold above the result that missed the
    /// target, with its coverage.
    pub upper: Option<(f64, f64)>,
    pub steps: usize,
}

impl From<Search<CutnodeSet>> for ThresholdResult {
    fn from(s: Search<CutnodeSet>) -> Self {
        ThresholdResult {
            threshold: s.threshold,
            cutnodes: s.value,
            achieved_coverage: s.coverage,
            attainable: s.attainable,
            upper: s.upper,
            steps: s.steps,
        }
    }
}

/// Bisection for the highest threshold reaching `cfg.target_coverage`.
pub fn bisect(probe: &CoverageProbe, cfg: &BisectionConfig) -> Result<ThresholdResult> {
    let s_high = cfg.s_high_init.unwrap_or_else(|| probe.default_s_high());
    bisect_profile(
        cfg.target_coverage,
        s_high,
        cfg.delta_s,
        cfg.max_steps,
        |s| probe.evaluate(s),
    )
    .map(ThresholdResult::from)
}

/// Grid-then-bisect search for profiles that rise before they fall.
pub fn search_unimodal(probe: &CoverageProbe, cfg: &BisectionConfig) -> Result<ThresholdResult> {
    let s_high = cfg.s_high_init.unwrap_or_else(|| probe.default_s_high());
    unimodal_profile(
        cfg.target_coverage,
        s_high,
        cfg.delta_s,
        cfg.grid_step(),
        cfg.max_steps,
        |s| probe.evaluate(s),
    )
    .map(ThresholdResult::from)
}

/// Runs the search `cfg.mode` asks for.
pub fn find_threshold(probe: &CoverageProbe, cfg: &BisectionConfig) -> Result<ThresholdResult> {
    match cfg.mode {
        SearchMode::Monotone => bisect(probe, cfg),
        SearchMode::Unimodal => search_unimodal(probe, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::index_treebank;
    use crate::node_entropy::EntropyScheme;
    use crate::phrase::build_phrase_table;
    use crate::toy;

    fn probe_parts() -> (AndOrTree, PhraseEntropyTable, crate::grammar::Treebank) {
        let inv = toy::inventory();
        let tb = toy::treebank();
        let aot = index_treebank(&tb.training, &inv);
        let table = build_phrase_table(&tb.training, &inv);
        (aot, table, tb)
    }

    #[test]
    fn toy_bisection_lands_below_1_08() {
        let (aot, table, tb) = probe_parts();
        let probe = CoverageProbe {
            aot: &aot,
            table: &table,
            training: &tb.training,
            test: &tb.test,
            selection: SelectionConfig::default(),
            extraction: ExtractionMode::TrainingCut,
        };
        let r = bisect(&probe, &BisectionConfig::targeting(1.0)).unwrap();
        assert!(r.attainable);
        assert_eq!(r.achieved_coverage, 1.0);
        assert!(r.threshold < 1.08, "{}", r.threshold);
        let (hi, hi_cov) = r.upper.unwrap();
        assert!(hi - r.threshold < 0.01);
        assert!(hi_cov < 1.0);
        // both endpoints re-evaluated directly
        assert_eq!(probe.evaluate(r.threshold).unwrap().1, 1.0);
        assert!(probe.evaluate(hi).unwrap().1 < 1.0);
        let s_high = probe.default_s_high();
        assert!(r.steps <= (s_high / 0.01).log2().ceil() as usize + 2);
    }

    #[test]
    fn zero_target_is_met_at_the_top() {
        let (aot, table, tb) = probe_parts();
        let probe = CoverageProbe {
            aot: &aot,
            table: &table,
            training: &tb.training,
            test: &tb.test,
            selection: SelectionConfig::default(),
            extraction: ExtractionMode::TrainingCut,
        };
        let r = bisect(&probe, &BisectionConfig::targeting(0.0)).unwrap();
        assert!(r.attainable);
        assert!(r.cutnodes.is_empty());
        assert_eq!(r.steps, 1);
    }

    #[test]
    fn unattainable_target_reports_threshold_zero() {
        let r = bisect_profile(0.9, 2.0, 0.01, 100, |s| {
            Ok(((), if s < 1.0 { 0.5 } else { 0.0 }))
        })
        .unwrap();
        assert!(!r.attainable);
        assert_eq!(r.threshold, 0.0);
        assert_eq!(r.coverage, 0.5);
    }

    #[test]
    fn step_profile_bisects_to_the_edge() {
        let r = bisect_profile(1.0, 2.0, 0.01, 100, |s| {
            Ok((s, if s <= 0.7 { 1.0 } else { 0.0 }))
        })
        .unwrap();
        assert!(r.attainable);
        assert!(r.threshold <= 0.7 && 0.7 - r.threshold < 0.01);
    }

    #[test]
    fn flat_unimodal_profile_returns_the_top_of_the_grid() {
        let r = unimodal_profile(1.0, 1.0, 0.01, 0.16, 100, |_| Ok(((), 1.0))).unwrap();
        assert!(r.attainable);
        assert_eq!(r.threshold, 1.0);
    }

    #[test]
    fn unimodal_peak_below_target() {
        let peak = |s: f64| 0.9 - (s - 1.0).abs() * 0.5;
        let r = unimodal_profile(0.95, 2.0, 0.01, 0.125, 100, |s| Ok(((), peak(s)))).unwrap();
        assert!(!r.attainable);
        assert_eq!(r.threshold, 1.0);
        assert_eq!(r.coverage, 0.9);
    }

    #[test]
    fn unimodal_bisects_the_falling_side() {
        let tent = |s: f64| if s < 0.5 { 0.5 + s } else { 1.5 - s };
        let r = unimodal_profile(0.8, 2.0, 0.01, 0.125, 100, |s| Ok(((), tent(s)))).unwrap();
        assert!(r.attainable);
        assert!(tent(r.threshold) >= 0.8);
        assert!(0.7 - r.threshold < 0.01 && r.threshold <= 0.7 + 1e-12);
    }

    #[test]
    fn toy_unimodal_with_restrictions() {
        let (aot, table, tb) = probe_parts();
        let probe = CoverageProbe {
            aot: &aot,
            table: &table,
            training: &tb.training,
            test: &tb.test,
            selection: SelectionConfig {
                scheme: EntropyScheme::Mixed,
                neighbor_restrictions: true,
                ..Default::default()
            },
            extraction: ExtractionMode::TrainingCut,
        };
        let cfg = BisectionConfig {
            mode: SearchMode::Unimodal,
            ..BisectionConfig::targeting(1.0)
        };
        let r = find_threshold(&probe, &cfg).unwrap();
        let (again, c) = probe.evaluate(r.threshold).unwrap();
        assert_eq!(again, r.cutnodes);
        assert_eq!(c, r.achieved_coverage);
        assert!(!r.attainable || c >= 1.0);
    }
}
