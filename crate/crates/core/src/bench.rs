//! Timed solver runs over protest populations or domain files.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use log::{info, warn};

use crate::belief::{Coupling, FactoredBelief, NaiveEngine, StructuredEngine, NAIVE_TERM_LIMIT};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::io::load_domain;
use crate::planner::{solve, Expansion, Solution, SolverOptions, DEFAULT_GAMMA, NODE_LIMIT};
use crate::protest::{build_domain, ProtestParams};

pub const CSV_HEADER: &str = "n,h,mode,seconds,value,nodes,trie_peak";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Structured,
    Naive,
    Both,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "structured" => Ok(Mode::Structured),
            "naive" => Ok(Mode::Naive),
            "both" => Ok(Mode::Both),
            _ => Err(Error::Validation(format!("unknown mode `{s}` (structured, naive or both)"))),
        }
    }
}

/// Engine behind one row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Structured,
    Naive,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Structured => "structured",
            Engine::Naive => "naive",
        })
    }
}

#[derive(Debug, Clone)]
pub enum DomainSource {
    File(PathBuf),
    /// Protest domains; the sweep overrides `n`.
    Protest(ProtestParams),
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub source: DomainSource,
    pub mode: Mode,
    pub horizon: usize,
    pub gamma: f64,
    /// Observations sampled per action node; 0 expands every observation.
    pub samples: usize,
    pub seed: u64,
    /// Population sizes; ignored for file sources.
    pub sweep: Vec<usize>,
    pub coupling: Coupling,
    pub parallel: bool,
    pub naive_limit: f64,
    pub node_limit: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            source: DomainSource::Protest(ProtestParams::default()),
            mode: Mode::Structured,
            horizon: 2,
            gamma: DEFAULT_GAMMA,
            samples: 0,
            seed: 0,
            sweep: vec![2],
            coupling: Coupling::Exact,
            parallel: false,
            naive_limit: NAIVE_TERM_LIMIT,
            node_limit: NODE_LIMIT,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if let DomainSource::Protest(_) = self.source {
            if self.sweep.is_empty() {
                return Err(Error::Validation("empty population sweep".into()));
            }
            if self.sweep.contains(&0) {
                return Err(Error::Validation("population sizes must be positive".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Validation(format!("discount {} outside [0, 1]", self.gamma)));
        }
        Ok(())
    }

    fn solver_options(&self) -> SolverOptions {
        let expansion = match self.samples {
            0 => Expansion::Exhaustive,
            k => Expansion::Sampled { k, seed: self.seed },
        };
        SolverOptions {
            horizon: self.horizon,
            gamma: self.gamma,
            expansion,
            node_limit: self.node_limit,
        }
    }

    fn engines(&self) -> Vec<Engine> {
        match self.mode {
            Mode::Structured => vec![Engine::Structured],
            Mode::Naive => vec![Engine::Naive],
            Mode::Both => vec![Engine::Structured, Engine::Naive],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub n: usize,
    pub h: usize,
    pub engine: Engine,
    pub seconds: f64,
    /// `None` when the run was refused as too large.
    pub value: Option<f64>,
    pub nodes: usize,
    pub trie_peak: usize,
    /// Structured minus naive value, on naive rows of a both-mode run.
    pub value_delta: Option<f64>,
    pub refused: Option<String>,
}

fn timed<E: crate::belief::BeliefDynamics>(engine: &E, b0: &FactoredBelief, opts: &SolverOptions) -> Result<(Solution, f64)> {
    let start = Instant::now();
    let sol = solve(engine, b0, opts)?;
    Ok((sol, start.elapsed().as_secs_f64()))
}

fn run_point(spec: &ExperimentSpec, domain: &Domain) -> Result<Vec<ResultRow>> {
    let n = domain.num_agents();
    let opts = spec.solver_options();
    let b0 = FactoredBelief::initial(domain)?;
    let mut rows: Vec<ResultRow> = Vec::new();
    for engine in spec.engines() {
        let outcome = match engine {
            Engine::Structured => timed(&StructuredEngine::with_coupling(domain, spec.coupling), &b0, &opts),
            Engine::Naive => NaiveEngine::with_limit(domain, spec.naive_limit).and_then(|e| timed(&e, &b0, &opts)),
        };
        let row = match outcome {
            Ok((sol, seconds)) => {
                info!("n={n} h={} {engine}: value {} in {seconds:.3}s, {} nodes", spec.horizon, sol.value, sol.nodes);
                ResultRow {
                    n,
                    h: spec.horizon,
                    engine,
                    seconds,
                    value: Some(sol.value),
                    nodes: sol.nodes,
                    trie_peak: sol.trie_peak,
                    value_delta: None,
                    refused: None,
                }
            }
            Err(e @ Error::TooLarge { .. }) => {
                warn!("n={n} h={} {engine}: refused: {e}", spec.horizon);
                ResultRow {
                    n,
                    h: spec.horizon,
                    engine,
                    seconds: 0.0,
                    value: None,
                    nodes: 0,
                    trie_peak: 0,
                    value_delta: None,
                    refused: Some(e.to_string()),
                }
            }
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    if spec.mode == Mode::Both {
        if let [s, nv] = rows.as_mut_slice() {
            if let (Some(a), Some(b)) = (s.value, nv.value) {
                nv.value_delta = Some(a - b);
            }
        }
    }
    Ok(rows)
}

fn domain_for(spec: &ExperimentSpec, n: usize) -> Result<Domain> {
    match &spec.source {
        DomainSource::File(path) => load_domain(path),
        DomainSource::Protest(p) => build_domain(&ProtestParams { n, ..p.clone() }),
    }
}

/// Runs every sweep point. Domain construction is not timed.
pub fn run(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let points: Vec<usize> = match spec.source {
        DomainSource::File(_) => vec![0],
        DomainSource::Protest(_) => spec.sweep.clone(),
    };
    if !spec.parallel {
        let mut rows = Vec::new();
        for &n in &points {
            let domain = domain_for(spec, n)?;
            rows.extend(run_point(spec, &domain)?);
        }
        return Ok(rows);
    }
    let results: Vec<Result<Vec<ResultRow>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = points
            .iter()
            .map(|&n| scope.spawn(move || run_point(spec, &domain_for(spec, n)?)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Contract("sweep worker panicked".into()))))
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

/// CSV with the fixed header, plus `value_delta` when any row has one.
pub fn write_csv<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    let with_delta = rows.iter().any(|r| r.value_delta.is_some());
    if with_delta {
        writeln!(out, "{CSV_HEADER},value_delta")?;
    } else {
        writeln!(out, "{CSV_HEADER}")?;
    }
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        write!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.h,
            r.engine,
            r.seconds,
            opt(r.value),
            r.nodes,
            r.trie_peak
        )?;
        if with_delta {
            write!(out, ",{}", opt(r.value_delta))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// `N seconds` lines for one engine, skipping refused runs.
pub fn plot_data(rows: &[ResultRow], engine: Engine) -> String {
    rows.iter()
        .filter(|r| r.engine == engine && r.value.is_some())
        .map(|r| format!("{} {}\n", r.n, r.seconds))
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    linear_fit(&logs).0
}

/// Least-squares `(slope, intercept, r_squared)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_mode_reports_delta() {
        let spec = ExperimentSpec { mode: Mode::Both, sweep: vec![2], ..Default::default() };
        let rows = run(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].value_delta.unwrap().abs() <= 1e-9);
        let mut csv = Vec::new();
        write_csv(&rows, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("n,h,mode,seconds,value,nodes,trie_peak,value_delta\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn naive_refusal_does_not_stop_the_sweep() {
        let spec = ExperimentSpec { mode: Mode::Both, horizon: 1, sweep: vec![20, 2], ..Default::default() };
        let rows = run(&spec).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[1].refused.is_some() && rows[1].value.is_none());
        assert!(rows[0].value.is_some() && rows[3].value.is_some());
    }

    #[test]
    fn parallel_sweep_matches_sequential() {
        let spec = ExperimentSpec { sweep: vec![1, 2, 3], ..Default::default() };
        let seq = run(&spec).unwrap();
        let par = run(&ExperimentSpec { parallel: true, ..spec }).unwrap();
        for (a, b) in seq.iter().zip(&par) {
            assert_eq!((a.n, a.value, a.nodes), (b.n, b.value, b.nodes));
        }
    }

    #[test]
    fn fits_recover_known_lines() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x| (x, 3.0 * x * x)).collect();
        assert!((loglog_slope(&pts) - 2.0).abs() < 1e-12);
        let (s, i, r2) = linear_fit(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]);
        assert!((s - 2.0).abs() < 1e-12 && (i - 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
