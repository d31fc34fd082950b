use std::path::PathBuf;

use beast_core::beast::{
    run_test_with_null, simulate_null, BeastConfig, CacheStatus, Method, NullCache,
    NullDistribution, Statistic, SubsampleMode, TestResult,
};
use beast_core::beauty::phi_approx;
use beast_core::expansion::{count_cells, empirical_copula};
use beast_core::hadamard::{fwht_symmetry, InteractionIndex, InteractionSet};
use beast_core::moments::CellProbabilities;
use beast_core::scenarios::{estimate_power, PowerRequest};
use beast_core::{Lambda, Shape};
use serde::{Deserialize, Serialize};

use crate::args::{BeautyArgs, EngineArgs, ExpandArgs, Format, NullArgs, PowerArgs, TestArgs};
use crate::data::Table;
use crate::output::emit;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

fn resolve_seed(seed: Option<u64>) -> (u64, &'static str) {
    match seed {
        Some(s) => (s, "flag"),
        None => {
            let s = rand::random::<u64>();
            log::warn!("no --seed given, using random seed {s}");
            (s, "random")
        }
    }
}

fn config_for(set: InteractionSet, e: &EngineArgs, seed: u64) -> BeastConfig {
    BeastConfig::new(set)
        .with_lambda(e.lambda.0)
        .with_subsamples(e.m, e.r)
        .with_null_sims(e.null_sims)
        .with_seed(seed)
        .with_mode(SubsampleMode::from(e.subsample_mode))
}

fn statistic_for(method: Method) -> Result<Statistic, CliError> {
    Ok(match method {
        Method::Beast => Statistic::Beast,
        Method::Chi2 => Statistic::Chi2,
        Method::MaxBet => Statistic::MaxBet,
        Method::Spearman => Statistic::SpearmanQ,
        Method::Oracle => {
            return Err("the oracle statistic needs a known alternative; use `power`".into())
        }
    })
}

fn null_with_cache(
    cache_dir: Option<&PathBuf>,
    cfg: &BeastConfig,
    n: usize,
    stat: &Statistic,
) -> Result<(NullDistribution, &'static str), CliError> {
    match cache_dir {
        Some(dir) => {
            let (null, status) = NullCache::new(dir).get_or_simulate(cfg, n, stat)?;
            Ok((null, status_str(status)))
        }
        None => Ok((simulate_null(cfg, n, stat)?, "disabled")),
    }
}

fn status_str(s: CacheStatus) -> &'static str {
    match s {
        CacheStatus::Hit => "hit",
        CacheStatus::Miss => "miss",
        CacheStatus::Regenerated => "regenerated",
    }
}

/// Every effective parameter of a `test` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestParameters {
    pub input: String,
    pub x_cols: Vec<String>,
    pub y_cols: Vec<String>,
    pub n: usize,
    pub depth: usize,
    pub method: Method,
    pub lambda_mode: String,
    pub lambda: f64,
    pub m: usize,
    pub r: usize,
    pub subsample_mode: String,
    pub null_sims: usize,
    pub seed: u64,
    pub seed_source: String,
    pub set_kind: String,
    pub set_size: usize,
    pub top: usize,
    pub cache: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub schema_version: u32,
    pub command: String,
    pub parameters: TestParameters,
    pub result: TestResult,
}

pub fn test(a: TestArgs) -> Result<(), CliError> {
    let table = Table::read(&a.input, a.delimiter)?;
    let ncol = table.headers.len();
    if ncol < 2 {
        return Err("the input needs at least two columns".into());
    }
    let x = match &a.x_cols {
        Some(s) => table.select(s)?,
        None => (0..ncol - 1).collect(),
    };
    let y = match &a.y_cols {
        Some(s) => table.select(s)?,
        None => vec![ncol - 1],
    };
    if x.is_empty() || y.is_empty() {
        return Err("both column groups must be nonempty".into());
    }
    if x.iter().any(|c| y.contains(c)) {
        return Err("x and y column groups overlap".into());
    }
    let cols: Vec<usize> = x.iter().chain(&y).copied().collect();
    let sample = table.sample(&cols)?;
    let depth = a.engine.depth as usize;
    let set = InteractionSet::cross(x.len(), y.len(), depth)?;
    let (seed, seed_source) = resolve_seed(a.engine.seed);
    let mut cfg = config_for(set, &a.engine, seed);
    cfg.top = a.top;
    let stat = statistic_for(a.method)?;
    cfg.validate(sample.n(), sample.dim(), &stat)?;

    let (null, cache) = null_with_cache(a.engine.cache_dir.as_ref(), &cfg, sample.n(), &stat)?;
    let result = run_test_with_null(&sample, &cfg, &stat, &null)?;
    let params = TestParameters {
        input: a.input.display().to_string(),
        x_cols: table.names(&x),
        y_cols: table.names(&y),
        n: sample.n(),
        depth,
        method: a.method,
        lambda_mode: match cfg.lambda {
            Lambda::Auto => "auto",
            Lambda::Fixed(_) => "fixed",
        }
        .into(),
        lambda: cfg.lambda_for(sample.n()),
        m: cfg.m,
        r: cfg.r,
        subsample_mode: cfg.mode.as_str().into(),
        null_sims: cfg.null_sims,
        seed,
        seed_source: seed_source.into(),
        set_kind: cfg.set.kind.to_string(),
        set_size: cfg.set.len(),
        top: a.top,
        cache: cache.into(),
    };
    let report = TestReport {
        schema_version: SCHEMA_VERSION,
        command: "test".into(),
        parameters: params,
        result,
    };
    let bytes = match a.format {
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(&report)?;
            v.push(b'\n');
            v
        }
        Format::Csv => test_csv(&report)?,
    };
    emit(a.output.as_deref(), &bytes)
}

fn test_csv(report: &TestReport) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "schema_version",
        "method",
        "statistic",
        "p_value",
        "n",
        "depth",
        "lambda",
        "m",
        "r",
        "null_sims",
        "seed",
        "set_kind",
        "rank",
        "mask",
        "matrix",
        "symmetry",
        "z",
        "white",
        "blue",
    ])?;
    let p = &report.parameters;
    let r = &report.result;
    let head = vec![
        SCHEMA_VERSION.to_string(),
        r.method.to_string(),
        format!("{:?}", r.statistic),
        format!("{:?}", r.p_value),
        r.n.to_string(),
        r.depth.to_string(),
        format!("{:?}", p.lambda),
        p.m.to_string(),
        p.r.to_string(),
        p.null_sims.to_string(),
        p.seed.to_string(),
        p.set_kind.clone(),
    ];
    if r.top_interactions.is_empty() {
        let mut rec = head.clone();
        rec.extend(std::iter::repeat_n(String::new(), 7));
        w.write_record(&rec)?;
    }
    for (i, t) in r.top_interactions.iter().enumerate() {
        let mut rec = head.clone();
        rec.extend([
            (i + 1).to_string(),
            t.mask.to_string(),
            t.matrix.join("/"),
            t.symmetry.to_string(),
            format!("{:?}", t.z),
            t.white.to_string(),
            t.blue.to_string(),
        ]);
        w.write_record(&rec)?;
    }
    Ok(w.into_inner().map_err(|e| e.to_string())?)
}

pub fn power(a: PowerArgs) -> Result<(), CliError> {
    let p = a.scenario.dim();
    let depth = a.engine.depth as usize;
    // Last variable against the rest, as in the test command.
    let set = if p >= 2 {
        InteractionSet::cross(p - 1, 1, depth)?
    } else {
        return Err("power studies need at least two variables".into());
    };
    let (seed, _) = resolve_seed(a.engine.seed);
    let cfg = config_for(set, &a.engine, seed);
    let req = PowerRequest {
        scenario: a.scenario,
        kappas: a.kappas,
        replicates: a.reps,
        alpha: a.alpha,
        n: a.n,
        seed,
        oracle_k: a.oracle_k,
    };
    log::info!(
        "power: scenario {}, n {}, {} replicates, lambda {}, seed {seed}",
        req.scenario,
        req.n,
        req.replicates,
        cfg.lambda_for(req.n)
    );
    let cache = a.engine.cache_dir.as_ref().map(NullCache::new);
    let grid = estimate_power(&req, &a.methods, &cfg, cache.as_ref())?;
    emit(a.output.as_deref(), grid.to_csv()?.as_bytes())
}

#[derive(Debug, Serialize)]
struct NullSummary {
    schema_version: u32,
    command: &'static str,
    status: &'static str,
    path: String,
    fingerprint: String,
    lambda: Option<f64>,
    count: usize,
}

pub fn null(a: NullArgs) -> Result<(), CliError> {
    let dir = a.engine.cache_dir.clone().ok_or_else(|| {
        format!(
            "no cache directory: pass --cache-dir or set {}",
            beast_core::beast::CACHE_ENV
        )
    })?;
    let set = InteractionSet::cross(a.x_dims, a.y_dims, a.engine.depth as usize)?;
    let (seed, _) = resolve_seed(a.engine.seed);
    let cfg = config_for(set, &a.engine, seed);
    let stat = statistic_for(a.method)?;
    let cache = NullCache::new(&dir);
    let (null, status) = cache.get_or_simulate(&cfg, a.n, &stat)?;
    if status == CacheStatus::Hit {
        log::info!("cache hit, nothing to do");
    }
    let summary = NullSummary {
        schema_version: SCHEMA_VERSION,
        command: "null",
        status: status_str(status),
        path: cache.path_for(&null.fingerprint).display().to_string(),
        fingerprint: null.fingerprint.key(),
        lambda: matches!(stat, Statistic::Beast).then(|| cfg.lambda_for(a.n)),
        count: null.len(),
    };
    let mut v = serde_json::to_vec(&summary)?;
    v.push(b'\n');
    emit(None, &v)
}

fn parse_t(s: &str, p: usize) -> Result<Vec<f64>, CliError> {
    let t = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|_| format!("frequency '{s}' is not a list of numbers"))?;
    if t.len() != p {
        return Err(format!("frequency '{s}' has {} coordinates, expected {p}", t.len()).into());
    }
    Ok(t)
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

pub fn beauty(a: BeautyArgs) -> Result<(), CliError> {
    let depth = a.depth as usize;
    let (probs, uniform) = match &a.input {
        Some(path) => {
            let table = Table::read(path, a.delimiter)?;
            let cols = match &a.cols {
                Some(s) => table.select(s)?,
                None => (0..table.headers.len()).collect(),
            };
            let u = empirical_copula(&table.sample(&cols)?, a.seed);
            (
                CellProbabilities::from_counts(&count_cells(&u, depth)?)?,
                false,
            )
        }
        None => (CellProbabilities::uniform(Shape::new(a.p, depth)?), true),
    };
    let p = probs.shape().p;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t", "re", "im"];
    if uniform {
        header.push("uniform_re");
    }
    w.write_record(&header)?;
    for s in &a.t {
        let t = parse_t(s, p)?;
        let phi = phi_approx(&probs, &t)?;
        let mut rec = vec![
            t.iter()
                .map(|v| format!("{v:?}"))
                .collect::<Vec<_>>()
                .join(";"),
            format!("{:?}", phi.re),
            format!("{:?}", phi.im),
        ];
        if uniform {
            rec.push(format!("{:?}", t.iter().map(|&x| sinc(x)).product::<f64>()));
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    emit(a.output.as_deref(), &bytes)
}

#[derive(Debug, Serialize)]
struct SymmetryEntry {
    mask: u64,
    matrix: Vec<String>,
    sum: i64,
}

#[derive(Debug, Serialize)]
struct Expansion {
    schema_version: u32,
    command: &'static str,
    columns: Vec<String>,
    n: usize,
    p: usize,
    depth: usize,
    seed: u64,
    counts: Vec<u64>,
    symmetry: Vec<SymmetryEntry>,
}

pub fn expand(a: ExpandArgs) -> Result<(), CliError> {
    let table = Table::read(&a.input, a.delimiter)?;
    let cols = match &a.cols {
        Some(s) => table.select(s)?,
        None => (0..table.headers.len()).collect(),
    };
    let depth = a.depth as usize;
    let sample = table.sample(&cols)?;
    let counts = count_cells(&empirical_copula(&sample, a.seed), depth)?;
    let sym = fwht_symmetry(&counts);
    let shape = counts.shape();
    let bytes = match a.format {
        Format::Json => {
            let out = Expansion {
                schema_version: SCHEMA_VERSION,
                command: "expand",
                columns: table.names(&cols),
                n: sample.n(),
                p: shape.p,
                depth,
                seed: a.seed,
                counts: counts.counts().to_vec(),
                symmetry: sym
                    .sums()
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| SymmetryEntry {
                        mask: i as u64,
                        matrix: InteractionIndex(i as u64).render(shape),
                        sum: s,
                    })
                    .collect(),
            };
            let mut v = serde_json::to_vec_pretty(&out)?;
            v.push(b'\n');
            v
        }
        Format::Csv => {
            // Row i holds the count of cell i and the symmetry statistic of
            // interaction i; both are indexed by the same bit layout.
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["index", "bits", "count", "symmetry"])?;
            for (i, (&c, &s)) in counts.counts().iter().zip(sym.sums()).enumerate() {
                w.write_record([
                    i.to_string(),
                    InteractionIndex(i as u64).render(shape).join("/"),
                    c.to_string(),
                    s.to_string(),
                ])?;
            }
            w.into_inner().map_err(|e| e.to_string())?
        }
    };
    emit(a.output.as_deref(), &bytes)
}
