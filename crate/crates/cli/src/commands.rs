use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mpmrf::poset::{build_poset, default_alpha_grid, POSET_D_RANGE};
use mpmrf::spectral::{cospectral_pair_check, majorizes, spectrum};
use mpmrf::tree::TreeJson;
use mpmrf::{
    shape_compare, single_move, synecdochic_compare, DiscreteDist, ModelJson, MpmrfModel, OrderVerdict, Relation,
    SingleMove, Tree, DEFAULT_TOL,
};
use serde::Serialize;

use crate::config::{FileConfig, Format};
use crate::{AllocateArgs, Command, CompareArgs, Failure, McArgs, ModelArgs, PosetArgs, SpectralArgs};

const DEFAULT_N_SAMPLES: usize = 100_000;
const DEFAULT_KAPPA: [f64; 4] = [0.0, 0.5, 0.9, 0.99];

pub(crate) type Outcome = (String, Result<(), Failure>);

pub(crate) fn dispatch(cmd: Command, file: &FileConfig, format: Option<Format>) -> Result<Outcome, Failure> {
    let done = |s: String| Ok((s, Ok(())));
    match cmd {
        Command::Pmf(a) => done(pmf(&a, file, pick(format, &[Format::Csv, Format::Json], "pmf")?)?),
        Command::Allocate(a) => done(allocate(&a, file, pick(format, &[Format::Csv, Format::Json], "allocate")?)?),
        Command::Compare(a) => {
            pick(format, &[Format::Json], "compare")?;
            done(compare(&a, file)?)
        }
        Command::Poset(a) => done(poset(&a, file, pick(format, &[Format::Dot, Format::Json], "poset")?)?),
        Command::Mc(a) => {
            pick(format, &[Format::Json], "mc")?;
            mc(&a, file)
        }
        Command::Spectral(a) => {
            pick(format, &[Format::Json], "spectral")?;
            done(spectral(&a, file)?)
        }
    }
}

/// Requested format if allowed, otherwise the first allowed one.
fn pick(format: Option<Format>, allowed: &[Format], cmd: &str) -> Result<Format, Failure> {
    match format {
        None => Ok(allowed[0]),
        Some(f) if allowed.contains(&f) => Ok(f),
        Some(f) => Err(Failure::Usage(format!("{cmd} does not support format {f:?}").to_lowercase())),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn model_path(a: &ModelArgs, file: &FileConfig) -> Result<PathBuf, Failure> {
    a.model
        .clone()
        .or_else(|| file.model.clone())
        .ok_or_else(|| Failure::Usage("a model file is required (--model or config)".into()))
}

fn load_model(a: &ModelArgs, file: &FileConfig) -> Result<MpmrfModel, Failure> {
    let path = model_path(a, file)?;
    let json: ModelJson = serde_json::from_str(&read(&path)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(MpmrfModel::try_from(json)?)
}

fn load_tree(path: &Path) -> Result<Tree, Failure> {
    let json: TreeJson =
        serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(Tree::try_from(json)?)
}

fn tol(a: &ModelArgs, file: &FileConfig) -> f64 {
    a.tol.or(file.tol).unwrap_or(DEFAULT_TOL)
}

/// Shortest round-trip decimal, switching to exponent form for very small
/// or very large magnitudes.
fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

fn pmf(a: &ModelArgs, file: &FileConfig, format: Format) -> Result<String, Failure> {
    let model = load_model(a, file)?;
    let agg = model.aggregate_dist(tol(a, file))?;
    if format == Format::Json {
        #[derive(Serialize)]
        struct PmfJson<'a> {
            pmf: &'a [f64],
            tail_mass: f64,
        }
        return Ok(to_json(&PmfJson { pmf: agg.pmf(), tail_mass: agg.tail_mass() }));
    }
    let mut s = String::from("k,p\n");
    for (k, &p) in agg.pmf().iter().enumerate() {
        let _ = writeln!(s, "{k},{}", num(p));
    }
    let _ = writeln!(s, "tail_mass,{}", num(agg.tail_mass()));
    Ok(s)
}

#[derive(Serialize)]
struct VertexAllocation {
    vertex: usize,
    cov_with_sum: f64,
    tvar_contributions: Vec<f64>,
}

#[derive(Serialize)]
struct AllocationReport {
    kappa: Vec<f64>,
    vertices: Vec<VertexAllocation>,
    /// Column sums over the vertices.
    sum: VertexTotals,
    /// Values the sums should reproduce: Var(M) and TVaR_kappa(M).
    target: VertexTotals,
}

#[derive(Serialize)]
struct VertexTotals {
    cov_with_sum: f64,
    tvar_contributions: Vec<f64>,
}

fn allocate(a: &AllocateArgs, file: &FileConfig, format: Format) -> Result<String, Failure> {
    let model = load_model(&a.model, file)?;
    let agg = model.aggregate_dist(tol(&a.model, file))?;
    let tables = (1..=model.d()).map(|v| model.allocation_with(&agg, v)).collect::<Result<Vec<_>, _>>()?;
    if a.by_k {
        return allocate_by_k(&agg, &tables, format);
    }
    let kappa = a.kappa.clone().or_else(|| file.kappa.clone()).unwrap_or_else(|| DEFAULT_KAPPA.to_vec());
    let mut vertices = Vec::with_capacity(model.d());
    for (v, table) in (1..=model.d()).zip(&tables) {
        let tvar_contributions = kappa
            .iter()
            .map(|&k| model.tvar_contribution_from(&agg, table, k))
            .collect::<Result<Vec<_>, _>>()?;
        vertices.push(VertexAllocation { vertex: v, cov_with_sum: model.cov_with_sum(v)?, tvar_contributions });
    }
    let sum = VertexTotals {
        cov_with_sum: vertices.iter().map(|r| r.cov_with_sum).sum(),
        tvar_contributions: (0..kappa.len()).map(|i| vertices.iter().map(|r| r.tvar_contributions[i]).sum()).collect(),
    };
    let target = VertexTotals {
        cov_with_sum: agg.variance(),
        tvar_contributions: kappa.iter().map(|&k| agg.tvar(k)).collect::<Result<Vec<_>, _>>()?,
    };
    let report = AllocationReport { kappa, vertices, sum, target };
    if format == Format::Json {
        return Ok(to_json(&report));
    }
    let mut s = String::from("vertex,cov_with_sum");
    for k in &report.kappa {
        let _ = write!(s, ",tvar_{k}");
    }
    s.push('\n');
    let mut row = |label: &str, cov: f64, parts: &[f64]| {
        let _ = write!(s, "{label},{}", num(cov));
        for &p in parts {
            let _ = write!(s, ",{}", num(p));
        }
        s.push('\n');
    };
    for r in &report.vertices {
        row(&r.vertex.to_string(), r.cov_with_sum, &r.tvar_contributions);
    }
    row("sum", report.sum.cov_with_sum, &report.sum.tvar_contributions);
    row("target", report.target.cov_with_sum, &report.target.tvar_contributions);
    Ok(s)
}

fn allocate_by_k(agg: &DiscreteDist, tables: &[mpmrf::AllocationTable], format: Format) -> Result<String, Failure> {
    #[derive(Serialize)]
    struct Row {
        k: usize,
        p: f64,
        conditional_means: Vec<Option<f64>>,
        sum: Option<f64>,
    }
    let rows: Vec<Row> = (0..=agg.support_bound())
        .map(|k| {
            let means: Vec<Option<f64>> = tables.iter().map(|t| t.conditional_mean(agg, k)).collect();
            let sum = means.iter().copied().sum::<Option<f64>>();
            Row { k, p: agg.p(k), conditional_means: means, sum }
        })
        .collect();
    if format == Format::Json {
        return Ok(to_json(&rows));
    }
    let mut s = String::from("k,p");
    for t in tables {
        let _ = write!(s, ",v{}", t.vertex);
    }
    s.push_str(",sum\n");
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    for r in &rows {
        let _ = write!(s, "{},{}", r.k, num(r.p));
        for &m in &r.conditional_means {
            let _ = write!(s, ",{}", opt(m));
        }
        let _ = writeln!(s, ",{}", opt(r.sum));
    }
    Ok(s)
}

#[derive(Serialize)]
struct CompareReport {
    relation: Relation,
    witness: Option<mpmrf::orders::Witness>,
    method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertices: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(rename = "move", skip_serializing_if = "Option::is_none")]
    mv: Option<SingleMove>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_grid: Option<Vec<f64>>,
}

impl CompareReport {
    fn new(verdict: OrderVerdict, method: &'static str) -> Self {
        CompareReport {
            relation: verdict.relation,
            witness: verdict.witness,
            method,
            vertices: None,
            alpha: None,
            mv: None,
            alpha_grid: None,
        }
    }
}

fn compare(a: &CompareArgs, file: &FileConfig) -> Result<String, Failure> {
    let model = load_model(&a.model, file)?;
    if let Some(vs) = &a.vertices {
        let [v, w] = vs[..] else {
            return Err(Failure::Usage("--vertices takes exactly two vertices v,w".into()));
        };
        let verdict = synecdochic_compare(&model, v, w)?;
        let mut r = CompareReport::new(verdict, "vertex");
        r.vertices = Some([v, w]);
        return Ok(to_json(&r));
    }
    let path = a.tree2.as_ref().ok_or_else(|| Failure::Usage("compare needs --tree2 or --vertices".into()))?;
    let t1 = model.tree();
    let t2 = load_tree(path)?;
    if t1.d() != t2.d() {
        return Err(Failure::Input(format!("trees have {} and {} vertices", t1.d(), t2.d())));
    }
    if t1.canonical_code() == t2.canonical_code() {
        let eq = OrderVerdict { relation: Relation::Eq, witness: None };
        return Ok(to_json(&CompareReport::new(eq, "same_shape")));
    }
    if let Ok(mv) = single_move(t1, &t2) {
        let alpha = model
            .common_alpha()
            .ok_or_else(|| Failure::Input("shape comparison needs one alpha on every edge".into()))?;
        let verdict = shape_compare(t1, &t2, alpha, model.lambda())?;
        let mut r = CompareReport::new(verdict, "single_move");
        r.alpha = Some(alpha);
        r.mv = Some(mv);
        return Ok(to_json(&r));
    }
    if !POSET_D_RANGE.contains(&t1.d()) {
        let none = OrderVerdict { relation: Relation::Incomparable, witness: None };
        return Ok(to_json(&CompareReport::new(none, "none")));
    }
    let grid = a.alpha_grid.clone().or_else(|| file.alpha_grid.clone()).unwrap_or_else(default_alpha_grid);
    let poset = build_poset(t1.d(), &grid, model.lambda())?;
    let relation = poset.compare(t1, &t2)?;
    let mut r = CompareReport::new(OrderVerdict { relation, witness: None }, "poset_closure");
    r.alpha_grid = Some(grid);
    Ok(to_json(&r))
}

fn poset(a: &PosetArgs, file: &FileConfig, format: Format) -> Result<String, Failure> {
    let grid = a.alpha_grid.clone().or_else(|| file.alpha_grid.clone()).unwrap_or_else(default_alpha_grid);
    let lambda = a.lambda.or(file.lambda).unwrap_or(1.0);
    let p = build_poset(a.d, &grid, lambda)?;
    let json = to_json(&p.to_json());
    if let Some(path) = &a.json {
        std::fs::write(path, json.as_bytes())
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(match format {
        Format::Json => json,
        _ => p.hasse_dot(),
    })
}

#[derive(Serialize)]
struct McVertex {
    vertex: usize,
    mean: f64,
    cov_with_sum: f64,
    cov_with_sum_analytic: f64,
    /// Standardized deviation of the covariance estimate.
    z: f64,
}

#[derive(Serialize)]
struct McReport {
    n_samples: usize,
    seed: u64,
    root: usize,
    lambda: f64,
    mean_sum: f64,
    mean_sum_analytic: f64,
    total_variation: f64,
    all_components_equal: bool,
    vertices: Vec<McVertex>,
}

fn mc(a: &McArgs, file: &FileConfig) -> Result<Outcome, Failure> {
    let model = load_model(&a.model, file)?;
    let n = a.n_samples.or(file.n_samples).unwrap_or(DEFAULT_N_SAMPLES);
    let seed = a.seed.or(file.seed).unwrap_or(0);
    if n == 0 {
        return Err(Failure::Input("n_samples must be at least 1".into()));
    }
    let agg = model.aggregate_dist(tol(&a.model, file))?;
    let d = model.d();
    let nf = n as f64;
    let mut row = vec![0u64; d];
    let mut counts: Vec<u64> = vec![0; agg.pmf().len()];
    let mut sum_x = vec![0.0; d];
    let mut sum_m = 0.0;
    let mut all_equal = true;
    let mut sampler = model.sampler(a.root, seed)?;
    for _ in 0..n {
        sampler.draw(&mut row);
        let m: u64 = row.iter().sum();
        all_equal &= row.iter().all(|&x| x == row[0]);
        let k = m as usize;
        if k >= counts.len() {
            counts.resize(k + 1, 0);
        }
        counts[k] += 1;
        sum_m += m as f64;
        for (acc, &x) in sum_x.iter_mut().zip(&row) {
            *acc += x as f64;
        }
    }
    let mean_m = sum_m / nf;
    let mean_x: Vec<f64> = sum_x.iter().map(|s| s / nf).collect();
    // Second pass over the same seeded stream: centered products.
    let mut prod = vec![0.0; d];
    let mut prod2 = vec![0.0; d];
    let mut sampler = model.sampler(a.root, seed)?;
    for _ in 0..n {
        sampler.draw(&mut row);
        let dm = row.iter().sum::<u64>() as f64 - mean_m;
        for v in 0..d {
            let y = (row[v] as f64 - mean_x[v]) * dm;
            prod[v] += y;
            prod2[v] += y * y;
        }
    }
    let mut vertices = Vec::with_capacity(d);
    for v in 0..d {
        let cov = prod[v] / nf;
        let sd = ((prod2[v] / nf - cov * cov).max(0.0) / nf).sqrt();
        let analytic = model.cov_with_sum(v + 1)?;
        let z = if sd > 0.0 {
            (cov - analytic) / sd
        } else if (cov - analytic).abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        vertices.push(McVertex { vertex: v + 1, mean: mean_x[v], cov_with_sum: cov, cov_with_sum_analytic: analytic, z });
    }
    let empirical = DiscreteDist::new(counts.iter().map(|&c| c as f64 / nf).collect(), 0.0)?;
    let tv = empirical.total_variation(&agg) + 0.5 * agg.tail_mass();
    let report = McReport {
        n_samples: n,
        seed,
        root: a.root,
        lambda: model.lambda(),
        mean_sum: mean_m,
        mean_sum_analytic: d as f64 * model.lambda(),
        total_variation: tv,
        all_components_equal: all_equal,
        vertices,
    };
    let status = match a.max_tv {
        Some(limit) if tv.is_nan() || tv >= limit => {
            Err(Failure::Numerical(format!("total variation {tv} not below {limit}")))
        }
        _ => Ok(()),
    };
    Ok((to_json(&report), status))
}

fn spectral(a: &SpectralArgs, file: &FileConfig) -> Result<String, Failure> {
    let path = a
        .model
        .clone()
        .or_else(|| file.model.clone())
        .ok_or_else(|| Failure::Usage("a tree file is required (--model or config)".into()))?;
    let t1 = load_tree(&path)?;
    let s1 = spectrum(&t1)?;
    let Some(p2) = &a.tree2 else {
        return Ok(to_json(&s1));
    };
    let t2 = load_tree(p2)?;
    #[derive(Serialize)]
    struct Pair {
        first: mpmrf::spectral::SpectrumReport,
        second: mpmrf::spectral::SpectrumReport,
        cospectral: bool,
        /// Degree sequence of the second tree majorizes that of the first.
        degrees_majorized: Option<bool>,
    }
    let pair = Pair {
        second: spectrum(&t2)?,
        cospectral: cospectral_pair_check(&t1, &t2)?,
        degrees_majorized: majorizes(&t1.degree_vector(), &t2.degree_vector()).ok(),
        first: s1,
    };
    Ok(to_json(&pair))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, 0.1, 5.5, 1.5e-7, 3.2e-300, 123456.789, 2e16] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.25), "0.25");
        assert_eq!(num(1.5e-7), "1.5e-7");
    }

    #[test]
    fn format_selection() {
        assert_eq!(pick(None, &[Format::Dot, Format::Json], "poset").unwrap(), Format::Dot);
        assert!(pick(Some(Format::Csv), &[Format::Json], "mc").is_err());
    }
}
