use std::fs;
use std::io::Write;
use std::path::Path;

use pceuq::benchmarks::{benchmark_by_name, reference_statistics, run_validation, write_results_csv, ModelFactory, ValidationConfig};
use pceuq::copula::fit_cvine;
use pceuq::marginals::{fit_kde, pit, Marginal};
use pceuq::metrics::mass_support;
use pceuq::pce::{fit as fit_model, resample_statistics_in, CopulaDto, FitConfig, InputDomain, Mode, PceModel, Sampler};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::table::Table;
use crate::{BenchmarkArgs, CopulaFitArgs, FitArgs, PredictArgs, SamplerArg, StatsArgs};

pub const PDF_GRID_POINTS: usize = 512;

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn load_model(path: &Path) -> CliResult<PceModel> {
    let s = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(PceModel::from_json(&s)?)
}

fn parse_mode(s: &str) -> CliResult<Mode> {
    Mode::parse(s).map_err(|_| CliError::Usage(format!("unknown mode '{s}' (expected apce-x, lpce-z or lpce-x)")))
}

pub fn fit(a: FitArgs) -> CliResult<()> {
    let table = Table::read(&a.data)?;
    let (names, x, y) = table.split_target(a.target.as_deref())?;
    let config = FitConfig {
        mode: parse_mode(&a.mode)?,
        p_max: a.p_max,
        r_max: a.r_max,
        q: a.q,
        seed: a.seed.seed,
        fit_copula: !a.no_copula,
    };
    let model = fit_model(&x, &y, &config)?;
    write_file(&a.out, &model.to_json()?)?;
    let m = model.metadata();
    println!("mode {} on inputs [{}], n = {}", model.mode().name(), names.join(", "), m.n_train);
    println!("selected p = {}, r = {}, q = {}", m.p, m.r, m.q);
    println!("LOO error {:.4e}", m.loo);
    println!("basis size {}, active terms {}", model.index_set().len(), model.n_active());
    println!("wrote {}", a.out.display());
    Ok(())
}

pub fn predict(a: PredictArgs) -> CliResult<()> {
    let model = load_model(&a.model)?;
    let mut table = Table::read(&a.data)?;
    if table.header.len() != model.dim() {
        return Err(CliError::SchemaMismatch(format!(
            "{} has {} columns, the model takes {} inputs",
            a.data.display(),
            table.header.len(),
            model.dim()
        )));
    }
    let pred = model.predict_batch(&table.rows)?;
    let frac = model.out_of_hull_fraction(&table.rows);
    table.header.push("y_pred".into());
    for (r, p) in table.rows.iter_mut().zip(pred) {
        r.push(p);
    }
    let summary = format!("{} rows, out-of-hull fraction {frac:.4}", table.rows.len());
    match &a.out {
        Some(path) => {
            let f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
            table.write(f)?;
            println!("{summary}");
        }
        None => {
            table.write(std::io::stdout().lock())?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PdfOut {
    grid: Vec<f64>,
    density: Vec<f64>,
}

#[derive(Serialize)]
struct StatsOut {
    mean: f64,
    std: f64,
    pdf: PdfOut,
    n_resample: usize,
    sampler: Sampler,
}

pub fn stats(a: StatsArgs) -> CliResult<()> {
    let model = load_model(&a.model)?;
    let sampler = match a.sampler {
        SamplerArg::Sobol => Sampler::Sobol,
        SamplerArg::Random => Sampler::PseudoRandom,
    };
    let domain = if a.full_support { InputDomain::Fitted } else { InputDomain::TrainingHull };
    let st = resample_statistics_in(&model, a.n_resample, sampler, a.seed.seed, domain)?;
    let k = &st.pdf_estimate;
    let (lo, hi) = mass_support(k, k);
    let grid: Vec<f64> = (0..PDF_GRID_POINTS).map(|i| lo + (hi - lo) * i as f64 / (PDF_GRID_POINTS - 1) as f64).collect();
    let density = k.pdf_on_grid(&grid);
    let std = if st.std.is_finite() { st.std } else { 0.0 };
    let out = StatsOut { mean: st.mean, std, pdf: PdfOut { grid, density }, n_resample: st.n_resample, sampler: st.sampler };
    let json = serde_json::to_string_pretty(&out).map_err(|e| CliError::io("<output>", e))?;
    match &a.out {
        Some(path) => {
            write_file(path, &json)?;
            println!("mean {:.6e}, std {:.6e} from {} resamples; wrote {}", out.mean, out.std, out.n_resample, path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

pub fn benchmark(a: BenchmarkArgs) -> CliResult<()> {
    let bench = benchmark_by_name(&a.name).ok_or_else(|| CliError::UnknownBenchmark(a.name.clone()))?;
    if a.n_train.is_empty() || a.reps == 0 {
        return Err(CliError::Usage("need at least one training size and repetition".into()));
    }
    let mut fc = FitConfig::new(parse_mode(&a.mode)?);
    fc.seed = a.seed.seed;
    let factory = ModelFactory::Pce(fc);
    let run = || -> CliResult<_> {
        let reference = match a.reference {
            Some(n) => Some(reference_statistics(bench.as_ref(), n, a.seed.seed ^ 0x5EED)?),
            None => None,
        };
        let cfg = ValidationConfig {
            n_train: a.n_train.clone(),
            n_val: if a.quick { a.n_val.min(1000) } else { a.n_val },
            reps: a.reps,
            noise_sigma: a.noise_sigma,
            seed: a.seed.seed,
            n_resample: a.n_resample,
            reference,
        };
        Ok(run_validation(bench.as_ref(), &factory, &cfg)?)
    };
    let result = match a.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    match &a.out {
        Some(path) => {
            let f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
            write_results_csv(f, &result)?;
        }
        None => write_results_csv(std::io::stdout().lock(), &result)?,
    }
    let mut err = std::io::stderr().lock();
    for g in &result.aggregates {
        let _ = writeln!(
            err,
            "{} {} n_train {:>5}: mean rMAE {:.3e} (min {:.3e}, max {:.3e}), {} failed",
            result.benchmark, result.model, g.n_train, g.mean_rmae, g.min_rmae, g.max_rmae, g.n_failed
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct CopulaOut {
    columns: Vec<String>,
    copula: CopulaDto,
    log_likelihood: f64,
    aic: f64,
}

pub fn copula_fit(a: CopulaFitArgs) -> CliResult<()> {
    let table = Table::read(&a.data)?;
    let d = table.header.len();
    if d < 2 {
        return Err(CliError::Usage(format!("a copula needs at least two columns, found {d}")));
    }
    let marginals: Vec<Marginal> = (0..d)
        .map(|j| fit_kde(&table.rows.iter().map(|r| r[j]).collect::<Vec<_>>()).map(Marginal::from))
        .collect::<Result<_, _>>()?;
    let u: Vec<Vec<f64>> = table.rows.iter().map(|r| pit(&marginals, r)).collect::<Result<_, _>>()?;
    let vine = fit_cvine(&u)?;
    let order = vine.model.order();
    let name = |i: usize| table.header[i].as_str();
    println!("C-vine order: {}", order.iter().map(|&i| name(i)).collect::<Vec<_>>().join(", "));
    for (t, row) in vine.model.pairs().iter().enumerate() {
        let given = order[..t].iter().map(|&i| name(i)).collect::<Vec<_>>().join(",");
        for (j, pc) in row.iter().enumerate() {
            let cond = if given.is_empty() { String::new() } else { format!(" | {given}") };
            println!(
                "tree {} ({}, {}{cond}): {} rot {} params {:?} tau {:.4}",
                t + 1,
                name(order[t + 1 + j]),
                name(order[t]),
                pc.family().name(),
                pc.rotation().degrees(),
                pc.params(),
                pc.kendall_tau()
            );
        }
    }
    println!("log-likelihood {:.4}, AIC {:.4}", vine.log_likelihood, vine.aic);
    if let Some(path) = &a.out {
        let out = CopulaOut {
            columns: table.header.clone(),
            copula: CopulaDto::from_model(&vine.model),
            log_likelihood: vine.log_likelihood,
            aic: vine.aic,
        };
        let json = serde_json::to_string_pretty(&out).map_err(|e| CliError::io(path, e))?;
        write_file(path, &json)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
