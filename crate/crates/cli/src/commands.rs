//! Implementations of the subcommands.

use crate::io;
use crate::report::{self, ClusterReport, ExperimentReport, KappaSweepReport, SweepRow};
use crate::{
    ClusterArgs, Command, ExperimentArgs, FamilyArg, KChoice, MixtureArgs, OutputFormat,
    SimulateArgs, SweepKArgs, SweepKappaArgs, VaryArg, VerifyArgs,
};
use anyhow::{bail, Context, Result};
use knnclust::{
    build_knn_graph, cluster_fixed_k, default_k_grid, generate, misclustering_rate,
    pairwise_distances, preset, rand_index, run_experiment, select_k_grid, select_k_ternary,
    sim, DataMatrix, Family, KMode, LabelVector, MixtureSpec, OptimizerConfig, VaryParam,
};
use std::path::Path;
use std::time::Instant;

pub fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Cluster(args) => cmd_cluster(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::SweepK(args) => cmd_sweep_k(args),
        Command::SweepKappa(args) => cmd_sweep_kappa(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn cap_threads(threads: Option<usize>) {
    if let Some(t) = threads {
        // a second initialization in the same process is reported but harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

fn emit(output: Option<&Path>, content: &str) -> Result<()> {
    match output {
        Some(path) => io::write_file(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Builds the mixture spec from a preset and/or explicit overrides.
fn resolve_mixture(args: &MixtureArgs, seed: u64) -> Result<MixtureSpec> {
    let mut spec = match &args.preset {
        Some(name) => preset(name)?,
        None => {
            let (Some(m), Some(n), Some(d), Some(a), Some(b)) =
                (args.m, args.n, args.d, args.a, args.b)
            else {
                bail!("without --preset, all of --m --n --d --a --b are required");
            };
            MixtureSpec::gaussian(m, n, d, a, b)
        }
    };
    if let Some(m) = args.m {
        spec.m = m;
    }
    if let Some(n) = args.n {
        spec.n = n;
    }
    if let Some(d) = args.d {
        spec.d = d;
    }
    if let Some(a) = args.a {
        spec.a = a;
    }
    if let Some(b) = args.b {
        spec.b = b;
    }
    if let Some(rho) = args.rho {
        spec.rho = rho;
    }
    if let Some(family) = args.family {
        spec.family = match family {
            FamilyArg::Gaussian => Family::Gaussian,
            FamilyArg::StudentT => Family::StudentT,
        };
    }
    if let Some(df) = args.df {
        spec.df = df;
    }
    spec.seed = seed;
    spec.validate()?;
    Ok(spec)
}

fn require_n(data: &DataMatrix) -> Result<()> {
    if data.n_obs() < 6 {
        bail!("need at least 6 observations, got {}", data.n_obs());
    }
    Ok(())
}

fn k_mode_name(k: KChoice) -> String {
    k.to_string()
}

fn cmd_cluster(args: ClusterArgs) -> Result<i32> {
    cap_threads(args.threads);
    let started = Instant::now();
    let (data, truth): (DataMatrix, Option<LabelVector>) = match (&args.input, &args.preset) {
        (Some(path), None) => {
            let data = io::read_data_csv(path)?;
            let truth = args.truth.as_deref().map(io::read_labels).transpose()?;
            (data, truth)
        }
        (None, Some(name)) => {
            let spec = preset(name)?.with_seed(args.seed);
            let (data, truth) = generate(&spec)?;
            (data, Some(truth))
        }
        _ => unreachable!("clap enforces exactly one source"),
    };
    let data = if args.standardize { data.standardized() } else { data };
    require_n(&data)?;
    if let Some(t) = &truth {
        if t.len() != data.n_obs() {
            bail!("truth file has {} labels for {} observations", t.len(), data.n_obs());
        }
    }
    let config = OptimizerConfig { restarts: args.restarts, ..OptimizerConfig::with_seed(args.seed) };

    let (k, z_w, z_d, m_kappa, winner, labels, sweep) = match args.k {
        KChoice::Fixed(k) => {
            let dists = pairwise_distances(&data);
            let graph = build_knn_graph(&dists, k)?;
            let r = cluster_fixed_k(&graph, Some(&dists), args.kappa, &config)?;
            (k, r.z_w, r.z_d, r.m_kappa, r.objective_kind, r.labels, None)
        }
        KChoice::Grid => {
            let grid = default_k_grid(data.n_obs(), args.grid_step);
            let sel = select_k_grid(&data, args.kappa, &config, &grid)?;
            let rows: Vec<SweepRow> = sel
                .sweep
                .iter()
                .map(|rec| {
                    Ok(SweepRow {
                        k: rec.k,
                        z_w: rec.best_z_w,
                        z_d: rec.best_z_d,
                        m_kappa: rec.m_kappa,
                        winner: rec.winner.as_str().to_string(),
                        mis_rate: truth
                            .as_ref()
                            .map(|t| misclustering_rate(&rec.labels, t))
                            .transpose()?,
                    })
                })
                .collect::<Result<_>>()?;
            let b = sel.best;
            (b.k, b.best_z_w, b.best_z_d, b.m_kappa, b.winner, b.labels, Some(rows))
        }
        KChoice::Ternary => {
            let sel = select_k_ternary(&data, args.kappa, &config)?;
            let b = sel.best;
            (b.k, b.best_z_w, b.best_z_d, b.m_kappa, b.winner, b.labels, None)
        }
    };

    let report = ClusterReport {
        command: "cluster".into(),
        seed: args.seed,
        kappa: args.kappa,
        k_mode: k_mode_name(args.k),
        k,
        z_w,
        z_d,
        m_kappa,
        winner: winner.as_str().into(),
        labels: labels.labels().to_vec(),
        mis_rate: truth.as_ref().map(|t| misclustering_rate(&labels, t)).transpose()?,
        rand_index: truth.as_ref().map(|t| rand_index(&labels, t)).transpose()?,
        sweep,
        runtime_ms: args.timing.then(|| started.elapsed().as_millis() as u64),
    };
    let rendered = match args.format {
        OutputFormat::Structured => report::to_json(&report),
        OutputFormat::Table => report::cluster_table(&report),
    };
    emit(args.output.as_deref(), &rendered)?;
    if let Some(path) = &args.labels_out {
        io::write_file(path, &io::labels_to_lines(&labels))?;
    }
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let mut spec = resolve_mixture(&args.mixture, args.seed)?;
    spec.shuffle = args.shuffle;
    let (data, truth) = generate(&spec)?;
    io::write_file(&args.output, &io::data_to_csv(&data))?;
    if let Some(path) = &args.truth_out {
        io::write_file(path, &io::labels_to_lines(&truth))?;
    }
    if let Some(path) = &args.meta_out {
        io::write_file(path, &report::to_json(&sim::metadata(&spec)))?;
    }
    eprintln!(
        "wrote {} rows x {} columns to {}",
        data.n_obs(),
        data.n_features(),
        args.output.display()
    );
    Ok(0)
}

fn cmd_experiment(args: ExperimentArgs) -> Result<i32> {
    cap_threads(args.threads);
    let started = Instant::now();
    let spec = resolve_mixture(&args.mixture, args.seed)?;
    let config = OptimizerConfig { restarts: args.restarts, ..OptimizerConfig::with_seed(args.seed) };
    let k_mode = match args.k {
        KChoice::Grid => KMode::Grid { step: args.grid_step },
        KChoice::Ternary => KMode::Ternary,
        KChoice::Fixed(k) => KMode::Fixed { k },
    };
    let result = run_experiment(&spec, args.kappa, &config, args.runs, k_mode)?;
    let report = ExperimentReport {
        command: "experiment".into(),
        seed: args.seed,
        kappa: args.kappa,
        k_mode: k_mode_name(args.k),
        n_runs: result.n_runs,
        mis_rate: result.mis_rate,
        mis_rate_se: result.mis_rate_se,
        rand_index: result.rand_index,
        rand_index_se: result.rand_index_se,
        per_run: result.per_run,
        runtime_ms: args.timing.then(|| started.elapsed().as_millis() as u64),
    };
    let rendered = match args.format {
        OutputFormat::Structured => report::to_json(&report),
        OutputFormat::Table => report::experiment_table(&report),
    };
    emit(args.output.as_deref(), &rendered)
        .context("emitting the experiment report")?;
    Ok(0)
}

fn cmd_sweep_k(args: SweepKArgs) -> Result<i32> {
    cap_threads(args.threads);
    let (data, truth): (DataMatrix, Option<LabelVector>) = match &args.input {
        Some(path) => (
            io::read_data_csv(path)?,
            args.truth.as_deref().map(io::read_labels).transpose()?,
        ),
        None => {
            let spec = resolve_mixture(&args.mixture, args.seed)?;
            let (data, truth) = generate(&spec)?;
            (data, Some(truth))
        }
    };
    let data = if args.standardize { data.standardized() } else { data };
    require_n(&data)?;
    let config = OptimizerConfig { restarts: args.restarts, ..OptimizerConfig::with_seed(args.seed) };
    let grid = default_k_grid(data.n_obs(), args.grid_step);
    let sel = select_k_grid(&data, args.kappa, &config, &grid)?;
    let rows: Vec<SweepRow> = sel
        .sweep
        .iter()
        .map(|rec| {
            Ok(SweepRow {
                k: rec.k,
                z_w: rec.best_z_w,
                z_d: rec.best_z_d,
                m_kappa: rec.m_kappa,
                winner: rec.winner.as_str().to_string(),
                mis_rate: truth
                    .as_ref()
                    .map(|t| misclustering_rate(&rec.labels, t))
                    .transpose()?,
            })
        })
        .collect::<Result<_>>()?;
    let rendered = match args.format {
        OutputFormat::Structured => report::to_json(&rows),
        OutputFormat::Table => report::sweep_csv(&rows),
    };
    emit(args.output.as_deref(), &rendered)?;
    Ok(0)
}

fn cmd_sweep_kappa(args: SweepKappaArgs) -> Result<i32> {
    cap_threads(args.threads);
    let started = Instant::now();
    let base = resolve_mixture(&args.mixture, args.seed)?;
    let vary = match args.vary {
        VaryArg::A => VaryParam::Location,
        VaryArg::B => VaryParam::Scale,
    };
    let config = OptimizerConfig { restarts: args.restarts, ..OptimizerConfig::with_seed(args.seed) };
    let sweep =
        knnclust::kappa_ratio_sweep(&base, vary, &args.values, args.kappa, &config, args.runs)?;
    let report = KappaSweepReport {
        command: "sweep-kappa".into(),
        seed: args.seed,
        kappa: args.kappa,
        vary,
        n_runs: args.runs,
        summary: sweep.summary,
        runs: sweep.runs,
        runtime_ms: args.timing.then(|| started.elapsed().as_millis() as u64),
    };
    let rendered = match args.format {
        OutputFormat::Structured => report::to_json(&report),
        OutputFormat::Table => report::kappa_sweep_table(&report),
    };
    emit(args.output.as_deref(), &rendered)?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    use knnclust::verify;
    let outcomes = [
        verify::check_null_moments(args.seed, args.graphs),
        verify::check_expected_edge_counts(args.seed.wrapping_add(1)),
        verify::check_theorem1_argmax(args.seed.wrapping_add(2), args.models),
        verify::check_flip_delta(args.seed.wrapping_add(3), args.flip_triples),
    ];
    let mut all_passed = true;
    for outcome in &outcomes {
        println!("{outcome}");
        all_passed &= outcome.passed();
    }
    if all_passed {
        println!("all checks passed");
        Ok(0)
    } else {
        println!("verification FAILED");
        Ok(2)
    }
}
