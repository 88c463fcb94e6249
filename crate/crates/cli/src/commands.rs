use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use gmrbm::assoc::{
    evaluate_recall, format_sweep, run_hidden_sweep, run_q_sweep, synth_pairs, Distance, PairDataset, PairStructure,
    RecallConfig, SweepConfig,
};
use gmrbm::exact::{code_at, ExactOracle};
use gmrbm::io::{load_checkpoint, read_vectors, sample_gmm, save_checkpoint, write_vectors, GmmComponent, GmmSpec};
use gmrbm::matching::{MatchReport, Rounding};
use gmrbm::rng::named_seed;
use gmrbm::sampler::gibbs_sweep;
use gmrbm::trainer::{fit, init_params, EarlyStopRule, TrainConfig};
use gmrbm::{ChainState, ModelParams, Readout, SamplerConfig};

use crate::args::*;
use crate::diag::{autocorrelation, integrated_time};
use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Data(format!("{what} `{}` does not exist", path.display())))
    }
}

fn out_file(out: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(out).map_err(|e| CliError::Data(format!("cannot create `{}`: {e}", out.display())))?;
    Ok(out.join(name))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write `{}`: {e}", path.display())))
}

fn sampler_config(args: &SamplerArgs, persistent: bool) -> Result<SamplerConfig> {
    let mut config = match (args.sampler, args.eps) {
        (SamplerName::Gibbs, None) => SamplerConfig::gibbs(),
        (SamplerName::Gibbs, Some(_)) => return Err(usage("--eps only applies to --sampler langevin")),
        (SamplerName::Langevin, Some(eps)) => SamplerConfig::langevin(eps, args.langevin_steps),
        (SamplerName::Langevin, None) => return Err(usage("--sampler langevin needs --eps")),
    };
    config.persistent = persistent;
    config.validate()?;
    Ok(config)
}

fn train_config(args: &TrainArgs, seed: u64) -> Result<TrainConfig> {
    let config = TrainConfig {
        learning_rate: args.lr,
        batch_size: args.batch,
        cd_k: args.cd_k,
        sampler: sampler_config(&args.sampler, args.persistent)?,
        burn_in: args.burn_in,
        max_epochs: args.epochs,
        adam_beta1: args.beta1,
        adam_beta2: args.beta2,
        adam_epsilon: args.adam_eps,
        seed,
        checkpoint_every: args.checkpoint_every,
    };
    config.validate()?;
    Ok(config)
}

fn stop_rule(args: &StopArgs) -> EarlyStopRule {
    EarlyStopRule {
        target_accuracy: args.target,
        window: args.window,
        std_threshold: args.std_threshold,
        patience: args.patience,
    }
}

fn recall_config(args: &RecallArgs, sampler: SamplerConfig) -> RecallConfig {
    RecallConfig {
        steps: args.recall_steps,
        sampler,
        readout: match args.readout {
            ReadoutName::Mean => Readout::Mean,
            ReadoutName::Sample => Readout::Sample,
        },
        distance: match args.distance {
            DistanceName::Euclidean => Distance::Euclidean,
            DistanceName::Cosine => Distance::Cosine,
        },
    }
}

fn rounding(r: RoundingName) -> Rounding {
    match r {
        RoundingName::Floor => Rounding::TableCompatible,
        RoundingName::Ceil => Rounding::Ceiling,
    }
}

fn structure(s: StructureName) -> PairStructure {
    match s {
        StructureName::Clustered => PairStructure::Clustered,
        StructureName::Random => PairStructure::Random,
    }
}

fn mean_reconstruction_error(params: &ModelParams, rows: &[Vec<f64>]) -> f64 {
    let total: f64 = rows
        .iter()
        .map(|v| {
            let recon = params.posterior_mean(v).expect("rows match the model");
            v.iter().zip(&recon).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
        })
        .sum();
    total / (rows.len() * params.n) as f64
}

pub fn train(cmd: &TrainCmd, seed: u64, out: &Path) -> Result<()> {
    require_file(&cmd.data, "data file")?;
    let config = train_config(&cmd.train, seed)?;
    let rule = stop_rule(&cmd.stop);
    let file = read_vectors(&cmd.data)?;
    let recall_seed = named_seed(seed, "recall");

    let outcome = if cmd.pairs {
        let data = PairDataset::from_rows(&file.rows)?;
        let rows = data.training_rows();
        let recall = recall_config(&cmd.recall, SamplerConfig::gibbs());
        let params = init_params(file.dim, cmd.m, cmd.q, Some(&rows), seed)?;
        fit(params, &rows, &config, rule, |p, _| {
            evaluate_recall(p, &data, &recall, recall_seed).map_or(0.0, |r| r.accuracy)
        })?
    } else {
        let params = init_params(file.dim, cmd.m, cmd.q, Some(&file.rows), seed)?;
        // Higher is better for the stopping rules, so report the negated error.
        fit(params, &file.rows, &config, rule, |p, _| -mean_reconstruction_error(p, &file.rows))?
    };

    let ckpt = out_file(out, "model.ckpt")?;
    save_checkpoint(&outcome.params, &ckpt)?;
    write_text(&out.join("train.log"), &outcome.log_text())?;
    let metric = outcome.last_metric.map_or("nan".to_string(), |m| m.to_string());
    println!("stop {} after {} epochs, last val {metric}", outcome.stop, outcome.epochs);
    println!("checkpoint {}", ckpt.display());
    Ok(())
}

pub fn sample(cmd: &SampleCmd, seed: u64, out: &Path) -> Result<()> {
    require_file(&cmd.model, "model")?;
    if cmd.n_samples == 0 {
        return Err(usage("--n-samples must be positive"));
    }
    let sampler = sampler_config(&cmd.sampler, false)?;
    let params = load_checkpoint(&cmd.model)?;
    let root = named_seed(seed, "sample");
    let rows: Vec<Vec<f64>> = (0..cmd.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut chain = ChainState::from_noise(&params, root, i as u64);
            for _ in 0..cmd.steps {
                gibbs_sweep(&params, &mut chain, &sampler)?;
            }
            Ok(chain.v)
        })
        .collect::<std::result::Result<_, gmrbm::Error>>()?;
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::Numerical("sampling produced non-finite values".into()));
    }
    let path = out_file(out, "samples.txt")?;
    write_vectors(&path, &rows)?;
    println!("wrote {} samples to {}", rows.len(), path.display());
    Ok(())
}

pub fn recall(cmd: &RecallCmd, seed: u64) -> Result<()> {
    require_file(&cmd.model, "model")?;
    require_file(&cmd.pairs, "pair file")?;
    let sampler = sampler_config(&cmd.sampler, false)?;
    let params = load_checkpoint(&cmd.model)?;
    let file = read_vectors(&cmd.pairs)?;
    if file.dim != params.n {
        return Err(CliError::Data(format!(
            "model has {} visibles but pair rows have {} columns",
            params.n, file.dim
        )));
    }
    let data = PairDataset::from_rows(&file.rows)?;
    let config = recall_config(&cmd.recall, sampler);
    let result = evaluate_recall(&params, &data, &config, named_seed(seed, "recall"))?;
    println!("accuracy {}", result.accuracy);
    println!("pair retrieved correct");
    for o in &result.per_pair {
        println!("{} {} {}", o.index, o.retrieved, u8::from(o.correct));
    }
    Ok(())
}

pub fn sweep(cmd: &SweepCmd, seed: u64, out: &Path) -> Result<()> {
    let mut config = SweepConfig::new(cmd.nv);
    config.structure = structure(cmd.structure);
    config.seeds = cmd.seeds.clone().unwrap_or_else(|| vec![seed]);
    config.train = train_config(&cmd.train, seed)?;
    config.early_stop = stop_rule(&cmd.stop);
    config.recall = recall_config(&cmd.recall, SamplerConfig::gibbs());
    config.rounding = rounding(cmd.rounding);
    if cmd.sizes.is_empty() || config.seeds.is_empty() {
        return Err(usage("--sizes and --seeds must not be empty"));
    }
    let rows = match cmd.kind {
        SweepKind::Q => run_q_sweep(cmd.nw, &cmd.q_list, &cmd.sizes, &config)?,
        SweepKind::Hidden => run_hidden_sweep(cmd.q, &cmd.hidden_list, &cmd.sizes, &config)?,
    };
    let table = format_sweep(&rows);
    let path = out_file(out, "sweep.csv")?;
    write_text(&path, &table)?;
    print!("{table}");
    for r in &rows {
        if let Some(e) = &r.error {
            eprintln!("cell q={} m={} N={} seed={} failed: {e}", r.q, r.m, r.n_pairs, r.seed);
        }
    }
    Ok(())
}

pub fn matching(cmd: &MatchCmd) -> Result<()> {
    let report = match cmd.mode {
        MatchModeName::Param => {
            let nw = cmd.nw.ok_or_else(|| usage("param mode needs --nw"))?;
            let nv = cmd.nv.ok_or_else(|| usage("param mode needs --nv"))?;
            MatchReport::parameter(nw, nv, cmd.q, rounding(cmd.rounding))?
        }
        MatchModeName::Capacity => {
            let m = cmd.m.ok_or_else(|| usage("capacity mode needs --m"))?;
            MatchReport::capacity(cmd.nv.unwrap_or(400), m, cmd.q)?
        }
    };
    print!("{report}");
    print!("{}", report.key_values());
    Ok(())
}

fn norm(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn inspect(cmd: &InspectCmd, seed: u64) -> Result<()> {
    require_file(&cmd.model, "model")?;
    let params = load_checkpoint(&cmd.model)?;
    println!(
        "dims n={} m={} q={} sigma2={}",
        params.n,
        params.m,
        params.q,
        u8::from(params.sigma2.is_some())
    );
    println!("params {}", params.param_count());
    println!("norm b={:.6e} c={:.6e} W={:.6e}", norm(&params.b), norm(&params.c), norm(&params.w));
    println!("max_abs W={:.6e}", params.w.iter().fold(0.0f64, |a, w| a.max(w.abs())));

    if cmd.exact {
        let oracle = ExactOracle::with_cap(&params, cmd.cap)?;
        let summary = oracle.summary();
        println!("exact log_partition {:.12e}", summary.log_partition);
        let mut order: Vec<usize> = (0..summary.hidden_marginal.len()).collect();
        order.sort_by(|&a, &b| summary.hidden_marginal[b].total_cmp(&summary.hidden_marginal[a]).then(a.cmp(&b)));
        println!("rank code prob");
        for (rank, &idx) in order.iter().take(cmd.top).enumerate() {
            let code: Vec<String> = code_at(&params, idx).states().iter().map(|s| s.to_string()).collect();
            println!("{} {} {:.12e}", rank + 1, code.join(","), summary.hidden_marginal[idx]);
        }
    }

    if cmd.diag_sweeps >= 2 {
        let mut chain = ChainState::from_noise(&params, named_seed(seed, "inspect"), 0);
        let sampler = SamplerConfig::gibbs();
        let mut trace = Vec::with_capacity(cmd.diag_sweeps);
        for _ in 0..cmd.diag_sweeps {
            gibbs_sweep(&params, &mut chain, &sampler)?;
            trace.push(params.energy(&chain.v, &chain.h)?);
        }
        let rho = autocorrelation(&trace, 10);
        let lags: Vec<String> = [1, 2, 5, 10]
            .iter()
            .filter(|&&k| k < rho.len())
            .map(|&k| format!("lag{k}={:.4}", rho[k]))
            .collect();
        let tau = integrated_time(&trace);
        println!("energy autocorrelation {}", lags.join(" "));
        println!("energy tau={tau:.3} ess={:.1} sweeps={}", trace.len() as f64 / tau, trace.len());
    }
    Ok(())
}

fn parse_component(text: &str) -> Result<GmmComponent> {
    let bad = || usage(format!("component `{text}` is not `weight:mean,...:var,...`"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let list = |s: &str| -> Result<Vec<f64>> { s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect() };
    Ok(GmmComponent {
        weight: parts[0].trim().parse().map_err(|_| bad())?,
        mean: list(parts[1])?,
        var: list(parts[2])?,
    })
}

pub fn synth(cmd: &SynthCmd, seed: u64, out: &Path) -> Result<()> {
    let synth_seed = named_seed(seed, "synth");
    let (rows, name) = match cmd.kind {
        SynthKind::Pairs => {
            let pairs = synth_pairs(cmd.count, cmd.dim, synth_seed, structure(cmd.structure))?;
            let rows = pairs
                .into_iter()
                .map(|(s, r)| s.into_iter().chain(r).collect())
                .collect();
            (rows, "pairs.txt")
        }
        SynthKind::Gmm => {
            if cmd.component.is_empty() {
                return Err(usage("gmm needs at least one --component"));
            }
            let spec = GmmSpec {
                components: cmd.component.iter().map(|c| parse_component(c)).collect::<Result<_>>()?,
            };
            (sample_gmm(&spec, cmd.count, synth_seed)?, "gmm.txt")
        }
    };
    let path = out_file(out, name)?;
    write_vectors(&path, &rows)?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}
