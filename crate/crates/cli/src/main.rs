use clap::{Arg, ArgAction, ArgMatches, Command};

use ising_cli::analyze::{csv_report, parse_statistic, run_analyze, text_report, AnalyzeConfig};
use ising_cli::config::Params;
use ising_cli::csvout::{fmt, fmt_opt, CsvDoc};
use ising_cli::error::CliError;
use ising_cli::experiments::{
    cw_power, errorbars, partition_grid, power_heatmap, sample_rows, CwPowerConfig,
    EdgeProbability, Ensemble, ErrorbarsConfig, HeatmapConfig, PartitionGridConfig, SampleConfig,
    SamplerOpts,
};
use ising_core::gibbs::{default_burn_in, ChainConfig};

fn opt(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).value_name("VALUE").help(help)
}

fn opt_default(name: &'static str, help: &'static str, default: &'static str) -> Arg {
    opt(name, help).default_value(default)
}

fn with_common(cmd: Command) -> Command {
    cmd.arg(opt_default(
        "seed",
        "base seed; every run is determined by (config, seed)",
        "1",
    ))
    .arg(opt("out", "write CSV here instead of stdout"))
    .arg(opt(
        "config",
        "key=value file supplying defaults for any option",
    ))
}

fn with_gnuplot(cmd: Command) -> Command {
    cmd.arg(opt(
        "gnuplot",
        "write a companion gnuplot script here (requires --out)",
    ))
}

fn emit_plot_script(p: &Params, script: impl FnOnce(&str) -> String) -> Result<(), CliError> {
    if let Some(script_path) = p.opt_string("gnuplot") {
        let csv_path = p.opt_string("out").ok_or_else(|| {
            CliError::Usage("--gnuplot needs --out so the script can reference the CSV".into())
        })?;
        std::fs::write(&script_path, script(&csv_path))
            .map_err(|e| CliError::io(&script_path, e))?;
    }
    Ok(())
}

fn with_sampler(cmd: Command) -> Command {
    cmd.arg(opt(
        "burn-in",
        "burn-in sweeps (default: max(1000, 20 ceil(ln n)))",
    ))
    .arg(opt_default("thin", "sweeps between retained draws", "5"))
}

fn with_ensemble(cmd: Command) -> Command {
    cmd.arg(opt("p", "fixed edge probability for the er ensemble"))
        .arg(opt_default(
            "p-exp",
            "er edge probability exponent: p = n^(-p-exp), used when --p is absent",
            "0.3333333333333333",
        ))
        .arg(opt(
            "degree",
            "circulant degree for the regular ensemble (default: even sqrt(n))",
        ))
}

fn cli() -> Command {
    Command::new("ising")
        .about("Sampling, pseudolikelihood estimation, partition bounds, and test power for one-parameter Ising models")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(with_gnuplot(with_sampler(with_ensemble(with_common(
            Command::new("errorbars")
                .about("Mean and spread of the MPLE over a (size, beta) grid, with log-log rate slopes")
                .arg(opt_default("ensemble", "cw, er, regular, or block", "er"))
                .arg(opt_default("sizes", "comma list of system sizes", "200,800"))
                .arg(opt_default("betas", "beta grid: start:end:count or comma list", "0:2:9"))
                .arg(opt_default("reps", "replicates per cell", "100")),
        )))))
        .subcommand(with_gnuplot(with_sampler(with_common(
            Command::new("power-heatmap")
                .about("Empirical power of the most powerful test on G(n, p) over a (p, beta) grid")
                .arg(opt_default("n", "system size", "300"))
                .arg(opt_default("p-grid", "edge probability grid", "0.05:1:20"))
                .arg(opt_default("betas", "beta grid", "0:3:20"))
                .arg(opt_default("reps", "replicates per cell", "200"))
                .arg(opt_default("alpha", "test level", "0.05"))
                .arg(opt_default("law-count", "Monte Carlo reservoir size for null quantiles", "200000")),
        ))))
        .subcommand(with_gnuplot(with_sampler(with_common(
            Command::new("cw-power")
                .about("Empirical power on the complete graph next to the limiting power curve")
                .arg(opt_default("n", "system size", "300"))
                .arg(opt_default("betas", "beta grid", "0:2:41"))
                .arg(opt_default("reps", "replicates per beta", "1000"))
                .arg(opt_default("alpha", "test level", "0.05"))
                .arg(opt_default("law-count", "Monte Carlo reservoir size for the null quantile", "200000")),
        ))))
        .subcommand(with_gnuplot(with_ensemble(with_common(
            Command::new("partition")
                .about("Exact log-partition value and bounds over a beta grid")
                .arg(opt_default("ensemble", "cw, er, regular, or block", "cw"))
                .arg(opt_default("n", "system size", "12"))
                .arg(opt_default("betas", "beta grid", "0.1:0.9:9")),
        ))))
        .subcommand(with_sampler(with_common(
            Command::new("analyze")
                .about("Fit the model to a labeled network: MPLE, bootstrap se, null p-value")
                .arg(opt("edges", "edge-list file: one 'u v' pair per line, # comments").required(true))
                .arg(opt("labels", "label file: one 'id value' pair per line, values -1/0/1").required(true))
                .arg(opt_default("b-boot", "parametric bootstrap replicates", "2000"))
                .arg(opt_default("b-null", "null-simulation replicates", "999"))
                .arg(opt_default("statistic", "null test statistic: h or mple", "h")),
        )))
        .subcommand(with_sampler(with_ensemble(with_common(
            Command::new("sample")
                .about("Draw configurations and summarize each (Hamiltonian, magnetization)")
                .arg(opt_default("ensemble", "cw, er, regular, or block", "cw"))
                .arg(opt_default("n", "system size", "50"))
                .arg(opt_default("beta", "inverse temperature", "0.5"))
                .arg(opt_default("count", "number of draws", "10"))
                .arg(
                    Arg::new("spins")
                        .long("spins")
                        .help("include the +/- configuration string per draw")
                        .action(ArgAction::SetTrue),
                ),
        ))))
}

fn main() {
    let matches = cli().get_matches();
    if let Err(e) = run(&matches) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(matches: &ArgMatches) -> Result<(), CliError> {
    match matches.subcommand() {
        Some(("errorbars", m)) => cmd_errorbars(m),
        Some(("power-heatmap", m)) => cmd_power_heatmap(m),
        Some(("cw-power", m)) => cmd_cw_power(m),
        Some(("partition", m)) => cmd_partition(m),
        Some(("analyze", m)) => cmd_analyze(m),
        Some(("sample", m)) => cmd_sample(m),
        _ => unreachable!("subcommand is required"),
    }
}

fn sampler_opts(p: &Params) -> Result<SamplerOpts, CliError> {
    let thin = p.usize("thin")?;
    if thin == 0 {
        return Err(CliError::Domain("--thin must be at least 1".into()));
    }
    Ok(SamplerOpts {
        burn_in: p.opt_usize("burn-in")?,
        thin,
        seed: p.u64("seed")?,
    })
}

fn edge_probability(p: &Params) -> Result<EdgeProbability, CliError> {
    Ok(match p.opt_f64("p")? {
        Some(fixed) => EdgeProbability::Fixed(fixed),
        None => EdgeProbability::PowerOfN(p.f64("p-exp")?),
    })
}

fn echo_list<T: std::fmt::Display>(values: &[T]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn echo_sampler(doc: &mut CsvDoc, opts: &SamplerOpts, n_hint: usize) {
    doc.meta("seed", opts.seed)
        .meta(
            "burn_in",
            opts.burn_in.unwrap_or_else(|| default_burn_in(n_hint)),
        )
        .meta("thin", opts.thin);
}

fn echo_edge_probability(doc: &mut CsvDoc, p: &EdgeProbability) {
    match p {
        EdgeProbability::Fixed(v) => doc.meta("p", fmt(*v)),
        EdgeProbability::PowerOfN(e) => doc.meta("p_exp", fmt(*e)),
    };
}

fn cmd_errorbars(m: &ArgMatches) -> Result<(), CliError> {
    let p = Params::new(m)?;
    let cfg = ErrorbarsConfig {
        ensemble: Ensemble::parse(&p.string("ensemble")?)?,
        sizes: p.usize_list("sizes")?,
        betas: p.f64_grid("betas")?,
        reps: p.usize("reps")?,
        p: edge_probability(&p)?,
        degree: p.opt_usize("degree")?,
        sampler: sampler_opts(&p)?,
    };
    let (rows, slopes) = errorbars(&cfg)?;
    let mut doc = CsvDoc::new(
        "errorbars",
        &[
            "record",
            "ensemble",
            "n",
            "beta",
            "mean_beta_hat",
            "sd_beta_hat",
            "non_interior_fraction",
            "reps",
            "slope",
            "r2",
        ],
    );
    doc.meta("ensemble", cfg.ensemble.name())
        .meta("sizes", echo_list(&cfg.sizes))
        .meta("betas", echo_list(&cfg.betas))
        .meta("reps", cfg.reps);
    echo_edge_probability(&mut doc, &cfg.p);
    if let Some(d) = cfg.degree {
        doc.meta("degree", d);
    }
    echo_sampler(
        &mut doc,
        &cfg.sampler,
        *cfg.sizes.iter().max().unwrap_or(&2),
    );
    for r in &rows {
        doc.row(vec![
            "cell".into(),
            r.ensemble.name().into(),
            r.n.to_string(),
            fmt(r.beta),
            fmt_opt(r.mean),
            fmt_opt(r.sd),
            fmt(r.non_interior_fraction),
            r.reps.to_string(),
            String::new(),
            String::new(),
        ]);
    }
    for s in &slopes {
        doc.row(vec![
            "rate".into(),
            cfg.ensemble.name().into(),
            String::new(),
            fmt(s.beta),
            String::new(),
            String::new(),
            String::new(),
            s.points.to_string(),
            fmt(s.slope),
            fmt(s.r2),
        ]);
    }
    doc.emit(p.opt_string("out").as_deref())?;
    emit_plot_script(&p, |csv| {
        ising_cli::gnuplot::errorbars_script(csv, &cfg.sizes)
    })
}

fn cmd_power_heatmap(m: &ArgMatches) -> Result<(), CliError> {
    let p = Params::new(m)?;
    let cfg = HeatmapConfig {
        n: p.usize("n")?,
        p_grid: p.f64_grid("p-grid")?,
        betas: p.f64_grid("betas")?,
        reps: p.usize("reps")?,
        alpha: p.f64("alpha")?,
        law_count: p.usize("law-count")?,
        sampler: sampler_opts(&p)?,
    };
    let rows = power_heatmap(&cfg)?;
    let mut doc = CsvDoc::new("power-heatmap", &["p", "beta", "power"]);
    doc.meta("n", cfg.n)
        .meta("p_grid", echo_list(&cfg.p_grid))
        .meta("betas", echo_list(&cfg.betas))
        .meta("reps", cfg.reps)
        .meta("alpha", fmt(cfg.alpha))
        .meta("law_count", cfg.law_count);
    echo_sampler(&mut doc, &cfg.sampler, cfg.n);
    for (pp, beta, power) in &rows {
        doc.row(vec![fmt(*pp), fmt(*beta), fmt(*power)]);
    }
    doc.emit(p.opt_string("out").as_deref())?;
    emit_plot_script(&p, ising_cli::gnuplot::heatmap_script)
}

fn cmd_cw_power(m: &ArgMatches) -> Result<(), CliError> {
    let p = Params::new(m)?;
    let cfg = CwPowerConfig {
        n: p.usize("n")?,
        betas: p.f64_grid("betas")?,
        reps: p.usize("reps")?,
        alpha: p.f64("alpha")?,
        law_count: p.usize("law-count")?,
        sampler: sampler_opts(&p)?,
    };
    let rows = cw_power(&cfg)?;
    let mut doc = CsvDoc::new("cw-power", &["beta", "empirical", "limit"]);
    doc.meta("n", cfg.n)
        .meta("betas", echo_list(&cfg.betas))
        .meta("reps", cfg.reps)
        .meta("alpha", fmt(cfg.alpha))
        .meta("law_count", cfg.law_count);
    echo_sampler(&mut doc, &cfg.sampler, cfg.n);
    for r in &rows {
        doc.row(vec![fmt(r.beta), fmt(r.empirical), fmt(r.limit)]);
    }
    doc.emit(p.opt_string("out").as_deref())?;
    emit_plot_script(&p, ising_cli::gnuplot::cw_power_script)
}

fn cmd_partition(m: &ArgMatches) -> Result<(), CliError> {
    let p = Params::new(m)?;
    let cfg = PartitionGridConfig {
        ensemble: Ensemble::parse(&p.string("ensemble")?)?,
        n: p.usize("n")?,
        betas: p.f64_grid("betas")?,
        p: edge_probability(&p)?,
        degree: p.opt_usize("degree")?,
        seed: p.u64("seed")?,
    };
    let reports = partition_grid(&cfg)?;
    let mut doc = CsvDoc::new(
        "partition",
        &[
            "beta",
            "exact",
            "upper",
            "lower_rademacher",
            "lower_meanfield",
        ],
    );
    doc.meta("ensemble", cfg.ensemble.name())
        .meta("n", cfg.n)
        .meta("betas", echo_list(&cfg.betas))
        .meta("seed", cfg.seed);
    echo_edge_probability(&mut doc, &cfg.p);
    for r in &reports {
        doc.row(vec![
            fmt(r.beta),
            fmt_opt(r.exact),
            fmt_opt(r.gaussian_upper),
            fmt(r.rademacher_lower),
            fmt(r.mean_field_lower),
        ]);
    }
    doc.emit(p.opt_string("out").as_deref())?;
    emit_plot_script(&p, ising_cli::gnuplot::partition_script)
}

fn cmd_analyze(m: &ArgMatches) -> Result<(), CliError> {
    let p = Params::new(m)?;
    let opts = sampler_opts(&p)?;
    let seed = opts.seed;
    let mut chain = ChainConfig::new(seed);
    if let Some(b) = opts.burn_in {
        chain.burn_in_sweeps = b;
    }
    chain.thin_sweeps = opts.thin;
    let cfg = AnalyzeConfig {
        edges_path: p.string("edges")?,
        labels_path: p.string("labels")?,
        b_boot: p.usize("b-boot")?,
        b_null: p.usize("b-null")?,
        statistic: parse_statistic(&p.string("statistic")?)?,
        chain,
    };
    let (_, report) = run_analyze(&cfg)?;
    print!("{}", text_report(&cfg, &report));
    if let Some(out) = p.opt_string("out") {
        csv_report(&cfg, &report, seed).emit(Some(&out))?;
    }
    Ok(())
}

fn cmd_sample(m: &ArgMatches) -> Result<(), CliError> {
    let p = Params::new(m)?;
    let include_spins = p.flag("spins");
    let cfg = SampleConfig {
        ensemble: Ensemble::parse(&p.string("ensemble")?)?,
        n: p.usize("n")?,
        beta: p.f64("beta")?,
        count: p.usize("count")?,
        p: edge_probability(&p)?,
        degree: p.opt_usize("degree")?,
        sampler: sampler_opts(&p)?,
        include_spins,
    };
    let rows = sample_rows(&cfg)?;
    let columns: &[&str] = if include_spins {
        &["rep", "hamiltonian", "magnetization", "spins"]
    } else {
        &["rep", "hamiltonian", "magnetization"]
    };
    let mut doc = CsvDoc::new("sample", columns);
    doc.meta("ensemble", cfg.ensemble.name())
        .meta("n", cfg.n)
        .meta("beta", fmt(cfg.beta))
        .meta("count", cfg.count);
    echo_edge_probability(&mut doc, &cfg.p);
    echo_sampler(&mut doc, &cfg.sampler, cfg.n);
    for r in &rows {
        let mut cells = vec![r.rep.to_string(), fmt(r.hamiltonian), fmt(r.magnetization)];
        if let Some(s) = &r.spins {
            cells.push(s.clone());
        }
        doc.row(cells);
    }
    doc.emit(p.opt_string("out").as_deref())
}
