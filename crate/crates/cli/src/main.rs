//! Batch CLI over the tabsynth pipeline.
//!
//! One subcommand per pipeline stage: schema inference, column sorting,
//! training, sampling, evaluation, the permutation-sensitivity experiment,
//! and the encoded-sparsity report. Progress goes to stderr, artifacts to
//! files; every random choice flows from an explicit `--seed`.

mod config;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use tabsynth::association::association_matrix;
use tabsynth::encoding::fit_encoder;
use tabsynth::evaluation::{evaluate_tables, sensitivity_experiment, EvalReport};
use tabsynth::schema::{infer_schema, load_csv, RawTable, TableSchema, DEFAULT_CATEGORICAL_THRESHOLD};
use tabsynth::sorting::{
    order_by_correlation, order_by_type, sort_features, sparsity_report, ColumnOrder, OrderMethod,
    SquareLayout,
};
use tabsynth::synthesis::{synthesize, SynthModel};

#[derive(Parser)]
#[command(name = "tabsynth", version, about = "Tabular data synthesis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infer a schema from a CSV file.
    Schema {
        #[arg(long)]
        data: PathBuf,
        /// Name of the categorical target column.
        #[arg(long)]
        target: String,
        /// Distinct-value count above which numeric columns are continuous.
        #[arg(long, default_value_t = DEFAULT_CATEGORICAL_THRESHOLD)]
        threshold: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute a column order and write it as a text list.
    Sort {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// original | by_type | by_correlation | algorithm1
        #[arg(long, value_parser = parse_order_method)]
        method: OrderMethod,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a synthesizer and write a checkpoint directory.
    Train(TrainArgs),
    /// Sample rows from a trained checkpoint into a CSV file.
    Synthesize {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, short = 'n')]
        rows: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a synthetic table against real data.
    Evaluate {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        synth: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Optional CSV of per-column distances.
        #[arg(long)]
        wd_csv: Option<PathBuf>,
        /// Optional CSV grids of both association matrices.
        #[arg(long)]
        assoc_csv: Option<PathBuf>,
    },
    /// Train once per column order and report the quality spread.
    Sensitivity(SensitivityArgs),
    /// Report encoded-row sparsity under the square reshape.
    Sparsity {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// full | no_msn | plain
        #[arg(long, value_parser = parse_encoding, default_value = "full")]
        encoding: tabsynth::encoding::EncodingMode,
        #[arg(long, default_value_t = 10)]
        max_modes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pad the reshape to a fixed side instead of the minimal square.
        #[arg(long)]
        side: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: ConfigFlags,
}

#[derive(Args)]
struct SensitivityArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated order methods to compare.
    #[arg(long, value_delimiter = ',', value_parser = parse_order_method,
          default_value = "original,by_type,by_correlation")]
    orders: Vec<OrderMethod>,
    #[command(flatten)]
    flags: ConfigFlags,
}

/// Flag-level mirror of [`RunConfig`].
#[derive(Args)]
struct ConfigFlags {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    /// full | no_msn | plain
    #[arg(long, value_parser = parse_encoding)]
    encoding: Option<tabsynth::encoding::EncodingMode>,
    /// original | by_type | by_correlation | algorithm1
    #[arg(long, value_parser = parse_order_method)]
    order: Option<OrderMethod>,
    /// Text file with one column name per line.
    #[arg(long)]
    order_file: Option<PathBuf>,
    /// Sets autoencoder and adversarial epochs together.
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    ae_epochs: Option<usize>,
    #[arg(long)]
    gan_epochs: Option<usize>,
    #[arg(long)]
    pretrain_epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    n_critic: Option<usize>,
    #[arg(long)]
    gp_lambda: Option<f64>,
    #[arg(long)]
    max_modes: Option<usize>,
    #[arg(long)]
    latent_len: Option<usize>,
    #[arg(long)]
    noise_len: Option<usize>,
    #[arg(long)]
    gen_hidden: Option<usize>,
    #[arg(long)]
    disc_hidden: Option<usize>,
    #[arg(long)]
    clf_hidden: Option<usize>,
    /// Disable the auxiliary classifier (ablation).
    #[arg(long)]
    no_classifier: bool,
    /// Co-train the autoencoder with the adversarial pair (ablation).
    #[arg(long)]
    joint: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigFlags {
    fn into_config(self) -> RunConfig {
        RunConfig {
            data: self.data,
            schema: self.schema,
            encoding: self.encoding,
            order: self.order,
            order_file: self.order_file,
            epochs: self.epochs,
            ae_epochs: self.ae_epochs,
            gan_epochs: self.gan_epochs,
            pretrain_epochs: self.pretrain_epochs,
            batch: self.batch,
            learning_rate: self.learning_rate,
            n_critic: self.n_critic,
            gp_lambda: self.gp_lambda,
            max_modes: self.max_modes,
            latent_len: self.latent_len,
            noise_len: self.noise_len,
            gen_hidden: self.gen_hidden,
            disc_hidden: self.disc_hidden,
            clf_hidden: self.clf_hidden,
            no_classifier: if self.no_classifier { Some(true) } else { None },
            joint: if self.joint { Some(true) } else { None },
            seed: self.seed,
            repeats: self.repeats,
            out: self.out,
        }
    }
}

fn parse_order_method(s: &str) -> Result<OrderMethod, String> {
    match s {
        "original" => Ok(OrderMethod::Original),
        "type" | "by_type" => Ok(OrderMethod::ByType),
        "correlation" | "by_correlation" => Ok(OrderMethod::ByCorrelation),
        "algorithm1" => Ok(OrderMethod::Algorithm1),
        other => Err(format!(
            "unknown order {other:?}; expected original, type, correlation, or algorithm1"
        )),
    }
}

fn parse_encoding(s: &str) -> Result<tabsynth::encoding::EncodingMode, String> {
    use tabsynth::encoding::EncodingMode::*;
    match s {
        "full" => Ok(Full),
        "no_msn" => Ok(NoMsn),
        "plain" => Ok(Plain),
        other => Err(format!(
            "unknown encoding {other:?}; expected full, no_msn, or plain"
        )),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        // one machine-readable line on stderr, then a nonzero exit
        let payload = serde_json::json!({ "error": format!("{e:#}") });
        eprintln!("error: {payload}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Schema {
            data,
            target,
            threshold,
            out,
        } => {
            let schema = infer_schema(&data, &target, threshold)?;
            schema.save(&out)?;
            eprintln!(
                "wrote schema with {} columns to {}",
                schema.columns.len(),
                out.display()
            );
            Ok(())
        }
        Command::Sort {
            data,
            schema,
            method,
            seed,
            out,
        } => {
            let schema = TableSchema::load(&schema)?;
            let table = load_csv(&data, &schema)?;
            let order = compute_order(&table, method, seed)?;
            order.save(&out)?;
            eprintln!("wrote {} order to {}", order.method, out.display());
            Ok(())
        }
        Command::Train(args) => cmd_train(args),
        Command::Synthesize {
            checkpoint,
            rows,
            seed,
            out,
        } => {
            let model = SynthModel::load(&checkpoint)?;
            eprintln!("loaded checkpoint from {}", checkpoint.display());
            let table = synthesize(&model, rows, seed)?;
            table.write_csv(&out)?;
            eprintln!("wrote {rows} synthetic rows to {}", out.display());
            Ok(())
        }
        Command::Evaluate {
            real,
            synth,
            schema,
            seed,
            out,
            wd_csv,
            assoc_csv,
        } => {
            let schema = TableSchema::load(&schema)?;
            let real = load_csv(&real, &schema)?;
            let synth = load_csv(&synth, &schema)?;
            let report = evaluate_tables(&real, &synth, seed)?;
            report.save(&out)?;
            if let Some(path) = wd_csv {
                write_wd_csv(&report, &path)?;
            }
            if let Some(path) = assoc_csv {
                let grid_real = association_matrix(&real)?.to_csv_grid();
                let grid_synth = association_matrix(&synth)?.to_csv_grid();
                std::fs::write(&path, format!("{grid_real}\n{grid_synth}"))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(stats) = &report.stats {
                eprintln!(
                    "mean WD {:.6}, association difference {:.6}",
                    stats.mean_wd, stats.dif_corr
                );
            }
            if let Some(u) = &report.ml_utility {
                eprintln!("ML utility difference {:?}", u.utility_diff);
            }
            eprintln!("wrote report to {}", out.display());
            Ok(())
        }
        Command::Sensitivity(args) => cmd_sensitivity(args),
        Command::Sparsity {
            data,
            schema,
            encoding,
            max_modes,
            seed,
            side,
            out,
        } => {
            let schema = TableSchema::load(&schema)?;
            let table = load_csv(&data, &schema)?;
            let state = fit_encoder(&table, encoding, max_modes, seed)?;
            let layout = match side {
                Some(s) => SquareLayout::with_side(s, state.total_width)?,
                None => SquareLayout::new(state.total_width),
            };
            let report = sparsity_report(&state, &layout);
            std::fs::write(&out, serde_json::to_string_pretty(&report)?)
                .with_context(|| format!("writing {}", out.display()))?;
            eprintln!(
                "encoded width {}, side {}, zero fraction {:.4}",
                report.total_width, report.side, report.zero_fraction
            );
            Ok(())
        }
    }
}

fn load_run_config(file: Option<&Path>, flags: ConfigFlags) -> Result<RunConfig> {
    let base = match file {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    Ok(base.merged_with(flags.into_config()))
}

fn compute_order(table: &RawTable, method: OrderMethod, seed: u64) -> Result<ColumnOrder> {
    Ok(match method {
        OrderMethod::Original => ColumnOrder::original(&table.schema),
        OrderMethod::ByType => order_by_type(&table.schema),
        OrderMethod::ByCorrelation => {
            let assoc = association_matrix(table)?;
            order_by_correlation(&table.schema, &assoc)
        }
        OrderMethod::Algorithm1 => {
            let assoc = association_matrix(table)?;
            // widths come from a fitted encoder so mode counts are real
            let state = fit_encoder(table, tabsynth::encoding::EncodingMode::Full, 10, seed)?;
            let widths = state.feature_widths().into_iter().collect();
            sort_features(&table.schema, &assoc, &widths)?
        }
    })
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let cfg = load_run_config(args.config.as_deref(), args.flags)?;
    cfg.validate_for_training()?;
    let schema = TableSchema::load(cfg.schema.as_ref().unwrap())?;
    let table = load_csv(cfg.data.as_ref().unwrap(), &schema)?;
    let train_cfg = cfg.train_config();

    let table = apply_order(&table, &cfg, train_cfg.seed)?;
    eprintln!(
        "training on {} rows x {} columns (seed {})",
        table.n_rows(),
        table.n_columns(),
        train_cfg.seed
    );
    let model = SynthModel::fit(&table, cfg.encoding_mode(), &train_cfg)?;
    let out = cfg.out.as_ref().unwrap();
    model.save(out)?;
    eprintln!(
        "final losses: reconstruction {:?}, critic {:?}, generator {:?}",
        model.history.ae_loss.last(),
        model.history.d_loss.last(),
        model.history.g_loss.last()
    );
    eprintln!("wrote checkpoint to {}", out.display());
    Ok(())
}

fn apply_order(table: &RawTable, cfg: &RunConfig, seed: u64) -> Result<RawTable> {
    if let Some(path) = &cfg.order_file {
        let order = ColumnOrder::load(path, &table.schema)?;
        return Ok(table.permuted(&order.order)?);
    }
    match cfg.order {
        None | Some(OrderMethod::Original) => Ok(table.clone()),
        Some(method) => {
            let order = compute_order(table, method, seed)?;
            Ok(table.permuted(&order.order)?)
        }
    }
}

fn cmd_sensitivity(args: SensitivityArgs) -> Result<()> {
    let orders = args.orders.clone();
    let cfg = load_run_config(args.config.as_deref(), args.flags)?;
    cfg.validate_for_training()?;
    let schema = TableSchema::load(cfg.schema.as_ref().unwrap())?;
    let table = load_csv(cfg.data.as_ref().unwrap(), &schema)?;
    let train_cfg = cfg.train_config();
    let repeats = cfg.repeats.unwrap_or(1);

    let column_orders: Vec<ColumnOrder> = orders
        .iter()
        .map(|&m| compute_order(&table, m, train_cfg.seed))
        .collect::<Result<_>>()?;
    eprintln!(
        "sensitivity over {} orders x {} repeats",
        column_orders.len(),
        repeats
    );
    let record = sensitivity_experiment(
        &table,
        &column_orders,
        cfg.encoding_mode(),
        &train_cfg,
        repeats,
    )?;

    let mut report = EvalReport::new(vec![train_cfg.seed]);
    report.config = Some(serde_json::to_value(&cfg)?);
    report.sensitivity = Some(record);
    let out = cfg.out.as_ref().unwrap();
    report.save(out)?;

    let record = report.sensitivity.as_ref().unwrap();
    for order in &record.per_order {
        eprintln!("  {}: mean WD {:?}", order.method, order.mean_wd);
    }
    eprintln!("max diff: {:?} %", record.max_diff_pct);
    eprintln!("wrote report to {}", out.display());
    Ok(())
}

fn write_wd_csv(report: &EvalReport, path: &Path) -> Result<()> {
    let stats = report
        .stats
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("report has no per-column distances"))?;
    let mut text = String::from("column,kind,wd\n");
    for c in &stats.per_column_wd {
        text.push_str(&format!("{},{:?},{}\n", c.column, c.kind, c.wd));
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
