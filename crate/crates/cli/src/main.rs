//! `ntk-spectra`: kernels, spectra, information gain and error-rate
//! experiments from the command line.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ntk_spectra::experiments::{power_of_two_grid, ErrorRateConfig, FitWindow, MigGrowthConfig};
use ntk_spectra::kernels::{KernelFamily, NtRecursion};
use ntk_spectra::spectral::Parity;
use ntk_spectra::{Error, ErrorClass, Result};
use serde_json::Value;

use crate::commands::Sampling;
use crate::config::Flags;
use crate::output::Format;

#[derive(Parser, Debug)]
#[command(name = "ntk-spectra", version, about = "Neural kernels on the hypersphere: spectra, information gain, error rates")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// JSON parameters, or a previous report whose `config` block is reused.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (all cores when absent).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Use the 2^13-point, 20-repetition error-rate configuration.
    #[arg(long, global = true)]
    full_scale: bool,
    /// Also write a tidy CSV for plotting next to `--out`.
    #[arg(long, global = true)]
    emit_plot_data: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a kernel at inner products u or at point pairs.
    KernelEval(KernelEvalArgs),
    /// Mercer eigenvalues per harmonic degree.
    Spectrum(SpectrumArgs),
    /// Fit the power-law decay of the eigenvalues.
    Eigendecay(EigendecayArgs),
    /// Eigenvalue ratios against a Matérn kernel.
    MaternCompare(MaternArgs),
    /// Information gain and effective dimension of sampled point sets.
    Infogain(InfoGainArgs),
    /// Greedy max-variance selection over a candidate grid.
    SampleGreedy(GreedyArgs),
    /// Sup-error decay of kernel ridge regression on synthetic targets.
    ErrorRate(ErrorRateArgs),
    /// Growth of the greedy information gain with n.
    MigGrowth(MigArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Nt,
    Rf,
}

impl From<FamilyArg> for KernelFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Nt => KernelFamily::Nt,
            FamilyArg::Rf => KernelFamily::Rf,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ParityArg {
    Even,
    Odd,
    All,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Self {
        match p {
            ParityArg::Even => Parity::Even,
            ParityArg::Odd => Parity::Odd,
            ParityArg::All => Parity::All,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RecursionArg {
    Scaled,
    Standard,
}

impl From<RecursionArg> for NtRecursion {
    fn from(r: RecursionArg) -> Self {
        match r {
            RecursionArg::Scaled => NtRecursion::Scaled,
            RecursionArg::Standard => NtRecursion::Standard,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WindowArg {
    Full,
    UpperHalf,
}

impl From<WindowArg> for FitWindow {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::Full => FitWindow::Full,
            WindowArg::UpperHalf => FitWindow::UpperHalf,
        }
    }
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Activation smoothness s (1..=3).
    #[arg(long)]
    s: Option<u32>,
    /// Ambient dimension d of the sphere S^{d-1}.
    #[arg(long)]
    d: Option<usize>,
}

impl KernelArgs {
    fn flags(&self) -> Flags {
        let mut f = Flags::default();
        f.set("family", self.family.map(KernelFamily::from)).set("s", self.s).set("d", self.d);
        f
    }
}

#[derive(Args, Debug)]
struct KernelEvalArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    /// Depth l >= 2.
    #[arg(long)]
    l: Option<u32>,
    #[arg(long, value_enum)]
    recursion: Option<RecursionArg>,
    /// Comma-separated inner products.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    u: Option<Vec<f64>>,
    /// CSV file of point pairs `x_1..x_d,y_1..y_d`.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long, value_enum)]
    recursion: Option<RecursionArg>,
    #[arg(long)]
    max_degree: Option<usize>,
}

#[derive(Args, Debug)]
struct EigendecayArgs {
    #[command(flatten)]
    spectrum: SpectrumArgs,
    #[arg(long, value_enum)]
    parity: Option<ParityArg>,
    #[arg(long)]
    degree_min: Option<usize>,
    #[arg(long)]
    degree_max: Option<usize>,
}

#[derive(Args, Debug)]
struct MaternArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    /// Matérn smoothness.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    lengthscale: Option<f64>,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long, value_enum)]
    parity: Option<ParityArg>,
    #[arg(long)]
    degree_min: Option<usize>,
    #[arg(long)]
    degree_max: Option<usize>,
}

#[derive(Args, Debug)]
struct InfoGainArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_enum)]
    sampling: Option<Sampling>,
    #[arg(long)]
    candidates: Option<usize>,
}

#[derive(Args, Debug)]
struct GreedyArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    candidates: Option<usize>,
}

#[derive(Args, Debug)]
struct ErrorRateArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long)]
    reps: Option<usize>,
    /// Grid `n = 2^1..2^k`.
    #[arg(long, conflicts_with = "n_grid")]
    max_exponent: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    eval_sample: Option<usize>,
    /// Training regularization λ².
    #[arg(long)]
    train_lambda2: Option<f64>,
    #[arg(long)]
    noise_scale: Option<f64>,
    /// Draw a fresh training set for every n instead of nesting them.
    #[arg(long)]
    independent: bool,
    #[arg(long, value_enum)]
    fit_window: Option<WindowArg>,
}

#[derive(Args, Debug)]
struct MigArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, conflicts_with = "n_grid")]
    max_exponent: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long, value_enum)]
    fit_window: Option<WindowArg>,
}

fn file_config(global: &Global, command: &str) -> Result<Option<Value>> {
    global.config.as_deref().map(|p| config::load(p, command)).transpose()
}

fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    let (name, resolved, outcome) = match &cli.command {
        Command::KernelEval(a) => {
            let mut f = a.kernel.flags();
            f.set("l", a.l).set("recursion", a.recursion.map(NtRecursion::from)).set("u", a.u.clone());
            f.set("points", a.points.clone());
            let p: commands::KernelEvalParams =
                config::resolve(&Default::default(), file_config(g, "kernel-eval")?, f.into_map())?;
            ("kernel-eval", serde_json::to_value(&p)?, commands::kernel_eval(&p)?)
        }
        Command::Spectrum(a) => {
            let p: commands::SpectrumParams =
                config::resolve(&Default::default(), file_config(g, "spectrum")?, spectrum_flags(a).into_map())?;
            ("spectrum", serde_json::to_value(&p)?, commands::spectrum(&p)?)
        }
        Command::Eigendecay(a) => {
            let mut f = spectrum_flags(&a.spectrum);
            f.set("parity", a.parity.map(Parity::from)).set("degree_min", a.degree_min).set("degree_max", a.degree_max);
            let mut p: commands::EigendecayParams =
                config::resolve(&Default::default(), file_config(g, "eigendecay")?, f.into_map())?;
            p.fill_defaults();
            ("eigendecay", serde_json::to_value(&p)?, commands::eigendecay(&p)?)
        }
        Command::MaternCompare(a) => {
            let mut f = a.kernel.flags();
            f.set("nu", a.nu).set("lengthscale", a.lengthscale).set("max_degree", a.max_degree);
            f.set("parity", a.parity.map(Parity::from)).set("degree_min", a.degree_min).set("degree_max", a.degree_max);
            let mut p: commands::MaternCompareParams =
                config::resolve(&Default::default(), file_config(g, "matern-compare")?, f.into_map())?;
            p.fill_defaults();
            ("matern-compare", serde_json::to_value(&p)?, commands::matern_compare(&p)?)
        }
        Command::Infogain(a) => {
            let mut f = a.kernel.flags();
            f.set("n_grid", a.n_grid.clone()).set("lambda", a.lambda).set("sampling", a.sampling);
            f.set("candidates", a.candidates).set("seed", g.seed);
            let p: commands::InfoGainParams =
                config::resolve(&Default::default(), file_config(g, "infogain")?, f.into_map())?;
            ("infogain", serde_json::to_value(&p)?, commands::infogain(&p)?)
        }
        Command::SampleGreedy(a) => {
            let mut f = a.kernel.flags();
            f.set("n", a.n).set("lambda", a.lambda).set("candidates", a.candidates).set("seed", g.seed);
            let p: commands::SampleGreedyParams =
                config::resolve(&Default::default(), file_config(g, "sample-greedy")?, f.into_map())?;
            ("sample-greedy", serde_json::to_value(&p)?, commands::sample_greedy(&p)?)
        }
        Command::ErrorRate(a) => {
            let mut defaults = ErrorRateConfig::new(KernelFamily::Nt, 1, 3);
            if g.full_scale {
                defaults = defaults.full_scale();
            }
            let mut f = a.kernel.flags();
            f.set("repetitions", a.reps).set("master_seed", g.seed).set("eval_sample", a.eval_sample);
            f.set("n_grid", a.max_exponent.map(power_of_two_grid).or_else(|| a.n_grid.clone()));
            f.set("train_lambda2", a.train_lambda2).set("noise_scale", a.noise_scale);
            f.set("nested", a.independent.then_some(false)).set("fit_window", a.fit_window.map(FitWindow::from));
            let p: ErrorRateConfig = config::resolve(&defaults, file_config(g, "error-rate")?, f.into_map())?;
            ("error-rate", serde_json::to_value(&p)?, commands::error_rate(&p)?)
        }
        Command::MigGrowth(a) => {
            let mut f = a.kernel.flags();
            f.set("n_grid", a.max_exponent.map(power_of_two_grid).or_else(|| a.n_grid.clone()));
            f.set("lambda", a.lambda).set("candidate_grid_size", a.candidates).set("seed", g.seed);
            f.set("fit_window", a.fit_window.map(FitWindow::from));
            let defaults = MigGrowthConfig::new(KernelFamily::Nt, 1, 3);
            let p: MigGrowthConfig = config::resolve(&defaults, file_config(g, "mig-growth")?, f.into_map())?;
            ("mig-growth", serde_json::to_value(&p)?, commands::mig_growth(&p)?)
        }
    };
    if g.emit_plot_data && outcome.plot.is_none() {
        return Err(Error::config(format!("{name} has no plot data")));
    }
    output::write(name, resolved, outcome, g.format, g.out.as_deref(), g.emit_plot_data)
}

fn spectrum_flags(a: &SpectrumArgs) -> Flags {
    let mut f = a.kernel.flags();
    f.set("l", a.l).set("recursion", a.recursion.map(NtRecursion::from)).set("max_degree", a.max_degree);
    f
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Configuration => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::Io => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.global.workers {
        Some(0) => Err(Error::config("--workers must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(Error::config(format!("cannot start {n} workers: {e}"))),
        },
        None => run(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
