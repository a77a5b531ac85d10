use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use srn_core::io::{read_mask, write_mask, Format};
use srn_core::rational::Display;
use srn_core::verify::{check_super_regular, regularity_report, spectral_gap, VerifyOptions, DEFAULT_SAMPLES};
use srn_core::{
    add, build_network, compare, densify_to, generate_base, generate_expander, parallel, parse_rational,
    BaseMatrixSpec, ExpanderSpec, NetworkSpec, PermutedMask, Rational, Result,
};

#[derive(Parser)]
#[command(name = "srn", version, about = "Build and verify super-regular layer masks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a base matrix, optionally densified.
    Gen {
        #[arg(long)]
        k: u32,
        /// Comma-separated diagonal indices in 1..=4.
        #[arg(long, value_delimiter = ',', required = true)]
        diagonals: Vec<u8>,
        /// Target density, as p/q or a decimal.
        #[arg(long, value_parser = rational)]
        densify: Option<Rational>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "binary", value_parser = format)]
        format: Format,
    },
    /// Build one permuted mask per consecutive pair of layer sizes.
    Stack {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, value_parser = rational)]
        density: Rational,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        /// Largest shorter side verified exactly; larger layers are sampled.
        #[arg(long)]
        exact_limit: Option<usize>,
    },
    /// Report ε*, δ* and degrees; with --epsilon and --delta also check
    /// super-regularity (exit 3 when it fails).
    Verify {
        path: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        verify: VerifyArgs,
        #[arg(long, value_parser = rational, requires = "delta")]
        epsilon: Option<Rational>,
        #[arg(long, value_parser = rational, requires = "epsilon")]
        delta: Option<Rational>,
    },
    /// Random regular bipartite expander.
    Expander {
        #[arg(long)]
        n: usize,
        /// Right side size when different from --n.
        #[arg(long)]
        n_right: Option<usize>,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "binary", value_parser = format)]
        format: Format,
    },
    /// Tabulate structural measures of several masks of one shape.
    Compare {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        verify: VerifyArgs,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Second singular value and spectral gap.
    Spectral {
        path: PathBuf,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Add a base matrix to a labelled target through the block bijection.
    Add {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        addend_k: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        addend_diagonals: Vec<u8>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "binary", value_parser = format)]
        format: Format,
        #[command(flatten)]
        input: InputArgs,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Input format; detected from the content when omitted.
    #[arg(long, value_parser = format)]
    input_format: Option<Format>,
    /// ROWSxCOLS, needed for edge-csv input.
    #[arg(long, value_parser = shape)]
    shape: Option<(usize, usize)>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Exhaustive enumeration (fails above the exact limit).
    #[arg(long, conflicts_with = "samples")]
    exact: bool,
    /// Sampled verification with this many subset pairs.
    #[arg(long)]
    samples: Option<usize>,
    /// Sampling seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest shorter side enumerated exactly in automatic mode.
    #[arg(long)]
    exact_limit: Option<usize>,
}

impl VerifyArgs {
    fn options(&self) -> VerifyOptions {
        let seed = self.seed;
        let options = if self.exact {
            VerifyOptions::exact()
        } else if let Some(n) = self.samples {
            VerifyOptions::sampled(n, seed)
        } else {
            VerifyOptions::auto(DEFAULT_SAMPLES, seed)
        };
        match self.exact_limit {
            Some(l) => options.with_exact_limit(l),
            None => options,
        }
    }
}

fn rational(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn format(s: &str) -> std::result::Result<Format, String> {
    s.parse::<Format>().map_err(|e| e.to_string())
}

fn shape(s: &str) -> std::result::Result<(usize, usize), String> {
    let (r, c) = s.split_once(['x', 'X']).ok_or("expected ROWSxCOLS")?;
    let r = r.trim().parse().map_err(|_| format!("bad row count {r:?}"))?;
    let c = c.trim().parse().map_err(|_| format!("bad column count {c:?}"))?;
    Ok((r, c))
}

fn load(path: &Path, input: &InputArgs) -> Result<PermutedMask> {
    read_mask(path, input.input_format, input.shape)
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

/// Writes to stdout; a closed pipe ends the process quietly.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: {e}");
        std::process::exit(4);
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Gen { k, diagonals, densify, out, format } => {
            let mut mask = generate_base(&BaseMatrixSpec::new(k, diagonals)?);
            if let Some(d) = densify {
                mask = densify_to(&mask, d)?;
            }
            write_mask(&out, &PermutedMask::identity(mask), format, None)?;
        }
        Command::Stack { sizes, density, seed, out_dir, exact_limit } => {
            let spec = NetworkSpec::from_sizes(&sizes, density, seed)?;
            let mut options = VerifyOptions::auto(DEFAULT_SAMPLES, seed);
            if let Some(l) = exact_limit {
                options = options.with_exact_limit(l);
            }
            let layers = build_network(&spec, &options)?;
            fs::create_dir_all(&out_dir)?;
            for (i, layer) in layers.iter().enumerate() {
                write_mask(&out_dir.join(format!("layer_{i:03}.srnm")), &layer.mask, Format::Binary, None)?;
                fs::write(out_dir.join(format!("layer_{i:03}.report.json")), json(&layer.report) + "\n")?;
                emit(&format!(
                    "layer {i}: {}x{} density {} eps* {} delta* {}\n",
                    layer.report.rows,
                    layer.report.cols,
                    Display(&layer.report.density),
                    Display(&layer.report.epsilon_star),
                    Display(&layer.report.delta_star)
                ));
            }
        }
        Command::Verify { path, input, verify, epsilon, delta } => {
            let mask = load(&path, &input)?.effective();
            let options = verify.options();
            let report = regularity_report(&mask, &options)?;
            emit(&(json(&report) + "\n"));
            if let (Some(e), Some(d)) = (epsilon, delta) {
                let check = check_super_regular(&mask, e, d, &options)?;
                emit(&(json(&check) + "\n"));
                if !check.holds {
                    eprintln!("not ({}, {})-super-regular", Display(&e), Display(&d));
                    return Ok(ExitCode::from(3));
                }
            }
        }
        Command::Expander { n, n_right, degree, seed, out, format } => {
            let spec = ExpanderSpec { n_left: n, n_right: n_right.unwrap_or(n), degree, seed };
            let mask = generate_expander(&spec)?;
            write_mask(&out, &PermutedMask::identity(mask), format, None)?;
        }
        Command::Compare { paths, input, verify, json: as_json } => {
            let masks = paths.iter().map(|p| load(p, &input).map(|m| m.effective())).collect::<Result<Vec<_>>>()?;
            let labels: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
            let report = compare(&masks, &labels, &verify.options(), None)?;
            if as_json {
                emit(&(json(&report) + "\n"));
            } else {
                emit(&report.to_table());
            }
        }
        Command::Spectral { path, input } => {
            let mask = load(&path, &input)?.effective();
            let report = spectral_gap(&mask)?;
            if !report.regular {
                eprintln!("warning: rows are not all of degree {}; using the maximum", report.degree_h);
            }
            emit(&(json(&report) + "\n"));
        }
        Command::Add { target, addend_k, addend_diagonals, out, format, input } => {
            let target = load(&target, &input)?;
            let addend = BaseMatrixSpec::new(addend_k, addend_diagonals)?;
            let base = add(&target.base, &addend)?;
            write_mask(&out, &PermutedMask { base, ..target }, format, None)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match parallel::install(|| run(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
