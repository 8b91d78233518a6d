use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use accinfo_core::{run_with_observer, Ensemble, OptimizerConfig, ReductionConfig};
use clap::Parser;

use crate::io::{parse_import, write_output};
use crate::report::to_json;

/// Search for the measurement that maximizes the mutual information of a
/// quantum ensemble, i.e. compute its accessible information.
#[derive(Debug, Parser)]
#[command(name = "accinfo", version)]
pub struct Args {
    /// Import file: `N`, `J`, `K` header lines followed by J matrices.
    #[arg(long)]
    pub input: PathBuf,
    /// Output file [default: input path with an `.out` extension].
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// RNG seed [default: drawn from OS entropy and echoed in the output].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative tolerance of the stopping rule.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Probability of taking a plain steepest-ascent step in an iteration.
    #[arg(long, default_value_t = 0.02)]
    pub steepest_prob: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Independent starts with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    /// Relative tolerance for merging equivalent outcomes.
    #[arg(long, default_value_t = 1e-8)]
    pub merge_tol: f64,
    /// Also write a JSON report next to the output file.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub quiet: bool,
}

pub const EXIT_CONVERGED: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_MAX_ITER: u8 = 2;

const PROGRESS_EVERY: usize = 100;

pub fn default_output(input: &Path) -> PathBuf {
    let out = input.with_extension("out");
    if out == input {
        let mut s = input.as_os_str().to_owned();
        s.push(".out");
        PathBuf::from(s)
    } else {
        out
    }
}

fn json_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_ERROR)
}

pub fn run(args: Args) -> ExitCode {
    let text = match fs::read_to_string(&args.input) {
        Ok(t) => t,
        Err(e) => return fail(format_args!("cannot read {}: {e}", args.input.display())),
    };
    let import = match parse_import(&text) {
        Ok(f) => f,
        Err(e) => return fail(format_args!("{}: {e}", args.input.display())),
    };
    let ensemble: Ensemble = import.ensemble();
    let report = ensemble.validate();
    if !report.is_valid() {
        eprintln!("error: {}: invalid statistical operators", args.input.display());
        for v in &report.violations {
            eprintln!("  {v}");
        }
        return ExitCode::from(EXIT_ERROR);
    }

    let cfg = OptimizerConfig {
        steepest_prob: args.steepest_prob,
        tolerance: args.tolerance,
        seed: args.seed.unwrap_or_else(rand::random),
        max_iterations: args.max_iter,
        restarts: args.restarts,
        reduction: ReductionConfig {
            merge_rel_tol: args.merge_tol,
            ..ReductionConfig::default()
        },
        ..OptimizerConfig::default()
    };
    if let Err(e) = cfg.validate() {
        return fail(e);
    }

    let quiet = args.quiet;
    let result = run_with_observer(&ensemble, &cfg, import.k_init, &mut |it| {
        if !quiet && (it.iteration + 1) % PROGRESS_EVERY == 0 {
            eprintln!("restart {} iteration {}: MI = {:.12}", it.restart, it.iteration + 1, it.mi);
        }
    });
    let run = match result {
        Ok(r) => r,
        Err(e) => return fail(e),
    };

    let output = args.output.clone().unwrap_or_else(|| default_output(&args.input));
    if let Err(e) = fs::write(&output, write_output(&run, &ensemble, &cfg)) {
        return fail(format_args!("cannot write {}: {e}", output.display()));
    }
    if args.json {
        let path = json_path(&output);
        if let Err(e) = fs::write(&path, to_json(&run, &ensemble)) {
            return fail(format_args!("cannot write {}: {e}", path.display()));
        }
    }
    if !quiet {
        println!(
            "accessible information {:.12} bits after {} iterations ({}), {} outcomes, {} after reduction",
            run.final_mi(),
            run.iterations,
            if run.converged { "converged" } else { "iteration limit" },
            run.final_povm.len(),
            run.reduced_povm.len()
        );
        println!("seed {}; output written to {}", cfg.seed, output.display());
    }
    if run.converged {
        ExitCode::from(EXIT_CONVERGED)
    } else {
        ExitCode::from(EXIT_MAX_ITER)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_defaults_next_to_input() {
        assert_eq!(default_output(Path::new("data/run.txt")), PathBuf::from("data/run.out"));
        assert_eq!(default_output(Path::new("run")), PathBuf::from("run.out"));
        assert_eq!(default_output(Path::new("x.out")), PathBuf::from("x.out.out"));
    }

    #[test]
    fn flags_parse_with_defaults() {
        let a = Args::try_parse_from(["accinfo", "--input", "f.txt"]).unwrap();
        assert_eq!(a.tolerance, 1e-9);
        assert_eq!(a.steepest_prob, 0.02);
        assert_eq!(a.max_iter, 10_000);
        assert_eq!(a.restarts, 1);
        assert!(a.seed.is_none() && !a.json && !a.quiet);
        assert!(Args::try_parse_from(["accinfo"]).is_err());
    }
}
