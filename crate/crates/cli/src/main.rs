//! `noisyor`: generate networks, draw samples, reconstruct structure and run
//! the polynomial analyses from the command line.
//!
//! Exit codes: 0 success or a positive verdict, 1 a negative verdict, 2 error.

mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use noisyor::analysis::{
    counterexample_search, good_bias_profile, near_root_measure_bound, separation_at, unique_polynomials_among,
    unique_polynomials_check, CounterexampleParams, ProfileOptions, DEFAULT_ENUMERATION_BUDGET, DEFAULT_SUBSET_CAP,
};
use noisyor::network::{random_network, structurally_equivalent, validate};
use noisyor::poly::q_polynomial;
use noisyor::rational::{format_rational, parse_rational, to_f64, Rational};
use noisyor::reconstruct::{end_to_end_learn, run, LearnConfig, LearnData, ReconstructionConfig, Variant};
use noisyor::sampler::sample;
use noisyor::seq::{DistributionalOracle, SeqOracle, StructuralOracle};
use noisyor::{BiasSetting, NetworkFamily, NoisyOrNetwork, SampleSet, Subclass};

use io::{Manifest, Verdict};

#[derive(Parser, Debug)]
#[command(name = "noisyor", version, about = "Noisy-OR network structure experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random member of a family.
    Generate(GenerateArgs),
    /// Draw output samples from a network.
    Sample(SampleArgs),
    /// Recover a network up to input renaming.
    Reconstruct(Box<ReconstructArgs>),
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Re-run the command recorded in a manifest and compare output hashes.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
struct FamilyArgs {
    /// Fan-in bound k.
    #[arg(long)]
    fanin: usize,
    /// Comma-separated weight values, e.g. `1/2,1/4`.
    #[arg(long, value_delimiter = ',', value_parser = parse_weight)]
    weights: Vec<Rational>,
    #[arg(long, default_value = "general", value_parser = parse_subclass)]
    subclass: Subclass,
    /// Optional weight resolution; every weight must be a multiple.
    #[arg(long, value_parser = parse_weight)]
    beta: Option<Rational>,
}

impl FamilyArgs {
    fn family(&self) -> Result<NetworkFamily> {
        let subclass = if self.subclass == Subclass::General && self.weights.len() == 1 {
            Subclass::OneWeightValue
        } else {
            self.subclass
        };
        Ok(NetworkFamily::new(self.fanin, self.weights.clone(), self.beta.clone(), subclass)?)
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    inputs: usize,
    #[arg(long)]
    outputs: usize,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long, value_parser = parse_bias)]
    bias: BiasSetting,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    Structural,
    Distributional,
    Statistical,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    /// Observed draws (learning mode).
    #[arg(long, conflicts_with = "net")]
    samples: Option<PathBuf>,
    /// Hidden network sampled on demand (learning mode).
    #[arg(long)]
    net: Option<PathBuf>,
    /// Most draws the live sampler may produce.
    #[arg(long, requires = "net")]
    budget: Option<usize>,
    /// Target seen by the exact oracles (simulation mode); in learning mode it
    /// is only used to score the result.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Number of inputs m.
    #[arg(long)]
    m: usize,
    /// Number of outputs; defaults to the data's.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, value_parser = parse_bias)]
    bias: Option<BiasSetting>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, value_enum)]
    oracle: OracleKind,
    #[arg(long, default_value = "basic-block", value_parser = parse_variant)]
    algorithm: Variant,
    #[arg(long)]
    query_budget: Option<usize>,
    #[arg(long)]
    fresh_per_query: bool,
    /// Seed for live sampling.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// JSON report path; the text summary always goes to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum AnalyzeCommand {
    /// Print the all-zero polynomial of an output set.
    Poly {
        #[arg(long)]
        net: PathBuf,
        /// Comma-separated output indices; empty for the empty set.
        #[arg(long, default_value = "", value_parser = parse_index_list)]
        outputs: IndexList,
        #[arg(long, value_parser = parse_bias)]
        bias: Option<BiasSetting>,
    },
    /// Profile the biases at which a family is separated by at least alpha.
    Goodbias {
        #[arg(long)]
        inputs: usize,
        #[arg(long)]
        outputs: usize,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(long)]
        max_subset: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        budget: usize,
    },
    /// Near-root count and measure bound.
    Bound {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        alpha: f64,
    },
    /// Exhaustive unique-polynomial check of a family, or of given networks.
    Unique {
        #[arg(long, required_unless_present = "nets")]
        inputs: Option<usize>,
        #[arg(long, required_unless_present = "nets")]
        outputs: Option<usize>,
        #[arg(long, required_unless_present = "nets")]
        fanin: Option<usize>,
        #[arg(long, value_delimiter = ',', value_parser = parse_weight)]
        weights: Vec<Rational>,
        #[arg(long, default_value = "general", value_parser = parse_subclass)]
        subclass: Subclass,
        #[arg(long, num_args = 1.., conflicts_with_all = ["inputs", "outputs", "fanin"])]
        nets: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        budget: usize,
    },
    /// Search for inequivalent networks with identical distributions.
    Counterexample {
        /// Number of distinct weight values the pair must use.
        #[arg(long, default_value_t = 3)]
        weights: usize,
        #[arg(long, default_value_t = 4)]
        inputs: usize,
        #[arg(long, default_value_t = 2)]
        outputs: usize,
        #[arg(long, value_delimiter = ',', value_parser = parse_weight)]
        grid: Vec<Rational>,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        budget: usize,
        /// Directory receiving `a.json` and `b.json`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// Structural equivalence of two networks.
    Equiv { a: PathBuf, b: PathBuf },
    /// Largest all-zero probability gap over output sets up to a size.
    Dist {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_parser = parse_bias)]
        bias: BiasSetting,
        #[arg(long)]
        max_subset: Option<usize>,
    },
}

#[derive(Clone, Debug)]
struct IndexList(Vec<usize>);

fn parse_index_list(s: &str) -> std::result::Result<IndexList, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<std::result::Result<_, _>>()
        .map(IndexList)
}

fn parse_weight(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s.trim()).map_err(|e| e.to_string())
}

fn parse_bias(s: &str) -> std::result::Result<BiasSetting, String> {
    BiasSetting::parse(s.trim()).map_err(|e| e.to_string())
}

fn parse_subclass(s: &str) -> std::result::Result<Subclass, String> {
    s.parse().map_err(|e: noisyor::Error| e.to_string())
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    s.parse().map_err(|e: noisyor::Error| e.to_string())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    match execute(&argv) {
        Ok(Verdict::Positive) => ExitCode::from(0),
        Ok(Verdict::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(argv: &[String]) -> Result<Verdict> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(Verdict::Positive);
        }
        Err(e) => bail!("{}", e.to_string().trim_start_matches("error: ").trim_end()),
    };
    let mut manifest = Manifest::start(argv);
    let verdict = match cli.command {
        Command::Generate(a) => generate(a, &mut manifest)?,
        Command::Sample(a) => sample_cmd(a, &mut manifest)?,
        Command::Reconstruct(a) => reconstruct_cmd(*a, &mut manifest)?,
        Command::Analyze(a) => analyze(a, &mut manifest)?,
        Command::Verify(v) => verify(v)?,
        Command::Replay { manifest: path } => return replay(&path),
    };
    manifest.finish()?;
    Ok(verdict)
}

fn generate(a: GenerateArgs, manifest: &mut Manifest) -> Result<Verdict> {
    let fam = a.family.family()?;
    let net = random_network(&fam, a.inputs, a.outputs, a.seed)?;
    let report = validate(&net, &fam);
    if !report.is_valid() {
        bail!("generated network violates the family: {:?}", report.violations);
    }
    manifest.seed("network", a.seed);
    manifest.config(serde_json::json!({ "inputs": a.inputs, "outputs": a.outputs, "family": fam }));
    manifest.write_output(&a.out, net.to_json().as_bytes())?;
    println!("inputs: {}", net.num_inputs());
    println!("outputs: {}", net.num_outputs());
    println!("edges: {}", net.edge_count());
    println!("max_fan_in: {}", net.max_fan_in());
    println!("out: {}", a.out.display());
    Ok(Verdict::Positive)
}

fn sample_cmd(a: SampleArgs, manifest: &mut Manifest) -> Result<Verdict> {
    let net = manifest.read_network(&a.net)?;
    let set = sample(&net, &a.bias, a.count, a.seed);
    manifest.seed("sample", a.seed);
    manifest.config(serde_json::json!({ "bias": a.bias.to_string(), "count": a.count }));
    manifest.write_output(&a.out, set.to_text().as_bytes())?;
    println!("count: {}", set.len());
    println!("outputs: {}", set.num_outputs());
    println!("bias: {}", a.bias);
    println!("all_zero: {}", set.all_zero());
    println!("out: {}", a.out.display());
    Ok(Verdict::Positive)
}

fn reconstruct_cmd(a: ReconstructArgs, manifest: &mut Manifest) -> Result<Verdict> {
    let fam = a.family.family()?;
    let target = a.target.as_ref().map(|p| manifest.read_network(p)).transpose()?;
    let hidden = a.net.as_ref().map(|p| manifest.read_network(p)).transpose()?;
    let samples = match &a.samples {
        Some(p) => Some(SampleSet::from_text(&manifest.read_text(p)?)?),
        None => None,
    };
    let n = a
        .n
        .or_else(|| samples.as_ref().map(SampleSet::num_outputs))
        .or_else(|| hidden.as_ref().map(NoisyOrNetwork::num_outputs))
        .or_else(|| target.as_ref().map(NoisyOrNetwork::num_outputs))
        .ok_or_else(|| anyhow!("cannot tell the number of outputs; pass --n"))?;
    let mut cfg = ReconstructionConfig::new(a.m, n, fam.clone());
    cfg.variant = a.algorithm;
    cfg.query_budget = a.query_budget;

    let report = match a.oracle {
        OracleKind::Structural | OracleKind::Distributional => {
            let Some(t) = target.clone() else {
                bail!("the {:?} oracle needs --target (simulation mode)", a.oracle);
            };
            if a.samples.is_some() || a.net.is_some() {
                bail!("simulation mode takes --target only, not --samples or --net");
            }
            let oracle: Box<dyn SeqOracle> = match a.oracle {
                OracleKind::Structural => Box::new(StructuralOracle::new(t)),
                _ => {
                    let bias = a.bias.clone().ok_or_else(|| anyhow!("the distributional oracle needs --bias"))?;
                    Box::new(DistributionalOracle::new(t, bias))
                }
            };
            run(oracle.as_ref(), &cfg)?
        }
        OracleKind::Statistical => {
            let bias = a.bias.clone().ok_or_else(|| anyhow!("the statistical oracle needs --bias"))?;
            let alpha = a.alpha.ok_or_else(|| anyhow!("the statistical oracle needs --alpha"))?;
            let learn = LearnConfig { reconstruction: cfg.clone(), bias, alpha, delta: a.delta, fresh_per_query: a.fresh_per_query };
            let data = match (samples, hidden) {
                (Some(set), None) => LearnData::Samples(set),
                (None, Some(net)) => {
                    let seed = a.seed.ok_or_else(|| anyhow!("live sampling needs --seed"))?;
                    manifest.seed("live-sample", seed);
                    let needed = learn.sample_size()?;
                    let total = if a.fresh_per_query { needed.saturating_mul(cfg.query_bound() as usize) } else { needed };
                    if let Some(b) = a.budget {
                        if total > b {
                            bail!("live sampling needs up to {total} draws, over the --budget of {b}");
                        }
                    }
                    LearnData::Live { target: net, seed }
                }
                _ => bail!("the statistical oracle needs exactly one of --samples or --net"),
            };
            manifest.config(serde_json::json!({ "learn": &learn }));
            end_to_end_learn(data, &learn)?
        }
    };
    if a.oracle != OracleKind::Statistical {
        manifest.config(serde_json::json!({ "reconstruction": &cfg }));
    }
    manifest.write_output(&a.out, report.recovered.to_json().as_bytes())?;
    if let Some(p) = &a.report {
        let mut json = serde_json::to_string_pretty(&report)?;
        json.push('\n');
        manifest.write_output(p, json.as_bytes())?;
    }
    print!("{}", report.to_text());
    let verdict = match target.or(a.net.as_ref().map(|p| io::load_network(p)).transpose()?) {
        Some(t) => {
            let eq = structurally_equivalent(&report.recovered, &t);
            println!("equivalent: {eq}");
            if eq {
                Verdict::Positive
            } else {
                Verdict::Negative
            }
        }
        None => Verdict::Positive,
    };
    println!("out: {}", a.out.display());
    Ok(verdict)
}

fn analyze(cmd: AnalyzeCommand, manifest: &mut Manifest) -> Result<Verdict> {
    match cmd {
        AnalyzeCommand::Poly { net, outputs, bias } => {
            let net = manifest.read_network(&net)?;
            if let Some(&j) = outputs.0.iter().find(|&&j| j >= net.num_outputs()) {
                bail!("output {j} out of range");
            }
            let q = q_polynomial(&net, &outputs.0);
            println!("polynomial: {q}");
            let coeffs: Vec<String> = q.coefficients().iter().map(format_rational).collect();
            println!("coefficients: [{}]", coeffs.join(", "));
            println!("degree: {}", q.degree().map_or("none".to_string(), |d| d.to_string()));
            if let Some(b) = bias {
                println!("value: {}", format_rational(&q.eval(b.p())));
            }
            Ok(Verdict::Positive)
        }
        AnalyzeCommand::Goodbias { inputs, outputs, family, alpha, grid, max_subset, budget } => {
            let fam = family.family()?;
            let opts = ProfileOptions { max_subset, enumeration_budget: budget, ..Default::default() };
            let prof = good_bias_profile(&fam, inputs, outputs, alpha, grid, &opts)?;
            println!("alpha: {}", prof.alpha);
            println!("networks: {}", prof.networks);
            println!("pairs: {}", prof.pairs);
            println!("grid_resolution: {}", prof.grid_resolution);
            println!("good_measure: {}", prof.good_measure);
            println!("bad_measure: {}", prof.bad_measure());
            for (lo, hi) in &prof.bad_intervals {
                println!("bad_interval: {lo} {hi}");
            }
            Ok(Verdict::Positive)
        }
        AnalyzeCommand::Bound { d, r, c, alpha } => {
            let (count, measure) = near_root_measure_bound(d, r, c, alpha)?;
            println!("count_bound: {count}");
            println!("measure_bound: {measure}");
            Ok(Verdict::Positive)
        }
        AnalyzeCommand::Unique { inputs, outputs, fanin, weights, subclass, nets, budget } => {
            let verdict = if nets.is_empty() {
                let (m, n, k) = (inputs.unwrap_or(0), outputs.unwrap_or(0), fanin.unwrap_or(0));
                let fam = FamilyArgs { fanin: k, weights, subclass, beta: None }.family()?;
                unique_polynomials_check(&fam, m, n, budget)?
            } else {
                let loaded: Vec<NoisyOrNetwork> = nets.iter().map(|p| manifest.read_network(p)).collect::<Result<_>>()?;
                unique_polynomials_among(&loaded, None)?
            };
            println!("verdict: {}", if verdict.holds { "holds" } else { "fails" });
            println!("networks: {}", verdict.networks);
            if let Some(s) = verdict.min_witness_size {
                println!("min_witness_size: {s}");
            }
            if let Some((a, b)) = &verdict.witness {
                println!("witness_a: {}", serde_json::to_string(a)?);
                println!("witness_b: {}", serde_json::to_string(b)?);
            }
            Ok(if verdict.holds { Verdict::Positive } else { Verdict::Negative })
        }
        AnalyzeCommand::Counterexample { weights, inputs, outputs, grid, budget, out_dir } => {
            let mut params = CounterexampleParams { num_weights: weights, max_inputs: inputs, num_outputs: outputs, budget, ..Default::default() };
            if !grid.is_empty() {
                params.weight_grid = grid;
            }
            manifest.config(serde_json::json!({
                "num_weights": weights, "inputs": inputs, "outputs": outputs, "budget": budget,
                "grid": params.weight_grid.iter().map(format_rational).collect::<Vec<_>>(),
            }));
            let Some(found) = counterexample_search(&params)? else {
                println!("found: false");
                return Ok(Verdict::Negative);
            };
            let sets: Vec<Vec<usize>> = noisyor::subset::subsets_up_to(outputs, outputs).into_iter().skip(1).collect();
            let identical = sets.iter().all(|y| q_polynomial(&found.a, y) == q_polynomial(&found.b, y));
            let equivalent = structurally_equivalent(&found.a, &found.b);
            println!("found: true");
            println!("weights: {}", found.weights.iter().map(format_rational).collect::<Vec<_>>().join(","));
            println!("equivalent: {equivalent}");
            println!("identical_polynomials: {identical}");
            println!("a: {}", serde_json::to_string(&found.a)?);
            println!("b: {}", serde_json::to_string(&found.b)?);
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                manifest.write_output(&dir.join("a.json"), found.a.to_json().as_bytes())?;
                manifest.write_output(&dir.join("b.json"), found.b.to_json().as_bytes())?;
            }
            Ok(if identical && !equivalent { Verdict::Positive } else { Verdict::Negative })
        }
    }
}

fn verify(cmd: VerifyCommand) -> Result<Verdict> {
    match cmd {
        VerifyCommand::Equiv { a, b } => {
            let (a, b) = (io::load_network(&a)?, io::load_network(&b)?);
            let eq = a.num_outputs() == b.num_outputs() && structurally_equivalent(&a, &b);
            println!("equivalent: {eq}");
            Ok(if eq { Verdict::Positive } else { Verdict::Negative })
        }
        VerifyCommand::Dist { a, b, bias, max_subset } => {
            let (a, b) = (io::load_network(&a)?, io::load_network(&b)?);
            let s = max_subset.unwrap_or(a.num_outputs());
            let sep = separation_at(&bias, &a, &b, s, DEFAULT_SUBSET_CAP)?;
            println!("separation: {}", format_rational(&sep));
            println!("separation_f64: {}", to_f64(&sep));
            println!("max_subset: {s}");
            let identical = num_is_zero(&sep);
            println!("identical: {identical}");
            Ok(if identical { Verdict::Positive } else { Verdict::Negative })
        }
    }
}

fn num_is_zero(r: &Rational) -> bool {
    *r.numer() == 0.into()
}

fn replay(path: &Path) -> Result<Verdict> {
    let recorded = Manifest::load(path)?;
    let argv = recorded.argv.clone();
    if argv.get(1).map(String::as_str) == Some("replay") {
        bail!("manifest records a replay");
    }
    let verdict = execute(&argv)?;
    let mut all_same = true;
    for out in &recorded.outputs {
        let now = io::sha256_file(Path::new(&out.path))?;
        let same = now == out.sha256;
        all_same &= same;
        println!("reproduced: {} {}", out.path, same);
    }
    println!("replay_identical: {all_same}");
    Ok(if all_same { verdict } else { Verdict::Negative })
}
