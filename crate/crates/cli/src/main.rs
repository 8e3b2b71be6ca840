mod family;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use marginal::catalog;
use marginal::classifier::{classify, BlockFamily};
use marginal::ctsim::{check_f_decreasing, propagate, run_trials, CtOptions, LyapunovF, SwitchingLaw};
use marginal::dominance::{candidate_dominant, verify_dominance_with};
use marginal::growth::{jsr_bounds_with, GrowthSeries, MkOptions, DEFAULT_BUDGET};
use marginal::matlib::euclidean_norm;
use marginal::polynorm::{build_parallelotope, is_barabanov};
use marginal::sublinear::{
    fit_cubic_exponent, good_n_sequence, infinite_product_prefixes, witnesses_csv, Alpha, C1Mode,
};
use marginal::words::{partition, SegmentColor};
use marginal::{Error, Result, Word};

use crate::family::{BlockSpec, FamilyFile};

#[derive(Parser, Debug)]
#[command(name = "marginal", version, about = "Growth of products and stability of switching systems")]
struct Cli {
    /// Worker threads for enumeration (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Certify {
    /// Longest word examined.
    #[arg(long, default_value_t = 12)]
    horizon: usize,
    #[arg(long, default_value_t = 0.95)]
    q: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact maximal product norm M_k for k = 1..kmax.
    Mk {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        kmax: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Lower and upper joint spectral radius bounds.
    Jsr {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        kmax: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Finite-horizon dominance certificate for a word (the best candidate by default).
    Dominance {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        word: Option<String>,
        #[command(flatten)]
        certify: Certify,
        #[command(flatten)]
        output: Output,
    },
    /// Stability verdict for a block upper-triangular family.
    Classify {
        #[arg(long)]
        family: PathBuf,
        #[command(flatten)]
        certify: Certify,
        #[command(flatten)]
        output: Output,
    },
    /// Split a word into powers of a dominant word and black separators.
    Partition {
        #[arg(long)]
        word: String,
        #[arg(long)]
        pi: String,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Cube-root growth witnesses of the rotation pair.
    Cubic {
        #[arg(long, default_value = "pi*sqrt2")]
        alpha: String,
        /// Number of good exponents.
        #[arg(long, default_value_t = 4)]
        count: usize,
        /// Also build this many prefixes of the infinite product.
        #[arg(long)]
        prefixes: Option<usize>,
        #[arg(long, default_value = "proof")]
        c1: String,
        #[arg(long)]
        save_family: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Simulate a continuous-time switched system along one switching law.
    Ct {
        #[arg(long)]
        family: PathBuf,
        /// Segments `duration:letter`, comma separated.
        #[arg(long, conflicts_with = "seed")]
        law: Option<String>,
        /// Draw a random law instead.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 20)]
        segments: usize,
        #[arg(long, default_value_t = 2.5)]
        min_dwell: f64,
        #[arg(long, default_value_t = 7.5)]
        max_dwell: f64,
        /// Initial state, comma separated (default: all ones).
        #[arg(long)]
        x0: Option<String>,
        #[arg(long, default_value_t = 100.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
        /// Letter whose flow defines the Lyapunov function.
        #[arg(long, default_value_t = 0)]
        flow_letter: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Bounded pair whose diagonal blocks resonate in modulus only.
    Example1 {
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        #[arg(long, default_value_t = 0.1)]
        s: f64,
        #[arg(long, default_value_t = 12)]
        kmax: usize,
        #[command(flatten)]
        certify: Certify,
        #[arg(long)]
        save_family: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Continuous-time pair: bounded flow against a shifted contraction.
    Example2 {
        #[arg(long, default_value_t = 10.0)]
        s: f64,
        /// Number of random switching laws.
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 20)]
        segments: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
        #[arg(long)]
        save_family: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) => 2,
        Error::BudgetExceeded { .. } => 3,
        Error::HypothesesUnmet { .. } | Error::DominanceUncertified { .. } => 4,
        _ => 1,
    }
}

/// Report text plus the exit code it should end with.
struct Report {
    text: String,
    code: u8,
}

impl From<String> for Report {
    fn from(text: String) -> Self {
        Self { text, code: 0 }
    }
}

fn emit(output: &Output, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn text_only(output: &Output, what: &str) -> Result<()> {
    if output.format == Format::Csv {
        return Err(Error::InvalidInput(format!("{what} has no csv layout; use --format text")));
    }
    Ok(())
}

fn load(path: &Path) -> Result<FamilyFile> {
    FamilyFile::load(path)
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("cannot read number {t:?}"))))
        .collect()
}

fn parse_law(s: &str) -> Result<SwitchingLaw> {
    let segs = s
        .split(',')
        .map(|seg| {
            let (d, l) = seg
                .split_once(':')
                .ok_or_else(|| Error::InvalidInput(format!("segment {seg:?} is not duration:letter")))?;
            let d = d.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad duration in {seg:?}")))?;
            let l = l.trim().parse::<usize>().map_err(|_| Error::InvalidInput(format!("bad letter in {seg:?}")))?;
            Ok((d, l))
        })
        .collect::<Result<Vec<_>>>()?;
    SwitchingLaw::new(segs)
}

fn mk_options(budget: u64) -> MkOptions {
    MkOptions { budget, ..MkOptions::default() }
}

fn growth_text(series: &GrowthSeries) -> String {
    let mut out = String::from("k  M_k  witness\n");
    for ((k, mk), w) in series.entries.iter().zip(&series.witnesses) {
        let _ = writeln!(out, "{k}  {mk:.12}  {w}");
    }
    out
}

fn cmd_mk(family: &Path, kmax: usize, budget: u64, output: &Output) -> Result<Report> {
    if kmax == 0 {
        return Err(Error::InvalidInput("kmax must be positive".into()));
    }
    let fam = load(family)?.family()?;
    let ks: Vec<usize> = (1..=kmax).collect();
    let series = GrowthSeries::compute(&fam, &ks, &mk_options(budget))?;
    Ok(match output.format {
        Format::Csv => series.to_csv(),
        Format::Text => growth_text(&series),
    }
    .into())
}

fn cmd_jsr(family: &Path, kmax: usize, budget: u64, output: &Output) -> Result<Report> {
    let fam = load(family)?.family()?;
    let b = jsr_bounds_with(&fam, kmax, &mk_options(budget))?;
    Ok(match output.format {
        Format::Csv => format!(
            "lower,upper,witness,k_used,truncated\n{:.12e},{:.12e},{},{},{}\n",
            b.lower, b.upper, b.witness_word_lower, b.k_used, b.truncated
        ),
        Format::Text => format!(
            "lower: {:.12}\nupper: {:.12}\nwitness: {}\nk_used: {}\ntruncated: {}\n",
            b.lower, b.upper, b.witness_word_lower, b.k_used, b.truncated
        ),
    }
    .into())
}

fn cmd_dominance(family: &Path, word: Option<&str>, c: &Certify, output: &Output) -> Result<Report> {
    text_only(output, "dominance")?;
    let fam = load(family)?.family()?;
    let cand = candidate_dominant(&fam, c.horizon)?;
    let (pi, rho) = match word {
        Some(w) => (w.parse::<Word>()?, None),
        None => (cand.pi.clone(), Some(cand.rho_estimate)),
    };
    let cert = verify_dominance_with(&fam, &pi, c.horizon, c.q, rho, c.tol)?;
    let mut text = format!("candidate: {} (rho {:.12})\n{cert}\n", cand.pi, cand.rho_estimate);
    let code = if cert.certified() {
        0
    } else {
        text.push_str("certified: false\n");
        4
    };
    Ok(Report { text, code })
}

fn cmd_classify(family: &Path, c: &Certify, output: &Output) -> Result<Report> {
    text_only(output, "classify")?;
    let bf = load(family)?.block_family()?;
    let cls = classify(&bf, c.horizon, c.q, c.tol)?;
    Ok(format!("{cls}\n").into())
}

fn cmd_partition(word: &str, pi: &str, m: usize, output: &Output) -> Result<Report> {
    let w: Word = word.parse()?;
    let p = partition(&w, &pi.parse()?, m)?;
    let check = p.check(&w);
    let color = |c: SegmentColor| if c == SegmentColor::White { "white" } else { "black" };
    Ok(match output.format {
        Format::Csv => {
            let mut out = String::from("index,color,length,word\n");
            for (i, s) in p.segments.iter().enumerate() {
                let _ = writeln!(out, "{i},{},{},{}", color(s.color), s.word.len(), s.word);
            }
            out
        }
        Format::Text => {
            let mut out = format!(
                "pi: {}\nn: {}\nM: {}\nl: {}\nN: {}\ntrailing_exempt: {}\nchecks_pass: {}\nsegments:\n",
                p.pi(),
                p.n,
                p.m,
                p.l,
                p.big_n,
                p.trailing_exempt,
                check.all()
            );
            for s in &p.segments {
                let _ = writeln!(out, "  {} {}", color(s.color), s.word);
            }
            out
        }
    }
    .into())
}

fn cmd_cubic(
    alpha: &str,
    count: usize,
    prefixes: Option<usize>,
    c1: &str,
    save: Option<&Path>,
    output: &Output,
) -> Result<Report> {
    let alpha: Alpha = alpha.parse()?;
    let mode: C1Mode = c1.parse()?;
    if let Some(path) = save {
        FamilyFile { dim: 3, matrices: vec![], block: None, alpha: Some(alpha.to_string()) }.save(path)?;
    }
    let good = good_n_sequence(&alpha, count)?;
    let fit = fit_cubic_exponent(&alpha, &good.ns)?;
    let table = prefixes.map(|j| infinite_product_prefixes(&alpha, j, mode)).transpose()?;
    if output.format == Format::Csv {
        return Ok(match table {
            Some(t) => t.to_csv()?,
            None => witnesses_csv(&fit.witnesses)?,
        }
        .into());
    }
    let mut out = format!("alpha: {alpha}\ngood_n: {:?}\nprecision_limited: {}\n", good.ns, good.precision_limited);
    out.push_str("n  N  norm  lower_formula  ratio\n");
    for w in &fit.witnesses {
        let _ = writeln!(out, "{}  {}  {:.6}  {:.6}  {:.6}", w.n, w.big_n, w.norm, w.lower_formula, w.ratio());
    }
    let _ = writeln!(out, "slope: {:.6}", fit.slope);
    if let Some(se) = fit.stderr {
        let _ = writeln!(out, "slope_stderr: {se:.6}");
    }
    if let Some(t) = table {
        let _ = writeln!(
            out,
            "prefixes: C0 {:.6}, C1 {:.6e} ({:?}), m_alpha estimate {:.6}, truncated {}",
            t.c0, t.c1, t.mode, t.m_alpha_estimate, t.truncated
        );
        out.push_str("j  n_j  M_k  log_norm  ratio  c1_ok  t_in_range\n");
        for r in &t.rows {
            let _ = writeln!(
                out,
                "{}  {}  {}  {:.6}  {:.6}  {}  {}",
                r.j, r.n_j, r.mk, r.log_norm, r.ratio, r.c1_ok, r.t_in_range
            );
        }
    }
    Ok(out.into())
}

struct CtArgs<'a> {
    law: Option<&'a str>,
    seed: Option<u64>,
    segments: usize,
    dwell: (f64, f64),
    x0: Option<&'a str>,
    horizon: f64,
    dt: f64,
    flow_letter: usize,
}

fn cmd_ct(family: &Path, a: &CtArgs, output: &Output) -> Result<Report> {
    let fam = load(family)?.family()?;
    let law = match (a.law, a.seed) {
        (Some(l), _) => parse_law(l)?,
        (None, Some(seed)) => SwitchingLaw::random(seed, a.segments, a.dwell.0, a.dwell.1, fam.len())?,
        (None, None) => return Err(Error::InvalidInput("give --law or --seed".into())),
    };
    let x0 = match a.x0 {
        Some(s) => parse_list(s)?,
        None => vec![1.0; fam.dim()],
    };
    if x0.len() != fam.dim() {
        return Err(Error::InvalidInput(format!("x0 has {} entries, family dim is {}", x0.len(), fam.dim())));
    }
    if a.flow_letter >= fam.len() {
        return Err(Error::InvalidInput(format!("flow letter {} out of range", a.flow_letter)));
    }
    let opts = CtOptions { flow_letter: a.flow_letter, ..CtOptions::default() };
    match output.format {
        Format::Csv => {
            let law = law.truncated(a.horizon);
            let dt = law.segments().iter().map(|s| s.0).fold(a.dt, f64::min);
            let traj = propagate(&fam, &law, &x0, dt)?;
            let f = LyapunovF::new(fam.get(a.flow_letter), opts.f_horizon, opts.f_step)?;
            let mut buf = Vec::new();
            traj.write_csv(&mut buf, &f)?;
            Ok(String::from_utf8(buf).expect("csv output is utf-8").into())
        }
        Format::Text => {
            let r = check_f_decreasing(&fam, &law, &x0, a.horizon, a.dt, &opts)?;
            Ok(format!("{r}\n").into())
        }
    }
}

fn cmd_example1(a: f64, s: f64, kmax: usize, c: &Certify, save: Option<&Path>, output: &Output) -> Result<Report> {
    text_only(output, "example1")?;
    let fam = catalog::example1_default(a, s)?;
    if let Some(path) = save {
        FamilyFile::from_family(&fam, Some(BlockSpec { d1: 1, d2: 1 })).save(path)?;
    }
    let norm = build_parallelotope(a)?;
    let bar = is_barabanov(&norm, &fam, 360, 1e-9)?;
    let cls = classify(&BlockFamily::from_family(&fam, 1)?, c.horizon, c.q, c.tol)?;
    let ks: Vec<usize> = (1..=kmax).collect();
    let series = GrowthSeries::compute(&fam, &ks, &MkOptions::default())?;
    let hi = series.entries.iter().map(|e| e.1).fold(0.0, f64::max);
    let lo = series.entries.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let mut out = format!("family: a = {a}, s = {s}\nparallelotope vertices: {:?}\n", norm.vertices());
    let _ = writeln!(out, "barabanov:\n{bar}");
    let _ = writeln!(out, "classification:\n{cls}");
    out.push_str(&growth_text(&series));
    let _ = writeln!(out, "max/min M_k: {:.6}", hi / lo);
    Ok(out.into())
}

struct Ex2Args {
    s: f64,
    count: usize,
    segments: usize,
    seed: u64,
    horizon: f64,
    dt: f64,
}

fn cmd_example2(a: &Ex2Args, save: Option<&Path>, output: &Output) -> Result<Report> {
    let fam = catalog::example2_default(a.s)?;
    if let Some(path) = save {
        FamilyFile::from_family(&fam, Some(BlockSpec { d1: 2, d2: 2 })).save(path)?;
    }
    if a.count == 0 {
        return Err(Error::InvalidInput("count must be positive".into()));
    }
    let laws = (0..a.count as u64)
        .map(|i| SwitchingLaw::random(a.seed.wrapping_add(i), a.segments, 2.5, 7.5, 2))
        .collect::<Result<Vec<_>>>()?;
    let x0 = [0.5; 4];
    let opts = CtOptions::default();
    if output.format == Format::Csv {
        let law = laws[0].truncated(a.horizon);
        let dt = law.segments().iter().map(|s| s.0).fold(a.dt, f64::min);
        let traj = propagate(&fam, &law, &x0, dt)?;
        let f = LyapunovF::new(fam.get(0), opts.f_horizon, opts.f_step)?;
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, &f)?;
        return Ok(String::from_utf8(buf).expect("csv output is utf-8").into());
    }
    let reports = run_trials(&fam, &laws, &x0, a.horizon, a.dt, &opts)?;
    let sup = reports.iter().map(|r| r.sup_norm).fold(0.0, f64::max);
    let sigma = reports.iter().map(|r| r.sigma_estimate).fold(f64::NEG_INFINITY, f64::max);
    let violations: usize = reports.iter().map(|r| r.f_monotone_violations).sum();
    Ok(format!(
        "laws: {}\n|x0|: {:.6}\nmax sup_norm: {sup:.9}\nmax sigma_estimate: {sigma:.6e}\nf_monotone_violations: {violations}\n",
        reports.len(),
        euclidean_norm(&x0)
    )
    .into())
}

fn run(cli: &Cli) -> Result<Report> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidInput("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    }
    let (report, output) = match &cli.command {
        Command::Mk { family, kmax, budget, output } => (cmd_mk(family, *kmax, *budget, output)?, output),
        Command::Jsr { family, kmax, budget, output } => (cmd_jsr(family, *kmax, *budget, output)?, output),
        Command::Dominance { family, word, certify, output } => {
            (cmd_dominance(family, word.as_deref(), certify, output)?, output)
        }
        Command::Classify { family, certify, output } => (cmd_classify(family, certify, output)?, output),
        Command::Partition { word, pi, m, output } => (cmd_partition(word, pi, *m, output)?, output),
        Command::Cubic { alpha, count, prefixes, c1, save_family, output } => {
            (cmd_cubic(alpha, *count, *prefixes, c1, save_family.as_deref(), output)?, output)
        }
        Command::Ct {
            family,
            law,
            seed,
            segments,
            min_dwell,
            max_dwell,
            x0,
            horizon,
            dt,
            flow_letter,
            output,
        } => {
            let args = CtArgs {
                law: law.as_deref(),
                seed: *seed,
                segments: *segments,
                dwell: (*min_dwell, *max_dwell),
                x0: x0.as_deref(),
                horizon: *horizon,
                dt: *dt,
                flow_letter: *flow_letter,
            };
            (cmd_ct(family, &args, output)?, output)
        }
        Command::Example1 { a, s, kmax, certify, save_family, output } => {
            (cmd_example1(*a, *s, *kmax, certify, save_family.as_deref(), output)?, output)
        }
        Command::Example2 { s, count, segments, seed, horizon, dt, save_family, output } => {
            let args = Ex2Args { s: *s, count: *count, segments: *segments, seed: *seed, horizon: *horizon, dt: *dt };
            (cmd_example2(&args, save_family.as_deref(), output)?, output)
        }
    };
    emit(output, &report.text)?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // help and version requests are not errors
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(r) => ExitCode::from(r.code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
