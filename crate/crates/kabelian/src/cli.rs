//! Command-line front end: job orchestration, checkpoint directory,
//! artifact export.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::linrep::SemigroupCaps;
use crate::logic::compile::Env;
use crate::logic::dfa::{Dfao, MultiTrackDfa};
use crate::logic::parser::{parse_script, run_script, StatementResult};
use crate::lrsa::{adder, converter};
use crate::numeration::{word_dfao, NumerationSystem};
use crate::oracle::csv_report;
use crate::pipelines::{
    balancedness_report, certify_delta, dfao_values, difference_dfaos, method1,
    method2_abelian, method2_kabelian, Store,
};
use crate::textfmt::{
    csv_values, dot_dfa, dot_dfao, read_dfa, read_dfao, read_linrep, write_dfa,
    write_dfao, write_grid, write_linrep,
};
use crate::words::{
    classify_spectrum, fixed_point_prefix, incidence, is_primitive, SpectralTag,
    Substitution,
};
use crate::blockcode::block_substitution;

/// Abelian and k-abelian complexity of substitution fixed points, computed
/// as automatic sequences over Dumont-Thomas numeration systems.
#[derive(Parser)]
#[command(name = "kabelian", version, about)]
pub struct Cli {
    /// Output/checkpoint directory (default: env KABELIAN_OUT, else ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads. This build computes deterministically on a single
    /// thread; the flag is accepted for interface compatibility.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct SubstArgs {
    /// Substitution, slash-separated images over digit letters (e.g. 01/0).
    #[arg(long)]
    subst: String,
    /// Seed letter of the fixed point.
    #[arg(long, default_value_t = 0)]
    seed: usize,
    /// Name of the numeration system (used in file tags and ?msd_ prefixes).
    #[arg(long, default_value = "sys")]
    name: String,
}

impl SubstArgs {
    fn substitution(&self) -> Result<Substitution> {
        Substitution::parse(&self.subst)
    }

    fn system(&self) -> Result<NumerationSystem> {
        NumerationSystem::new(self.substitution()?, self.seed, &self.name)
    }
}

#[derive(Args, Clone)]
struct CapArgs {
    /// State budget for DFAO constructions.
    #[arg(long, default_value_t = SemigroupCaps::default().max_states)]
    max_states: usize,
    /// Bit budget for entries of bounded-value signatures.
    #[arg(long, default_value_t = SemigroupCaps::default().max_entry_bits)]
    max_entry_bits: u64,
}

impl CapArgs {
    fn caps(&self) -> SemigroupCaps {
        SemigroupCaps { max_states: self.max_states, max_entry_bits: self.max_entry_bits }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Spectral report: incidence matrix, characteristic polynomial,
    /// primitivity, (ultimately) Pisot classification, block-code spectrum.
    Analyze {
        #[command(flatten)]
        sub: SubstArgs,
    },
    /// Numeration system report: representations, validity DFA, word DFAO.
    Numeration {
        #[command(flatten)]
        sub: SubstArgs,
        /// How many representations to print.
        #[arg(long, default_value_t = 20)]
        count: u64,
    },
    /// Build the addition relation x + y = z and write it out.
    Adder {
        #[command(flatten)]
        sub: SubstArgs,
    },
    /// Build the converter between two numeration systems (or between a
    /// system and its length-k block system).
    Convert {
        #[command(flatten)]
        sub: SubstArgs,
        /// Target substitution (slash DSL). Mutually exclusive with --block.
        #[arg(long, conflicts_with = "block")]
        to_subst: Option<String>,
        /// Target = length-k sliding-block system of the source.
        #[arg(long)]
        block: Option<usize>,
        /// Also write a GraphViz rendering.
        #[arg(long)]
        dot: bool,
    },
    /// Balance-based pipeline: balance DFAO, k-abelian equivalence,
    /// complexity representation, balancedness report.
    Method1 {
        #[command(flatten)]
        sub: SubstArgs,
        #[command(flatten)]
        caps: CapArgs,
        /// Fixed k values for which to emit per-k complexity DFAOs.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2])]
        ks: Vec<u64>,
        /// Largest k in the balancedness report.
        #[arg(long, default_value_t = 12)]
        k_max: u64,
        /// How many complexity values per k to put in the CSV.
        #[arg(long, default_value_t = 200)]
        values: u64,
        /// Also emit DFAOs of the discrete derivatives of (k, n) -> rho^k(n)
        /// and a grid of the n-derivative.
        #[arg(long)]
        derivatives: bool,
    },
    /// Sliding-block pipeline: k-abelian complexity DFAO through the
    /// length-k block code (k = 1: abelian, via letter-count agreement).
    Method2 {
        #[command(flatten)]
        sub: SubstArgs,
        #[command(flatten)]
        caps: CapArgs,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// How many complexity values to put in the CSV.
        #[arg(long, default_value_t = 200)]
        values: u64,
    },
    /// Brute-force sweep over a fixed-point prefix; writes a CSV report.
    Oracle {
        #[command(flatten)]
        sub: SubstArgs,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2])]
        ks: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        n_max: usize,
        /// Prefix length to scan (stability-checked by halving).
        #[arg(long, default_value_t = 20000)]
        prefix_len: usize,
    },
    /// Inductive certification of the balance DFAO produced by method1.
    Certify {
        #[command(flatten)]
        sub: SubstArgs,
        #[command(flatten)]
        caps: CapArgs,
        /// Additionally check that this many seeded random single-output
        /// mutations are rejected with a witness.
        #[arg(long, default_value_t = 0)]
        mutate: usize,
        /// Seed for the mutation sampler.
        #[arg(long, default_value_t = 1)]
        rng_seed: u64,
    },
    /// Re-emit a native artifact file as native, dot, csv or grid.
    Export {
        /// Native artifact file (dfa, dfao or linrep).
        input: PathBuf,
        #[arg(long, default_value = "native")]
        format: String,
        /// Substitution rebuilding the numeration system for csv/grid
        /// (defaults to the file's embedded numeration tag being unneeded).
        #[arg(long)]
        subst: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: usize,
        /// Number of columns (values of n) for csv/grid output.
        #[arg(long, default_value_t = 64)]
        values: u64,
        /// Number of rows (values of k) for grid output.
        #[arg(long, default_value_t = 8)]
        k_max: u64,
    },
    /// Execute a script of def/eval statements in the formula syntax.
    Replay {
        #[command(flatten)]
        sub: SubstArgs,
        /// Script file; use - for stdin.
        script: PathBuf,
        /// How many counted values to print per eval with parameters.
        #[arg(long, default_value_t = 20)]
        values: u64,
        /// Extra name under which scripts may refer to the automatic word
        /// (always available as W and as the capitalized system name).
        #[arg(long)]
        word: Option<String>,
    },
}

/// Checkpoint directory: every artifact is stored in the native text format
/// and reused byte-identically on later runs.
pub struct DirStore {
    dir: PathBuf,
}

impl DirStore {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(DirStore { dir })
    }

    fn path(&self, name: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{name}.{ext}"))
    }

    fn write(&self, name: &str, ext: &str, text: &str) {
        let path = self.path(name, ext);
        if path.exists() {
            return; // keep checkpoints byte-identical across runs
        }
        if let Err(e) = fs::write(&path, text) {
            eprintln!("warning: could not write {}: {e}", path.display());
        }
    }
}

impl Store for DirStore {
    fn load_dfa(&self, name: &str) -> Option<MultiTrackDfa> {
        let text = fs::read_to_string(self.path(name, "dfa")).ok()?;
        read_dfa(&text).ok().map(|(d, _)| d)
    }

    fn save_dfa(&self, name: &str, d: &MultiTrackDfa) {
        self.write(name, "dfa", &write_dfa(d, None));
    }

    fn load_dfao(&self, name: &str) -> Option<Dfao> {
        let text = fs::read_to_string(self.path(name, "dfao")).ok()?;
        read_dfao(&text).ok().map(|(d, _)| d)
    }

    fn save_dfao(&self, name: &str, d: &Dfao) {
        self.write(name, "dfao", &write_dfao(d, None));
    }

    fn load_linrep(&self, name: &str) -> Option<crate::linrep::LinRep> {
        let text = fs::read_to_string(self.path(name, "linrep")).ok()?;
        read_linrep(&text).ok().map(|(r, _)| r)
    }

    fn save_linrep(&self, name: &str, r: &crate::linrep::LinRep) {
        self.write(name, "linrep", &write_linrep(r, None));
    }
}

fn emit(dir: &Path, file: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(file), text)?;
    println!("wrote {}", dir.join(file).display());
    Ok(())
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Runs the CLI; the caller turns the error into an exit status.
pub fn run(cli: Cli) -> Result<()> {
    let out = cli
        .out
        .or_else(|| std::env::var_os("KABELIAN_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    if cli.threads != 1 {
        eprintln!("note: this build is single-threaded; --threads {} ignored", cli.threads);
    }
    match cli.cmd {
        Cmd::Analyze { sub } => analyze(&sub),
        Cmd::Numeration { sub, count } => numeration(&out, &sub, count),
        Cmd::Adder { sub } => {
            let ns = sub.system()?;
            let add = adder(&ns)?;
            println!("adder for msd_{}: {} states", sub.name, add.num_states());
            emit(&out, &format!("adder_{}.dfa", sub.name), &write_dfa(&add, Some(&sub.name)))
        }
        Cmd::Convert { sub, to_subst, block, dot } => convert(&out, &sub, to_subst, block, dot),
        Cmd::Method1 { sub, caps, ks, k_max, values, derivatives } => {
            run_method1(&out, &sub, caps.caps(), &ks, k_max, values, derivatives)
        }
        Cmd::Method2 { sub, caps, k, values } => run_method2(&out, &sub, caps.caps(), k, values),
        Cmd::Oracle { sub, ks, n_max, prefix_len } => {
            let s = sub.substitution()?;
            let prefix = fixed_point_prefix(&s, sub.seed, prefix_len)?;
            let csv = csv_report(&prefix, &ks, n_max)?;
            emit(&out, &format!("oracle_{}.csv", sub.name), &csv)
        }
        Cmd::Certify { sub, caps, mutate, rng_seed } => {
            certify(&out, &sub, caps.caps(), mutate, rng_seed)
        }
        Cmd::Export { input, format, subst, seed, values, k_max } => {
            export(&out, &input, &format, subst.as_deref(), seed, values, k_max)
        }
        Cmd::Replay { sub, script, values, word } => {
            replay(&out, &sub, &script, values, word.as_deref())
        }
    }
}

fn analyze(sub: &SubstArgs) -> Result<()> {
    let s = sub.substitution()?;
    let inc = incidence(&s);
    println!("substitution: {}", s.dsl());
    println!("alphabet size: {}", s.alphabet_size());
    println!("primitive: {}", is_primitive(&s));
    print!("incidence matrix:");
    for row in &inc.matrix {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        print!("\n  {}", cells.join(" "));
    }
    println!();
    println!("characteristic polynomial: {}", inc.char_poly);
    let spec = classify_spectrum(&inc.char_poly)?;
    match &spec.tag {
        SpectralTag::Pisot => println!("spectrum: Pisot"),
        SpectralTag::UltimatelyPisot(m) => println!("spectrum: ultimately Pisot (shift {m})"),
        SpectralTag::NotPisot => println!("spectrum: not (ultimately) Pisot"),
    }
    if let Some((lo, hi)) = &spec.pisot_root {
        println!("dominant root in [{lo}, {hi}]");
    }
    match block_substitution(&s, sub.seed, 2) {
        Ok(b) => {
            let spec2 = classify_spectrum(&incidence(&b.tau_k).char_poly)?;
            let verdict = match spec2.tag {
                SpectralTag::NotPisot => "not (ultimately) Pisot",
                SpectralTag::Pisot => "Pisot",
                SpectralTag::UltimatelyPisot(_) => "ultimately Pisot",
            };
            println!(
                "length-2 block substitution: {} letters, spectrum {verdict}",
                b.tau_k.alphabet_size()
            );
        }
        Err(e) => println!("length-2 block substitution unavailable: {e}"),
    }
    Ok(())
}

fn numeration(out: &Path, sub: &SubstArgs, count: u64) -> Result<()> {
    let ns = sub.system()?;
    println!("numeration system msd_{} ({} digits)", sub.name, ns.digit_count());
    for n in 0..count {
        let rep: Vec<String> = ns.rep(n).iter().map(|d| d.to_string()).collect();
        println!("rep({n}) = {}", rep.join(""));
    }
    let valid = ns.valid_padded_dfa();
    let word = word_dfao(&ns);
    println!("validity DFA: {} states; word DFAO: {} states", valid.num_states(), word.num_states());
    emit(out, &format!("valid_{}.dfa", sub.name), &write_dfa(&valid, Some(&sub.name)))?;
    emit(out, &format!("word_{}.dfao", sub.name), &write_dfao(&word, Some(&sub.name)))
}

fn convert(
    out: &Path,
    sub: &SubstArgs,
    to_subst: Option<String>,
    block: Option<usize>,
    dot: bool,
) -> Result<()> {
    let ns = sub.system()?;
    let (target_name, target) = match (to_subst, block) {
        (Some(dsl), None) => {
            let name = format!("{}_target", sub.name);
            (name.clone(), NumerationSystem::new(Substitution::parse(&dsl)?, 0, name)?)
        }
        (None, Some(k)) => {
            let b = block_substitution(&sub.substitution()?, sub.seed, k)?;
            let name = format!("{}b{k}", sub.name);
            (name.clone(), NumerationSystem::new(b.tau_k, 0, name)?)
        }
        _ => return Err(Error::Parse("convert needs exactly one of --to-subst, --block".into())),
    };
    let conv = converter(&ns, &target)?;
    println!("converter msd_{} -> msd_{target_name}: {} states", sub.name, conv.num_states());
    emit(out, &format!("conv_{}_{target_name}.dfa", sub.name), &write_dfa(&conv, Some(&sub.name)))?;
    if dot {
        emit(
            out,
            &format!("conv_{}_{target_name}.dot", sub.name),
            &dot_dfa(&conv, &format!("conv_{}_{target_name}", sub.name)),
        )?;
    }
    Ok(())
}

fn run_method1(
    out: &Path,
    sub: &SubstArgs,
    caps: SemigroupCaps,
    ks: &[u64],
    k_max: u64,
    values: u64,
    derivatives: bool,
) -> Result<()> {
    let s = sub.substitution()?;
    let store = DirStore::new(out)?;
    let r = method1(&s, sub.seed, &sub.name, ks, caps, &store)?;
    let ns = sub.system()?;
    println!(
        "uniform bound {}; balance DFAO {} states (outputs {:?})",
        r.uniform_bound,
        r.delta_dfao.num_states(),
        {
            let (lo, hi) = r.delta_dfao.output_range();
            (lo, hi)
        }
    );
    let mut columns = Vec::new();
    for (k, d) in &r.per_k {
        let vals = dfao_values(d, &ns, values);
        let set: std::collections::BTreeSet<i64> = vals.iter().skip(1).copied().collect();
        println!("k={k}: complexity DFAO {} states, value set (n>=1) {set:?}", d.num_states());
        columns.push((format!("rho^{k}(n)"), vals));
    }
    emit(out, &format!("complexity_{}.csv", sub.name), &csv_values(&columns))?;

    let rep = balancedness_report(&s, sub.seed, &sub.name, &r.delta_dfao, k_max)?;
    println!("tight balance constants C_k (k <= {k_max}):");
    let cks: Vec<String> = rep.tight_ck.iter().map(|(k, c)| format!("C_{k}={c}")).collect();
    println!("  {}", cks.join(" "));
    for (c, t) in &rep.unbalanced_thresholds {
        match t {
            Some(t) => println!("totally (k,{c})-unbalanced exactly for k >= {t}"),
            None => println!("totally (k,{c})-unbalanced for no k <= {k_max}"),
        }
    }

    if derivatives {
        let (dk, dn) = difference_dfaos(&r.abfirst, &s, sub.seed, &sub.name, caps)?;
        store.save_dfao(&format!("dcompk_{}", sub.name), &dk);
        store.save_dfao(&format!("dcompn_{}", sub.name), &dn);
        println!(
            "derivative DFAOs: d/dk {} states, d/dn {} states",
            dk.num_states(),
            dn.num_states()
        );
        let rows: Vec<(u64, Vec<i64>)> = (1..=k_max)
            .map(|k| {
                let row = (0..values)
                    .map(|n| dn.output_tuple(&[&ns.rep(k), &ns.rep(n)]))
                    .collect();
                (k, row)
            })
            .collect();
        emit(out, &format!("dcompn_{}.grid", sub.name), &write_grid(&rows))?;
    }
    Ok(())
}

fn run_method2(out: &Path, sub: &SubstArgs, caps: SemigroupCaps, k: usize, values: u64) -> Result<()> {
    let s = sub.substitution()?;
    let store = DirStore::new(out)?;
    let ns = sub.system()?;
    let dfao = if k <= 1 {
        let d = method2_abelian(&s, sub.seed, &sub.name, caps, &store)?;
        println!("abelian complexity DFAO: {} states", d.num_states());
        d
    } else {
        let r = method2_kabelian(&s, sub.seed, &sub.name, k, caps, &store)?;
        println!(
            "{k}-abelian complexity DFAO: {} states over msd_{}, {} states over msd_{}",
            r.dfao_block.num_states(),
            r.block_sys,
            r.dfao_base.num_states(),
            sub.name
        );
        r.dfao_base
    };
    let vals = dfao_values(&dfao, &ns, values);
    let set: std::collections::BTreeSet<i64> = vals.iter().skip(1).copied().collect();
    println!("value set (1 <= n < {values}): {set:?}");
    emit(
        out,
        &format!("comp_{}_k{k}.csv", sub.name),
        &csv_values(&[(format!("rho^{k}(n)"), vals)]),
    )
}

fn certify(out: &Path, sub: &SubstArgs, caps: SemigroupCaps, mutate: usize, rng_seed: u64) -> Result<()> {
    let s = sub.substitution()?;
    let store = DirStore::new(out)?;
    let r = method1(&s, sub.seed, &sub.name, &[], caps, &store)?;
    let feq = store
        .load_dfa(&format!("feq_{}", sub.name))
        .ok_or_else(|| Error::UnknownRelation(format!("feq_{}", sub.name)))?;
    let outcome = certify_delta(&s, sub.seed, &sub.name, &r.delta_dfao, &feq)?;
    if !outcome.ok {
        let (name, witness) = outcome.witness.unwrap();
        println!("FAILED: assertion {name} has counterexample {witness:?}");
        return Err(Error::Parse(format!("certification failed at {name}")));
    }
    println!("certified: balance DFAO satisfies the inductive characterization");
    let mut state = rng_seed;
    for i in 0..mutate {
        let mut mutant = r.delta_dfao.clone();
        let q = (splitmix64(&mut state) % mutant.outputs.len() as u64) as usize;
        let bump = 1 + (splitmix64(&mut state) % 3) as i64;
        mutant.outputs[q] += bump;
        let out = certify_delta(&s, sub.seed, &sub.name, &mutant, &feq)?;
        if out.ok {
            println!("FAILED: mutation {i} (state {q} output +{bump}) was not rejected");
            return Err(Error::Parse(format!("mutation {i} accepted")));
        }
        let (name, _) = out.witness.unwrap();
        println!("mutation {i}: state {q} output +{bump} rejected at assertion {name}");
    }
    Ok(())
}

fn export(
    out: &Path,
    input: &Path,
    format: &str,
    subst: Option<&str>,
    seed: usize,
    values: u64,
    k_max: u64,
) -> Result<()> {
    let text = fs::read_to_string(input)?;
    let kind = text.lines().next().unwrap_or("").trim().to_string();
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("artifact")
        .to_string();
    let system = |tag: &Option<String>| -> Result<NumerationSystem> {
        let dsl = subst.ok_or_else(|| {
            Error::Parse("this format needs --subst to rebuild the numeration system".into())
        })?;
        let name = tag.clone().unwrap_or_else(|| "sys".to_string());
        NumerationSystem::new(Substitution::parse(dsl)?, seed, name)
    };
    match (kind.as_str(), format) {
        ("dfa", "native") => {
            let (d, tag) = read_dfa(&text)?;
            emit(out, &format!("{stem}.dfa"), &write_dfa(&d, tag.as_deref()))
        }
        ("dfao", "native") => {
            let (d, tag) = read_dfao(&text)?;
            emit(out, &format!("{stem}.dfao"), &write_dfao(&d, tag.as_deref()))
        }
        ("linrep", "native") => {
            let (r, tag) = read_linrep(&text)?;
            emit(out, &format!("{stem}.linrep"), &write_linrep(&r, tag.as_deref()))
        }
        ("dfa", "dot") => {
            let (d, _) = read_dfa(&text)?;
            emit(out, &format!("{stem}.dot"), &dot_dfa(&d, &stem))
        }
        ("dfao", "dot") => {
            let (d, _) = read_dfao(&text)?;
            emit(out, &format!("{stem}.dot"), &dot_dfao(&d, &stem))
        }
        ("dfao", "csv") => {
            let (d, tag) = read_dfao(&text)?;
            if d.tracks.len() != 1 {
                return Err(Error::TrackMismatch("csv export needs a 1-track DFAO".into()));
            }
            let ns = system(&tag)?;
            let vals = dfao_values(&d, &ns, values);
            emit(out, &format!("{stem}.csv"), &csv_values(&[(stem.clone(), vals)]))
        }
        ("dfao", "grid") => {
            let (d, tag) = read_dfao(&text)?;
            if d.tracks.len() != 2 {
                return Err(Error::TrackMismatch("grid export needs a 2-track DFAO".into()));
            }
            let ns = system(&tag)?;
            let rows: Vec<(u64, Vec<i64>)> = (1..=k_max)
                .map(|k| {
                    let row = (0..values)
                        .map(|n| d.output_tuple(&[&ns.rep(k), &ns.rep(n)]))
                        .collect();
                    (k, row)
                })
                .collect();
            emit(out, &format!("{stem}.grid"), &write_grid(&rows))
        }
        (_, "native" | "dot" | "csv" | "grid") => {
            Err(Error::Parse(format!("cannot export a {kind} artifact as {format}")))
        }
        (_, other) => Err(Error::UnknownFormat(other.to_string())),
    }
}

fn replay(
    out: &Path,
    sub: &SubstArgs,
    script_path: &Path,
    values: u64,
    word_alias: Option<&str>,
) -> Result<()> {
    let src = if script_path.as_os_str() == "-" {
        use std::io::Read;
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(script_path)?
    };
    let script = parse_script(&src)?;
    let ns = sub.system()?;
    let word = word_dfao(&ns);
    let mut env = Env::new();
    env.add_system(ns)?;
    // the automatic word is available under the system name (capitalized
    // forms are common in scripts) and as plain W
    env.add_dfao("W", word.clone(), &sub.name);
    let mut cap = sub.name.clone();
    if let Some(c) = cap.get_mut(0..1) {
        c.make_ascii_uppercase();
    }
    env.add_dfao(cap, word.clone(), &sub.name);
    if let Some(alias) = word_alias {
        env.add_dfao(alias, word, &sub.name);
    }
    let store = DirStore::new(out)?;
    let results = run_script(&mut env, &script, &sub.name)?;
    let ns = &env.systems[&sub.name].ns;
    let mut counted: BTreeMap<String, Vec<i64>> = BTreeMap::new();
    for (name, res) in &results {
        match res {
            StatementResult::Defined(vars, states) => {
                println!("def {name}({}) -> {states} states", vars.join(", "));
                store.save_dfa(name, &env.relations[name].dfa);
            }
            StatementResult::Truth(t) => {
                println!("eval {name} -> {}", if *t { "TRUE" } else { "FALSE" });
            }
            StatementResult::Counted(params, rep) => {
                println!("eval {name}({}) -> representation of dimension {}", params.join(", "), rep.dim);
                store.save_linrep(name, rep);
                if params.len() == 1 {
                    let head: Vec<i64> = rep
                        .first_values(ns, values as usize)
                        .iter()
                        .map(|v| {
                            use num_traits::ToPrimitive;
                            v.to_integer().to_i64().unwrap_or(i64::MAX)
                        })
                        .collect();
                    println!("  values: {head:?}");
                    counted.insert(name.clone(), head);
                }
            }
        }
    }
    if !counted.is_empty() {
        let cols: Vec<(String, Vec<i64>)> = counted.into_iter().collect();
        emit(out, "replay_values.csv", &csv_values(&cols))?;
    }
    Ok(())
}
