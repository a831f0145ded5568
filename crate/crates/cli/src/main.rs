//! Command line front end for the verification workbench.
//!
//! Subcommands: `verify` runs the named checklist and writes a JSON report
//! (exit code 0 only when every check passes), `table` exports the
//! GL2(o2) character table, `omega` lists the double-coset transversal, and
//! `whittaker` assembles the degenerate Whittaker character for one datum.
//!
//! Every flag can also come from a JSON config file (`--config`); explicit
//! flags win over config values. The `WHITTAKER_THREADS` environment
//! variable bounds the thread pool of the raw double-coset evaluator.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use whittaker_core::field::Fq;
use whittaker_core::gl2table::CharacterTable;
use whittaker_core::groups::{m2_id, m2_scalar, pack2, M2};
use whittaker_core::oracle::MackeyOracle;
use whittaker_core::tower::{RingFlavor, Tower, Q4};
use whittaker_core::verifier::{
    default_sweep, run_verification, CheckResult, HeavyChecks, VerificationReport, Workbench,
};
use whittaker_core::whittaker::{assemble, CuspidalDatum};

#[derive(Parser)]
#[command(name = "whittaker", version, about = "Degenerate Whittaker space verification workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification checklist and emit a JSON report.
    Verify(VerifyArgs),
    /// Export the GL2(o2) character table.
    Table(TableArgs),
    /// List the double-coset transversal.
    Omega(OmegaArgs),
    /// Assemble the degenerate Whittaker character for one datum.
    Whittaker(WhittakerArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FlavorArg {
    /// F_q[t]/(t^2)
    Eq,
    /// Length-2 Witt vectors over F_q
    Witt,
}

impl From<FlavorArg> for RingFlavor {
    fn from(f: FlavorArg) -> RingFlavor {
        match f {
            FlavorArg::Eq => RingFlavor::EqualChar,
            FlavorArg::Witt => RingFlavor::MixedChar,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Residue field size (odd prime power).
    #[arg(long)]
    q: Option<u32>,
    /// Base ring flavor.
    #[arg(long, value_enum)]
    flavor: Option<FlavorArg>,
    /// Coordinates a0,a1,a2,a3 of the regular elliptic element.
    #[arg(long)]
    x: Option<String>,
    /// Power index of the strongly primitive character.
    #[arg(long)]
    theta_c: Option<u32>,
    /// Verify the deterministic parameter sweep instead of a single datum.
    #[arg(long)]
    sweep: bool,
    /// Sample count for the expensive cross-checks; 0 disables them.
    #[arg(long)]
    oracle_samples: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file mirroring these flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Matrix block size; only 2 is supported.
    #[arg(long)]
    n: Option<u32>,
    /// Base ring length; only 2 is supported.
    #[arg(long)]
    l: Option<u32>,
}

#[derive(Args)]
struct TableArgs {
    /// Residue field size (odd prime power).
    #[arg(long)]
    q: Option<u32>,
    /// Base ring flavor.
    #[arg(long, value_enum)]
    flavor: Option<FlavorArg>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
    /// JSON config file mirroring these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct OmegaArgs {
    /// Residue field size (odd prime power).
    #[arg(long)]
    q: Option<u32>,
    /// JSON config file mirroring these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct WhittakerArgs {
    /// Residue field size (odd prime power).
    #[arg(long)]
    q: Option<u32>,
    /// Base ring flavor.
    #[arg(long, value_enum)]
    flavor: Option<FlavorArg>,
    /// Coordinates a0,a1,a2,a3 of the regular elliptic element.
    #[arg(long)]
    x: Option<String>,
    /// Power index of the strongly primitive character.
    #[arg(long)]
    theta_c: Option<u32>,
    /// Compare this many character values per coset against the raw
    /// double-coset evaluator (q=3 only; 0 skips the comparison).
    #[arg(long)]
    oracle_samples: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file mirroring these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Config file schema; every field mirrors a CLI flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    q: Option<u32>,
    flavor: Option<RingFlavor>,
    x: Option<[u16; 4]>,
    theta_c: Option<u32>,
    sweep: Option<bool>,
    oracle_samples: Option<usize>,
    out: Option<PathBuf>,
    n: Option<u32>,
    l: Option<u32>,
}

fn load_config(path: &Option<PathBuf>) -> Result<Config> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

fn parse_x(s: &str) -> Result<Q4> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        bail!("--x expects four comma-separated coordinates, got {s:?}");
    }
    let mut out = [0u16; 4];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .with_context(|| format!("coordinate {part:?} is not a small nonnegative integer"))?;
    }
    Ok(out)
}

fn resolve_x(cli: &Option<String>, config: &Config) -> Result<Q4> {
    match cli {
        Some(s) => parse_x(s),
        None => Ok(config.x.unwrap_or([0, 1, 1, 0])),
    }
}

fn heavy_from_samples(k: usize) -> HeavyChecks {
    if k == 0 {
        HeavyChecks::none()
    } else {
        HeavyChecks { oracle_values: k.min(6), pair_sum_cases: k.min(4), kernel_samples: k }
    }
}

fn write_json(out: &Option<PathBuf>, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => {
            fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
            eprintln!("report written to {}", p.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn print_checks(scope: &str, checks: &[CheckResult]) {
    for c in checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        eprintln!("[{status}] {scope}{} ({} ms) {}", c.name, c.millis, c.detail);
    }
}

fn print_report(report: &VerificationReport) {
    eprintln!(
        "q = {}, flavor = {}, ring constants (alpha, a, b) = {:?}",
        report.q, report.flavor, report.ring_constants
    );
    print_checks("", &report.tower_checks);
    for datum in &report.data {
        let scope = format!("x={:?} c={} :: ", datum.x, datum.c);
        print_checks(&scope, &datum.checks);
    }
    eprintln!("verdict: {}", if report.verdict { "PASS" } else { "FAIL" });
}

fn tower_for(q: u32, flavor: RingFlavor) -> Result<Tower> {
    let (p, f) = factor(q)?;
    Ok(Tower::build(Fq::new(p, f)?, flavor)?)
}

fn factor(q: u32) -> Result<(u32, u32)> {
    let mut p = 2;
    while p * p <= q && q % p != 0 {
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let mut f = 0;
    let mut m = q;
    while m > 1 {
        if m % p != 0 {
            bail!("{q} is not a prime power");
        }
        m /= p;
        f += 1;
    }
    if p == 2 {
        bail!("the residue characteristic must be odd");
    }
    Ok((p, f))
}

fn check_block_shape(n: Option<u32>, l: Option<u32>) -> Result<()> {
    if let Some(n) = n {
        if n != 2 {
            bail!("only the 2x2 block case is implemented; --n {n} is out of scope");
        }
    }
    if let Some(l) = l {
        if l != 2 {
            bail!("only length-2 base rings are implemented; --l {l} is out of scope");
        }
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let config = load_config(&args.config)?;
    check_block_shape(args.n.or(config.n), args.l.or(config.l))?;
    let q = args.q.or(config.q).unwrap_or(3);
    let flavor: RingFlavor =
        args.flavor.map(Into::into).or(config.flavor).unwrap_or(RingFlavor::EqualChar);
    let sweep = args.sweep || config.sweep.unwrap_or(false);
    let data: Vec<(Q4, u32)> = if sweep {
        default_sweep()
    } else {
        let x = resolve_x(&args.x, &config)?;
        let c = args.theta_c.or(config.theta_c).unwrap_or(1);
        vec![(x, c)]
    };
    let heavy = heavy_from_samples(args.oracle_samples.or(config.oracle_samples).unwrap_or(24));
    let report = run_verification(q, flavor, &data, heavy)?;
    print_report(&report);
    write_json(&args.out.or(config.out), &report.to_json())?;
    Ok(if report.verdict { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_table(args: TableArgs) -> Result<ExitCode> {
    let config = load_config(&args.config)?;
    let q = args.q.or(config.q).unwrap_or(3);
    let flavor: RingFlavor =
        args.flavor.map(Into::into).or(config.flavor).unwrap_or(RingFlavor::EqualChar);
    let tw = tower_for(q, flavor)?;
    let table = CharacterTable::build(&tw)?;
    table.certify()?;
    let out = args.out.or(config.out);
    if args.json {
        write_json(&out, &table.to_json())?;
    } else {
        let csv = table.to_csv();
        match &out {
            Some(p) => {
                fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?;
                eprintln!("table written to {}", p.display());
            }
            None => print!("{csv}"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_omega(args: OmegaArgs) -> Result<ExitCode> {
    let config = load_config(&args.config)?;
    let q = args.q.or(config.q).unwrap_or(3);
    let tw = tower_for(q, RingFlavor::EqualChar)?;
    let omega0 = whittaker_core::cosets::build_omega0(&tw);
    let oracle = whittaker_core::cosets::GrassmannOracle::build(&tw)?;
    let reps: Vec<serde_json::Value> = omega0
        .iter()
        .map(|rep| {
            serde_json::json!({
                "u": rep.u,
                "v": rep.v,
                "identity": rep.is_identity(),
                "orbit": oracle.orbit_of_auv(&tw, *rep),
            })
        })
        .collect();
    let value = serde_json::json!({ "q": q, "count": omega0.len(), "reps": reps });
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_whittaker(args: WhittakerArgs) -> Result<ExitCode> {
    let config = load_config(&args.config)?;
    let q = args.q.or(config.q).unwrap_or(3);
    let flavor: RingFlavor =
        args.flavor.map(Into::into).or(config.flavor).unwrap_or(RingFlavor::EqualChar);
    let x = resolve_x(&args.x, &config)?;
    let c = args.theta_c.or(config.theta_c).unwrap_or(1);
    let samples = args.oracle_samples.or(config.oracle_samples).unwrap_or(0);

    let wb = Workbench::new(q, flavor)?;
    let tw = &wb.tw;
    let datum = CuspidalDatum::new(tw, x, c)?;
    let report = assemble(tw, &datum, &wb.omega0, &wb.cls)?;

    if samples > 0 {
        let probes = oracle_probes(&wb);
        for piece in &report.pieces {
            if datum.det_l_closed(tw, piece.rep) == 0 {
                continue;
            }
            let oracle = MackeyOracle::build(tw, piece.rep)?;
            for g in probes.iter().take(samples) {
                let direct = oracle.whittaker_value(tw, &datum, *g)?;
                let closed = piece.theta.at(&wb.cls, pack2(&tw.o2, *g));
                if (direct - closed).norm() > 1e-6 {
                    bail!(
                        "oracle value {direct} differs from the closed form {closed} on coset ({},{})",
                        piece.rep.u,
                        piece.rep.v
                    );
                }
            }
        }
        eprintln!(
            "oracle agreement on {} values per non-vanishing coset",
            probes.len().min(samples)
        );
    }

    write_json(&args.out.or(config.out), &report.to_json(&wb.cls))?;
    Ok(ExitCode::SUCCESS)
}

/// Probe elements covering the central region, its kernel multiples, the
/// embedded quadratic units, and a split-residue point.
fn oracle_probes(wb: &Workbench) -> Vec<M2> {
    let tw = &wb.tw;
    let r = &tw.o2;
    let z = *wb.z_scalars.iter().find(|&&z| r.reduce(z) != 1).unwrap_or(&1);
    let mut unip = m2_id(r);
    unip[1] = r.add(unip[1], r.pi_mul(1));
    let mut lower = m2_scalar(r, z);
    lower[2] = r.add(lower[2], r.pi_mul(1));
    let quad = whittaker_core::groups::embed2_o2(tw, r.lift(tw.q2_g0.0), r.lift(tw.q2_g0.1));
    let split: M2 = [1, 0, 0, z];
    vec![m2_id(r), m2_scalar(r, z), unip, lower, quad, split]
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Table(args) => cmd_table(args),
        Command::Omega(args) => cmd_omega(args),
        Command::Whittaker(args) => cmd_whittaker(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x_coordinates_parse() {
        assert_eq!(parse_x("0,1,1,0").unwrap(), [0, 1, 1, 0]);
        assert_eq!(parse_x(" 2, 0, 1, 4 ").unwrap(), [2, 0, 1, 4]);
        assert!(parse_x("1,2,3").is_err());
        assert!(parse_x("a,b,c,d").is_err());
    }

    #[test]
    fn prime_power_factoring() {
        assert_eq!(factor(3).unwrap(), (3, 1));
        assert_eq!(factor(9).unwrap(), (3, 2));
        assert_eq!(factor(5).unwrap(), (5, 1));
        assert!(factor(4).is_err());
        assert!(factor(6).is_err());
    }

    #[test]
    fn block_shape_is_pinned() {
        assert!(check_block_shape(Some(2), Some(2)).is_ok());
        assert!(check_block_shape(None, None).is_ok());
        assert!(check_block_shape(Some(3), None).is_err());
        assert!(check_block_shape(None, Some(3)).is_err());
    }

    #[test]
    fn config_fields_mirror_flags() {
        let cfg: Config = serde_json::from_str(
            r#"{"q":5,"flavor":"witt","x":[0,0,1,0],"theta_c":2,"sweep":true,"oracle_samples":0}"#,
        )
        .unwrap();
        assert_eq!(cfg.q, Some(5));
        assert_eq!(cfg.flavor, Some(RingFlavor::MixedChar));
        assert_eq!(cfg.x, Some([0, 0, 1, 0]));
        assert!(serde_json::from_str::<Config>(r#"{"unknown":1}"#).is_err());
    }

    #[test]
    fn sample_counts_map_to_check_knobs() {
        let none = heavy_from_samples(0);
        assert_eq!(none.kernel_samples, 0);
        assert_eq!(none.oracle_values, 0);
        let some = heavy_from_samples(24);
        assert_eq!(some.kernel_samples, 24);
        assert_eq!(some.oracle_values, 6);
        assert_eq!(some.pair_sum_cases, 4);
    }
}
