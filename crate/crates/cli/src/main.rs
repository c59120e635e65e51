//! spt — spiked-tensor hypergraph counting toolkit.
//!
//! Subcommands: sample, families, stat, detect, recover, experiment, verify.
//! Exit codes: 0 success, 1 runtime/verification failure, 2 capacity error,
//! 3 config/usage error.

use spiketensor::counting::{
    exact_detection_stat, exact_recovery_score, f_tilde, phi_tilde, ColorCodingPlan,
};
use spiketensor::error::Error;
use spiketensor::family::{
    build_chains, build_necklaces, enumerate_blocks, ChainFamily, FamilyManifest, NecklaceFamily,
};
use spiketensor::harness::{run_to_dir, verify, ExperimentConfig};
use spiketensor::inference::{detect, recover, DetectionConfig, Mode};
use spiketensor::tensor::{sample_null, sample_planted, ModelParams, SymmetricTensor};
use std::fs;
use std::io::Read;
use std::path::Path;
use std::time::Instant;

const USAGE: &str = "usage:
  spt sample --n N --p P [--lambda F] [--seed N] --out PATH [--spike-out PATH] [--format bin|text]
  spt families --m M --p P [--ell L] --kind block|necklace|chain --out PATH
  spt stat detect-exact|detect-cc|phi-exact|phi-cc --tensor PATH --family PATH --lambda F
          [--pair I,J] [--seed N] [--t-override N]
  spt detect --tensor PATH --family PATH --lambda F [--C F] [--mode exact|cc]
          [--seed N] [--t-override N]
  spt recover --tensor PATH --family PATH --lambda F [--anchor N] [--mode exact|cc]
          [--seed N] [--t-override N] --out PATH
  spt experiment --config PATH.json [--out DIR]
  spt verify [--quick]";

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(match dispatch(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Capacity(_) => 2,
                Error::Config(_) | Error::Param(_) => 3,
                _ => 1,
            }
        }
    });
}

fn flag<'a>(args: &'a [String], name: &str) -> Option<&'a str> {
    args.iter()
        .position(|a| a == name)
        .and_then(|i| args.get(i + 1))
        .map(|s| s.as_str())
}

fn has_flag(args: &[String], name: &str) -> bool {
    args.iter().any(|a| a == name)
}

fn req<'a>(args: &'a [String], name: &str) -> Result<&'a str, Error> {
    flag(args, name).ok_or_else(|| Error::Config(format!("missing required flag {name}")))
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, Error> {
    s.parse()
        .map_err(|_| Error::Config(format!("bad {what}: {s}")))
}

fn dispatch(args: &[String]) -> Result<i32, Error> {
    let cmd = args.first().map(|s| s.as_str()).unwrap_or("");
    match cmd {
        "sample" => cmd_sample(&args[1..]),
        "families" => cmd_families(&args[1..]),
        "stat" => cmd_stat(&args[1..]),
        "detect" => cmd_detect(&args[1..]),
        "recover" => cmd_recover(&args[1..]),
        "experiment" => cmd_experiment(&args[1..]),
        "verify" => cmd_verify(&args[1..]),
        "" | "help" | "--help" | "-h" => {
            println!("{USAGE}");
            Ok(0)
        }
        other => Err(Error::Config(format!(
            "unknown subcommand {other}\n{USAGE}"
        ))),
    }
}

// ----------------------------------------------------------------------
// sample
// ----------------------------------------------------------------------

fn cmd_sample(args: &[String]) -> Result<i32, Error> {
    let n: u32 = parse(req(args, "--n")?, "n")?;
    let p: u32 = parse(req(args, "--p")?, "p")?;
    let lambda: f64 = flag(args, "--lambda")
        .map(|s| parse(s, "lambda"))
        .transpose()?
        .unwrap_or(0.0);
    let seed: u64 = flag(args, "--seed")
        .map(|s| parse(s, "seed"))
        .transpose()?
        .unwrap_or(0);
    let out = req(args, "--out")?;
    let format = flag(args, "--format").unwrap_or("bin");

    let (tensor, spike) = if lambda > 0.0 {
        let params = ModelParams::new(n, p, lambda)?;
        let (t, s) = sample_planted(params, seed)?;
        (t, Some(s))
    } else {
        (sample_null(n, p, seed)?, None)
    };
    match format {
        "bin" => {
            let mut f = fs::File::create(out)?;
            tensor.write_binary(&mut f)?;
        }
        "text" => fs::write(out, tensor.to_text())?,
        other => return Err(Error::Config(format!("unknown format {other}"))),
    }
    if let Some(path) = flag(args, "--spike-out") {
        match &spike {
            Some(s) => fs::write(path, s.to_text())?,
            None => return Err(Error::Config("--spike-out needs --lambda > 0".into())),
        }
    }
    println!(
        "{}",
        serde_json::json!({"n": n, "p": p, "lambda": lambda, "seed": seed, "entries": tensor.n_entries()})
    );
    Ok(0)
}

fn read_tensor(path: &str) -> Result<SymmetricTensor, Error> {
    let mut f = fs::File::open(path)?;
    let mut head = [0u8; 4];
    let got = f.read(&mut head)?;
    drop(f);
    if got == 4 && &head == b"SPT1" {
        let mut f = fs::File::open(path)?;
        SymmetricTensor::read_binary(&mut f)
    } else {
        SymmetricTensor::from_text(&fs::read_to_string(path)?)
    }
}

// ----------------------------------------------------------------------
// families
// ----------------------------------------------------------------------

fn cmd_families(args: &[String]) -> Result<i32, Error> {
    let m: u32 = parse(req(args, "--m")?, "m")?;
    let p: u32 = parse(req(args, "--p")?, "p")?;
    let kind = req(args, "--kind")?;
    let out = req(args, "--out")?;
    let blocks = enumerate_blocks(m, p)?;
    let manifest = match kind {
        "block" => blocks.manifest(),
        "necklace" => {
            let ell: u32 = parse(req(args, "--ell")?, "ell")?;
            build_necklaces(&blocks, ell)?.manifest()
        }
        "chain" => {
            let ell: u32 = parse(req(args, "--ell")?, "ell")?;
            build_chains(&blocks, ell)?.manifest()
        }
        other => return Err(Error::Config(format!("unknown family kind {other}"))),
    };
    fs::write(out, serde_json::to_string_pretty(&manifest).unwrap() + "\n")?;
    println!(
        "{}",
        serde_json::json!({"kind": kind, "m": m, "p": p, "classes": manifest.classes.len(), "beta": manifest.beta})
    );
    Ok(0)
}

fn read_manifest(path: &str) -> Result<FamilyManifest, Error> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("bad family manifest: {e}")))
}

/// Rebuilds the necklace family a manifest describes and checks it matches.
fn necklace_from_manifest(man: &FamilyManifest) -> Result<NecklaceFamily, Error> {
    if man.kind != "necklace" {
        return Err(Error::Family(format!(
            "expected a necklace manifest, got {}",
            man.kind
        )));
    }
    let ell = man
        .ell
        .ok_or_else(|| Error::Format("necklace manifest missing ell".into()))?;
    let blocks = enumerate_blocks(man.m, man.p)?;
    let fam = build_necklaces(&blocks, ell)?;
    if fam.classes.len() != man.classes.len() {
        return Err(Error::Family(format!(
            "manifest lists {} classes but the builder produced {}",
            man.classes.len(),
            fam.classes.len()
        )));
    }
    Ok(fam)
}

fn chains_from_manifest(man: &FamilyManifest) -> Result<ChainFamily, Error> {
    if man.kind != "chain" {
        return Err(Error::Family(format!(
            "expected a chain manifest, got {}",
            man.kind
        )));
    }
    let ell = man
        .ell
        .ok_or_else(|| Error::Format("chain manifest missing ell".into()))?;
    let blocks = enumerate_blocks(man.m, man.p)?;
    let fam = build_chains(&blocks, ell)?;
    if fam.classes.len() != man.classes.len() {
        return Err(Error::Family(format!(
            "manifest lists {} classes but the builder produced {}",
            man.classes.len(),
            fam.classes.len()
        )));
    }
    Ok(fam)
}

// ----------------------------------------------------------------------
// stat
// ----------------------------------------------------------------------

fn cmd_stat(args: &[String]) -> Result<i32, Error> {
    let which = args.first().map(|s| s.as_str()).unwrap_or("");
    let rest = &args[1..];
    let tensor = read_tensor(req(rest, "--tensor")?)?;
    let man = read_manifest(req(rest, "--family")?)?;
    let lambda: f64 = parse(req(rest, "--lambda")?, "lambda")?;
    let seed: u64 = flag(rest, "--seed")
        .map(|s| parse(s, "seed"))
        .transpose()?
        .unwrap_or(0);
    let t_override: Option<u32> = flag(rest, "--t-override")
        .map(|s| parse(s, "t-override"))
        .transpose()?;
    let pair: Option<(u32, u32)> = match flag(rest, "--pair") {
        Some(s) => {
            let (a, b) = s
                .split_once(',')
                .ok_or_else(|| Error::Config(format!("bad --pair {s}, expected I,J")))?;
            // 1-based on the command line
            let i: u32 = parse(a, "pair")?;
            let j: u32 = parse(b, "pair")?;
            if i == 0 || j == 0 {
                return Err(Error::Config("--pair uses 1-based vertex ids".into()));
            }
            Some((i - 1, j - 1))
        }
        None => None,
    };

    let started = Instant::now();
    let (statistic, t, rate) = match which {
        "detect-exact" => {
            let fam = necklace_from_manifest(&man)?;
            (exact_detection_stat(&tensor, &fam)?, None, None)
        }
        "detect-cc" => {
            let fam = necklace_from_manifest(&man)?;
            let mut plan = ColorCodingPlan::detection(&fam, seed)?;
            if let Some(t) = t_override {
                plan = plan.with_t(t)?;
            }
            let est = f_tilde(&tensor, &fam, &plan)?;
            (est.statistic, Some(est.t), Some(est.rate))
        }
        "phi-exact" => {
            let fam = chains_from_manifest(&man)?;
            let (i, j) = pair.ok_or_else(|| Error::Config("phi-exact needs --pair I,J".into()))?;
            (
                exact_recovery_score(&tensor, &fam, lambda, i, j)?,
                None,
                None,
            )
        }
        "phi-cc" => {
            let fam = chains_from_manifest(&man)?;
            let (i, j) = pair.ok_or_else(|| Error::Config("phi-cc needs --pair I,J".into()))?;
            let mut plan = ColorCodingPlan::recovery(&fam, seed)?;
            if let Some(t) = t_override {
                plan = plan.with_t(t)?;
            }
            let est = phi_tilde(&tensor, &fam, lambda, &plan, i, j)?;
            (est.statistic, Some(est.t), Some(est.rate))
        }
        other => {
            return Err(Error::Config(format!(
                "unknown stat {other}; expected detect-exact|detect-cc|phi-exact|phi-cc"
            )))
        }
    };
    println!(
        "{}",
        serde_json::json!({
            "statistic": statistic,
            "t": t,
            "r": rate,
            "wall_ms": started.elapsed().as_secs_f64() * 1e3,
        })
    );
    Ok(0)
}

// ----------------------------------------------------------------------
// detect / recover
// ----------------------------------------------------------------------

fn parse_mode(s: Option<&str>) -> Result<Mode, Error> {
    match s.unwrap_or("exact") {
        "exact" => Ok(Mode::Exact),
        "cc" => Ok(Mode::Cc),
        other => Err(Error::Config(format!("unknown mode {other}"))),
    }
}

fn cmd_detect(args: &[String]) -> Result<i32, Error> {
    let tensor = read_tensor(req(args, "--tensor")?)?;
    let man = read_manifest(req(args, "--family")?)?;
    let fam = necklace_from_manifest(&man)?;
    let lambda: f64 = parse(req(args, "--lambda")?, "lambda")?;
    let c: f64 = flag(args, "--C")
        .map(|s| parse(s, "C"))
        .transpose()?
        .unwrap_or(0.5);
    let cfg = DetectionConfig {
        threshold_fraction: c,
        lambda,
        mode: parse_mode(flag(args, "--mode"))?,
        seed: flag(args, "--seed")
            .map(|s| parse(s, "seed"))
            .transpose()?
            .unwrap_or(0),
        t_override: flag(args, "--t-override")
            .map(|s| parse(s, "t-override"))
            .transpose()?,
    };
    let out = detect(&tensor, &fam, &cfg)?;
    println!("{}", serde_json::to_string(&out).unwrap());
    Ok(0)
}

fn cmd_recover(args: &[String]) -> Result<i32, Error> {
    let tensor = read_tensor(req(args, "--tensor")?)?;
    let man = read_manifest(req(args, "--family")?)?;
    let fam = chains_from_manifest(&man)?;
    let lambda: f64 = parse(req(args, "--lambda")?, "lambda")?;
    // 1-based on the command line, default vertex 1
    let anchor: u32 = flag(args, "--anchor")
        .map(|s| parse(s, "anchor"))
        .transpose()?
        .unwrap_or(1);
    if anchor == 0 {
        return Err(Error::Config("--anchor uses 1-based vertex ids".into()));
    }
    let mode = parse_mode(flag(args, "--mode"))?;
    let seed: u64 = flag(args, "--seed")
        .map(|s| parse(s, "seed"))
        .transpose()?
        .unwrap_or(0);
    let t_override: Option<u32> = flag(args, "--t-override")
        .map(|s| parse(s, "t-override"))
        .transpose()?;
    let out_path = req(args, "--out")?;
    let result = recover(&tensor, &fam, lambda, mode, anchor - 1, seed, t_override)?;
    fs::write(out_path, result.estimate.to_text())?;
    let positive = result.estimate.entries.iter().filter(|&&x| x > 0).count();
    println!(
        "{}",
        serde_json::json!({"anchor": anchor, "n": result.estimate.len(), "positive": positive, "out": out_path})
    );
    Ok(0)
}

// ----------------------------------------------------------------------
// experiment / verify
// ----------------------------------------------------------------------

fn cmd_experiment(args: &[String]) -> Result<i32, Error> {
    let config_path = req(args, "--config")?;
    let out_dir = flag(args, "--out").unwrap_or(".");
    let text = fs::read_to_string(config_path)?;
    let cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
    let summary = run_to_dir(&cfg, Path::new(out_dir))?;
    println!("{}", serde_json::to_string_pretty(&summary).unwrap());
    Ok(0)
}

fn cmd_verify(args: &[String]) -> Result<i32, Error> {
    let quick = has_flag(args, "--quick");
    let report = verify(quick)?;
    for e in &report.entries {
        println!(
            "{} {} ({})",
            if e.pass { "PASS" } else { "FAIL" },
            e.name,
            e.detail
        );
    }
    Ok(if report.all_pass() { 0 } else { 1 })
}
