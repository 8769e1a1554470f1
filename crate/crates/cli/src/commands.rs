use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::anyhow;
use serde::Serialize;
use walkpovm::coin::trace_distance;
use walkpovm::experiment::{
    bootstrap_errors, noisy_distribution, renormalized, sample_counts, CountRecord, Distribution1D,
};
use walkpovm::povm::{
    kraus_operators, match_tetrahedron, povm_elements, verify_sic, PovmSet, SIC_TOL,
};
use walkpovm::reference::Fixtures;
use walkpovm::tomography::{
    by_sic_index, linear_inversion, mle_reconstruct, Reconstruction, MLE_MAX_ITER, MLE_TOL,
};
use walkpovm::waveplate::{compile_schedule, solve_preparation, verify_table, TableEntry};
use walkpovm::{
    evolve, position_distribution, sic_vector, verify, CoinOperator, CoinVector, Execution,
};

use crate::inputs::{self, InputDigest, RunParams, SeedSource};
use crate::manifest::{self, RunManifest};
use crate::output::{csv_table, json, num, Sink};
use crate::{Cli, Command, Failure, Format, InputContext, MethodArg, RuntimeContext};

pub fn run(cli: &Cli, seed: SeedSource) -> Result<(), Failure> {
    match &cli.command {
        Command::Simulate {
            schedule,
            state,
            noise,
        } => {
            let (sched, _) = inputs::schedule(schedule)?;
            let (coin, _) = inputs::state(&state.state)?;
            let (params, _) = inputs::params(noise, None, seed)?;
            let mut sink = Sink::new(cli.out_dir.as_deref(), cli.format)?;
            simulate(&mut sink, &sched, &coin, &params)
        }
        Command::ExtractPovm { schedule } => {
            let (sched, _) = inputs::schedule(schedule)?;
            let mut sink = Sink::new(cli.out_dir.as_deref(), cli.format)?;
            extract_povm(&mut sink, &sched)
        }
        Command::Compile { schedule, state } => {
            let (sched, _) = inputs::schedule(schedule)?;
            let coin = state
                .as_deref()
                .map(inputs::state)
                .transpose()?
                .map(|(c, _)| c);
            let mut sink = Sink::new(cli.out_dir.as_deref(), cli.format)?;
            compile(&mut sink, &sched, coin.as_ref())
        }
        Command::VerifyTable { schedule, table } => {
            let (sched, _) = inputs::schedule(schedule)?;
            let (table, _) = inputs::table(table.as_ref())?;
            let mut sink = Sink::new(cli.out_dir.as_deref(), cli.format)?;
            check_table(&mut sink, &sched, &table)
        }
        Command::Sample {
            schedule,
            state,
            noise,
            shots,
            bootstrap,
        } => {
            let (sched, sched_digest) = inputs::schedule(schedule)?;
            let (coin, state_digest) = inputs::state(&state.state)?;
            let (params, noise_digest) = inputs::params(noise, *shots, seed)?;
            if *bootstrap < 100 {
                return Err(Failure::Input(anyhow!(
                    "--bootstrap needs at least 100 resamples"
                )));
            }
            let mut args = vec!["sample".to_string()];
            args.extend(run_args(
                cli,
                schedule.schedule.as_deref(),
                &state.state,
                &params,
            ));
            args.extend(["--bootstrap".into(), bootstrap.to_string()]);
            let mut m = RunManifest::new("sample", args, params.noise.seed, params.shots);
            record_inputs(&mut m, sched_digest, state_digest, noise_digest);

            let mut sink = sampling_sink(cli)?;
            let dist = noisy_distribution(&sched, &coin, &params.noise).runtime("simulation")?;
            let record = sample_counts(&renormalized(&dist), params.shots, params.noise.seed)
                .runtime("sampling")?;
            write_counts(&mut sink, &record, *bootstrap)?;
            finish(&mut sink, m)
        }
        Command::Reconstruct {
            schedule,
            counts,
            method,
        } => {
            let (sched, _) = inputs::schedule(schedule)?;
            let (record, _) = inputs::counts(counts)?;
            let povm = povm_elements(&sched).input("schedule")?;
            let est = reconstruct(&record, &povm, *method)?;
            let mut sink = Sink::new(cli.out_dir.as_deref(), cli.format)?;
            write_reconstruction(&mut sink, &est, None)
        }
        Command::Pipeline {
            schedule,
            state,
            noise,
            shots,
            method,
        } => {
            let (sched, sched_digest) = inputs::schedule(schedule)?;
            let (coin, state_digest) = inputs::state(&state.state)?;
            let (params, noise_digest) = inputs::params(noise, *shots, seed)?;
            let mut args = vec!["pipeline".to_string()];
            args.extend(run_args(
                cli,
                schedule.schedule.as_deref(),
                &state.state,
                &params,
            ));
            args.extend(["--method".into(), method_name(*method).into()]);
            let mut m = RunManifest::new("pipeline", args, params.noise.seed, params.shots);
            record_inputs(&mut m, sched_digest, state_digest, noise_digest);

            let mut sink = sampling_sink(cli)?;
            let dist =
                noisy_distribution(&sched, &coin, &params.noise).runtime("simulate stage")?;
            sink.file("distribution.json", &json(&dist))?;
            let record = sample_counts(&renormalized(&dist), params.shots, params.noise.seed)
                .runtime("sample stage")?;
            write_counts(&mut sink, &record, 1000)?;
            let povm = povm_elements(&sched).input("reconstruct stage")?;
            let est =
                reconstruct(&record, &povm, *method).map_err(|f| stage("reconstruct stage", f))?;
            write_reconstruction(&mut sink, &est, Some(&coin))?;
            finish(&mut sink, m)
        }
        Command::VerifyPaper => {
            let results = verify::run_all(&Fixtures::default(), Execution::default());
            let mut sink = Sink::new(cli.out_dir.as_deref(), cli.format)?;
            for r in &results {
                println!("{r}");
            }
            let rows = results.iter().map(|r| {
                vec![
                    r.id.to_string(),
                    r.name.into(),
                    r.pass.to_string(),
                    r.detail.clone(),
                ]
            });
            sink.file("verify.json", &json(&results))?;
            sink.file(
                "verify.csv",
                &csv_table(&["criterion", "name", "pass", "detail"], rows),
            )?;
            let failed: Vec<String> = results
                .iter()
                .filter(|r| !r.pass)
                .map(|r| r.id.to_string())
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Check(format!(
                    "criteria {} failed",
                    failed.join(", ")
                )))
            }
        }
        Command::Replay { manifest } => replay(cli, manifest),
    }
}

fn stage(name: &str, f: Failure) -> Failure {
    match f {
        Failure::Input(e) => Failure::Input(e.context(name.to_string())),
        Failure::Runtime(e) => Failure::Runtime(e.context(name.to_string())),
        Failure::Check(m) => Failure::Check(format!("{name}: {m}")),
    }
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Linear => "linear",
        MethodArg::Mle => "mle",
    }
}

/// Explicit arguments that pin every resolved parameter of a sampling run.
fn run_args(cli: &Cli, schedule: Option<&Path>, state: &str, p: &RunParams) -> Vec<String> {
    let mut args = Vec::new();
    if let Some(s) = schedule {
        let abs = fs::canonicalize(s).unwrap_or_else(|_| s.to_path_buf());
        args.extend(["--schedule".into(), abs.display().to_string()]);
    }
    let state = match Path::new(state) {
        p if p.exists()
            && !matches!(
                state.trim(),
                "1" | "2" | "3" | "4" | "H" | "V" | "D" | "A" | "R" | "L"
            ) =>
        {
            fs::canonicalize(p)
                .unwrap_or_else(|_| p.to_path_buf())
                .display()
                .to_string()
        }
        _ => state.trim().to_string(),
    };
    args.extend([
        "--state".into(),
        state,
        "--visibility".into(),
        p.noise.visibility.to_string(),
        "--jitter-deg".into(),
        p.noise.angle_jitter_deg.to_string(),
        "--shots".into(),
        p.shots.to_string(),
        "--seed".into(),
        p.noise.seed.to_string(),
        "--format".into(),
        match cli.format {
            Format::Json => "json".into(),
            Format::Csv => "csv".into(),
        },
    ]);
    args
}

fn record_inputs(
    m: &mut RunManifest,
    schedule: InputDigest,
    state: InputDigest,
    noise: Option<InputDigest>,
) {
    m.inputs.insert("schedule".into(), schedule);
    m.inputs.insert("state".into(), state);
    if let Some(n) = noise {
        m.inputs.insert("noise".into(), n);
    }
}

/// Sampling runs always write files, to the current directory by default.
fn sampling_sink(cli: &Cli) -> Result<Sink, Failure> {
    let dir = cli.out_dir.clone().unwrap_or_else(|| ".".into());
    Sink::new(Some(&dir), cli.format)
}

fn finish(sink: &mut Sink, mut m: RunManifest) -> Result<(), Failure> {
    m.outputs = sink.written().clone();
    sink.file(manifest::FILE_NAME, &json(&m))?;
    let dir = sink.dir().expect("sampling sink has a directory");
    println!(
        "wrote {} files and {}",
        m.outputs.len(),
        dir.join(manifest::FILE_NAME).display()
    );
    Ok(())
}

fn distribution_csv(dist: &Distribution1D) -> String {
    csv_table(
        &["position", "probability"],
        dist.iter().map(|(x, p)| vec![x.to_string(), num(*p)]),
    )
}

#[derive(Serialize)]
struct Simulation<'a> {
    schedule_digest: String,
    coin: &'a CoinVector,
    visibility: f64,
    angle_jitter_deg: f64,
    seed: u64,
    distribution: &'a Distribution1D,
}

fn simulate(
    sink: &mut Sink,
    sched: &walkpovm::WalkSchedule,
    coin: &CoinVector,
    p: &RunParams,
) -> Result<(), Failure> {
    let ideal = p.noise.visibility == 1.0 && p.noise.angle_jitter_deg == 0.0;
    let (dist, final_state) = if ideal {
        let out = evolve(&sched.initial(*coin), sched);
        (position_distribution(&out).runtime("evolution")?, Some(out))
    } else {
        (
            noisy_distribution(sched, coin, &p.noise).runtime("noisy evolution")?,
            None,
        )
    };
    let report = Simulation {
        schedule_digest: sched.digest(),
        coin,
        visibility: p.noise.visibility,
        angle_jitter_deg: p.noise.angle_jitter_deg,
        seed: p.noise.seed,
        distribution: &dist,
    };
    sink.primary("distribution", &json(&report), &distribution_csv(&dist))?;
    if let Some(s) = final_state {
        sink.file("final_state.json", &json(&s))?;
    }
    Ok(())
}

fn operator_row(x: i64, kind: &str, m: &CoinOperator) -> Vec<String> {
    let mut row = vec![x.to_string(), kind.to_string()];
    for z in m.entries() {
        row.push(num(z.re));
        row.push(num(z.im));
    }
    row
}

const OPERATOR_HEADER: [&str; 10] = [
    "position", "operator", "m00_re", "m00_im", "m01_re", "m01_im", "m10_re", "m10_im", "m11_re",
    "m11_im",
];

fn tetrahedron() -> Vec<CoinVector> {
    (1..=4)
        .map(|i| sic_vector(i).expect("index in 1..=4"))
        .collect()
}

#[derive(Serialize)]
struct PovmReport<'a> {
    povm: &'a PovmSet,
    kraus: BTreeMap<i64, CoinOperator>,
    sic: walkpovm::povm::SicReport,
    /// Position → tetrahedron vertex (1-based), when the match is unique.
    assignment: Option<BTreeMap<i64, usize>>,
}

fn extract_povm(sink: &mut Sink, sched: &walkpovm::WalkSchedule) -> Result<(), Failure> {
    let povm = povm_elements(sched).runtime("POVM extraction")?;
    let kraus = kraus_operators(sched);
    let report = PovmReport {
        povm: &povm,
        sic: verify_sic(&povm, SIC_TOL),
        assignment: match_tetrahedron(&povm, &tetrahedron()).ok(),
        kraus: kraus.clone(),
    };
    let rows = povm
        .elements
        .iter()
        .map(|(x, e)| operator_row(*x, "E", e))
        .chain(kraus.iter().map(|(x, k)| operator_row(*x, "K", k)));
    sink.primary("povm", &json(&report), &csv_table(&OPERATOR_HEADER, rows))
}

#[derive(Serialize)]
struct Compiled {
    table: Vec<TableEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    preparation: Option<walkpovm::waveplate::PlateSequence>,
}

fn compile(
    sink: &mut Sink,
    sched: &walkpovm::WalkSchedule,
    coin: Option<&CoinVector>,
) -> Result<(), Failure> {
    let table = compile_schedule(sched).runtime("coin compilation")?;
    let preparation = coin
        .map(solve_preparation)
        .transpose()
        .input("state preparation")?;
    let mut rows = Vec::new();
    if let Some(p) = &preparation {
        for (k, plate) in p.iter().enumerate() {
            rows.push(vec![
                "preparation".into(),
                String::new(),
                String::new(),
                (k + 1).to_string(),
                plate.kind.to_string(),
                num(plate.angle),
            ]);
        }
    }
    for e in &table {
        for (k, plate) in e.plates.iter().enumerate() {
            rows.push(vec![
                e.step.to_string(),
                e.substep.map(|s| s.to_string()).unwrap_or_default(),
                e.site.to_string(),
                (k + 1).to_string(),
                plate.kind.to_string(),
                num(plate.angle),
            ]);
        }
    }
    let csv = csv_table(
        &["step", "substep", "site", "plate", "kind", "angle_deg"],
        rows,
    );
    sink.primary("plates", &json(&Compiled { table, preparation }), &csv)
}

fn check_table(
    sink: &mut Sink,
    sched: &walkpovm::WalkSchedule,
    table: &[TableEntry],
) -> Result<(), Failure> {
    let report = verify_table(sched, table).input("table")?;
    let rows = report.entries.iter().map(|e| {
        vec![
            e.step.to_string(),
            e.substep.to_string(),
            e.site.to_string(),
            num(e.distance_as_listed),
            num(e.distance_reversed),
            serde_json::to_value(e.best_order)
                .expect("enum serializes")
                .as_str()
                .unwrap_or_default()
                .to_string(),
            e.pass.to_string(),
        ]
    });
    let csv = csv_table(
        &[
            "step",
            "substep",
            "site",
            "distance_as_listed",
            "distance_reversed",
            "best_order",
            "pass",
        ],
        rows,
    );
    sink.primary("table_report", &json(&report), &csv)?;
    if report.pass {
        Ok(())
    } else {
        let bad = report.entries.iter().filter(|e| !e.pass).count();
        Err(Failure::Check(format!(
            "{bad} entries above tolerance, {} coins without an entry",
            report.missing.len()
        )))
    }
}

fn write_counts(sink: &mut Sink, record: &CountRecord, bootstrap: usize) -> Result<(), Failure> {
    let sigma = bootstrap_errors(record, bootstrap, record.seed).runtime("bootstrap")?;
    let freq = record.frequencies();
    let rows = record
        .counts
        .iter()
        .map(|(x, k)| vec![x.to_string(), k.to_string(), num(freq[x]), num(sigma[x])]);
    sink.file("counts.json", &json(record))?;
    sink.file(
        "counts.csv",
        &csv_table(&["position", "count", "frequency", "sigma"], rows),
    )
}

fn reconstruct(
    record: &CountRecord,
    povm: &PovmSet,
    method: MethodArg,
) -> Result<Reconstruction, Failure> {
    match method {
        MethodArg::Mle => mle_reconstruct(record, povm, MLE_TOL, MLE_MAX_ITER)
            .input("maximum-likelihood reconstruction"),
        MethodArg::Linear => {
            let assignment = match_tetrahedron(povm, &tetrahedron())
                .input("linear inversion needs a tetrahedral POVM")?;
            let freq = record.frequencies();
            let full: Distribution1D = povm
                .elements
                .keys()
                .map(|x| (*x, freq.get(x).copied().unwrap_or(0.0)))
                .collect();
            let probs = by_sic_index(&full, &assignment).input("counts")?;
            linear_inversion(&probs).input("linear inversion")
        }
    }
}

#[derive(Serialize)]
struct ReconstructionReport<'a> {
    #[serde(flatten)]
    reconstruction: &'a Reconstruction,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace_distance_to_input: Option<f64>,
}

fn write_reconstruction(
    sink: &mut Sink,
    est: &Reconstruction,
    truth: Option<&CoinVector>,
) -> Result<(), Failure> {
    let report = ReconstructionReport {
        reconstruction: est,
        trace_distance_to_input: truth.map(|t| trace_distance(&est.rho, &t.projector())),
    };
    let rows = (0..2).flat_map(|r| {
        (0..2).map(move |c| {
            let z = est.rho.entry(r, c);
            vec![r.to_string(), c.to_string(), num(z.re), num(z.im)]
        })
    });
    let csv = csv_table(&["row", "col", "re", "im"], rows);
    sink.primary("reconstruction", &json(&report), &csv)
}

fn replay(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(path).input(&format!("cannot read {}", path.display()))?;
    let old: RunManifest = serde_json::from_str(&text).input("manifest")?;
    for (name, d) in &old.inputs {
        if d.source.starts_with("builtin:") {
            continue;
        }
        let bytes = fs::read(&d.source).input(&format!("manifest input {name}"))?;
        if inputs::sha256_hex(&bytes) != d.sha256 {
            return Err(Failure::Check(format!(
                "input {name} ({}) changed since the run",
                d.source
            )));
        }
    }
    let dir = match &cli.out_dir {
        Some(d) => d.clone(),
        None => path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| ".".into()),
    };
    let mut argv = vec!["walkpovm".to_string()];
    argv.extend(old.args.iter().cloned());
    argv.extend(["--out-dir".into(), dir.display().to_string()]);
    let (again, seed) = crate::parse(&argv).input("manifest arguments")?;
    if matches!(again.command, Command::Replay { .. }) {
        return Err(Failure::Input(anyhow!("manifest refers to another replay")));
    }
    run(&again, seed)?;
    let new_text =
        fs::read_to_string(dir.join(manifest::FILE_NAME)).runtime("reading the new manifest")?;
    let new: RunManifest = serde_json::from_str(&new_text).runtime("new manifest")?;
    if new.outputs != old.outputs {
        let differing: Vec<&String> = old
            .outputs
            .iter()
            .filter(|(k, v)| new.outputs.get(*k) != Some(v))
            .map(|(k, _)| k)
            .collect();
        return Err(Failure::Check(format!("outputs differ: {differing:?}")));
    }
    println!(
        "replay reproduced {} outputs bit-exactly",
        new.outputs.len()
    );
    Ok(())
}
