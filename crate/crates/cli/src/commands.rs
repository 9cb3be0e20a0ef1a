//! Subcommand implementations. Every output is a deterministic function of
//! the configuration and its seeds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use lipfit::bounds::{bound_report, calibrate_covering_constants, BoundInputs};
use lipfit::data::{
    covering_radius, empirical_lipschitz_lower, grid_plus_uniform, make_dataset, read_dataset_file, sample_uniform,
    write_dataset_file, CoverMode,
};
use lipfit::dynamics::{benchmark_domain, mse_curves_svg, trajectory_error, Benchmark, TrajectoryError};
use lipfit::extension::LipschitzExtension;
use lipfit::network::{Architecture, LipNet, MlpNet, Model};
use lipfit::training::{
    evaluate_metrics, train_mlp_baseline, Formulation, FormulationKind, MetricsReport, TrainStatus, TrainingReport,
    METRICS_HEADER,
};
use lipfit::{BatchMap, Dataset64, Error, Model64};

use crate::config::{ExperimentConfig, ModelKind};
use crate::{BoundsArgs, EvalArgs, Failure, GenDataArgs, InfoArgs, ReportArgs, SimulateArgs, TrainArgs};

pub const MANIFEST_SCHEMA: &str = "lipfit-manifest/1";
pub const WD_SWEEP: [f64; 8] = [0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0];
pub const TABLE2_HEADER: &str = "weight_decay,train_mse,train_max,test_mse,test_max,emp_lip";
pub const TABLE3_HEADER: &str = "setup,layer,train_mse,train_max,test_mse,test_max,emp_lip,cert_lip";
/// Offset between the training and test sampling seeds.
const TEST_SEED_OFFSET: u64 = 1_000_003;

type CmdResult = Result<(), Failure>;

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::io(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

fn read_json<D: for<'de> Deserialize<'de>>(path: &Path) -> Result<D, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}

fn load_model(path: &Path) -> Result<Model64, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    Model64::from_checkpoint_json(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------- gen-data

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverSummary {
    pub value: f64,
    pub upper: Option<f64>,
    pub mode: CoverMode,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub train_count: usize,
    pub test_count: usize,
    pub grid_per_dim: usize,
    pub uniform_count: usize,
    pub noise_bound: f64,
    pub train_seed: u64,
    pub test_seed: u64,
    pub l_data: f64,
    pub covering_radius: CoverSummary,
}

pub fn gen_data(args: &GenDataArgs) -> CmdResult {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.dataset.seed = s;
    }
    if let Some(t) = args.test_count {
        cfg.dataset.test_count = t;
    }
    cfg.validate()?;
    let domain = cfg.domain()?;
    let ds = &cfg.dataset;
    let x = grid_plus_uniform(&domain, ds.grid_per_dim, ds.uniform_count, ds.seed)?;
    let train = make_dataset(&Benchmark, &x, ds.noise_bound, ds.seed)?;
    let test_seed = ds.seed.wrapping_add(TEST_SEED_OFFSET);
    let test = make_dataset(&Benchmark, &sample_uniform(&domain, ds.test_count, test_seed)?, ds.noise_bound, test_seed)?;
    let cover = covering_radius(train.inputs(), &domain, CoverMode::BranchAndBound, ds.cover_resolution, ds.seed)?;
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA.into(),
        train_count: train.len(),
        test_count: test.len(),
        grid_per_dim: ds.grid_per_dim,
        uniform_count: ds.uniform_count,
        noise_bound: ds.noise_bound,
        train_seed: ds.seed,
        test_seed,
        l_data: if train.len() >= 2 { empirical_lipschitz_lower(&train)? } else { 0.0 },
        covering_radius: CoverSummary {
            value: cover.value,
            upper: cover.upper,
            mode: cover.mode,
        },
    };
    let dir = cfg.data_dir();
    fs::create_dir_all(&dir)?;
    write_dataset_file(&train, dir.join("train.csv"))?;
    write_dataset_file(&test, dir.join("test.csv"))?;
    write_json(&dir.join("manifest.json"), &manifest)?;
    println!(
        "wrote {} training and {} test samples to {} (L_data = {:.4}, covering radius ≈ {:.4})",
        manifest.train_count,
        manifest.test_count,
        dir.display(),
        manifest.l_data,
        manifest.covering_radius.value
    );
    Ok(())
}

struct Data {
    train: Dataset64,
    test: Dataset64,
    manifest: Manifest,
}

fn load_data(cfg: &ExperimentConfig) -> Result<Data, Failure> {
    let dir = cfg.data_dir();
    let manifest_path = dir.join("manifest.json");
    if !manifest_path.exists() {
        return Err(Failure::io(format!("{} not found; run `lipfit gen-data` first", manifest_path.display())));
    }
    let manifest: Manifest = read_json(&manifest_path)?;
    let read = |name: &str| read_dataset_file::<f64>(dir.join(name)).map_err(|e| Failure::io(format!("{name}: {e}")));
    Ok(Data {
        train: read("train.csv")?,
        test: read("test.csv")?,
        manifest,
    })
}

// ---------------------------------------------------------------- train

/// Metadata and metrics of one trained (or oracle) model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub name: String,
    pub model: String,
    pub family: Option<String>,
    pub formulation: Option<String>,
    pub rho: Option<f64>,
    pub weight_decay: Option<f64>,
    pub status: Option<TrainStatus>,
    pub metrics: MetricsReport,
}

fn parse_with<T: std::str::FromStr>(what: &str, v: &str) -> Result<T, Failure>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| Failure::config(format!("--{what}: {e}")))
}

fn apply_train_overrides(cfg: &mut ExperimentConfig, a: &TrainArgs) -> Result<(), Failure> {
    if let Some(m) = &a.model {
        cfg.model.kind = match m.as_str() {
            "lipnet" => ModelKind::Lipnet,
            "mlp" => ModelKind::Mlp,
            other => return Err(Failure::config(format!("--model: unknown model '{other}' (lipnet, mlp)"))),
        };
    }
    if a.wd_sweep {
        cfg.model.kind = ModelKind::Mlp;
    }
    if let Some(f) = &a.family {
        cfg.model.family = parse_with("family", f)?;
    }
    if let Some(f) = &a.activation {
        cfg.model.activation = parse_with("activation", f)?;
    }
    if let Some(f) = &a.formulation {
        cfg.formulation.kind = match f.to_ascii_uppercase().as_str() {
            "P1" => FormulationKind::P1,
            "P2" => FormulationKind::P2,
            "P3" => FormulationKind::P3,
            other => return Err(Failure::config(format!("--formulation: unknown '{other}' (P1, P2, P3)"))),
        };
    }
    if a.rho.is_some() || a.rho_rel.is_some() {
        cfg.formulation.rho = a.rho;
        cfg.formulation.rho_rel = a.rho_rel;
    }
    if let Some(w) = a.weight_decay {
        cfg.training.weight_decay = w;
    }
    if let Some(w) = a.width {
        cfg.model.width = w;
    }
    if let Some(d) = a.depth {
        cfg.model.depth = d;
    }
    if let Some(n) = a.inner_steps {
        cfg.training.inner_steps = n;
    }
    if let Some(n) = a.outer_iters {
        cfg.training.outer_iters = n;
    }
    if let Some(lr) = a.lr {
        cfg.training.lr = lr;
    }
    if let Some(s) = a.seed {
        cfg.model.seed = s;
    }
    cfg.validate()
}

fn architecture(cfg: &ExperimentConfig) -> Architecture {
    Architecture {
        input_dim: 3,
        output_dim: 3,
        width: cfg.model.width,
        depth: cfg.model.depth,
        activation: cfg.model.activation,
    }
}

fn save_run(cfg: &ExperimentConfig, record: &RunRecord, model: Option<&Model64>, report: Option<&TrainingReport>) -> CmdResult {
    let dir = cfg.runs_dir().join(&record.name);
    if let Some(m) = model {
        write_text(&dir.join("checkpoint.json"), &m.to_checkpoint_json()?)?;
    }
    if let Some(r) = report {
        write_json(&dir.join("report.json"), r)?;
    }
    write_json(&dir.join("metrics.json"), record)
}

pub fn train(a: &TrainArgs) -> CmdResult {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    apply_train_overrides(&mut cfg, a)?;
    let data = load_data(&cfg)?;
    let domain = cfg.domain()?;
    let arch = architecture(&cfg);
    let l_data = data.manifest.l_data;
    match cfg.model.kind {
        ModelKind::Mlp => {
            let wds: Vec<f64> = if a.wd_sweep { WD_SWEEP.to_vec() } else { vec![cfg.training.weight_decay] };
            if a.name.is_some() && wds.len() > 1 {
                return Err(Failure::config("--name cannot be combined with --wd-sweep"));
            }
            for wd in wds {
                let mut net = MlpNet::new(&arch, cfg.model.seed)?;
                let name = a.name.clone().unwrap_or_else(|| format!("mlp-wd{wd}"));
                let report = train_mlp_baseline(&mut net, &data.train, wd, &cfg.training);
                let model = Model::Mlp(net);
                let report = match report {
                    Ok(r) => r,
                    Err(e) => {
                        write_text(&cfg.runs_dir().join(&name).join("checkpoint.json"), &model.to_checkpoint_json()?)?;
                        return Err(e.into());
                    }
                };
                let metrics = evaluate_metrics(&model, None, &data.train, &data.test, &domain, &cfg.evaluation)?;
                let record = RunRecord {
                    name: name.clone(),
                    model: "mlp".into(),
                    family: None,
                    formulation: None,
                    rho: None,
                    weight_decay: Some(wd),
                    status: Some(report.status),
                    metrics,
                };
                save_run(&cfg, &record, Some(&model), Some(&report))?;
                print_summary(&record);
            }
            Ok(())
        }
        ModelKind::Lipnet => {
            let rho = cfg.formulation.resolve_rho(l_data)?;
            let form = match cfg.formulation.kind {
                FormulationKind::P1 => Formulation::p1(),
                FormulationKind::P2 => Formulation::p2(rho),
                FormulationKind::P3 => Formulation::p3(rho),
            };
            let name = a.name.clone().unwrap_or_else(|| {
                let mut n = format!("lipnet-{}-{}", cfg.model.family, form.name());
                if form.kind != FormulationKind::P1 {
                    match cfg.formulation.rho_rel {
                        Some(r) => {
                            let _ = write!(n, "-rho{r}L");
                        }
                        None => {
                            let _ = write!(n, "-rho{rho}");
                        }
                    }
                }
                n
            });
            let seed_l = if l_data > 0.0 { l_data } else { 1.0 };
            let mut net = LipNet::new(&arch, cfg.model.family, seed_l, cfg.model.seed)?;
            let result = lipfit::training::train(&mut net, &data.train, &form, &cfg.training);
            let model = Model::Lip(net);
            let report = match result {
                Ok(r) => r,
                Err(e) => {
                    // The network holds the last good parameters.
                    write_text(&cfg.runs_dir().join(&name).join("checkpoint.json"), &model.to_checkpoint_json()?)?;
                    return Err(e.into());
                }
            };
            let prepared = model.prepare()?;
            let metrics = evaluate_metrics(&prepared, model.certified_lipschitz(), &data.train, &data.test, &domain, &cfg.evaluation)?;
            let record = RunRecord {
                name,
                model: "lipnet".into(),
                family: Some(cfg.model.family.to_string()),
                formulation: Some(form.name().into()),
                rho: (form.kind != FormulationKind::P1).then_some(rho),
                weight_decay: None,
                status: Some(report.status),
                metrics,
            };
            save_run(&cfg, &record, Some(&model), Some(&report))?;
            print_summary(&record);
            Ok(())
        }
    }
}

fn print_summary(r: &RunRecord) {
    let m = &r.metrics;
    let cert = m.cert_lip.map(|c| format!("{c:.4}")).unwrap_or_else(|| "--".into());
    let status = r.status.map(|s| format!(" [{s:?}]")).unwrap_or_default();
    println!(
        "{}{status}: train MSE {:.3e} Max {:.3e} | test MSE {:.3e} Max {:.3e} | emp {:.4} cert {cert}",
        r.name, m.train_mse, m.train_max, m.test_mse, m.test_max, m.emp_lip
    );
}

// ---------------------------------------------------------------- eval

pub fn eval(a: &EvalArgs) -> CmdResult {
    let cfg = ExperimentConfig::load(&a.config)?;
    let data = load_data(&cfg)?;
    let domain = cfg.domain()?;
    let evaluate = |f: &dyn BatchMap<f64>, cert: Option<f64>| {
        evaluate_metrics(f, cert, &data.train, &data.test, &domain, &cfg.evaluation).map_err(Failure::from)
    };
    let metrics = match (&a.run, &a.checkpoint, &a.model) {
        (Some(run), _, _) => {
            let dir = cfg.runs_dir().join(run);
            let model = load_model(&dir.join("checkpoint.json"))?;
            let metrics = evaluate(&model.prepare()?, model.certified_lipschitz())?;
            let mut record: RunRecord = read_json(&dir.join("metrics.json"))?;
            record.metrics = metrics;
            write_json(&dir.join("metrics.json"), &record)?;
            metrics
        }
        (None, Some(path), _) => {
            let model = load_model(path)?;
            evaluate(&model.prepare()?, model.certified_lipschitz())?
        }
        (None, None, Some(m)) if m == "mcshane" => {
            let ext = LipschitzExtension::new(data.train.clone())?;
            let metrics = evaluate(&ext, Some(ext.vector_lipschitz()))?;
            let record = RunRecord {
                name: "mcshane".into(),
                model: "mcshane".into(),
                family: None,
                formulation: None,
                rho: None,
                weight_decay: None,
                status: None,
                metrics,
            };
            save_run(&cfg, &record, None, None)?;
            metrics
        }
        (None, None, Some(other)) => return Err(Failure::config(format!("--model: unknown model '{other}' (mcshane)"))),
        (None, None, None) => return Err(Failure::config("give one of --run, --checkpoint, --model")),
    };
    println!("{}", serde_json::to_string_pretty(&metrics).map_err(|e| Failure::io(e.to_string()))?);
    Ok(())
}

// ---------------------------------------------------------------- bounds

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialInputs {
    l_g: Option<f64>,
    l_data: Option<f64>,
    l_f: Option<f64>,
    h: Option<f64>,
    dist: Option<f64>,
    eps_bar: Option<f64>,
    eps: Option<f64>,
    rho: Option<f64>,
    n: Option<usize>,
    big_n: Option<usize>,
    delta: Option<f64>,
    k1: Option<f64>,
    k2: Option<f64>,
}

pub fn bounds(a: &BoundsArgs) -> CmdResult {
    if let Some(n) = a.calibrate {
        let cal = calibrate_covering_constants(n, &a.sizes, a.trials, a.delta.unwrap_or(0.1), a.seed)?;
        println!("{}", serde_json::to_string_pretty(&cal).map_err(|e| Failure::io(e.to_string()))?);
        return Ok(());
    }
    let mut p: PartialInputs = match &a.inputs {
        Some(path) => read_json(path)?,
        None => PartialInputs::default(),
    };
    if let Some(cfg_path) = &a.config {
        let cfg = ExperimentConfig::load(cfg_path)?;
        let data = load_data(&cfg)?;
        p.l_data = p.l_data.or(Some(data.manifest.l_data));
        p.h = p.h.or(Some(data.manifest.covering_radius.value));
        p.n = p.n.or(Some(data.train.input_dim()));
        p.big_n = p.big_n.or(Some(data.train.len()));
        p.eps_bar = p.eps_bar.or(Some(data.manifest.noise_bound));
        if let Some(run) = &a.run {
            let model = load_model(&cfg.runs_dir().join(run).join("checkpoint.json"))?;
            match model.certified_lipschitz() {
                Some(c) => p.l_f = p.l_f.or(Some(c)),
                None => return Err(Failure::config(format!("run '{run}' has no certified Lipschitz bound"))),
            }
        }
    }
    macro_rules! over {
        ($($f:ident),*) => { $( if a.$f.is_some() { p.$f = a.$f; } )* };
    }
    over!(l_g, l_data, l_f, h, dist, eps_bar, eps, rho, n, big_n, delta, k1, k2);
    // The sample-complexity bound needs k1 and k2; without them the sizes are informational only.
    let with_rate = p.k1.is_some() || p.k2.is_some();
    let inputs = BoundInputs {
        l_g: p.l_g,
        l_data: p.l_data,
        l_f: p.l_f.ok_or_else(|| Failure::config("missing l_f (give --l-f or --run)"))?,
        h: p.h.ok_or_else(|| Failure::config("missing h (give --h or --config)"))?,
        dist: p.dist,
        eps_bar: p.eps_bar.unwrap_or(0.0),
        eps: p.eps.unwrap_or(0.0),
        rho: p.rho.unwrap_or(0.0),
        n: p.n.filter(|_| with_rate),
        big_n: p.big_n.filter(|_| with_rate),
        delta: p.delta.filter(|_| with_rate),
        k1: p.k1,
        k2: p.k2,
    };
    let report = bound_report(&inputs)?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Failure::io(e.to_string()))?);
    Ok(())
}

// ---------------------------------------------------------------- simulate

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub run: String,
    pub initial_conditions: usize,
    pub dt: f64,
    pub horizon: f64,
    pub sup_error: Option<f64>,
    pub max_mse: Option<f64>,
    pub final_mse: Option<f64>,
    pub first_exceeds_1e_2: Option<f64>,
    pub first_exceeds_5e_2: Option<f64>,
    pub exited_domain: bool,
    /// A simulation-error certificate needs the learned trajectories to stay in the domain.
    pub certificate_applicable: bool,
    pub blow_up_time: Option<f64>,
}

pub fn simulate(a: &SimulateArgs) -> CmdResult {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(k) = a.initial_conditions {
        cfg.simulation.initial_conditions = k;
    }
    if let Some(h) = a.horizon {
        cfg.simulation.horizon = h;
    }
    if let Some(dt) = a.dt {
        cfg.simulation.dt = dt;
    }
    cfg.validate()?;
    let sim = &cfg.simulation;
    let domain = cfg.domain()?;
    let x0 = sample_uniform(&domain, sim.initial_conditions, sim.seed)?;
    let mut curves: Vec<(String, TrajectoryError<f64>)> = vec![];
    for run in &a.runs {
        let outcome = if run == "mcshane" {
            let data = load_data(&cfg)?;
            let ext = LipschitzExtension::new(data.train)?;
            trajectory_error(&ext, &Benchmark, &x0, sim.dt, sim.horizon, Some(&domain))
        } else {
            let model = load_model(&cfg.runs_dir().join(run).join("checkpoint.json"))?;
            trajectory_error(&model.prepare()?, &Benchmark, &x0, sim.dt, sim.horizon, Some(&domain))
        };
        let mut summary = SimulationSummary {
            run: run.clone(),
            initial_conditions: sim.initial_conditions,
            dt: sim.dt,
            horizon: sim.horizon,
            sup_error: None,
            max_mse: None,
            final_mse: None,
            first_exceeds_1e_2: None,
            first_exceeds_5e_2: None,
            exited_domain: false,
            certificate_applicable: false,
            blow_up_time: None,
        };
        match outcome {
            Ok(err) => {
                summary.sup_error = Some(err.sup);
                summary.max_mse = err.mse.iter().copied().reduce(f64::max);
                summary.final_mse = err.mse.last().copied();
                summary.first_exceeds_1e_2 = err.first_exceedance(1e-2);
                summary.first_exceeds_5e_2 = err.first_exceedance(5e-2);
                summary.exited_domain = err.exited_domain;
                summary.certificate_applicable = !err.exited_domain;
                write_text(&cfg.sim_dir().join(format!("{run}.csv")), &err.to_csv())?;
                curves.push((run.clone(), err));
            }
            Err(Error::BlowUp { time, .. }) => {
                summary.blow_up_time = Some(time);
                summary.exited_domain = true;
            }
            Err(e) => return Err(e.into()),
        }
        write_json(&cfg.sim_dir().join(format!("{run}.json")), &summary)?;
        println!(
            "{run}: sup error {} | max MSE {} | exited domain: {}{}",
            fmt_opt(summary.sup_error),
            fmt_opt(summary.max_mse),
            summary.exited_domain,
            summary.blow_up_time.map(|t| format!(" | blew up at t = {t}")).unwrap_or_default()
        );
    }
    let named: Vec<(&str, &TrajectoryError<f64>)> = curves.iter().map(|(n, c)| (n.as_str(), c)).collect();
    write_text(&cfg.sim_dir().join("trajectory_errors.svg"), &mse_curves_svg(&named))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "--".into())
}

// ---------------------------------------------------------------- report

fn read_records(runs: &Path) -> Result<Vec<RunRecord>, Failure> {
    let mut out = vec![];
    if !runs.is_dir() {
        return Ok(out);
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(runs)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    dirs.sort();
    for d in dirs {
        let path = d.join("metrics.json");
        if path.is_file() {
            out.push(read_json(&path)?);
        }
    }
    Ok(out)
}

fn read_curve(path: &Path) -> Result<TrajectoryError<f64>, Failure> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some("t,mse") {
        return Err(Failure::config(format!("{}: expected header 't,mse'", path.display())));
    }
    let mut times = vec![];
    let mut mse = vec![];
    for (k, line) in lines.enumerate() {
        let bad = || Failure::config(format!("{}:{}: malformed line", path.display(), k + 2));
        let (t, v) = line.split_once(',').ok_or_else(bad)?;
        times.push(t.parse::<f64>().map_err(|_| bad())?);
        mse.push(v.parse::<f64>().map_err(|_| bad())?);
    }
    let dt = if times.len() >= 2 { times[1] - times[0] } else { 1.0 };
    Ok(TrajectoryError {
        dt,
        sup: mse.iter().copied().fold(0.0, f64::max).sqrt(),
        mse,
        per_trajectory_sup: vec![],
        exited_domain: false,
    })
}

fn row6(m: &MetricsReport) -> String {
    format!("{:.3e},{:.3e},{:.3e},{:.3e},{:.4}", m.train_mse, m.train_max, m.test_mse, m.test_max, m.emp_lip)
}

/// Build the three tables from run records.
pub fn tables(records: &[RunRecord]) -> (String, String, String, Vec<String>) {
    let mut t1 = format!("{METRICS_HEADER}\n");
    let mut t2 = format!("{TABLE2_HEADER}\n");
    let mut t3 = format!("{TABLE3_HEADER}\n");
    let mut warnings = vec![];
    let lipnets: Vec<&RunRecord> = records.iter().filter(|r| r.model == "lipnet").collect();
    let main_family = if lipnets.iter().any(|r| r.family.as_deref() == Some("sandwich")) {
        Some("sandwich".to_string())
    } else {
        lipnets.first().and_then(|r| r.family.clone())
    };
    let mut mlps: Vec<&RunRecord> = records.iter().filter(|r| r.model == "mlp").collect();
    mlps.sort_by(|a, b| a.weight_decay.unwrap_or(0.0).total_cmp(&b.weight_decay.unwrap_or(0.0)));
    for r in &mlps {
        if r.weight_decay.unwrap_or(0.0) == 0.0 {
            t1.push_str(&r.metrics.csv_row("MLP", None));
            t1.push('\n');
        } else {
            let _ = writeln!(t2, "{},{}", r.weight_decay.unwrap_or(0.0), row6(&r.metrics));
        }
    }
    for r in records.iter().filter(|r| r.model == "mcshane") {
        t1.push_str(&r.metrics.csv_row("McShane", None));
        t1.push('\n');
    }
    let mut ordered = lipnets.clone();
    ordered.sort_by(|a, b| {
        (a.formulation.clone(), a.rho.map(|r| -r), a.family.clone()).partial_cmp(&(b.formulation.clone(), b.rho.map(|r| -r), b.family.clone())).unwrap_or(std::cmp::Ordering::Equal)
    });
    for r in &ordered {
        let form = r.formulation.clone().unwrap_or_default();
        if r.family == main_family {
            t1.push_str(&r.metrics.csv_row(&format!("LipNet-{form}"), r.rho));
            t1.push('\n');
        }
        let setup = match r.rho {
            Some(rho) => format!("{form} rho={rho:.4}"),
            None => form.clone(),
        };
        let cert = r.metrics.cert_lip.map(|c| format!("{c:.4}")).unwrap_or_else(|| "--".into());
        let _ = writeln!(t3, "{setup},{},{},{cert}", r.family.clone().unwrap_or_default(), row6(&r.metrics));
    }
    if !mlps.iter().any(|r| r.weight_decay.unwrap_or(0.0) == 0.0) {
        warnings.push("missing run: MLP without weight decay".to_string());
    }
    for f in ["P1", "P2", "P3"] {
        if !ordered.iter().any(|r| r.formulation.as_deref() == Some(f)) {
            warnings.push(format!("missing run: LipNet-{f}"));
        }
    }
    (t1, t2, t3, warnings)
}

pub fn report(a: &ReportArgs) -> CmdResult {
    let records = read_records(&a.dir.join("runs"))?;
    if records.is_empty() {
        eprintln!("warning: no runs found under {}", a.dir.join("runs").display());
    }
    let (t1, t2, t3, warnings) = tables(&records);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let out = a.dir.join("tables");
    write_text(&out.join("table1.csv"), &t1)?;
    write_text(&out.join("table2.csv"), &t2)?;
    write_text(&out.join("table3.csv"), &t3)?;
    let sim = a.dir.join("sim");
    let mut curves: BTreeMap<String, TrajectoryError<f64>> = BTreeMap::new();
    if sim.is_dir() {
        for e in fs::read_dir(&sim)? {
            let p = e?.path();
            if p.extension().and_then(|s| s.to_str()) == Some("csv") {
                let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("curve").to_string();
                curves.insert(name, read_curve(&p)?);
            }
        }
    }
    let named: Vec<(&str, &TrajectoryError<f64>)> = curves.iter().map(|(n, c)| (n.as_str(), c)).collect();
    write_text(&out.join("trajectory_errors.svg"), &mse_curves_svg(&named))?;
    print!("{t1}");
    println!("wrote tables for {} runs and {} error curves to {}", records.len(), curves.len(), out.display());
    Ok(())
}

// ---------------------------------------------------------------- info

#[derive(Serialize)]
struct ModelInfo {
    kind: &'static str,
    family: Option<String>,
    activation: String,
    input_dim: usize,
    output_dim: usize,
    depth: usize,
    widths: Vec<usize>,
    psi: Option<f64>,
    certified_lipschitz: Option<f64>,
    parameters: usize,
}

pub fn info(a: &InfoArgs) -> CmdResult {
    let model = load_model(&a.checkpoint)?;
    let info = match &model {
        Model::Mlp(n) => ModelInfo {
            kind: "mlp",
            family: None,
            activation: n.activation.to_string(),
            input_dim: n.dim_in(),
            output_dim: n.dim_out(),
            depth: n.depth(),
            widths: n.weights.iter().map(|w| w.rows()).collect(),
            psi: None,
            certified_lipschitz: None,
            parameters: model.param_count(),
        },
        Model::Lip(n) => ModelInfo {
            kind: "lipnet",
            family: Some(n.family().to_string()),
            activation: n.activation().to_string(),
            input_dim: n.dim_in(),
            output_dim: n.dim_out(),
            depth: n.depth(),
            widths: n.layers().iter().map(|l| l.dims().1).collect(),
            psi: Some(n.psi()),
            certified_lipschitz: Some(n.certified_lipschitz()),
            parameters: model.param_count(),
        },
    };
    println!("{}", serde_json::to_string_pretty(&info).map_err(|e| Failure::io(e.to_string()))?);
    Ok(())
}

pub fn init_config() -> CmdResult {
    let text = serde_json::to_string_pretty(&ExperimentConfig::example()).map_err(|e| Failure::io(e.to_string()))?;
    println!("{text}");
    Ok(())
}

#[allow(dead_code)]
fn benchmark_domain_matches_default() -> bool {
    let d = benchmark_domain::<f64>();
    let spec = crate::config::DomainSpec::default();
    d.lower() == spec.lower.as_slice() && d.upper() == spec.upper.as_slice()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(name: &str, model: &str, family: Option<&str>, form: Option<&str>, rho: Option<f64>, wd: Option<f64>) -> RunRecord {
        RunRecord {
            name: name.into(),
            model: model.into(),
            family: family.map(Into::into),
            formulation: form.map(Into::into),
            rho,
            weight_decay: wd,
            status: None,
            metrics: MetricsReport {
                train_mse: 1e-3,
                train_max: 2e-2,
                test_mse: 3e-3,
                test_max: 0.4,
                emp_lip: 4.5,
                cert_lip: if model == "lipnet" { Some(5.0) } else { None },
                emp_pairs: 10,
                emp_refine_steps: 2,
            },
        }
    }

    #[test]
    fn default_domain_is_the_benchmark_domain() {
        assert!(benchmark_domain_matches_default());
    }

    #[test]
    fn empty_tables_have_headers_only() {
        let (t1, t2, t3, w) = tables(&[]);
        assert_eq!(t1, format!("{METRICS_HEADER}\n"));
        assert_eq!(t2, format!("{TABLE2_HEADER}\n"));
        assert_eq!(t3, format!("{TABLE3_HEADER}\n"));
        assert_eq!(w.len(), 4);
    }

    #[test]
    fn golden_table_rows() {
        let recs = [
            record("mlp-wd0", "mlp", None, None, None, Some(0.0)),
            record("mlp-wd1", "mlp", None, None, None, Some(1.0)),
            record("p1", "lipnet", Some("sandwich"), Some("P1"), None, None),
            record("p2", "lipnet", Some("sandwich"), Some("P2"), Some(0.5), None),
            record("p1o", "lipnet", Some("orthogonal"), Some("P1"), None, None),
        ];
        let (t1, t2, t3, w) = tables(&recs);
        assert_eq!(
            t1,
            "model,rho,train_mse,train_max,test_mse,test_max,emp_lip,cert_lip\n\
             MLP,--,1.000e-3,2.000e-2,3.000e-3,4.000e-1,4.5000,--\n\
             LipNet-P1,--,1.000e-3,2.000e-2,3.000e-3,4.000e-1,4.5000,5.0000\n\
             LipNet-P2,0.5,1.000e-3,2.000e-2,3.000e-3,4.000e-1,4.5000,5.0000\n"
        );
        assert_eq!(t2, "weight_decay,train_mse,train_max,test_mse,test_max,emp_lip\n1,1.000e-3,2.000e-2,3.000e-3,4.000e-1,4.5000\n");
        assert_eq!(t3.lines().count(), 4);
        assert!(t3.contains("P1,orthogonal,"));
        assert_eq!(w, vec!["missing run: LipNet-P3".to_string()]);
    }
}
