//! Command line interface for the place-category toolkit.
//!
//! Subcommands cover the full pipeline: location inference from raw
//! logs, model fitting, point prediction, cross-validated evaluation,
//! report comparison, score fusion, and map-grid annotation.
//!
//! Exit codes: 0 on success, 1 for validation and input errors, 2 for
//! runtime (I/O) errors.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use placekde::classify::{ClassifierConfig, ClassifierModel, LabeledPlace, SemanticLabel};
use placekde::cluster::DbscanParams;
use placekde::density::{default_bandwidth_grid, select_bandwidth_cv, BandwidthSpec, Kernel};
use placekde::eval::{
    cross_validate, stratified_kfold, wilcoxon_signed_rank, BandwidthChoice, EvalReport,
    KdeMethodConfig, Method,
};
use placekde::geo::{EarthRadius, GeoPoint};
use placekde::grid::{annotate_grid, emit_geojson, BoundingBox};
use placekde::ingest::{
    infer_all_locations, load_external_scores, load_gps, load_labels, load_places, load_visits,
    load_wifi, write_places, InferenceOptions, InferredLocation,
};
use placekde::{Error, Result};

#[derive(Parser)]
#[command(name = "placekde", version, about = "Semantic place classification from coordinates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infer place locations from visit, WiFi, and GPS logs.
    InferLocations(InferLocationsArgs),
    /// Fit a classifier from labeled places and save it.
    Fit(FitArgs),
    /// Predict the place category at a coordinate.
    Predict(PredictArgs),
    /// Cross-validate a method over labeled places.
    Evaluate(EvaluateArgs),
    /// Compare two evaluation reports with a signed-rank test.
    Compare(CompareArgs),
    /// Cross-validate KDE scores fused with an external classifier.
    Fuse(FuseArgs),
    /// Annotate a map grid with predictions and export GeoJSON.
    Annotate(AnnotateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn is_on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Args)]
struct InferLocationsArgs {
    /// Visit windows (`place_id,visit_id,start_ts,end_ts`).
    #[arg(long)]
    visits: PathBuf,
    /// WiFi access point sightings (`ap_id,lat,lon,ts`).
    #[arg(long)]
    wifi: PathBuf,
    /// GPS samples (`lat,lon,ts`).
    #[arg(long)]
    gps: PathBuf,
    /// Place labels (`place_id,label`).
    #[arg(long)]
    labels: PathBuf,
    /// Output places table (`place_id,label,lat,lon`); unresolved places
    /// are left out.
    #[arg(long)]
    out: PathBuf,
    /// Average on the unit sphere instead of over raw degrees.
    #[arg(long)]
    spherical_centroid: bool,
    /// Count each access point once per visit window.
    #[arg(long)]
    dedup_aps: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BandwidthMode {
    /// One shared bandwidth, from --h-km.
    Fixed,
    /// Per-probe k-nearest-neighbor bandwidth.
    Balloon,
    /// One shared bandwidth picked by leave-one-out cross-validation.
    Cv,
}

#[derive(Args)]
struct ModelFlags {
    /// Kernel profile: gaussian, uniform, triangular, epanechnikov,
    /// biweight, triweight, or exponential.
    #[arg(long, default_value = "gaussian")]
    kernel: String,
    #[arg(long, value_enum, default_value_t = BandwidthMode::Balloon)]
    bandwidth: BandwidthMode,
    /// Fixed bandwidth in km (with --bandwidth fixed).
    #[arg(long)]
    h_km: Option<f64>,
    /// Neighbor count for the balloon bandwidth.
    #[arg(long, default_value_t = 15)]
    k: usize,
    /// Smallest balloon bandwidth in km.
    #[arg(long, default_value_t = 0.001)]
    floor_km: f64,
    /// Restrict scoring to the probe's density region.
    #[arg(long, value_enum, default_value_t = Switch::Off)]
    gate: Switch,
    /// Region clustering radius in km.
    #[arg(long, default_value_t = 0.5)]
    eps_km: f64,
    /// Region clustering density threshold.
    #[arg(long, default_value_t = 4)]
    min_pts: usize,
    /// Weight scores by training label frequencies.
    #[arg(long, value_enum, default_value_t = Switch::Off)]
    use_priors: Switch,
    /// Share the balloon bandwidth across labels at each probe.
    #[arg(long, value_enum, default_value_t = Switch::Off)]
    pooled_balloon: Switch,
    /// Sphere radius in km.
    #[arg(long, default_value_t = placekde::geo::EARTH_RADIUS_KM)]
    radius_km: f64,
}

impl ModelFlags {
    fn radius(&self) -> Result<EarthRadius> {
        EarthRadius::new(self.radius_km)
    }

    fn gating(&self) -> Result<Option<DbscanParams>> {
        if self.gate.is_on() {
            Ok(Some(DbscanParams::new(self.eps_km, self.min_pts)?))
        } else {
            Ok(None)
        }
    }

    /// Resolve to a concrete classifier configuration; CV bandwidth
    /// selection runs on the given training places.
    fn to_config(&self, training: &[LabeledPlace]) -> Result<ClassifierConfig> {
        let kernel: Kernel = self.kernel.parse()?;
        let radius = self.radius()?;
        let bandwidth = match self.bandwidth {
            BandwidthMode::Fixed => {
                let h = self.h_km.ok_or_else(|| {
                    Error::Parameter("--bandwidth fixed requires --h-km".into())
                })?;
                BandwidthSpec::fixed(h)?
            }
            BandwidthMode::Balloon => BandwidthSpec::balloon(self.k, self.floor_km)?,
            BandwidthMode::Cv => {
                let pool: Vec<GeoPoint> = training.iter().map(|p| p.location).collect();
                let h = select_bandwidth_cv(&pool, &default_bandwidth_grid(), kernel, radius)?;
                BandwidthSpec::fixed(h)?
            }
        };
        Ok(ClassifierConfig {
            kernel,
            bandwidth,
            gating: self.gating()?,
            use_priors: self.use_priors.is_on(),
            pooled_balloon: self.pooled_balloon.is_on(),
            radius,
        })
    }
}

#[derive(Args)]
struct FitArgs {
    /// Labeled places (`place_id,label,lat,lon`).
    #[arg(long)]
    places: PathBuf,
    #[command(flatten)]
    model_flags: ModelFlags,
    /// Output model file (JSON).
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Model file written by `fit`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    lat: f64,
    #[arg(long)]
    lon: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodName {
    Random,
    Dominant,
    KdeF,
    KdeA,
    KdeADbscan,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Labeled places (`place_id,label,lat,lon`).
    #[arg(long)]
    places: PathBuf,
    #[arg(long, value_enum)]
    method: MethodName,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output report file.
    #[arg(long)]
    report: PathBuf,
    #[command(flatten)]
    model_flags: ModelFlags,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    report_a: PathBuf,
    #[arg(long)]
    report_b: PathBuf,
}

#[derive(Args)]
struct FuseArgs {
    /// Labeled places (`place_id,label,lat,lon`).
    #[arg(long)]
    places: PathBuf,
    /// External per-place scores (`place_id` plus one column per label).
    #[arg(long)]
    external: PathBuf,
    /// Geometric weight of the KDE side, in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output report file.
    #[arg(long)]
    report: PathBuf,
    #[command(flatten)]
    model_flags: ModelFlags,
}

#[derive(Args)]
struct AnnotateArgs {
    /// Model file written by `fit`.
    #[arg(long)]
    model: PathBuf,
    /// Bounding box as minLat,minLon,maxLat,maxLon.
    #[arg(long)]
    bbox: String,
    /// Cell edge length in meters.
    #[arg(long, default_value_t = 100.0)]
    cell_m: f64,
    /// Output GeoJSON file.
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; usage mistakes are
            // input errors.
            let code = i32::from(e.use_stderr());
            let _ = e.print();
            return code;
        }
    };
    let mut out = io::stdout().lock();
    match execute(cli.command, &mut out) {
        Ok(()) => 0,
        // A closed downstream pipe is not an error; stop writing quietly.
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::InferLocations(args) => infer_locations(args, out),
        Command::Fit(args) => fit(args, out),
        Command::Predict(args) => predict(args, out),
        Command::Evaluate(args) => evaluate(args, out),
        Command::Compare(args) => compare(args, out),
        Command::Fuse(args) => fuse(args, out),
        Command::Annotate(args) => annotate(args, out),
    }
}

fn save_model(path: &PathBuf, model: &ClassifierModel) -> Result<()> {
    let file = File::create(path)?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer(&mut writer, model)
        .map_err(|e| Error::Model(format!("cannot serialize model: {e}")))?;
    writer.flush()?;
    Ok(())
}

fn load_model(path: &PathBuf) -> Result<ClassifierModel> {
    let file = File::open(path)?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::Model(format!("cannot read model {}: {e}", path.display())))
}

fn infer_locations(args: InferLocationsArgs, out: &mut dyn Write) -> Result<()> {
    let visits = load_visits(&args.visits)?;
    let wifi = load_wifi(&args.wifi)?;
    let gps = load_gps(&args.gps)?;
    let labels = load_labels(&args.labels)?;
    let options = InferenceOptions {
        spherical_centroid: args.spherical_centroid,
        dedup_aps: args.dedup_aps,
    };

    let results = infer_all_locations(&visits, &wifi, &gps, options)?;
    let mut places = Vec::new();
    for result in &results {
        writeln!(
            out,
            "{} {} {}",
            result.place_id,
            result.inferred.source_name(),
            result.inferred.sample_count()
        )?;
        let location = match result.inferred {
            InferredLocation::Unresolved => continue,
            ref resolved => resolved.location().expect("resolved variants carry a location"),
        };
        let label = labels.get(&result.place_id).copied().ok_or_else(|| {
            Error::Mismatch(format!("no label for resolved place `{}`", result.place_id))
        })?;
        places.push(LabeledPlace { place_id: result.place_id.clone(), location, label });
    }
    write_places(&args.out, &places)?;
    writeln!(
        out,
        "resolved {} of {} places -> {}",
        places.len(),
        results.len(),
        args.out.display()
    )?;
    Ok(())
}

fn fit(args: FitArgs, out: &mut dyn Write) -> Result<()> {
    let places = load_places(&args.places)?;
    let config = args.model_flags.to_config(&places)?;
    let model = ClassifierModel::fit(&places, config)?;
    save_model(&args.model, &model)?;
    writeln!(
        out,
        "fitted {} places, {} labels{} -> {}",
        places.len(),
        model.trained_labels().len(),
        match model.region_count() {
            Some(n) => format!(", {n} regions"),
            None => String::new(),
        },
        args.model.display()
    )?;
    Ok(())
}

fn predict(args: PredictArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    let probe = GeoPoint::new(args.lat, args.lon)?;
    let scores = model.class_scores(probe);
    let label = model.predict_from(&scores);
    writeln!(out, "label {label}")?;
    writeln!(out, "provenance {}", scores.provenance())?;
    for l in SemanticLabel::ALL {
        writeln!(out, "score_{l} {}", scores.get(l))?;
    }
    Ok(())
}

fn kde_method(flags: &ModelFlags, mode: BandwidthMode, gated: bool) -> Result<Method> {
    let kernel: Kernel = flags.kernel.parse()?;
    let bandwidth = match mode {
        BandwidthMode::Fixed => {
            let h = flags
                .h_km
                .ok_or_else(|| Error::Parameter("--bandwidth fixed requires --h-km".into()))?;
            BandwidthChoice::Spec(BandwidthSpec::fixed(h)?)
        }
        BandwidthMode::Balloon => {
            BandwidthChoice::Spec(BandwidthSpec::balloon(flags.k, flags.floor_km)?)
        }
        BandwidthMode::Cv => BandwidthChoice::FixedCv { candidates: default_bandwidth_grid() },
    };
    let gating = if gated {
        Some(DbscanParams::new(flags.eps_km, flags.min_pts)?)
    } else {
        None
    };
    Ok(Method::Kde(KdeMethodConfig {
        kernel,
        bandwidth,
        gating,
        use_priors: flags.use_priors.is_on(),
        pooled_balloon: flags.pooled_balloon.is_on(),
        radius: flags.radius()?,
    }))
}

fn report_summary(report: &EvalReport, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "method {}", report.method_id())?;
    writeln!(out, "folds {} (with test places: {})", report.folds(), report.fold_accuracies().len())?;
    writeln!(out, "places {}", report.place_count())?;
    writeln!(out, "mean_fold_accuracy {}", report.mean_fold_accuracy())?;
    writeln!(out, "overall_accuracy {}", report.overall_accuracy())?;
    Ok(())
}

fn evaluate(args: EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let places = load_places(&args.places)?;
    let method = match args.method {
        MethodName::Random => Method::Random,
        MethodName::Dominant => Method::Dominant,
        MethodName::KdeF => kde_method(&args.model_flags, BandwidthMode::Cv, false)?,
        MethodName::KdeA => kde_method(&args.model_flags, BandwidthMode::Balloon, false)?,
        MethodName::KdeADbscan => kde_method(&args.model_flags, BandwidthMode::Balloon, true)?,
    };
    let plan = stratified_kfold(&places, args.folds, args.seed)?;
    let report = cross_validate(&places, &method, &plan)?;
    report.save(&args.report)?;
    report_summary(&report, out)
}

fn compare(args: CompareArgs, out: &mut dyn Write) -> Result<()> {
    let a = EvalReport::load(&args.report_a)?;
    let b = EvalReport::load(&args.report_b)?;
    if a.fold_accuracies().len() != b.fold_accuracies().len() {
        return Err(Error::Mismatch(format!(
            "reports pair {} vs {} fold accuracies",
            a.fold_accuracies().len(),
            b.fold_accuracies().len()
        )));
    }
    let test = wilcoxon_signed_rank(a.fold_accuracies(), b.fold_accuracies())?;
    writeln!(out, "method_a {} (overall {})", a.method_id(), a.overall_accuracy())?;
    writeln!(out, "method_b {} (overall {})", b.method_id(), b.overall_accuracy())?;
    writeln!(out, "n_effective {}", test.n_effective)?;
    writeln!(out, "w_statistic {}", test.w_statistic)?;
    writeln!(out, "p_two_sided {}", test.p_two_sided)?;
    writeln!(out, "significant_at_0.05 {}", test.significant_at_0_05)?;
    Ok(())
}

fn fuse(args: FuseArgs, out: &mut dyn Write) -> Result<()> {
    let places = load_places(&args.places)?;
    let external = load_external_scores(&args.external)?;
    let gated = args.model_flags.gate.is_on();
    let kde = match kde_method(&args.model_flags, args.model_flags.bandwidth, gated)? {
        Method::Kde(config) => config,
        _ => unreachable!(),
    };
    let method = Method::Fused { kde, lambda: args.lambda, external };
    let plan = stratified_kfold(&places, args.folds, args.seed)?;
    let report = cross_validate(&places, &method, &plan)?;
    report.save(&args.report)?;
    report_summary(&report, out)
}

fn annotate(args: AnnotateArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    let bbox: BoundingBox = args.bbox.parse()?;
    let grid = annotate_grid(&model, bbox, args.cell_m)?;
    let file = File::create(&args.out)?;
    let mut writer = BufWriter::new(file);
    emit_geojson(&grid, &mut writer)?;
    writer.flush()?;
    writeln!(
        out,
        "annotated {} cells ({} rows x {} cols) -> {}",
        grid.cells().len(),
        grid.rows(),
        grid.cols(),
        args.out.display()
    )?;
    Ok(())
}
