//! Command-line front end: datum validation and analysis, graded dimensions
//! and the Gram form of one half, weight modules with tensor decomposition
//! and the Casimir spectrum, G-function evaluation, and the classical
//! integer oracles.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hopfkit_core::datum::{
    check_dj2, check_nli, read_datum_json, regularity_and_reductivity, to_reduced,
    validate_linking, write_general_json, write_reduced_json, DatumError, DatumInput,
    ReducedDatum,
};
use hopfkit_core::engine::{Engine, EngineError, Side};
use hopfkit_core::lattice::{Character, DegreeVector, LatticeError};
use hopfkit_core::oracles::{
    clebsch_gordan_a1, kostant_partition, weight_multiplicities, weyl_dimension, OracleError,
    RootSystem,
};
use hopfkit_core::presets;
use hopfkit_core::repr::{
    casimir_spectrum, character_with_exponents, decompose, g_function, is_dominant,
    is_integrable, simple_module, tensor, weight_difference, ReprError, WeightModule,
};
use hopfkit_core::scalars::{ScalarError, UnitScalar};

/// Exact computations with pointed Hopf algebra data.
#[derive(Parser)]
#[command(name = "hopfkit", version, about, propagate_version = true)]
struct Cli {
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Print tab-separated tables.
    #[arg(long, global = true, conflicts_with = "json")]
    tsv: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate or analyze a datum file or preset.
    #[command(subcommand)]
    Datum(DatumCommand),
    /// Graded dimensions, the Gram form, and the identity battery.
    #[command(subcommand)]
    Algebra(AlgebraCommand),
    /// Weight modules: simple quotients, tensor products, the Casimir.
    #[command(subcommand)]
    Module(ModuleCommand),
    /// Evaluate the G-function on a coset of weights.
    Gcheck(GcheckArgs),
    /// Classical integer oracles used to cross-check the algebra.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand)]
enum DatumCommand {
    /// Parse a datum and run the structural checks.
    Validate(DatumSource),
    /// Braiding classes, Cartan data, regularity, and reductivity.
    Analyze(DatumSource),
    /// Print a datum in the JSON file format.
    Export(DatumSource),
}

#[derive(Subcommand)]
enum AlgebraCommand {
    /// Dimensions of the graded pieces of one half.
    Dims(DimsArgs),
    /// Gram matrix of the pairing in one degree, with its determinant.
    Gram(GramArgs),
    /// Run the full battery of defining identities.
    CheckIdentities(CheckArgs),
}

#[derive(Subcommand)]
enum ModuleCommand {
    /// Build a simple highest-weight module.
    Simple(SimpleArgs),
    /// Tensor two simple modules, optionally decomposing the product.
    Tensor(TensorArgs),
    /// Casimir spectrum of a simple module or a tensor product.
    Casimir(CasimirArgs),
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Count the ways a degree is a sum of positive roots.
    Kostant(KostantArgs),
    /// Dimension of the classical simple module with the given labels.
    Weyl(LabelledArgs),
    /// Weight multiplicities of the classical simple module.
    Multiplicities(LabelledArgs),
    /// Decompose a product of two rank-one simples classically.
    Clebsch(ClebschArgs),
}

/// Where the datum comes from: a JSON file or a named preset.
#[derive(Args)]
struct DatumSource {
    /// Path to a datum JSON file.
    #[arg(value_name = "DATUM", required_unless_present = "preset", conflicts_with = "preset")]
    file: Option<PathBuf>,
    /// Built-in datum name.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct DimsArgs {
    #[command(flatten)]
    source: DatumSource,
    /// Largest total degree to tabulate.
    #[arg(long, default_value_t = 6)]
    max_degree: usize,
    /// Which half of the algebra to grade.
    #[arg(long, value_enum, default_value_t = SideArg::Minus)]
    side: SideArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Minus,
    Plus,
}

#[derive(Args)]
struct GramArgs {
    #[command(flatten)]
    source: DatumSource,
    /// Degree of the graded piece, as comma-separated coordinates.
    #[arg(long)]
    degree: String,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    source: DatumSource,
    /// Seed for the randomized identity samples.
    #[arg(long, default_value_t = 5)]
    seed: u64,
}

#[derive(Args)]
struct SimpleArgs {
    #[command(flatten)]
    source: DatumSource,
    /// Exponents m with chi(K_i L_i) = q_ii^{m_i}, comma-separated.
    #[arg(long)]
    m: Option<String>,
    /// Explicit character values on the group generators.
    #[arg(long)]
    chi: Option<String>,
    /// Print the weight table.
    #[arg(long)]
    table: bool,
    /// Raise the degree cap of the underlying algebra handle.
    #[arg(long)]
    max_degree: Option<usize>,
}

#[derive(Args)]
struct TensorArgs {
    #[command(flatten)]
    source: DatumSource,
    /// Exponents of the first factor.
    #[arg(long)]
    m1: Option<String>,
    /// Exponents of the second factor.
    #[arg(long)]
    m2: Option<String>,
    /// Explicit character values for the first factor.
    #[arg(long)]
    chi1: Option<String>,
    /// Explicit character values for the second factor.
    #[arg(long)]
    chi2: Option<String>,
    /// Split the product into simple summands.
    #[arg(long)]
    decompose: bool,
    /// Raise the degree cap of the underlying algebra handle.
    #[arg(long)]
    max_degree: Option<usize>,
}

#[derive(Args)]
struct CasimirArgs {
    #[command(flatten)]
    source: DatumSource,
    /// Exponents of the highest weight (first factor when --m2 is given).
    #[arg(long)]
    m: Option<String>,
    /// Explicit character values for the highest weight.
    #[arg(long)]
    chi: Option<String>,
    /// Exponents of a second factor; the module becomes a tensor product.
    #[arg(long)]
    m2: Option<String>,
    /// Evaluate G even when the braiding fails the separation condition.
    #[arg(long = "allow-degenerate-g")]
    allow_degenerate_g: bool,
    /// Raise the degree cap of the underlying algebra handle.
    #[arg(long)]
    max_degree: Option<usize>,
}

#[derive(Args)]
struct GcheckArgs {
    #[command(flatten)]
    source: DatumSource,
    /// Compare G on the anchor with exponents (2,...,2) against its shift
    /// by the product of all datum characters.
    #[arg(long)]
    counterexample: bool,
    /// Evaluate G even when the braiding fails the separation condition.
    #[arg(long = "allow-degenerate-g")]
    allow_degenerate_g: bool,
    /// Exponents of the anchor character.
    #[arg(long)]
    anchor_m: Option<String>,
    /// Explicit anchor character values on the group generators.
    #[arg(long)]
    anchor_chi: Option<String>,
    /// Exponents of the character to evaluate.
    #[arg(long)]
    m: Option<String>,
    /// Explicit character values to evaluate.
    #[arg(long)]
    chi: Option<String>,
}

#[derive(Args)]
struct KostantArgs {
    /// Cartan matrix: rows separated by ';', entries by ','.
    #[arg(long)]
    cartan: String,
    /// Degree vector, comma-separated.
    #[arg(long)]
    degree: String,
}

#[derive(Args)]
struct LabelledArgs {
    /// Cartan matrix: rows separated by ';', entries by ','.
    #[arg(long)]
    cartan: String,
    /// Symmetrizer diagonal, comma-separated.
    #[arg(long)]
    symmetrizer: String,
    /// Highest-weight labels, comma-separated.
    #[arg(long)]
    labels: String,
}

#[derive(Args)]
struct ClebschArgs {
    /// First label.
    #[arg(long)]
    m: i64,
    /// Second label.
    #[arg(long)]
    n: i64,
}

#[derive(Clone, Copy, PartialEq)]
enum Format {
    Human,
    Json,
    Tsv,
}

/// Command failure with the exit code it maps to: validation problems exit
/// with 1, failed internal audits with 2.
enum Failure {
    Invalid(String),
    Audit(String),
}

type CliResult<T> = Result<T, Failure>;

impl From<DatumError> for Failure {
    fn from(e: DatumError) -> Failure {
        Failure::Invalid(e.to_string())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Failure {
        Failure::Invalid(e.to_string())
    }
}

impl From<ScalarError> for Failure {
    fn from(e: ScalarError) -> Failure {
        Failure::Invalid(e.to_string())
    }
}

impl From<LatticeError> for Failure {
    fn from(e: LatticeError) -> Failure {
        Failure::Invalid(e.to_string())
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Failure {
        Failure::Invalid(e.to_string())
    }
}

impl From<ReprError> for Failure {
    fn from(e: ReprError) -> Failure {
        match e {
            ReprError::AuditFailure { .. } | ReprError::RelationViolated(_) => {
                Failure::Audit(e.to_string())
            }
            ReprError::NliFails => Failure::Invalid(
                "the diagonal braiding exponents are not N-linearly independent, so G-values \
                 need not separate comparable weights; pass --allow-degenerate-g to evaluate \
                 anyway"
                    .into(),
            ),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let failed = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if failed { 1 } else { 0 });
        }
    };
    let format = if cli.json {
        Format::Json
    } else if cli.tsv {
        Format::Tsv
    } else {
        Format::Human
    };
    std::panic::set_hook(Box::new(|_| {}));
    let run = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        dispatch(&cli.command, format)
    }));
    match run {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::Invalid(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Ok(Err(Failure::Audit(msg))) => {
            eprintln!("audit failure: {msg}");
            ExitCode::from(2)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| panic.downcast_ref::<&str>().copied())
                .unwrap_or("internal assertion failed");
            if msg.contains("Broken pipe") {
                return ExitCode::from(141);
            }
            eprintln!("audit failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: &Command, format: Format) -> CliResult<()> {
    match command {
        Command::Datum(DatumCommand::Validate(source)) => datum_validate(source, format),
        Command::Datum(DatumCommand::Analyze(source)) => datum_analyze(source, format),
        Command::Datum(DatumCommand::Export(source)) => datum_export(source),
        Command::Algebra(AlgebraCommand::Dims(args)) => algebra_dims(args, format),
        Command::Algebra(AlgebraCommand::Gram(args)) => algebra_gram(args, format),
        Command::Algebra(AlgebraCommand::CheckIdentities(args)) => {
            algebra_check_identities(args, format)
        }
        Command::Module(ModuleCommand::Simple(args)) => module_simple(args, format),
        Command::Module(ModuleCommand::Tensor(args)) => module_tensor(args, format),
        Command::Module(ModuleCommand::Casimir(args)) => module_casimir(args, format),
        Command::Gcheck(args) => gcheck(args, format),
        Command::Oracle(OracleCommand::Kostant(args)) => oracle_kostant(args, format),
        Command::Oracle(OracleCommand::Weyl(args)) => oracle_weyl(args, format),
        Command::Oracle(OracleCommand::Multiplicities(args)) => {
            oracle_multiplicities(args, format)
        }
        Command::Oracle(OracleCommand::Clebsch(args)) => oracle_clebsch(args, format),
    }
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

impl DatumSource {
    fn load(&self) -> CliResult<DatumInput> {
        if let Some(name) = &self.preset {
            let datum = presets::by_name(name).ok_or_else(|| {
                Failure::Invalid(format!(
                    "unknown preset {:?}; available presets: {}",
                    name,
                    presets::PRESET_NAMES.join(", ")
                ))
            })?;
            return Ok(DatumInput::Reduced(datum));
        }
        let path = self.file.as_ref().expect("clap requires a file or a preset");
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Ok(read_datum_json(&text)?)
    }

    fn reduced(&self) -> CliResult<ReducedDatum> {
        match self.load()? {
            DatumInput::Reduced(r) => Ok(r),
            DatumInput::General(datum, lambda) => Ok(to_reduced(&datum, &lambda)?),
        }
    }

    /// Builds the algebra handle, raising its degree cap to `min_cap` when
    /// the default (or the `HOPFKIT_MAX_DEGREE` override) is lower.
    fn engine(&self, min_cap: Option<usize>) -> CliResult<Arc<Engine>> {
        let mut engine = Engine::new(self.reduced()?)?;
        if let Some(cap) = min_cap {
            if cap > engine.max_degree() {
                engine = engine.with_max_degree(cap);
            }
        }
        if engine.presentation_assumed() {
            eprintln!(
                "note: no Cartan twist found for this braiding; the Serre presentation is assumed"
            );
        }
        Ok(Arc::new(engine))
    }
}

fn parse_i64_list(text: &str, what: &str) -> CliResult<Vec<i64>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<i64>()
                .map_err(|_| Failure::Invalid(format!("{what}: {:?} is not an integer", p.trim())))
        })
        .collect()
}

fn parse_cartan(text: &str) -> CliResult<Vec<Vec<i64>>> {
    let rows: Vec<Vec<i64>> = text
        .split(';')
        .map(|row| parse_i64_list(row, "cartan entry"))
        .collect::<CliResult<_>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Failure::Invalid(format!(
            "cartan matrix must be square, got {n} rows: {text:?}"
        )));
    }
    Ok(rows)
}

fn parse_degree(engine: &Engine, text: &str) -> CliResult<DegreeVector> {
    let coords = parse_i64_list(text, "degree")?;
    if coords.len() != engine.theta() {
        return Err(Failure::Invalid(format!(
            "degree needs {} coordinates, got {}",
            engine.theta(),
            coords.len()
        )));
    }
    if coords.iter().any(|&c| c < 0) {
        return Err(Failure::Invalid("degree coordinates must be nonnegative".into()));
    }
    Ok(DegreeVector::new(coords))
}

/// Resolves a highest weight from either an exponent vector or explicit
/// character values on the group generators.
fn resolve_character(
    engine: &Engine,
    m: &Option<String>,
    chi: &Option<String>,
    m_flag: &str,
    chi_flag: &str,
) -> CliResult<Character> {
    if let Some(text) = chi {
        let space = engine.datum().space();
        let rank = engine.datum().group().rank();
        let values: Vec<UnitScalar> = text
            .split(',')
            .map(|p| UnitScalar::parse(space, p.trim()))
            .collect::<Result<_, _>>()?;
        if values.len() != rank {
            return Err(Failure::Invalid(format!(
                "{chi_flag} needs {rank} values (one per group generator), got {}",
                values.len()
            )));
        }
        return Ok(Character::new(values));
    }
    let Some(text) = m else {
        return Err(Failure::Invalid(format!("pass {m_flag} or {chi_flag}")));
    };
    let exponents = parse_i64_list(text, m_flag)?;
    if exponents.len() != engine.theta() {
        return Err(Failure::Invalid(format!(
            "{m_flag} needs {} entries, got {}",
            engine.theta(),
            exponents.len()
        )));
    }
    if exponents.iter().any(|&e| e < 0) {
        return Err(Failure::Invalid(format!("{m_flag} entries must be nonnegative")));
    }
    character_with_exponents(engine, &exponents).ok_or_else(|| {
        Failure::Invalid(format!(
            "no positive character on this datum has exponents {text}; \
             pass explicit values with {chi_flag}"
        ))
    })
}

/// L(m) when the exponents are defined, otherwise the raw character values.
fn summand_name(engine: &Engine, chi: &Character) -> String {
    match is_dominant(engine, chi) {
        Ok(Some(exponents)) => format!(
            "L({})",
            exponents
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
        _ => format!("L{chi}"),
    }
}

fn exponents_json(engine: &Engine, chi: &Character) -> Value {
    match is_dominant(engine, chi) {
        Ok(Some(exponents)) => json!(exponents),
        _ => Value::Null,
    }
}

fn character_json(chi: &Character) -> Value {
    json!(chi.values().iter().map(|v| v.to_string()).collect::<Vec<_>>())
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable value"));
}

// ---------------------------------------------------------------------------
// datum
// ---------------------------------------------------------------------------

fn datum_export(source: &DatumSource) -> CliResult<()> {
    match source.load()? {
        DatumInput::Reduced(r) => println!("{}", write_reduced_json(&r)),
        DatumInput::General(d, l) => println!("{}", write_general_json(&d, &l)),
    }
    Ok(())
}

fn datum_validate(source: &DatumSource, format: Format) -> CliResult<()> {
    let input = source.load()?;
    let (kind, theta, rank, linking) = match &input {
        DatumInput::Reduced(r) => ("reduced", r.theta(), r.group().rank(), None),
        DatumInput::General(d, lambda) => {
            let report = validate_linking(d, lambda)?;
            ("general", d.theta(), d.group().rank(), Some(report))
        }
    };
    let parameters = input.space().names().to_vec();
    match format {
        Format::Json => {
            let mut value = json!({
                "valid": true,
                "kind": kind,
                "vertices": theta,
                "group_rank": rank,
                "parameters": parameters,
            });
            if let Some(report) = &linking {
                value["perfect_linking"] = json!(report.perfect);
                value["linked_pairs"] = json!(report
                    .linked_pairs
                    .iter()
                    .map(|&(i, j)| vec![i + 1, j + 1])
                    .collect::<Vec<_>>());
                value["unlinked"] =
                    json!(report.unlinked.iter().map(|&i| i + 1).collect::<Vec<_>>());
            }
            print_json(&value);
        }
        _ => {
            println!("valid {kind} datum: {theta} vertices, group rank {rank}");
            println!("parameters: {}", parameters.join(", "));
            if let Some(report) = &linking {
                println!("perfect linking: {}", report.perfect);
                if !report.unlinked.is_empty() {
                    let list: Vec<String> =
                        report.unlinked.iter().map(|&i| (i + 1).to_string()).collect();
                    println!("unlinked vertices: {}", list.join(", "));
                }
            }
        }
    }
    Ok(())
}

fn datum_analyze(source: &DatumSource, format: Format) -> CliResult<()> {
    let input = source.load()?;
    let mut lines: Vec<(String, String)> = Vec::new();
    let mut value = json!({});

    let reduced = match input {
        DatumInput::Reduced(r) => {
            lines.push(("kind".into(), "reduced".into()));
            value["kind"] = json!("reduced");
            r
        }
        DatumInput::General(datum, lambda) => {
            let report = validate_linking(&datum, &lambda)?;
            lines.push(("kind".into(), "general".into()));
            value["kind"] = json!("general");
            let classes: Vec<String> = datum
                .classes()
                .iter()
                .map(|c| {
                    let names: Vec<String> = c.iter().map(|&i| (i + 1).to_string()).collect();
                    format!("{{{}}}", names.join(", "))
                })
                .collect();
            lines.push(("braiding classes".into(), classes.join(" ")));
            value["braiding_classes"] = json!(datum
                .classes()
                .iter()
                .map(|c| c.iter().map(|&i| i + 1).collect::<Vec<_>>())
                .collect::<Vec<_>>());
            let pairs: Vec<String> = report
                .linked_pairs
                .iter()
                .map(|&(i, j)| format!("({}, {})", i + 1, j + 1))
                .collect();
            lines.push(("linked pairs".into(), pairs.join(" ")));
            lines.push(("perfect linking".into(), report.perfect.to_string()));
            value["perfect_linking"] = json!(report.perfect);
            if !report.perfect {
                let list: Vec<String> =
                    report.unlinked.iter().map(|&i| (i + 1).to_string()).collect();
                lines.push(("unlinked vertices".into(), list.join(", ")));
                lines.push((
                    "verdict".into(),
                    "linking is not perfect, so the datum does not reduce".into(),
                ));
                value["unlinked"] =
                    json!(report.unlinked.iter().map(|&i| i + 1).collect::<Vec<_>>());
                value["reduces"] = json!(false);
                emit_analysis(&lines, &value, format);
                return Ok(());
            }
            let reduced = to_reduced(&datum, &lambda)?;
            lines.push(("reduces to".into(), format!("{} vertices", reduced.theta())));
            value["reduces"] = json!(true);
            reduced
        }
    };

    let theta = reduced.theta();
    let cartan = reduced.detect_cartan()?;
    let regularity = regularity_and_reductivity(&reduced)?;
    let twist = check_dj2(&reduced, &cartan);
    let nli = check_nli(&reduced);

    lines.push(("vertices".into(), theta.to_string()));
    lines.push(("group rank".into(), reduced.group().rank().to_string()));
    lines.push(("parameters".into(), reduced.space().names().join(", ")));
    let rows: Vec<String> = cartan
        .a
        .iter()
        .map(|row| {
            row.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
        })
        .collect();
    lines.push(("cartan matrix".into(), rows.join("; ")));
    let d: Vec<String> = cartan.d.iter().map(|e| e.to_string()).collect();
    lines.push(("symmetrizer".into(), d.join(", ")));
    lines.push(("finite type".into(), cartan.finite_type.to_string()));
    let components: Vec<String> = cartan
        .components
        .iter()
        .map(|c| {
            let names: Vec<String> = c.iter().map(|&i| (i + 1).to_string()).collect();
            format!("{{{}}}", names.join(", "))
        })
        .collect();
    lines.push(("components".into(), components.join(" ")));
    lines.push(("regular".into(), regularity.regular.to_string()));
    lines.push(("Gamma^2 index".into(), regularity.gamma2_index.to_string()));
    lines.push((
        "presentation".into(),
        if twist.is_some() {
            "Cartan twist found; Serre relations proven for this braiding".into()
        } else {
            "no Cartan twist; Serre relations assumed".into()
        },
    ));
    lines.push(("Nli".into(), nli.to_string()));
    lines.push((
        "Gamma-reductive".into(),
        format!("{} (perfectly linked)", regularity.gamma_reductive),
    ));
    lines.push((
        "reductive".into(),
        format!(
            "{} (Gamma^2 index {})",
            regularity.reductive, regularity.gamma2_index
        ),
    ));

    value["vertices"] = json!(theta);
    value["group_rank"] = json!(reduced.group().rank());
    value["parameters"] = json!(reduced.space().names());
    value["cartan"] = json!(cartan.a);
    value["symmetrizer"] = json!(cartan.d);
    value["finite_type"] = json!(cartan.finite_type);
    value["components"] = json!(cartan
        .components
        .iter()
        .map(|c| c.iter().map(|&i| i + 1).collect::<Vec<_>>())
        .collect::<Vec<_>>());
    value["regular"] = json!(regularity.regular);
    value["gamma2_index"] = json!(regularity.gamma2_index.to_string());
    value["cartan_twist"] = json!(twist.is_some());
    value["nli"] = json!(nli);
    value["gamma_reductive"] = json!(regularity.gamma_reductive);
    value["reductive"] = json!(regularity.reductive);

    emit_analysis(&lines, &value, format);
    Ok(())
}

fn emit_analysis(lines: &[(String, String)], value: &Value, format: Format) {
    match format {
        Format::Json => print_json(value),
        Format::Tsv => {
            for (key, val) in lines {
                println!("{key}\t{val}");
            }
        }
        Format::Human => {
            for (key, val) in lines {
                println!("{key}: {val}");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// algebra
// ---------------------------------------------------------------------------

fn algebra_dims(args: &DimsArgs, format: Format) -> CliResult<()> {
    let engine = args.source.engine(Some(args.max_degree))?;
    let side = match args.side {
        SideArg::Minus => Side::Lower,
        SideArg::Plus => Side::Upper,
    };
    let mut table = vec![(DegreeVector::zero(engine.theta()), 1usize)];
    table.extend(engine.dimension_table(side, args.max_degree)?);
    match format {
        Format::Json => {
            let rows: Vec<Value> = table
                .iter()
                .map(|(degree, dim)| json!({"degree": degree.coords(), "dim": dim}))
                .collect();
            print_json(&json!(rows));
        }
        _ => {
            for (degree, dim) in &table {
                let coords: Vec<String> =
                    degree.coords().iter().map(|c| c.to_string()).collect();
                println!("{}\t{dim}", coords.join(","));
            }
        }
    }
    Ok(())
}

fn algebra_gram(args: &GramArgs, format: Format) -> CliResult<()> {
    let coords = parse_i64_list(&args.degree, "--degree")?;
    if coords.iter().any(|&c| c < 0) {
        return Err(Failure::Invalid("degree coordinates must be nonnegative".into()));
    }
    let total: i64 = coords.iter().sum();
    let engine = args.source.engine(Some(total as usize))?;
    let degree = parse_degree(&engine, &args.degree)?;
    let gram = engine.gram(&degree)?;
    let det = gram.determinant();
    match format {
        Format::Json => {
            let rows: Vec<Vec<String>> = (0..gram.rows())
                .map(|i| gram.row(i).iter().map(|s| s.to_string()).collect())
                .collect();
            print_json(&json!({
                "degree": degree.coords(),
                "size": gram.rows(),
                "matrix": rows,
                "determinant": det.to_string(),
            }));
        }
        Format::Tsv => {
            for i in 0..gram.rows() {
                let row: Vec<String> = gram.row(i).iter().map(|s| s.to_string()).collect();
                println!("{}", row.join("\t"));
            }
            println!("determinant\t{det}");
        }
        Format::Human => {
            println!("Gram matrix in degree {degree}, size {}", gram.rows());
            for i in 0..gram.rows() {
                let row: Vec<String> = gram.row(i).iter().map(|s| s.to_string()).collect();
                println!("  [ {} ]", row.join(", "));
            }
            println!("determinant: {det}");
        }
    }
    Ok(())
}

fn algebra_check_identities(args: &CheckArgs, format: Format) -> CliResult<()> {
    let engine = args.source.engine(None)?;
    let reports = engine.check_all(args.seed)?;
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.name.as_str())
        .collect();
    match format {
        Format::Json => {
            let rows: Vec<Value> = reports
                .iter()
                .map(|r| json!({"name": r.name, "passed": r.passed, "detail": r.detail}))
                .collect();
            print_json(&json!({"checks": rows, "all_passed": failed.is_empty()}));
        }
        Format::Tsv => {
            for r in &reports {
                println!(
                    "{}\t{}\t{}",
                    r.name,
                    if r.passed { "pass" } else { "fail" },
                    r.detail
                );
            }
        }
        Format::Human => {
            for r in &reports {
                println!("{}: {}", r.name, if r.passed { "pass" } else { "fail" });
                if !r.passed {
                    println!("  {}", r.detail);
                }
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Audit(format!("failed checks: {}", failed.join(", "))))
    }
}

// ---------------------------------------------------------------------------
// module
// ---------------------------------------------------------------------------

/// Weight blocks sorted by their degree drop below the highest weight.
fn sorted_blocks(
    module: &WeightModule,
    highest: &Character,
) -> CliResult<Vec<(DegreeVector, Character, usize)>> {
    let engine = module.engine();
    let mut rows = Vec::new();
    for (weight, indices) in module.weight_blocks() {
        let drop = weight_difference(engine, &weight, highest)?;
        rows.push((drop, weight, indices.len()));
    }
    rows.sort_by(|a, b| (a.0.total(), &a.0).cmp(&(b.0.total(), &b.0)));
    Ok(rows)
}

fn module_simple(args: &SimpleArgs, format: Format) -> CliResult<()> {
    let engine = args.source.engine(args.max_degree)?;
    let chi = resolve_character(&engine, &args.m, &args.chi, "--m", "--chi")?;
    let module = simple_module(&engine, &chi)?;
    let exponents = is_dominant(&engine, &chi)?.expect("simple modules have dominant weights");
    let blocks = sorted_blocks(&module, &chi)?;
    let integrable = is_integrable(&module);
    match format {
        Format::Json => {
            let rows: Vec<Value> = blocks
                .iter()
                .map(|(drop, weight, mult)| {
                    json!({
                        "drop": drop.coords(),
                        "multiplicity": mult,
                        "weight": character_json(weight),
                    })
                })
                .collect();
            print_json(&json!({
                "dim": module.dim(),
                "m": exponents,
                "weight": character_json(&chi),
                "integrable": integrable,
                "blocks": rows,
            }));
        }
        Format::Tsv => {
            for (drop, weight, mult) in &blocks {
                let coords: Vec<String> =
                    drop.coords().iter().map(|c| c.to_string()).collect();
                println!("{}\t{mult}\t{weight}", coords.join(","));
            }
        }
        Format::Human => {
            let name: Vec<String> = exponents.iter().map(|e| e.to_string()).collect();
            println!("simple module L({}) of dimension {}", name.join(", "), module.dim());
            println!("highest weight: {chi}");
            println!("integrable: {integrable}");
            if args.table {
                println!("drop\tmultiplicity\tweight");
                for (drop, weight, mult) in &blocks {
                    let coords: Vec<String> =
                        drop.coords().iter().map(|c| c.to_string()).collect();
                    println!("{}\t{mult}\t{weight}", coords.join(","));
                }
            }
        }
    }
    Ok(())
}

fn module_tensor(args: &TensorArgs, format: Format) -> CliResult<()> {
    let engine = args.source.engine(args.max_degree)?;
    let chi1 = resolve_character(&engine, &args.m1, &args.chi1, "--m1", "--chi1")?;
    let chi2 = resolve_character(&engine, &args.m2, &args.chi2, "--m2", "--chi2")?;
    let left = simple_module(&engine, &chi1)?;
    let right = simple_module(&engine, &chi2)?;
    let product = tensor(&left, &right)?;
    let top = chi1.mul(&chi2);

    let mut value = json!({
        "factors": [
            {"m": exponents_json(&engine, &chi1), "dim": left.dim()},
            {"m": exponents_json(&engine, &chi2), "dim": right.dim()},
        ],
        "dim": product.dim(),
    });
    let mut summand_line = None;
    if args.decompose {
        let report = decompose(&product)?;
        let mut summands = report.summands.clone();
        let mut drops = Vec::new();
        for (weight, _, _) in &summands {
            drops.push(weight_difference(&engine, weight, &top)?);
        }
        let mut order: Vec<usize> = (0..summands.len()).collect();
        order.sort_by_key(|&k| (drops[k].total(), drops[k].clone()));
        summands = order.iter().map(|&k| summands[k].clone()).collect();
        let mut parts = Vec::new();
        let mut rows = Vec::new();
        for (weight, multiplicity, dim) in &summands {
            let name = summand_name(&engine, weight);
            parts.push(if *multiplicity == 1 {
                name.clone()
            } else {
                format!("{multiplicity}·{name}")
            });
            rows.push(json!({
                "m": exponents_json(&engine, weight),
                "weight": character_json(weight),
                "multiplicity": multiplicity,
                "dim": dim,
            }));
        }
        value["summands"] = json!(rows);
        value["covered"] = json!(report.total);
        summand_line = Some(parts.join(" ⊕ "));
    }

    match format {
        Format::Json => print_json(&value),
        Format::Tsv => {
            let blocks = sorted_blocks(&product, &top)?;
            for (drop, weight, mult) in &blocks {
                let coords: Vec<String> =
                    drop.coords().iter().map(|c| c.to_string()).collect();
                println!("{}\t{mult}\t{weight}", coords.join(","));
            }
            if let Some(line) = &summand_line {
                println!("decomposition\t{line}");
            }
        }
        Format::Human => {
            println!(
                "{} ⊗ {}: dimension {}",
                summand_name(&engine, &chi1),
                summand_name(&engine, &chi2),
                product.dim()
            );
            if let Some(line) = &summand_line {
                println!("decomposition: {line}");
            }
        }
    }
    Ok(())
}

fn module_casimir(args: &CasimirArgs, format: Format) -> CliResult<()> {
    let engine = args.source.engine(args.max_degree)?;
    let chi = resolve_character(&engine, &args.m, &args.chi, "--m", "--chi")?;
    let module = if let Some(m2) = &args.m2 {
        let chi2 = resolve_character(&engine, &Some(m2.clone()), &None, "--m2", "--chi")?;
        tensor(&simple_module(&engine, &chi)?, &simple_module(&engine, &chi2)?)?
    } else {
        simple_module(&engine, &chi)?
    };
    let anchor = module.weight(0).clone();
    let g = g_function(&engine, &anchor, args.allow_degenerate_g)?;
    let report = casimir_spectrum(&module, &g)?;
    match format {
        Format::Json => {
            let rows: Vec<Value> = report
                .eigenvalues
                .iter()
                .map(|(weight, value)| {
                    json!({
                        "m": exponents_json(&engine, weight),
                        "weight": character_json(weight),
                        "value": value.to_string(),
                    })
                })
                .collect();
            print_json(&json!({
                "dim": module.dim(),
                "eigenvalues": rows,
                "annihilated": report.annihilated,
                "distinct": report.distinct,
            }));
        }
        Format::Tsv => {
            for (weight, value) in &report.eigenvalues {
                println!("{}\t{value}", summand_name(&engine, weight));
            }
        }
        Format::Human => {
            println!("module dimension {}", module.dim());
            for (weight, value) in &report.eigenvalues {
                println!("G on {} = {value}", summand_name(&engine, weight));
            }
            println!("characteristic polynomial annihilates: {}", report.annihilated);
            println!("eigenvalues pairwise distinct: {}", report.distinct);
        }
    }
    if report.annihilated {
        Ok(())
    } else {
        Err(Failure::Audit(
            "the Casimir does not satisfy its characteristic polynomial".into(),
        ))
    }
}

// ---------------------------------------------------------------------------
// gcheck
// ---------------------------------------------------------------------------

fn gcheck(args: &GcheckArgs, format: Format) -> CliResult<()> {
    let engine = args.source.engine(None)?;
    let theta = engine.theta();
    let (anchor, target) = if args.counterexample {
        let twos = vec![2i64; theta];
        let anchor = character_with_exponents(&engine, &twos).ok_or_else(|| {
            Failure::Invalid("no positive character has exponents (2,...,2) on this datum".into())
        })?;
        let mut target = anchor.clone();
        for i in 0..theta {
            target = target.mul(engine.datum().character(i));
        }
        (anchor, target)
    } else {
        let anchor = resolve_character(
            &engine,
            &args.anchor_m,
            &args.anchor_chi,
            "--anchor-m",
            "--anchor-chi",
        )?;
        let target = resolve_character(&engine, &args.m, &args.chi, "--m", "--chi")?;
        (anchor, target)
    };

    let nli = check_nli(engine.datum());
    let anchor_m = is_dominant(&engine, &anchor)?;
    let target_m = is_dominant(&engine, &target)?;
    let difference = weight_difference(&engine, &anchor, &target)?;
    let dominated = difference.is_nonnegative();
    let g = g_function(&engine, &anchor, args.allow_degenerate_g)?;
    let g_anchor = g.eval(&anchor)?;
    let g_target = g.eval(&target)?;
    let separated = g_anchor != g_target;

    let fmt_m = |m: &Option<Vec<i64>>| match m {
        Some(exps) => {
            let parts: Vec<String> = exps.iter().map(|e| e.to_string()).collect();
            format!("({})", parts.join(", "))
        }
        None => "not dominant".into(),
    };
    match format {
        Format::Json => {
            print_json(&json!({
                "nli": nli,
                "anchor": {"m": json!(anchor_m), "weight": character_json(&anchor), "g": g_anchor.to_string()},
                "target": {"m": json!(target_m), "weight": character_json(&target), "g": g_target.to_string()},
                "difference": difference.coords(),
                "dominated": dominated,
                "separated": separated,
            }));
        }
        _ => {
            println!("Nli: {nli}");
            println!("anchor: chi' = {anchor}, m = {}", fmt_m(&anchor_m));
            println!("target: chi  = {target}, m = {}", fmt_m(&target_m));
            println!("difference degree: {difference} (chi' <= chi: {dominated})");
            println!("G(chi') = {g_anchor}");
            println!("G(chi)  = {g_target}");
            if separated {
                println!("verdict: G separates chi from chi'");
            } else {
                println!("verdict: G(chi) = G(chi'); G does not separate these weights");
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

fn oracle_kostant(args: &KostantArgs, format: Format) -> CliResult<()> {
    let cartan = parse_cartan(&args.cartan)?;
    let rs = RootSystem::from_cartan(&cartan)?;
    let degree = parse_i64_list(&args.degree, "--degree")?;
    if degree.len() != rs.rank() {
        return Err(Failure::Invalid(format!(
            "--degree needs {} coordinates, got {}",
            rs.rank(),
            degree.len()
        )));
    }
    let count = kostant_partition(&rs, &degree);
    match format {
        Format::Json => print_json(&json!({"degree": degree, "count": count.to_string()})),
        _ => println!("{count}"),
    }
    Ok(())
}

fn labelled_input(args: &LabelledArgs) -> CliResult<(RootSystem, Vec<i64>, Vec<i64>)> {
    let cartan = parse_cartan(&args.cartan)?;
    let rs = RootSystem::from_cartan(&cartan)?;
    let d = parse_i64_list(&args.symmetrizer, "--symmetrizer")?;
    let labels = parse_i64_list(&args.labels, "--labels")?;
    if d.len() != rs.rank() || labels.len() != rs.rank() {
        return Err(Failure::Invalid(format!(
            "--symmetrizer and --labels need {} entries each",
            rs.rank()
        )));
    }
    if labels.iter().any(|&m| m < 0) {
        return Err(Failure::Invalid("--labels entries must be nonnegative".into()));
    }
    Ok((rs, d, labels))
}

fn oracle_weyl(args: &LabelledArgs, format: Format) -> CliResult<()> {
    let (rs, d, labels) = labelled_input(args)?;
    let dim = weyl_dimension(&rs, &d, &labels)?;
    match format {
        Format::Json => print_json(&json!({"labels": labels, "dim": dim.to_string()})),
        _ => println!("{dim}"),
    }
    Ok(())
}

fn oracle_multiplicities(args: &LabelledArgs, format: Format) -> CliResult<()> {
    let (rs, d, labels) = labelled_input(args)?;
    let mults = weight_multiplicities(&rs, &d, &labels)?;
    match format {
        Format::Json => {
            let rows: Vec<Value> = mults
                .iter()
                .map(|(drop, mult)| json!({"drop": drop, "multiplicity": mult.to_string()}))
                .collect();
            print_json(&json!(rows));
        }
        _ => {
            for (drop, mult) in &mults {
                let coords: Vec<String> = drop.iter().map(|c| c.to_string()).collect();
                println!("{}\t{mult}", coords.join(","));
            }
        }
    }
    Ok(())
}

fn oracle_clebsch(args: &ClebschArgs, format: Format) -> CliResult<()> {
    if args.m < 0 || args.n < 0 {
        return Err(Failure::Invalid("--m and --n must be nonnegative".into()));
    }
    let labels = clebsch_gordan_a1(args.m, args.n);
    match format {
        Format::Json => print_json(&json!({"m": args.m, "n": args.n, "summands": labels})),
        Format::Tsv => {
            for label in &labels {
                println!("{label}");
            }
        }
        Format::Human => {
            let parts: Vec<String> = labels.iter().map(|l| format!("L({l})")).collect();
            println!("{}", parts.join(" ⊕ "));
        }
    }
    Ok(())
}
