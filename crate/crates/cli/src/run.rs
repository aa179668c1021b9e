use std::path::Path;

use inbl_core::experiments::{log_slope, run_crosscorr, run_error_scaling, run_zero_stats, speedup_report};
use inbl_core::oracle::legal_bell_class;
use inbl_core::{
    build_phonebook, build_product_string, build_universe, entangle_discriminate, expand, fragment_search,
    full_string_search, inverse_lookup, lookup, parse_dsl_with_bits, Error, Pattern, PhonebookSpec, ReferenceSystem,
    RtwScheme, SearchOptions, SearchOutcome, Superposition, SwitchState, Verdict,
};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::{Command, Global};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Input { path: String, source: Error },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("oracle disagrees: {0}")]
    OracleMismatch(String),
}

/// Result of one subcommand, before timing and rendering.
pub struct Run {
    pub parameters: Map<String, Value>,
    pub records: Vec<Value>,
    pub summary: Map<String, Value>,
    /// 0 on success or presence, 1 on absence.
    pub exit: i32,
    /// Printed verbatim in place of the report.
    pub raw: Option<String>,
}

impl Run {
    fn new(parameters: Map<String, Value>) -> Self {
        Run { parameters, records: Vec::new(), summary: Map::new(), exit: 0, raw: None }
    }

    fn note(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.into(), to_value(value));
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialise")
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn load_superposition(path: &Path, bits: Option<u32>) -> Result<Superposition, CliError> {
    parse_dsl_with_bits(&read(path)?, bits)
        .map_err(|source| CliError::Input { path: path.display().to_string(), source })
}

fn load_book(path: &Path) -> Result<PhonebookSpec, CliError> {
    PhonebookSpec::parse(&read(path)?).map_err(|source| CliError::Input { path: path.display().to_string(), source })
}

fn system(g: &Global, bits: u32) -> Result<ReferenceSystem, CliError> {
    Ok(ReferenceSystem::new(bits, g.scheme, g.seed)?.with_flip_prob(g.flip_prob))
}

fn options(g: &Global) -> SearchOptions {
    SearchOptions { start: g.start, max_wait: g.max_wait }
}

fn base_parameters(g: &Global, bits: u32) -> Map<String, Value> {
    let mut p = Map::new();
    p.insert("bits".into(), json!(bits));
    p.insert("scheme".into(), to_value(g.scheme));
    p.insert("flip_prob".into(), json!(g.flip_prob.to_string()));
    p.insert("start".into(), json!(g.start));
    p.insert("max_wait".into(), json!(g.max_wait));
    p.insert("oracle_check".into(), json!(g.oracle_check));
    p
}

fn field_value(text: &str, width: u32, what: &str) -> Result<u64, CliError> {
    let ok = text.len() == width as usize && text.bytes().all(|b| b == b'0' || b == b'1');
    if !ok {
        return Err(CliError::Usage(format!("{what} must be a {width}-character bitstring, got `{text}`")));
    }
    u64::from_str_radix(text, 2).map_err(|e| CliError::Usage(format!("{what}: {e}")))
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::Present { .. } => "present",
        Verdict::Absent => "absent",
        Verdict::AbsentWithBound { .. } => "absent_with_bound",
    }
}

pub fn execute(g: &Global, command: &Command) -> Result<Run, CliError> {
    match command {
        Command::Search { file, string, fragments } => search(g, file, string.as_deref(), fragments.as_deref()),
        Command::Entangle { file, probe } => {
            let sp = load_superposition(file, g.bits)?;
            let mut run = Run::new(base_parameters(g, sp.bits));
            run.parameters.insert("file".into(), json!(file.display().to_string()));
            run.parameters.insert("probe".into(), to_value(inbl_core::PartnerProbe::from(*probe)));
            let out = entangle_discriminate(&sp.expr, &system(g, sp.bits)?, &options(g), (*probe).into())?;
            if g.oracle_check {
                let want = legal_bell_class(&expand(&sp.expr, sp.bits)?);
                if want != Some(out.class) {
                    return Err(CliError::OracleMismatch(format!(
                        "protocol found {}, expansion gives {want:?}",
                        out.class
                    )));
                }
                run.note("oracle_agrees", true);
            }
            run.note("class", out.class);
            run.note("switch_ops", out.switch_ops);
            run.records.push(to_value(&out));
            Ok(run)
        }
        Command::Lookup { book, name } => phonebook(g, book, name, true),
        Command::Inverse { book, number } => phonebook(g, book, number, false),
        Command::Expand { file, raw } => {
            let sp = load_superposition(file, g.bits)?;
            let x = expand(&sp.expr, sp.bits)?;
            let mut run = Run::new(Map::new());
            run.parameters.insert("bits".into(), json!(sp.bits));
            run.parameters.insert("file".into(), json!(file.display().to_string()));
            for (key, c) in x.iter() {
                run.records.push(json!({ "string": Pattern::from_key(key, sp.bits).to_string(), "coefficient": c }));
            }
            run.note("strings", x.len());
            run.note("non_canonical", x.is_non_canonical());
            run.note("dump", x.dump());
            if *raw {
                run.raw = Some(x.dump());
            }
            Ok(run)
        }
        Command::ZeroStats { file, clocks, min_count } => {
            let (bits, expr, label) = match file {
                Some(f) => {
                    let sp = load_superposition(f, g.bits)?;
                    (sp.bits, sp.expr, f.display().to_string())
                }
                None => {
                    let bits = g.bits.ok_or_else(|| CliError::Usage("zero-stats needs a file or --bits".into()))?;
                    (bits, build_universe(bits)?, "universe".to_string())
                }
            };
            let mut run = Run::new(base_parameters(g, bits));
            run.parameters.insert("input".into(), json!(label));
            run.parameters.insert("clocks".into(), json!(clocks));
            run.parameters.insert("min_count".into(), json!(min_count));
            let z = run_zero_stats(&expr, &system(g, bits)?, g.start, *clocks)?;
            for (len, count) in &z.run_histogram {
                run.records.push(json!({ "run_length": len, "count": count }));
            }
            run.note("zero_clocks", z.zero_clocks);
            run.note("zero_fraction", z.zero_fraction);
            run.note("log_slope", log_slope(&z.run_histogram, *min_count));
            if file.is_none() && g.flip_prob == inbl_core::FlipProb::HALF {
                let expected = match g.scheme {
                    RtwScheme::Asymmetric => 0.0,
                    RtwScheme::Symmetric => 1.0 - 0.5f64.powi(bits as i32),
                };
                let sigma = (expected * (1.0 - expected) / *clocks as f64).sqrt();
                run.note("expected_zero_fraction", expected);
                run.note("sigma", sigma);
                let dev = if sigma > 0.0 { (z.zero_fraction - expected).abs() / sigma } else { 0.0 };
                run.note("deviation_sigmas", dev);
            }
            Ok(run)
        }
        Command::Crosscorr { a, b, strings, clocks } => {
            let (bits, ea, eb) = if *strings {
                let pa = Pattern::from_bitstring(a)?;
                let pb = Pattern::from_bitstring(b)?;
                if pa.num_bits() != pb.num_bits() {
                    return Err(CliError::Usage("both strings need the same length".into()));
                }
                let bits = pa.num_bits();
                (bits, build_product_string(&pa, bits)?, build_product_string(&pb, bits)?)
            } else {
                let sa = load_superposition(Path::new(a), g.bits)?;
                let sb = load_superposition(Path::new(b), g.bits)?;
                let bits = sa.bits.max(sb.bits);
                (bits, sa.expr, sb.expr)
            };
            let mut run = Run::new(base_parameters(g, bits));
            run.parameters.insert("a".into(), json!(a));
            run.parameters.insert("b".into(), json!(b));
            run.parameters.insert("clocks".into(), json!(clocks));
            let c = run_crosscorr(&ea, &eb, &system(g, bits)?, g.start, *clocks)?;
            let bound = 5.0 / (*clocks as f64).sqrt();
            run.note("estimate", c.estimate);
            run.note("bound", bound);
            run.note("within_bound", c.estimate.abs() <= bound);
            run.records.push(to_value(&c));
            Ok(run)
        }
        Command::ErrorScaling { tau_min, tau_max, trials } => {
            if tau_min == &0 || tau_min > tau_max {
                return Err(CliError::Usage(format!("need 1 <= tau-min <= tau-max, got {tau_min}..{tau_max}")));
            }
            let mut p = base_parameters(g, 4);
            p.insert("tau_min".into(), json!(tau_min));
            p.insert("tau_max".into(), json!(tau_max));
            p.insert("trials".into(), json!(trials));
            let mut run = Run::new(p);
            let (mut worst, mut wrong) = (0.0f64, 0u64);
            for tau in *tau_min..=*tau_max {
                let r = run_error_scaling(g.seed, tau, *trials)?;
                worst = worst.max(r.deviation_sigmas);
                wrong += r.present_wrong;
                run.records.push(to_value(&r));
            }
            run.note("max_deviation_sigmas", worst);
            run.note("within_3_sigma", worst <= 3.0);
            run.note("present_wrong", wrong);
            Ok(run)
        }
        Command::Speedup { names, numbers } => {
            let bits = g.bits.ok_or_else(|| CliError::Usage("speedup needs --bits".into()))?;
            let r = speedup_report(bits, *names, *numbers)?;
            let mut p = Map::new();
            p.insert("bits".into(), json!(bits));
            p.insert("names".into(), json!(names));
            p.insert("numbers".into(), json!(numbers));
            let mut run = Run::new(p);
            run.note("classical_ratio", r.classical_ratio);
            run.note("grover_ratio", r.grover_ratio);
            run.note("photon_bound", r.photon_bound);
            run.records.push(to_value(&r));
            Ok(run)
        }
    }
}

fn search(g: &Global, file: &Path, string: Option<&str>, fragments: Option<&str>) -> Result<Run, CliError> {
    let sp = load_superposition(file, g.bits)?;
    let sys = system(g, sp.bits)?;
    let mut run = Run::new(base_parameters(g, sp.bits));
    run.parameters.insert("file".into(), json!(file.display().to_string()));
    let (pattern, mut out): (Pattern, SearchOutcome) = match (string, fragments) {
        (Some(s), _) => {
            let p = Pattern::from_bitstring(s)?;
            if p.num_bits() != sp.bits {
                return Err(CliError::Usage(format!(
                    "query `{s}` has {} bits, superposition has {}",
                    p.num_bits(),
                    sp.bits
                )));
            }
            run.parameters.insert("string".into(), json!(s));
            let out = full_string_search(&sp.expr, &sys, &p, &options(g))?;
            (p, out)
        }
        (None, Some(f)) => {
            let p = Pattern::parse_fragments(f, sp.bits)?;
            run.parameters.insert("fragments".into(), json!(f));
            run.parameters.insert("tau".into(), json!(g.tau));
            let out = fragment_search(&sp.expr, &sys, &p, g.tau, &options(g))?;
            (p, out)
        }
        (None, None) => return Err(CliError::Usage("search needs --string or --fragments".into())),
    };
    if g.oracle_check {
        let survivors = expand(&sp.expr, sp.bits)?.surviving(&pattern);
        let live = SwitchState::all_live(sp.bits);
        match &out.verdict {
            Verdict::Present { clock, amplitude } => {
                if survivors.is_empty() || survivors.eval(&sys, &live, *clock) != *amplitude {
                    return Err(CliError::OracleMismatch(format!(
                        "present at clock {clock} with no matching survivor"
                    )));
                }
            }
            Verdict::Absent if !survivors.is_empty() => {
                return Err(CliError::OracleMismatch(format!("{} survivors of an exact absence", survivors.len())));
            }
            Verdict::AbsentWithBound { .. } if survivors.is_empty() => out.verdict = Verdict::Absent,
            _ => {}
        }
        run.note("oracle_survivors", survivors.len());
        run.note("oracle_agrees", out.verdict.is_present() != survivors.is_empty());
    }
    run.exit = if out.verdict.is_present() { 0 } else { 1 };
    run.note("query", pattern.to_string());
    run.note("verdict", verdict_name(&out.verdict));
    run.note("switch_ops", out.switch_ops);
    run.records.push(to_value(&out));
    Ok(run)
}

fn phonebook(g: &Global, book: &Path, key: &str, forward: bool) -> Result<Run, CliError> {
    let spec = load_book(book)?;
    if let Some(b) = g.bits {
        if b != spec.total_bits() {
            return Err(Error::SystemSizeMismatch { expected: spec.total_bits(), found: b }.into());
        }
    }
    let pb = build_phonebook(&spec)?;
    let sys = system(g, spec.total_bits())?;
    let mut run = Run::new(base_parameters(g, spec.total_bits()));
    run.parameters.insert("book".into(), json!(book.display().to_string()));
    run.parameters.insert("names".into(), json!(spec.name_bits()));
    run.parameters.insert("numbers".into(), json!(spec.number_bits()));
    let (result, truth) = if forward {
        run.parameters.insert("name".into(), json!(key));
        let name = field_value(key, spec.name_bits(), "--name")?;
        (lookup(&pb, &sys, name, &options(g)), spec.number_of(name))
    } else {
        run.parameters.insert("number".into(), json!(key));
        let number = field_value(key, spec.number_bits(), "--number")?;
        (inverse_lookup(&pb, &sys, number, &options(g)), if spec.is_bijective() { spec.name_of(number) } else { None })
    };
    match result {
        Ok(out) => {
            if g.oracle_check {
                if truth != Some(out.value) {
                    return Err(CliError::OracleMismatch(format!(
                        "lookup gave {}, book holds {truth:?}",
                        out.value_text
                    )));
                }
                run.note("oracle_agrees", true);
            }
            run.note("verdict", "present");
            run.note("value", &out.value_text);
            run.note("switch_ops", out.switch_ops);
            run.records.push(to_value(&out));
        }
        Err(e @ (Error::NameAbsent(_) | Error::NumberAbsent(_))) => {
            if g.oracle_check {
                if truth.is_some() {
                    return Err(CliError::OracleMismatch(format!("{e}, but the book has it")));
                }
                run.note("oracle_agrees", true);
            }
            run.note("verdict", "absent");
            run.note("message", e.to_string());
            run.exit = 1;
        }
        Err(e) => return Err(e.into()),
    }
    Ok(run)
}
