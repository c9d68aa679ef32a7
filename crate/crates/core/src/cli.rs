//! The `toposcope` command line. Exit codes: 0 when every verdict holds or
//! a listing succeeded, 1 when some verdict is false, 2 on input errors.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::catalog::{self, BUILTIN_NAMES};
use crate::cohesion::{check_precohesive, p_upperstar, CohesiveStructure};
use crate::presheaf::{initial, subobject_classifier, terminal, Presheaf};
use crate::report::{Report, ReportBundle};
use crate::sieve::{enumerate_topologies, BUDGET_ENV, DEFAULT_BUDGET};
use crate::sitefile::{resolve_site, LoadedSite, SiteFile};
use crate::verify::{self, DEFAULT_MAX_A};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Debug, Parser)]
#[command(
    name = "toposcope",
    version,
    about = "Envelopes and topologies of presheaf toposes on finite sites",
    after_help = format!(
        "<site> is a built-in name ({}) or a path to a site file.\n\
         {BUDGET_ENV} caps the topology enumeration (default {DEFAULT_BUDGET} closure steps).",
        BUILTIN_NAMES.join(", ")
    )
)]
pub struct Cli {
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Zero all timings, for byte-for-byte comparison of machine output.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a site file with its presheaves and subobjects.
    Validate { file: PathBuf },
    /// List the sieves on every object (the subobject classifier).
    Omega { site: String },
    /// Enumerate every Grothendieck topology.
    Topologies { site: String },
    /// Compute the envelope of an object.
    Envelope {
        site: String,
        /// initial, terminal, omega, pstar2, pshriek2, or a presheaf named in the site file.
        #[arg(long)]
        object: String,
    },
    /// Check whether the site is pre-cohesive.
    Precohesive { site: String },
    /// Check that the envelope of p*2 contains all discrete and codiscrete objects minimally.
    VerifyTheorem {
        site: String,
        #[arg(long, default_value_t = DEFAULT_MAX_A)]
        max_a: usize,
    },
    /// Run every verifier on every built-in site, or on the catalog sites with --catalog.
    VerifyAll {
        #[arg(long)]
        catalog: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_A)]
        max_a: usize,
    },
    /// Emit the full catalog report.
    Report {
        #[arg(long, default_value_t = DEFAULT_MAX_A)]
        max_a: usize,
    },
}

/// What a command produced: text plus whether every verdict held.
struct Output {
    text: String,
    ok: bool,
}

struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn load(site: &str) -> Result<LoadedSite, InputError> {
    Ok(resolve_site(site)?)
}

fn named_object(loaded: &LoadedSite, name: &str) -> Result<Presheaf, InputError> {
    let site = &loaded.site;
    let x = match name {
        "initial" => initial(site),
        "terminal" => terminal(site),
        "omega" => subobject_classifier(site),
        "pstar2" => p_upperstar(site, 2),
        "pshriek2" => CohesiveStructure::new(site)?.p_uppershriek(2),
        other => loaded
            .presheaf(other)
            .cloned()
            .ok_or_else(|| InputError(format!("--object: unknown object `{other}`")))?,
    };
    Ok(x)
}

fn render(reports: Vec<Report>, cli: &Cli) -> Output {
    let mut bundle = ReportBundle::new(reports);
    if cli.no_timing {
        bundle = bundle.without_timing();
    }
    let text = match cli.format {
        Format::Text => bundle.to_text(),
        Format::Machine => bundle.to_json() + "\n",
    };
    Output { text, ok: bundle.verdict }
}

fn execute(cli: &Cli) -> Result<Output, InputError> {
    match &cli.command {
        Command::Validate { file } => {
            let loaded = SiteFile::read(file)?.load()?;
            let site = &loaded.site;
            let mut text = format!(
                "{}: valid, {} objects, {} morphisms\n",
                site.name(),
                site.num_objects(),
                site.num_morphisms()
            );
            for x in &loaded.presheaves {
                writeln!(text, "presheaf {}: sizes {:?}", x.name(), x.sizes()).unwrap();
            }
            for (name, u) in &loaded.subobjects {
                writeln!(text, "subobject {name} of {}: {} elements", u.ambient().name(), u.total_size()).unwrap();
            }
            Ok(Output { text, ok: true })
        }
        Command::Omega { site } => {
            let loaded = load(site)?;
            let omega = subobject_classifier(&loaded.site);
            let mut text = String::new();
            for c in loaded.site.objects() {
                writeln!(
                    text,
                    "Ω({}) = {} sieves: {}",
                    loaded.site.object_name(c),
                    omega.size(c),
                    omega.elements(c).join(" ")
                )
                .unwrap();
            }
            Ok(Output { text, ok: true })
        }
        Command::Topologies { site } => {
            let loaded = load(site)?;
            let all = enumerate_topologies(&loaded.site)?;
            let mut text = format!("{} topologies on {}\n", all.len(), loaded.site.name());
            for (i, j) in all.iter().enumerate() {
                writeln!(text, "J{i}: {j}").unwrap();
            }
            Ok(Output { text, ok: true })
        }
        Command::Envelope { site, object } => {
            let loaded = load(site)?;
            let z = named_object(&loaded, object)?;
            let r = verify::envelope_report(&loaded.site, &[z])?;
            Ok(render(vec![r], cli))
        }
        Command::Precohesive { site } => {
            let loaded = load(site)?;
            let r = check_precohesive(&loaded.site);
            let text = match cli.format {
                Format::Text => r.summary() + &format!("\nverdict: {}\n", r.verdict),
                Format::Machine => serde_json::to_string_pretty(&r)? + "\n",
            };
            Ok(Output { text, ok: r.verdict })
        }
        Command::VerifyTheorem { site, max_a } => {
            let loaded = load(site)?;
            let r = verify::verify_weak_aufhebung(&loaded.site, *max_a)?;
            Ok(render(vec![r], cli))
        }
        Command::VerifyAll { catalog: true, max_a } | Command::Report { max_a } => {
            Ok(render(verify::catalog_reports(*max_a)?, cli))
        }
        Command::VerifyAll { catalog: false, max_a } => {
            let mut reports = Vec::new();
            for name in BUILTIN_NAMES {
                let site = std::sync::Arc::new(catalog::builtin(name)?);
                reports.extend(verify::site_reports(&site, *max_a)?);
            }
            reports.push(verify::reproduce_counterexample());
            Ok(render(reports, cli))
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let out = match execute(&cli) {
        Ok(out) => out,
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &out.text) {
                eprintln!("error: --out {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{}", out.text),
    }
    if out.ok {
        0
    } else {
        1
    }
}
