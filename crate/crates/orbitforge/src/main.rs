use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use orbitforge::affine::{build_context, embed, project, quaternionic_model, quaternionic_structure, AffineElement};
use orbitforge::distinguished::{classify, synthesize_distinguished, triples_equivalent};
use orbitforge::document::{matrix_doc, AffineDoc, Document, PairDoc, Payload, ResultDoc, TripleDoc};
use orbitforge::labels::{parse_label, render_types, LabelSpec};
use orbitforge::selfcheck::{check_fixtures, fixture_dir, run_scope, Scope, DEFAULT_SEED};
use orbitforge::structured::{Family, QMatrix};
use orbitforge::types::{decompose_nilpotent_pair, synthesize_type, Pair};
use orbitforge::Error;

/// Nilpotent orbit classification for isotropy algebras of special vectors
/// in real classical Lie algebras, in exact arithmetic.
#[derive(Parser)]
#[command(name = "orbitforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a triple (or decompose a pair) document.
    Classify {
        #[command(flatten)]
        io: Io,
        /// Fail with exit code 3 when part of Y is invertible.
        #[arg(long)]
        strict: bool,
    },
    /// Build the canonical triple or pair of a label.
    Synthesize {
        label: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Decide whether two triples are conjugate under the isotropy group.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        /// Write the conjugating matrix when one is found.
        #[arg(long)]
        witness: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Represent an affine element in the isotropy group of the extended space.
    Embed {
        #[command(flatten)]
        ctx: ContextArgs,
        #[command(flatten)]
        io: Io,
        /// Used to draw a random element when no input is given.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Recover the affine element from an isotropy-group matrix.
    Project {
        #[command(flatten)]
        ctx: ContextArgs,
        #[command(flatten)]
        io: Io,
    },
    /// Quaternionic model of an isotropy-group matrix, or the quaternionic
    /// form of the extended space without input.
    Quaternionify {
        #[command(flatten)]
        ctx: ContextArgs,
        #[arg(long, short)]
        input: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run the invariant suites.
    Selfcheck {
        #[arg(long, default_value = "all")]
        scope: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Where to write the reproduction document of the first failure.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Io {
    /// Input document; standard input when absent.
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Output path; standard output when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ContextArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    p: usize,
}

enum Failure {
    Lib(Error),
    Io(String),
    NotEquivalent,
    Selfcheck,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidLabel(_)
        | Error::ConditionViolated(_)
        | Error::NotInGroup(_)
        | Error::NotInIsotropyGroup(_)
        | Error::BadParity
        | Error::BadSignatureParam(_)
        | Error::WrongFamily(_) => 4,
        Error::UnclassifiedResidual
        | Error::NoCoreRow(_)
        | Error::NoIndexDefined
        | Error::IrrationalSpectrum
        | Error::SpectrumSearchLimit
        | Error::GenerationFailed(_) => 3,
        _ => 2,
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<String, Failure> {
    let mut s = String::new();
    match path {
        Some(p) => s = std::fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        None => {
            std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Io(e.to_string()))?;
        }
    }
    Ok(s)
}

fn read_document(path: &Option<PathBuf>) -> Result<Document, Failure> {
    Ok(Document::parse(&read_input(path)?)?)
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn context(c: &ContextArgs) -> Result<orbitforge::affine::EmbeddingContext, Failure> {
    let family: Family = c.family.parse()?;
    Ok(build_context(family, c.n, c.p)?)
}

fn qmatrix_doc(m: &QMatrix) -> Document {
    let rows = m.to_rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    Document::new(Payload::Matrix { matrix: rows })
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Classify { io, strict } => {
            let doc = read_document(&io.input)?;
            let out = match &doc.payload {
                Payload::Triple(t) => {
                    let r = classify(&t.to_triple()?)?;
                    if let Some(u) = &r.unclassified_residual {
                        if strict {
                            return Err(Error::UnclassifiedResidual.into());
                        }
                        eprintln!("note: unclassified invertible part of dimension {}", u.dim);
                    }
                    Document::new(Payload::Result(ResultDoc::from_result(&r)))
                }
                Payload::Pair(p) => {
                    let d = decompose_nilpotent_pair(&p.to_pair()?)?;
                    Document::new(Payload::Label { label: render_types(&d.labels) })
                }
                _ => return Err(Error::Parse("expected a triple or pair document".into()).into()),
            };
            write_output(&io.output, &out.render())
        }
        Command::Synthesize { label, output } => {
            let doc = match parse_label(&label)? {
                LabelSpec::Distinguished(core, residual) => {
                    Document::new(Payload::Triple(TripleDoc::from_triple(&synthesize_distinguished(&core, &residual)?)))
                }
                LabelSpec::Types(types) => {
                    let parts = types.iter().map(synthesize_type).collect::<Result<Vec<_>, _>>()?;
                    Document::new(Payload::Pair(PairDoc::from_pair(&Pair::direct_sum(&parts)?)))
                }
            };
            write_output(&output, &doc.render())
        }
        Command::Equiv { a, b, witness, output } => {
            let ta = read_document(&Some(a))?.triple()?;
            let tb = read_document(&Some(b))?.triple()?;
            let eq = triples_equivalent(&ta, &tb)?;
            if !eq.equivalent {
                eprintln!("not equivalent");
                return Err(Failure::NotEquivalent);
            }
            match (witness, &eq.witness) {
                (true, Some(p)) => write_output(&output, &Document::new(Payload::Matrix { matrix: matrix_doc(p) }).render()),
                (true, None) => {
                    eprintln!("equivalent; invariants agree but no explicit witness was constructed");
                    Ok(())
                }
                (false, _) => write_output(&output, "equivalent\n"),
            }
        }
        Command::Embed { ctx, io, seed } => {
            let c = context(&ctx)?;
            let a = match &io.input {
                Some(_) => match read_document(&io.input)?.payload {
                    Payload::AffineElement(d) => d.to_element()?,
                    _ => return Err(Error::Parse("expected an affine_element document".into()).into()),
                },
                None => c.random_element(seed)?,
            };
            let g = embed(&c, &a)?;
            write_output(&io.output, &Document::new(Payload::Matrix { matrix: matrix_doc(&g) }).render())
        }
        Command::Project { ctx, io } => {
            let c = context(&ctx)?;
            let g = read_document(&io.input)?.matrix()?;
            let a: AffineElement = project(&c, &g)?;
            write_output(&io.output, &Document::new(Payload::AffineElement(AffineDoc::from_element(&c, &a))).render())
        }
        Command::Quaternionify { ctx, input, output } => {
            let c = context(&ctx)?;
            let doc = match &input {
                Some(_) => qmatrix_doc(&quaternionic_model(&c, &read_document(&input)?.matrix()?)?),
                None => match quaternionic_structure(&c)?.qform {
                    Some(g) => qmatrix_doc(&g),
                    None => return Err(Error::WrongFamily(format!("{} carries no form", c.family)).into()),
                },
            };
            write_output(&output, &doc.render())
        }
        Command::Selfcheck { scope, seed, output } => {
            let scope: Scope = scope.parse()?;
            let mut reports = run_scope(scope, seed);
            if let Some(dir) = fixture_dir() {
                reports.push(check_fixtures(&dir));
            }
            println!("selfcheck scope={scope} seed={seed}");
            for r in &reports {
                println!("{r}");
            }
            let failed: Vec<_> = reports.iter().filter(|r| !r.passed).collect();
            if failed.is_empty() {
                return Ok(());
            }
            if let Some(doc) = failed.iter().find_map(|r| r.repro.as_ref()) {
                match &output {
                    Some(_) => write_output(&output, &doc.render())?,
                    None => eprint!("reproduction:\n{}", doc.render()),
                }
            }
            Err(Failure::Selfcheck)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::NotEquivalent) | Err(Failure::Selfcheck) => ExitCode::from(1),
    }
}
