use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use bhts::corpus::{generate_synthetic_corpus, parse_annotation, SyntheticCorpusSpec};
use bhts::eval::{aggregate_mos, compare_f0, compare_spectra, parse_mos_csv};
use bhts::frontend::{
    build_context_labels, format_label, phoneme_inventory, Frontend, PhonemeClass,
    UtteranceAnnotation,
};
use bhts::model::load_model_set;
use bhts::signal::{read_wav, write_wav, AnalysisConfig, FeatureRecord};
use bhts::synth::{synth_labels, RateMode, SynthesisConfig};
use bhts::train::{parse_train_config, train_pipeline, TrainConfig};

#[derive(Parser)]
#[command(
    name = "bhts",
    version,
    about = "Trainable HMM-based Bengali text-to-speech",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the 48-phoneme inventory, one phoneme per line
    Inventory,
    /// Convert a POS-tagged Bengali line to full-context labels
    Labels {
        /// Tagged text, e.g. "type=simple-affirmative-verb আমি/PRON যাই/VF"
        text: String,
        /// Utterance id recorded in the labels
        #[arg(long, default_value = "utt")]
        id: String,
    },
    /// Extract mel-cepstrum and F0 features from a WAV file
    Analyze {
        wav: PathBuf,
        /// Output feature file
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Train a model on an annotated corpus directory
    Train {
        corpus: PathBuf,
        /// Output model file
        #[arg(short, long)]
        output: PathBuf,
        /// key = value training configuration file
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Synthesize speech with a trained model
    Synth(SynthArgs),
    /// Generate the synthetic verification corpus
    GenCorpus {
        /// Directory to create the corpus in
        root: PathBuf,
        /// Number of utterances
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Compare the F0 tracks of two feature files
    CompareF0 {
        natural: PathBuf,
        synthesized: PathBuf,
        /// Write per-frame values as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare the mel-cepstra of two feature files
    CompareSpec {
        natural: PathBuf,
        synthesized: PathBuf,
        /// Write per-frame distortion as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Aggregate a listening-test score table (system,listener,score CSV)
    Mos { scores: PathBuf },
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("input").required(true).multiple(false)))]
struct SynthArgs {
    /// Trained model file
    model: PathBuf,
    /// POS-tagged text to synthesize
    #[arg(long, group = "input")]
    text: Option<String>,
    /// Annotation (.utt) file to synthesize from its labels
    #[arg(long, group = "input")]
    utt: Option<PathBuf>,
    /// Output WAV file
    #[arg(short, long)]
    output: PathBuf,
    /// Write generated trajectories as CSV (frame, c0..cM, f0_hz, voiced)
    #[arg(long)]
    dump_traj: Option<PathBuf>,
    /// Global-variance compensation weight (0 disables)
    #[arg(long, default_value_t = 0.0)]
    gv_weight: f64,
    /// Force the utterance to exactly this many frames
    #[arg(long)]
    target_frames: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Inventory => inventory(),
        Command::Labels { text, id } => labels(&text, &id),
        Command::Analyze { wav, output } => analyze(&wav, &output),
        Command::Train {
            corpus,
            output,
            config,
        } => train(&corpus, &output, config.as_deref()),
        Command::Synth(args) => synth(&args),
        Command::GenCorpus { root, count, seed } => gen_corpus(&root, count, seed),
        Command::CompareF0 {
            natural,
            synthesized,
            csv,
        } => cmp_f0(&natural, &synthesized, csv.as_deref()),
        Command::CompareSpec {
            natural,
            synthesized,
            csv,
        } => cmp_spec(&natural, &synthesized, csv.as_deref()),
        Command::Mos { scores } => mos(&scores),
    }
}

fn inventory() -> anyhow::Result<()> {
    for p in phoneme_inventory() {
        let desc = match p.class {
            PhonemeClass::Vowel => format!(
                "{} {} {}{}",
                p.vowel_height,
                p.vowel_backness,
                p.vowel_rounding,
                if p.nasal { " nasal" } else { "" }
            ),
            PhonemeClass::Consonant => format!(
                "{} {} {}{}",
                p.place,
                p.manner,
                if p.voiced { "voiced" } else { "voiceless" },
                if p.aspirated { " aspirated" } else { "" }
            ),
            PhonemeClass::Silence => "pause".to_string(),
        };
        println!("{:<4} {:<9} {desc}", p.symbol, class_name(p.class));
    }
    Ok(())
}

fn class_name(class: PhonemeClass) -> &'static str {
    match class {
        PhonemeClass::Vowel => "vowel",
        PhonemeClass::Consonant => "consonant",
        PhonemeClass::Silence => "silence",
    }
}

fn labels(text: &str, id: &str) -> anyhow::Result<()> {
    let frontend = Frontend::with_defaults();
    let utt = frontend.annotate(id, text)?;
    for label in frontend.labels(&utt)? {
        println!("{}", format_label(&label));
    }
    Ok(())
}

fn analyze(wav: &Path, output: &Path) -> anyhow::Result<()> {
    let waveform = read_wav(wav)?;
    let record = FeatureRecord::extract(&waveform, &AnalysisConfig::default())?;
    record.save(output)?;
    println!(
        "{}: {} frames, {} voiced",
        output.display(),
        record.num_frames(),
        record.f0_track().voiced_count()
    );
    Ok(())
}

fn train(corpus: &Path, output: &Path, config: Option<&Path>) -> anyhow::Result<()> {
    let cfg = match config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            parse_train_config(&text)?
        }
        None => TrainConfig::default(),
    };
    let (set, rows) = train_pipeline(corpus, output, &cfg)?;
    let last = rows.last().expect("training always logs stages");
    println!(
        "model written to {} ({} tied spectrum leaves, final log-likelihood {:.4})",
        output.display(),
        set.tied.spectrum.len(),
        last.total_ll
    );
    Ok(())
}

fn synth(args: &SynthArgs) -> anyhow::Result<()> {
    let models = load_model_set(&args.model)?;
    let annotation: UtteranceAnnotation = match (&args.text, &args.utt) {
        (Some(text), None) => Frontend::with_defaults().annotate("synth", text)?,
        (None, Some(path)) => {
            let content = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            parse_annotation(&content)?
        }
        _ => unreachable!("clap enforces exactly one input"),
    };
    let labels = build_context_labels(&annotation)?;
    let cfg = SynthesisConfig {
        rate: match args.target_frames {
            Some(t) => RateMode::TargetFrames(t),
            None => RateMode::Unconstrained,
        },
        gv_weight: args.gv_weight,
        seed: args.seed,
        ..SynthesisConfig::default()
    };
    let out = synth_labels(&labels, &models, &cfg)?;
    write_wav(&args.output, &out.waveform)?;
    if let Some(path) = &args.dump_traj {
        write_trajectories(path, &out.mcep, &out.log_f0)?;
    }
    println!(
        "{}: {} frames, {:.3} s",
        args.output.display(),
        out.mcep.len(),
        out.waveform.duration_secs()
    );
    Ok(())
}

fn write_trajectories(
    path: &Path,
    mcep: &[Vec<f64>],
    log_f0: &[Option<f64>],
) -> anyhow::Result<()> {
    let order = mcep.first().map_or(0, Vec::len);
    let mut csv = String::from("frame");
    for m in 0..order {
        write!(csv, ",c{m}").unwrap();
    }
    csv.push_str(",f0_hz,voiced\n");
    for (t, (c, f)) in mcep.iter().zip(log_f0).enumerate() {
        write!(csv, "{t}").unwrap();
        for v in c {
            write!(csv, ",{v:.6}").unwrap();
        }
        let hz = f.map_or(0.0, f64::exp);
        writeln!(csv, ",{hz:.3},{}", u8::from(f.is_some())).unwrap();
    }
    fs::write(path, csv).with_context(|| format!("writing {}", path.display()))
}

fn gen_corpus(root: &Path, count: usize, seed: u64) -> anyhow::Result<()> {
    let ids = generate_synthetic_corpus(&SyntheticCorpusSpec::new(count, seed), root)?;
    println!("wrote {} utterances under {}", ids.len(), root.display());
    Ok(())
}

fn load_features(path: &Path) -> anyhow::Result<FeatureRecord> {
    FeatureRecord::load(path).with_context(|| format!("loading features {}", path.display()))
}

fn cmp_f0(natural: &Path, synthesized: &Path, csv: Option<&Path>) -> anyhow::Result<()> {
    let nat = load_features(natural)?;
    let syn = load_features(synthesized)?;
    let (nat_f0, syn_f0) = (nat.f0_track(), syn.f0_track());
    let cmp = compare_f0(&nat_f0, &syn_f0)?;
    match cmp.rmse_hz {
        Some(rmse) => println!("F0 RMSE: {rmse:.2} Hz over {} mutually voiced frames", cmp.mutual_voiced),
        None => println!("F0 RMSE: undefined (no mutually voiced frames)"),
    }
    println!("voicing agreement: {:.4} over {} frames", cmp.voicing_agreement, cmp.frames);
    if let Some(path) = csv {
        let mut text = String::from("frame,f0_nat,f0_syn,voiced_nat,voiced_syn\n");
        let (nat_hz, syn_hz) = (nat_f0.to_hz(), syn_f0.to_hz());
        for t in 0..cmp.frames {
            writeln!(
                text,
                "{t},{:.3},{:.3},{},{}",
                nat_hz[t],
                syn_hz[t],
                u8::from(nat_f0.0[t].is_some()),
                u8::from(syn_f0.0[t].is_some())
            )
            .unwrap();
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmp_spec(natural: &Path, synthesized: &Path, csv: Option<&Path>) -> anyhow::Result<()> {
    let nat = load_features(natural)?;
    let syn = load_features(synthesized)?;
    let cmp = compare_spectra(&nat.mcep, &syn.mcep)?;
    println!(
        "mean MCD: {:.4} dB over {} frames",
        cmp.mean_mcd_db,
        cmp.per_frame_db.len()
    );
    if let Some(path) = csv {
        let mut text = String::from("frame,mcd_db\n");
        for (t, v) in cmp.per_frame_db.iter().enumerate() {
            writeln!(text, "{t},{v:.6}").unwrap();
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn mos(scores: &Path) -> anyhow::Result<()> {
    let text = fs::read_to_string(scores)
        .with_context(|| format!("reading {}", scores.display()))?;
    let table = parse_mos_csv(&text)?;
    for s in aggregate_mos(&table)? {
        match s.stdev_mean {
            Some(sd) => println!("{}: {:.2} (mean stdev {:.2}, {} listeners)", s.system, s.mean, sd, s.listeners),
            None => println!("{}: {:.2} ({} listeners)", s.system, s.mean, s.listeners),
        }
    }
    Ok(())
}
