use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tinylic::bitstream::{inspect, read_container};
use tinylic::codec::{decode_image_traced, encode_image, Model};
use tinylic::metrics::{j_cost, lambda_for_index, RdReport};
use tinylic::selftest::run_selftest;
use tinylic::weights::seeded_init_with_amplitude;
use tinylic::{Error, ImageBuffer, NetworkConfig};

#[derive(Parser)]
#[command(name = "tinylic", version, about = "Learned image codec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a binary PPM image
    Enc {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        weights: PathBuf,
        /// Quality level 0..7
        #[arg(short, long, default_value_t = 0)]
        quality: u8,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Reconstruct a PPM image from a .tlic stream
    Dec {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        weights: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Decode only the first k channel groups (1..4)
        #[arg(long)]
        stages: Option<usize>,
    },
    /// Print header fields and per-segment rates
    Inspect {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Compare two images
    Metrics {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        lambda_index: Option<usize>,
        /// Stream whose size gives the bpp term
        #[arg(long)]
        stream: Option<PathBuf>,
    },
    /// Run the seeded-model property checks
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a seeded weight file
    GenWeights {
        #[arg(long, default_value = "tiny")]
        profile: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.02)]
        amplitude: f32,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BadMagic { .. }
        | Error::UnsupportedVersion(_)
        | Error::TruncatedStream(_)
        | Error::Format(_)
        | Error::ChecksumMismatch { .. }
        | Error::DuplicateName(_) => 2,
        Error::ModelMismatch { .. } => 3,
        Error::Decode(_) => 4,
        _ => 1,
    }
}

fn run(cli: Cli) -> tinylic::Result<()> {
    match cli.command {
        Command::Enc {
            input,
            weights,
            quality,
            output,
        } => {
            let model = Model::load(&weights)?;
            let img = ImageBuffer::read_ppm(&input)?;
            let c = encode_image(&img, &model, quality)?;
            std::fs::write(&output, c.to_bytes())?;
            println!("{} bytes, {:.4} bpp", c.total_bytes(), c.bpp());
        }
        Command::Dec {
            input,
            weights,
            output,
            stages,
        } => {
            let c = read_container(&std::fs::read(&input)?)?;
            let model = Model::load(&weights)?;
            let d = decode_image_traced(&c, &model, stages)?;
            d.image.write_ppm(&output)?;
            println!(
                "{}x{}, {} of 4 groups decoded",
                d.image.width(),
                d.image.height(),
                d.mcm.decoded_groups
            );
        }
        Command::Inspect { input } => {
            println!("{}", inspect(&std::fs::read(&input)?)?);
        }
        Command::Metrics {
            reference,
            test,
            lambda_index,
            stream,
        } => {
            let a = ImageBuffer::read_ppm(&reference)?;
            let b = ImageBuffer::read_ppm(&test)?;
            let bytes = match &stream {
                Some(p) => std::fs::metadata(p)?.len() as usize,
                None => 0,
            };
            let r = RdReport::new(&a, &b, bytes)?;
            println!("psnr    {:.4} dB", r.psnr);
            match r.ms_ssim {
                Some(v) => println!("ms-ssim {v:.6}"),
                None => println!("ms-ssim n/a (image smaller than 176x176)"),
            }
            if stream.is_some() {
                println!("bpp     {:.6}", r.bpp);
            }
            if let Some(q) = lambda_index {
                let l = lambda_for_index(q)?;
                println!("J       {:.6} (lambda {l})", j_cost(&r, l));
            }
        }
        Command::Selftest { seed } => {
            let checks = run_selftest(seed)?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                println!("{} {:<20} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if failed > 0 {
                return Err(Error::Config(format!("{failed} self-test checks failed")));
            }
        }
        Command::GenWeights {
            profile,
            seed,
            amplitude,
            output,
        } => {
            let cfg = NetworkConfig::by_name(&profile)?;
            let store = seeded_init_with_amplitude(&cfg, seed, amplitude)?;
            std::fs::write(&output, store.save())?;
            println!(
                "{} tensors, {} parameters, model hash {:#018x}",
                store.len(),
                store.parameter_count(),
                store.model_hash()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
