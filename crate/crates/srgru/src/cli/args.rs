//! clap surface. Every value flag is optional so that "not given" falls
//! back to the config file and then to the documented default.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::{Overrides, RunConfig};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "srgru",
    version,
    about = "Dialogue-act conditioned NLG: refined-gate recurrent generators with \
             over-generation and slot-error reranking"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train generators over several seeds and keep the best checkpoint.
    Train(TrainArgs),
    /// Realize test dialogue acts with a trained model.
    Generate(GenerateArgs),
    /// Score a realizations file against the dataset references.
    Evaluate(EvaluateArgs),
    /// Emit (x, BLEU, ERR) series over data proportion, beam width, or top-k.
    Sweep(SweepArgs),
    /// Finite-difference verification of every cell's analytic gradients.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonOpts {
    /// `key = value` configuration file; `#` starts a comment. Flags given
    /// here override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for artifacts and the resolved-config echo [default: out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (seed-parallel training, act-parallel generation)
    /// [default: 1]
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct DataOpts {
    /// Dataset: one record file (split 3:1:1) or a directory holding
    /// train.json/valid.json/test.json.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Seed for the 3:1:1 split of a single-file dataset [default: 1]
    #[arg(long)]
    pub split_seed: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct TrainOpts {
    /// Cell: gru-base | srgru-base | srgru-context | tb-srgru
    /// [default: srgru-context]
    #[arg(long)]
    pub cell: Option<String>,
    /// Hidden width [default: 80]
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Embedding width [default: 80]
    #[arg(long)]
    pub embed: Option<usize>,
    /// SGD learning rate [default: 0.1]
    #[arg(long)]
    pub lr: Option<f64>,
    /// Learning-rate multiplier per stagnant epoch; 1 disables [default: 0.5]
    #[arg(long)]
    pub lr_decay: Option<f64>,
    /// Dropout probability on embeddings and pre-output state [default: 0.7]
    #[arg(long)]
    pub dropout: Option<f64>,
    /// L2 penalty coefficient [default: 1e-5]
    #[arg(long)]
    pub l2: Option<f64>,
    /// Sentences between L2 penalty applications [default: 10]
    #[arg(long)]
    pub l2_every: Option<usize>,
    /// Epoch cap [default: 100]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Stagnant epochs before early stop [default: 5]
    #[arg(long)]
    pub patience: Option<usize>,
    /// Independent seeded runs [default: 5]
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Global-norm gradient clip; inf disables [default: 5]
    #[arg(long)]
    pub clip: Option<f64>,
    /// Decode length cap for validation and generation [default: 100]
    #[arg(long)]
    pub max_decode_len: Option<usize>,
    /// Add bias vectors to every affine map [default: false]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub biases: Option<bool>,
    /// Stop once mean training NLL falls below this (memorization runs)
    #[arg(long)]
    pub stop_train_nll: Option<f64>,
    /// tb-srgru only: train forward fully, then backward (instead of
    /// alternating jointly) [default: false]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub sequential: Option<bool>,
    /// Pretrained word-vector file seeding the embedding rows
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct DecodeOpts {
    /// Beam width [default: 10]
    #[arg(long)]
    pub beam: Option<usize>,
    /// Candidates to over-generate before reranking [default: 20]
    #[arg(long)]
    pub need: Option<usize>,
    /// Realizations kept per act after reranking [default: 5]
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Slot-error weight in the reranking score [default: 1000]
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct ArtifactOpts {
    /// Forward model checkpoint.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Backward model; its score joins the reranker (tb-srgru pipelines).
    #[arg(long)]
    pub tb_model: Option<PathBuf>,
    /// Vocabulary file [default: vocab.txt beside the model]
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Schema file [default: schema.txt beside the model]
    #[arg(long)]
    pub schema: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[command(flatten)]
    pub data: DataOpts,
    #[command(flatten)]
    pub train: TrainOpts,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[command(flatten)]
    pub data: DataOpts,
    #[command(flatten)]
    pub artifacts: ArtifactOpts,
    #[command(flatten)]
    pub decode: DecodeOpts,
    /// Decode length cap [default: 100]
    #[arg(long)]
    pub max_decode_len: Option<usize>,
    /// Read one dialogue act from stdin and print each realization with its
    /// missing (p), redundant (q), and total (N) slot diagnostics.
    #[arg(long)]
    pub stdin: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[command(flatten)]
    pub data: DataOpts,
    /// Realizations file produced by `generate`.
    #[arg(long)]
    pub realizations: Option<PathBuf>,
    /// Realizations per act entering the slot-error average [default: 5]
    #[arg(long)]
    pub err_top: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[command(flatten)]
    pub data: DataOpts,
    #[command(flatten)]
    pub train: TrainOpts,
    #[command(flatten)]
    pub decode: DecodeOpts,
    #[command(flatten)]
    pub artifacts: ArtifactOpts,
    /// Sweep axis: proportion | beam | top-k
    #[arg(long)]
    pub axis: Option<String>,
    /// Comma-separated sweep points (proportions in percent, beam widths,
    /// or k values) [default: per axis]
    #[arg(long)]
    pub points: Option<String>,
    /// Realizations per act entering the slot-error average [default: 5]
    #[arg(long)]
    pub err_top: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Central-difference step [default: 1e-5]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Maximum allowed relative error [default: 1e-4]
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Random instances per cell kind [default: 10]
    #[arg(long)]
    pub instances: Option<usize>,
    /// Seed for the synthesized models and instances [default: 7]
    #[arg(long)]
    pub seed: Option<u64>,
}

impl CommonOpts {
    fn fill(&self, over: &mut Overrides) {
        over.out = self.out.clone();
        over.jobs = self.jobs;
    }
}

impl DataOpts {
    fn fill(&self, over: &mut Overrides) {
        over.data = self.data.clone();
        over.split_seed = self.split_seed;
    }
}

impl TrainOpts {
    fn fill(&self, over: &mut Overrides) {
        over.cell = self.cell.clone();
        over.hidden_size = self.hidden;
        over.embed_size = self.embed;
        over.learn_rate = self.lr;
        over.lr_decay = self.lr_decay;
        over.dropout_rate = self.dropout;
        over.l2_coeff = self.l2;
        over.l2_every = self.l2_every;
        over.max_epochs = self.epochs;
        over.patience = self.patience;
        over.seeds = self.seeds;
        over.grad_clip = self.clip;
        over.max_decode_len = self.max_decode_len;
        over.biases = self.biases;
        over.stop_train_nll = self.stop_train_nll;
        over.sequential = self.sequential;
        over.embeddings = self.embeddings.clone();
    }
}

impl DecodeOpts {
    fn fill(&self, over: &mut Overrides) {
        over.beam_width = self.beam;
        over.need = self.need;
        over.top_k = self.top_k;
        over.lambda = self.lambda;
    }
}

impl ArtifactOpts {
    fn fill(&self, over: &mut Overrides) {
        over.model = self.model.clone();
        over.tb_model = self.tb_model.clone();
        over.vocab = self.vocab.clone();
        over.schema = self.schema.clone();
    }
}

impl Command {
    /// Resolves this invocation's configuration and runs the command.
    pub fn run(&self) -> Result<()> {
        match self {
            Command::Train(args) => {
                let mut over = Overrides::default();
                args.common.fill(&mut over);
                args.data.fill(&mut over);
                args.train.fill(&mut over);
                let cfg =
                    RunConfig::resolve(RunConfig::default(), args.common.config.as_deref(), &over)?;
                super::train::run(cfg)
            }
            Command::Generate(args) => {
                let mut over = Overrides::default();
                args.common.fill(&mut over);
                args.data.fill(&mut over);
                args.artifacts.fill(&mut over);
                args.decode.fill(&mut over);
                over.max_decode_len = args.max_decode_len;
                let cfg =
                    RunConfig::resolve(RunConfig::default(), args.common.config.as_deref(), &over)?;
                super::generate::run(cfg, args.stdin)
            }
            Command::Evaluate(args) => {
                let mut over = Overrides::default();
                args.common.fill(&mut over);
                args.data.fill(&mut over);
                over.realizations = args.realizations.clone();
                over.err_top = args.err_top;
                let cfg =
                    RunConfig::resolve(RunConfig::default(), args.common.config.as_deref(), &over)?;
                super::evaluate::run(cfg)
            }
            Command::Sweep(args) => {
                let mut over = Overrides::default();
                args.common.fill(&mut over);
                args.data.fill(&mut over);
                args.train.fill(&mut over);
                args.decode.fill(&mut over);
                args.artifacts.fill(&mut over);
                over.axis = args.axis.clone();
                over.points = args.points.clone();
                over.err_top = args.err_top;
                // A sweep point is a single run; multi-seed selection stays
                // with `train`.
                let base = RunConfig { seeds: 1, ..RunConfig::default() };
                let cfg = RunConfig::resolve(base, args.common.config.as_deref(), &over)?;
                super::sweep::run(cfg)
            }
            Command::Gradcheck(args) => {
                let mut over = Overrides::default();
                args.common.fill(&mut over);
                over.eps = args.eps;
                over.tolerance = args.tolerance;
                over.instances = args.instances;
                over.check_seed = args.seed;
                let cfg =
                    RunConfig::resolve(RunConfig::default(), args.common.config.as_deref(), &over)?;
                super::gradcheck::run(cfg)
            }
        }
    }
}
