// Command-line front end: train, infer, eval, tradeoff, synth.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fwtm/baselines.hpp"
#include "fwtm/eval.hpp"
#include "fwtm/fw_solver.hpp"
#include "fwtm/io.hpp"
#include "fwtm/learning.hpp"
#include "fwtm/objectives.hpp"

namespace {

using namespace fwtm;

struct SolverFlags {
  int iters = 1000;
  double tol = 1e-6;
  std::optional<int> max_nnz;
  std::string start;  // empty = pick from the objective's domain

  void add_to(CLI::App* cmd, bool with_nnz_and_start) {
    cmd->add_option("--iters", iters, "Maximum iterations per document")->check(CLI::NonNegativeNumber);
    cmd->add_option("--tol", tol, "Relative objective change for convergence")->check(CLI::PositiveNumber);
    if (with_nnz_and_start) {
      cmd->add_option("--max-nnz", max_nnz, "Cap on nonzero topics per document")->check(CLI::PositiveNumber);
      cmd->add_option("--start", start, "Start point")->check(CLI::IsMember({"vertex", "barycenter"}));
    }
  }

  SolverConfig config() const {
    SolverConfig cfg;
    cfg.max_iters = iters;
    cfg.rel_tol = tol;
    cfg.max_nnz = max_nnz;
    if (start == "barycenter") cfg.start = StartPoint::Barycenter;
    return cfg;
  }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw Error(ErrorKind::InvalidArgument, "failed writing " + path);
}

UciCorpus read_corpus(const std::string& docword, const std::string& vocab) {
  auto loaded = load_uci_bow(docword, vocab);
  if (loaded.dropped_empty > 0)
    std::cerr << "warning: dropped " << loaded.dropped_empty << " empty document(s)\n";
  return loaded;
}

void require_matching_vocab(const Corpus& corpus, const TopicMatrix& beta) {
  if (corpus.vocab_size() != beta.vocab_size())
    throw Error(ErrorKind::InvalidConfig, "corpus has W = " + std::to_string(corpus.vocab_size()) +
                                              " but the model has V = " +
                                              std::to_string(beta.vocab_size()));
}

std::vector<int> parse_caps(const std::string& text) {
  std::vector<int> caps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      caps.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidConfig, "bad cap '" + item + "'");
    }
  }
  if (caps.empty()) throw Error(ErrorKind::InvalidConfig, "--caps is empty");
  return caps;
}

// ------------------------------------------------------------------ train

struct TrainArgs {
  std::string corpus, vocab, out, trace, m_step = "responsibility";
  std::size_t topics = 0;
  int em_iters = 50, threads = 1;
  double em_tol = 1e-4;
  std::uint64_t seed = 0;
  SolverFlags solver;
};

int run_train(const TrainArgs& a) {
  auto loaded = read_corpus(a.corpus, a.vocab);
  TrainConfig cfg;
  cfg.num_topics = a.topics;
  cfg.em_iters = a.em_iters;
  cfg.em_rel_tol = a.em_tol;
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  cfg.inner = a.solver.config();
  cfg.m_step = a.m_step == "hard" ? MStepKind::Hard : MStepKind::Responsibility;
  auto result = train(loaded.corpus, cfg);

  ModelFile model{result.beta,
                  {{"seed", std::to_string(a.seed)},
                   {"em_iters", std::to_string(result.log_likelihood.size())},
                   {"m_step", a.m_step}}};
  save_model(a.out, model);

  const std::string trace_path = a.trace.empty() ? a.out + ".trace.csv" : a.trace;
  auto trace = open_output(trace_path);
  trace.precision(17);
  trace << "iteration,log_likelihood\n";
  for (std::size_t i = 0; i < result.log_likelihood.size(); ++i)
    trace << i + 1 << ',' << result.log_likelihood[i] << '\n';
  finish(trace, trace_path);
  std::cerr << "trained K=" << a.topics << " in " << result.log_likelihood.size()
            << " EM iteration(s); final log-likelihood " << result.log_likelihood.back() << '\n';
  return 0;
}

// ------------------------------------------------------------------ infer

struct InferArgs {
  std::string model, corpus, vocab, objective = "ml", prior, out;
  std::optional<double> alpha;
  double lambda = 1.0;
  int threads = 1;
  SolverFlags solver;
};

int run_infer(const InferArgs& a) {
  if (a.objective == "ml" && (a.alpha || !a.prior.empty()))
    throw Error(ErrorKind::InvalidConfig, "--objective ml takes neither --alpha nor --prior");
  if (a.objective == "lda-map" && (!a.alpha || !a.prior.empty()))
    throw Error(ErrorKind::InvalidConfig, "--objective lda-map needs --alpha and no --prior");
  if (a.objective == "ctm" && (a.prior.empty() || a.alpha))
    throw Error(ErrorKind::InvalidConfig, "--objective ctm needs --prior and no --alpha");

  const auto model = load_model(a.model);
  const auto& beta = model.beta;
  auto loaded = read_corpus(a.corpus, a.vocab);
  require_matching_vocab(loaded.corpus, beta);
  const std::size_t k_count = beta.num_topics();

  std::optional<CtmPrior> prior;
  std::vector<double> alpha;
  if (a.alpha) alpha.assign(k_count, *a.alpha);
  if (!a.prior.empty()) {
    prior = load_ctm_prior(a.prior);
    if (prior->num_topics() != k_count)
      throw Error(ErrorKind::InvalidConfig, "prior is " + std::to_string(prior->num_topics()) +
                                                "-dimensional but the model has K = " +
                                                std::to_string(k_count));
  }

  ObjectiveFactory make = [&](const Document& d) -> ObjectivePtr {
    if (a.objective == "lda-map") {
      if (a.lambda == 1.0) return lda_map_objective(d, beta, alpha);
      return penalized_objective(ml_objective(d, beta), dirichlet_log_prior(alpha), a.lambda);
    }
    if (a.objective == "ctm") {
      if (a.lambda == 1.0) return ctm_map_objective(d, beta, *prior);
      return penalized_objective(ml_objective(d, beta), ctm_log_prior(*prior), a.lambda);
    }
    return ml_objective(d, beta);
  };

  SolverConfig cfg = a.solver.config();
  const auto probe = make(loaded.corpus[0]);
  if (a.solver.start.empty() && probe->domain() == Domain::InteriorOnly)
    cfg.start = StartPoint::Barycenter;

  std::vector<double> caps;
  if (prior && prior->mean()) {
    // log theta_k <= mu_k  <=>  theta_k <= exp(mu_k)
    for (Eigen::Index k = 0; k < prior->mean()->size(); ++k)
      caps.push_back(std::min(1.0, std::exp((*prior->mean())[k])));
  }

  InferenceFn infer = [&](const Document& d) {
    auto f = make(d);
    return caps.empty() ? fw_solve(*f, cfg).report : fw_solve_capped(*f, caps, cfg).report;
  };
  auto report = evaluate(loaded.corpus, beta, infer, a.threads);

  std::vector<TopicProportion> thetas;
  thetas.reserve(report.rows.size());
  for (const auto& row : report.rows) {
    if (a.solver.max_nnz && row.theta.nnz() > std::size_t(*a.solver.max_nnz))
      throw Error(ErrorKind::ValidationError, "document exceeded --max-nnz");
    thetas.push_back(row.theta);
  }
  auto out = open_output(a.out);
  write_theta(out, loaded.doc_ids, thetas);
  finish(out, a.out);
  std::cerr << "inferred " << thetas.size() << " document(s); perplexity " << report.perplexity
            << ", mean nnz " << report.mean_nnz << ", " << report.total_time << " s\n";
  return 0;
}

// ------------------------------------------------------------- eval/tradeoff

struct EvalArgs {
  std::string model, corpus, vocab, methods = "fw,folding,vb", out, caps;
  double alpha = 0.1;
  int threads = 1;
  SolverFlags solver;
};

int run_eval(const EvalArgs& a) {
  std::vector<Method> methods;
  {
    std::stringstream ss(a.methods);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        methods.push_back(parse_method(item));
      } catch (const Error& e) {
        throw Error(ErrorKind::InvalidConfig, e.what());
      }
    }
  }
  if (methods.empty()) throw Error(ErrorKind::InvalidConfig, "--methods is empty");
  const auto model = load_model(a.model);
  auto loaded = read_corpus(a.corpus, a.vocab);
  require_matching_vocab(loaded.corpus, model.beta);
  const std::vector<double> alpha(model.beta.num_topics(), a.alpha);
  const SolverConfig cfg = a.solver.config();

  auto rows = compare_methods(loaded.corpus, model.beta, alpha, cfg, methods, a.threads);
  auto out = open_output(a.out);
  write_report_header(out);
  for (const auto& r : rows) write_report_row(out, method_name(r.method), cfg.max_iters, r.report);
  finish(out, a.out);
  return 0;
}

int run_tradeoff(const EvalArgs& a) {
  const auto caps = parse_caps(a.caps);
  const auto model = load_model(a.model);
  auto loaded = read_corpus(a.corpus, a.vocab);
  require_matching_vocab(loaded.corpus, model.beta);
  const auto& beta = model.beta;
  auto rows = tradeoff_sweep(
      loaded.corpus, beta, [&](const Document& d) { return ml_objective(d, beta); }, caps,
      a.solver.config(), a.threads);

  auto emit = [&](std::ostream& out) {
    write_report_header(out);
    for (const auto& r : rows) write_report_row(out, "fw", r.cap, r.report);
  };
  if (a.out.empty()) {
    emit(std::cout);
    return std::cout ? 0 : 1;
  }
  auto out = open_output(a.out);
  emit(out);
  finish(out, a.out);
  return 0;
}

// ------------------------------------------------------------------ synth

struct SynthArgs {
  SyntheticConfig cfg;
  std::string prefix;
};

int run_synth(const SynthArgs& a) {
  auto synth = generate_synthetic_corpus(a.cfg);
  const std::string docword = a.prefix + ".docword.txt", vocab = a.prefix + ".vocab.txt",
                    model = a.prefix + ".model", theta = a.prefix + ".theta.txt";
  {
    auto out = open_output(docword);
    write_uci_bow(out, synth.corpus);
    finish(out, docword);
  }
  {
    auto out = open_output(vocab);
    write_vocab(out, synth.corpus.vocabulary());
    finish(out, vocab);
  }
  save_model(model, {synth.beta, {{"seed", std::to_string(a.cfg.seed)}, {"source", "synthetic"}}});
  {
    std::vector<std::size_t> ids(synth.theta.size());
    std::vector<TopicProportion> thetas;
    for (std::size_t d = 0; d < ids.size(); ++d) {
      ids[d] = d + 1;
      thetas.push_back(TopicProportion::from_dense(synth.theta[d]));
    }
    auto out = open_output(theta);
    write_theta(out, ids, thetas);
    finish(out, theta);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse topic-proportion inference by Frank-Wolfe"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Learn topics by EM with Frank-Wolfe E-steps");
  train_cmd->add_option("--corpus", train_args.corpus, "UCI docword file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--vocab", train_args.vocab, "UCI vocabulary file")->check(CLI::ExistingFile);
  train_cmd->add_option("--topics", train_args.topics, "Number of topics")->required()->check(CLI::PositiveNumber);
  train_cmd->add_option("--em-iters", train_args.em_iters, "Maximum EM iterations")->check(CLI::PositiveNumber);
  train_cmd->add_option("--em-tol", train_args.em_tol, "Relative likelihood change for EM convergence")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train_args.seed, "Initialization seed");
  train_cmd->add_option("--threads", train_args.threads, "E-step worker threads")->check(CLI::PositiveNumber);
  train_cmd->add_option("--m-step", train_args.m_step, "M-step form")->check(CLI::IsMember({"responsibility", "hard"}));
  train_cmd->add_option("--trace", train_args.trace, "Likelihood trace CSV (default <out>.trace.csv)");
  train_cmd->add_option("--out", train_args.out, "Model output path")->required();
  train_args.solver.add_to(train_cmd, false);

  InferArgs infer_args;
  auto* infer_cmd = app.add_subcommand("infer", "Infer sparse topic proportions");
  infer_cmd->add_option("--model", infer_args.model)->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--corpus", infer_args.corpus)->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--vocab", infer_args.vocab)->check(CLI::ExistingFile);
  infer_cmd->add_option("--objective", infer_args.objective)->check(CLI::IsMember({"ml", "lda-map", "ctm"}));
  infer_cmd->add_option("--alpha", infer_args.alpha, "Symmetric Dirichlet parameter (lda-map, >= 1)");
  infer_cmd->add_option("--prior", infer_args.prior, "Logistic-normal prior file (ctm)")->check(CLI::ExistingFile);
  infer_cmd->add_option("--lambda", infer_args.lambda, "Weight of the log-prior term")->check(CLI::NonNegativeNumber);
  infer_cmd->add_option("--threads", infer_args.threads)->check(CLI::PositiveNumber);
  infer_cmd->add_option("--out", infer_args.out, "Output file of 'docID k:w ...' rows")->required();
  infer_args.solver.add_to(infer_cmd, true);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Compare FW, folding-in and VB");
  eval_cmd->add_option("--model", eval_args.model)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--corpus", eval_args.corpus)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--vocab", eval_args.vocab)->check(CLI::ExistingFile);
  eval_cmd->add_option("--methods", eval_args.methods, "Comma-separated subset of fw,folding,vb");
  eval_cmd->add_option("--alpha", eval_args.alpha, "Symmetric Dirichlet parameter for VB")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--threads", eval_args.threads)->check(CLI::PositiveNumber);
  eval_cmd->add_option("--out", eval_args.out)->required();
  eval_args.solver.add_to(eval_cmd, false);

  EvalArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("tradeoff", "Sweep sparsity caps for FW");
  sweep_cmd->add_option("--model", sweep_args.model)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--corpus", sweep_args.corpus)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--vocab", sweep_args.vocab)->check(CLI::ExistingFile);
  sweep_cmd->add_option("--caps", sweep_args.caps, "Comma-separated increasing nonzero caps")->required();
  sweep_cmd->add_option("--threads", sweep_args.threads)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", sweep_args.out, "CSV path (default stdout)");
  sweep_args.solver.add_to(sweep_cmd, false);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
  synth_cmd->add_option("--topics", synth_args.cfg.num_topics)->required()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--vocab", synth_args.cfg.vocab_size)->required()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--docs", synth_args.cfg.num_docs)->required()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--len", synth_args.cfg.doc_length)->required()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth_args.cfg.seed);
  synth_cmd->add_option("--doc-alpha", synth_args.cfg.doc_concentration)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--topic-alpha", synth_args.cfg.topic_concentration)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--out-prefix", synth_args.prefix)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return run_train(train_args);
    if (*infer_cmd) return run_infer(infer_args);
    if (*eval_cmd) return run_eval(eval_args);
    if (*sweep_cmd) return run_tradeoff(sweep_args);
    if (*synth_cmd) return run_synth(synth_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::InvalidConfig ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
