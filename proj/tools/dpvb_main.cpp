// Copyright 2026 The dpvb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "dpvb/accountant.hpp"
#include "dpvb/blr.hpp"
#include "dpvb/ce_vb.hpp"
#include "dpvb/data.hpp"
#include "dpvb/errors.hpp"
#include "dpvb/lda.hpp"
#include "dpvb/sbn.hpp"

namespace {

constexpr int kExitParse = 3;
constexpr int kExitDomain = 4;
constexpr int kExitNumeric = 5;

struct CommonFlags {
  std::uint64_t seed = 0;
  std::string out;
  bool timing = false;
  double tau0 = 1024.0;
  double kappa = 0.7;
  bool poisson = false;
};

void add_common(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--seed", flags->seed, "root seed for all random streams");
  cmd->add_option("--out", flags->out, "metrics CSV path");
  cmd->add_flag("--timing", flags->timing,
                "record wall-clock elapsed_ms in the CSV (off by default so "
                "a seed reproduces the file bit for bit)");
  cmd->add_option("--tau0", flags->tau0, "step-size schedule offset");
  cmd->add_option("--kappa", flags->kappa,
                  "step-size schedule exponent; 0 means rho = 1");
  cmd->add_flag("--poisson", flags->poisson,
                "Poisson subsampling instead of fixed-size batches");
}

dpvb::ce_vb::VipsConfig make_config(const CommonFlags& flags,
                                    std::size_t batch, long iters, double z,
                                    double delta, bool batch_mode) {
  dpvb::ce_vb::VipsConfig config;
  config.minibatch_size = batch;
  config.max_iters = iters;
  config.noise_multiplier = z;
  config.delta_target = delta;
  config.seed = flags.seed;
  config.schedule = batch_mode ? dpvb::ce_vb::StepSchedule{0.0, 0.0}
                               : dpvb::ce_vb::StepSchedule{flags.tau0,
                                                           flags.kappa};
  config.sampler_mode = flags.poisson ? dpvb::ce_vb::SamplerMode::kPoisson
                                      : dpvb::ce_vb::SamplerMode::kFixed;
  return config;
}

void finish_run(const dpvb::ce_vb::RunResult& run, const CommonFlags& flags,
                double delta, double noise_multiplier) {
  if (!flags.out.empty()) {
    std::ofstream out(flags.out);
    if (!out) throw dpvb::parse_error("cannot write '" + flags.out + "'", 0);
    run.trace.write_csv(out, flags.timing);
  }
  const double eps = noise_multiplier > 0.0 ? run.final_epsilon : 0.0;
  std::printf("epsilon=%.6g delta=%.6g\n", eps, delta);
}

int run_accountant(double sampling_rate, double noise_multiplier, long steps,
                   int releases_per_step, double delta, bool calibrate,
                   double epsilon, bool csv) {
  if (calibrate) {
    const double z = dpvb::accountant::calibrate_noise_multiplier(
        sampling_rate, steps, releases_per_step, {epsilon, delta});
    std::printf("sigma=%.6g\n", z);
    if (csv)
      std::printf("%.10g,%.10g,%ld,%d,%.10g,%.10g\n", sampling_rate, z, steps,
                  releases_per_step, delta, epsilon);
    return 0;
  }
  dpvb::accountant::PrivacyLedger ledger;
  ledger.record_releases({noise_multiplier, sampling_rate},
                         steps * releases_per_step);
  const double eps =
      dpvb::accountant::epsilon_for_delta(ledger.composed(), delta);
  std::printf("epsilon=%.6g\n", eps);
  if (csv)
    std::printf("%.10g,%.10g,%ld,%d,%.10g,%.10g\n", sampling_rate,
                noise_multiplier, steps, releases_per_step, delta, eps);
  return 0;
}

// Deterministic holdout split: the shuffled tail of the corpus.
std::pair<dpvb::lda::Corpus, dpvb::lda::Corpus> split_corpus(
    const dpvb::lda::Corpus& corpus, double holdout_fraction,
    std::uint64_t seed) {
  const std::size_t n = corpus.size();
  const std::size_t held =
      static_cast<std::size_t>(holdout_fraction * static_cast<double>(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  dpvb::Rng shuffle = dpvb::Rng(seed).child("holdout");
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + shuffle.uniform_index(n - i);
    std::swap(order[i], order[j]);
  }
  dpvb::lda::Corpus train(corpus.vocab_size(), corpus.doc_cap());
  dpvb::lda::Corpus eval(corpus.vocab_size(), corpus.doc_cap());
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n - held)
      train.add_doc(corpus.doc(order[i]));
    else
      eval.add_doc(corpus.doc(order[i]));
  }
  return {std::move(train), std::move(eval)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dpvb: differentially private variational Bayes (moments-accountant "
      "ledger, calibrated Gaussian mechanisms, LDA / logistic regression / "
      "sigmoid belief network models)"};
  app.require_subcommand(1);
  app.set_config("--config");

  // accountant ------------------------------------------------------------
  auto* acct = app.add_subcommand(
      "accountant", "compose privacy curves or calibrate a noise multiplier");
  double a_rate = 1.0, a_z = 0.0, a_delta = 0.0, a_eps = 0.0;
  long a_steps = 1;
  int a_releases = 1;
  bool a_calibrate = false, a_csv = false;
  acct->add_option("--sampling-rate", a_rate, "per-record inclusion rate");
  acct->add_option("--noise-multiplier", a_z, "noise std over L2 sensitivity");
  acct->add_option("--steps", a_steps, "iterations");
  acct->add_option("--releases-per-step", a_releases, "releases per step");
  acct->add_option("--delta", a_delta, "target delta")->required();
  acct->add_flag("--calibrate", a_calibrate,
                 "find the smallest multiplier meeting --epsilon");
  acct->add_option("--epsilon", a_eps, "target epsilon for --calibrate");
  acct->add_flag("--csv", a_csv, "also print a machine-readable CSV row");

  // lda ---------------------------------------------------------------------
  auto* lda_cmd = app.add_subcommand("lda", "topic model training");
  CommonFlags lda_flags;
  std::string lda_corpus_path, lda_vocab_path, lda_synth;
  int lda_topics = 0, lda_doc_cap = 0, lda_top_words = 0;
  std::size_t lda_batch = 0;
  long lda_iters = 100;
  double lda_z = 0.0, lda_delta = 1e-4, lda_alpha = 0.0, lda_eta = 0.0;
  double lda_holdout = 0.1;
  lda_cmd->add_option("corpus", lda_corpus_path,
                      "UCI bag-of-words corpus file");
  lda_cmd->add_option("--vocab", lda_vocab_path, "vocabulary file");
  lda_cmd->add_option("--synth", lda_synth,
                      "synthetic corpus 'D,V,K' instead of a file");
  lda_cmd->add_option("--topics", lda_topics, "number of topics")->required();
  lda_cmd->add_option("--batch", lda_batch, "mini-batch size (0 = full)");
  lda_cmd->add_option("--iters", lda_iters, "iterations");
  lda_cmd->add_option("--noise-multiplier", lda_z, "0 = non-private");
  lda_cmd->add_option("--delta", lda_delta, "privacy delta");
  lda_cmd->add_option("--doc-cap", lda_doc_cap, "max tokens per document");
  lda_cmd->add_option("--alpha", lda_alpha, "doc-topic prior (0 = 1/K)");
  lda_cmd->add_option("--eta", lda_eta, "topic-word prior (0 = 1/K)");
  lda_cmd->add_option("--holdout-fraction", lda_holdout,
                      "held-out fraction for the perplexity metric");
  lda_cmd->add_option("--top-words", lda_top_words,
                      "print the top words per topic after training");
  add_common(lda_cmd, &lda_flags);

  // blr ---------------------------------------------------------------------
  auto* blr_cmd =
      app.add_subcommand("blr", "Bayesian logistic regression training");
  CommonFlags blr_flags;
  std::string blr_path, blr_test_path, blr_synth;
  std::size_t blr_batch = 0;
  long blr_iters = 100;
  double blr_z = 0.0, blr_delta = 1e-4, blr_a0 = 1.0, blr_b0 = 1.0;
  blr_cmd->add_option("data", blr_path, "LIBSVM-style training file");
  blr_cmd->add_option("--synth", blr_synth,
                      "synthetic data 'N,d,margin' instead of a file");
  blr_cmd->add_option("--batch", blr_batch, "mini-batch size (0 = full)");
  blr_cmd->add_option("--iters", blr_iters, "iterations");
  blr_cmd->add_option("--noise-multiplier", blr_z, "0 = non-private");
  blr_cmd->add_option("--delta", blr_delta, "privacy delta");
  blr_cmd->add_option("--a0", blr_a0, "Gamma prior shape");
  blr_cmd->add_option("--b0", blr_b0, "Gamma prior rate");
  blr_cmd->add_option("--test-file", blr_test_path, "held-out LIBSVM file");
  add_common(blr_cmd, &blr_flags);

  // sbn ---------------------------------------------------------------------
  auto* sbn_cmd =
      app.add_subcommand("sbn", "sigmoid belief network training");
  CommonFlags sbn_flags;
  std::string sbn_path, sbn_bars;
  int sbn_hidden = 4, sbn_sweeps = 3;
  std::size_t sbn_batch = 0;
  long sbn_iters = 100;
  double sbn_z = 0.0, sbn_delta = 1e-4;
  sbn_cmd->add_option("data", sbn_path, "dense 0/1 CSV, one row per image");
  sbn_cmd->add_option("--synthetic-bars", sbn_bars,
                      "bars data 'JxK,N' instead of a file");
  sbn_cmd->add_option("--hidden", sbn_hidden, "hidden units K");
  sbn_cmd->add_option("--batch", sbn_batch, "mini-batch size (0 = full)");
  sbn_cmd->add_option("--iters", sbn_iters, "iterations");
  sbn_cmd->add_option("--noise-multiplier", sbn_z, "0 = non-private");
  sbn_cmd->add_option("--delta", sbn_delta, "privacy delta");
  sbn_cmd->add_option("--sweeps", sbn_sweeps, "z coordinate-ascent sweeps");
  add_common(sbn_cmd, &sbn_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (acct->parsed()) {
      if (a_calibrate && a_eps <= 0.0)
        throw std::domain_error("--calibrate requires --epsilon > 0");
      if (!a_calibrate && a_z <= 0.0)
        throw std::domain_error(
            "--noise-multiplier > 0 required unless --calibrate is given");
      return run_accountant(a_rate, a_z, a_steps, a_releases, a_delta,
                            a_calibrate, a_eps, a_csv);
    }

    if (lda_cmd->parsed()) {
      if (lda_corpus_path.empty() == lda_synth.empty())
        throw std::domain_error("lda: give exactly one of corpus or --synth");
      dpvb::lda::Corpus raw = [&] {
        if (!lda_synth.empty()) {
          int d, v, k;
          if (std::sscanf(lda_synth.c_str(), "%d,%d,%d", &d, &v, &k) != 3)
            throw std::domain_error("lda: --synth expects 'D,V,K'");
          return dpvb::data::synth_corpus(d, v, k, lda_flags.seed);
        }
        return dpvb::data::load_bow_file(lda_corpus_path);
      }();
      if (lda_doc_cap > 0)
        raw = dpvb::data::apply_doc_cap(raw, lda_doc_cap, lda_flags.seed);
      auto [train, eval] = split_corpus(raw, lda_holdout, lda_flags.seed);
      const bool full_batch = lda_batch == 0 || lda_batch >= train.size();
      dpvb::lda::LdaModel model(
          train, eval.size() > 0 ? &eval : nullptr,
          {.topics = lda_topics, .alpha = lda_alpha, .eta = lda_eta,
           .init_seed = lda_flags.seed});
      const auto config = make_config(lda_flags, full_batch ? 0 : lda_batch,
                                      lda_iters, lda_z, lda_delta,
                                      full_batch);
      const auto run = dpvb::ce_vb::run_vips(model, config);
      if (lda_top_words > 0) {
        const auto vocab = lda_vocab_path.empty()
                               ? std::vector<std::string>{}
                               : dpvb::data::load_vocab_file(lda_vocab_path);
        const auto& lambda = model.state().lambda;
        for (Eigen::Index k = 0; k < lambda.rows(); ++k) {
          std::vector<int> ids(lambda.cols());
          for (Eigen::Index v = 0; v < lambda.cols(); ++v)
            ids[v] = static_cast<int>(v);
          std::partial_sort(ids.begin(),
                            ids.begin() + std::min<long>(lda_top_words,
                                                         ids.size()),
                            ids.end(), [&](int a, int b) {
                              return lambda(k, a) > lambda(k, b);
                            });
          std::printf("topic %ld:", static_cast<long>(k));
          for (int i = 0; i < lda_top_words && i < lambda.cols(); ++i)
            if (ids[i] < static_cast<int>(vocab.size()))
              std::printf(" %s", vocab[ids[i]].c_str());
            else
              std::printf(" w%d", ids[i]);
          std::printf("\n");
        }
      }
      finish_run(run, lda_flags, lda_delta, lda_z);
      return 0;
    }

    if (blr_cmd->parsed()) {
      if (blr_path.empty() == blr_synth.empty())
        throw std::domain_error("blr: give exactly one of data or --synth");
      std::optional<dpvb::blr::BlrDataset> train, test;
      if (!blr_synth.empty()) {
        int n, d;
        double margin;
        if (std::sscanf(blr_synth.c_str(), "%d,%d,%lf", &n, &d, &margin) != 3)
          throw std::domain_error("blr: --synth expects 'N,d,margin'");
        // One draw split so both sides share the planted separator.
        const int held = std::max(1, n / 4);
        const auto all =
            dpvb::data::synth_blr(n + held, d, margin, blr_flags.seed);
        Eigen::MatrixXd xs(n + held, d);
        Eigen::VectorXd ys(n + held);
        for (Eigen::Index i = 0; i < n + held; ++i) {
          xs.row(i) = all.input(i);
          ys[i] = all.label(i);
        }
        train.emplace(xs.topRows(n), ys.head(n));
        test.emplace(xs.bottomRows(held), ys.tail(held));
      } else {
        train.emplace(dpvb::data::load_libsvm_file(blr_path));
        if (train->scale_factor() != 1.0)
          std::fprintf(stderr, "note: inputs scaled into the unit ball by %g\n",
                       train->scale_factor());
        if (!blr_test_path.empty())
          test.emplace(dpvb::data::load_libsvm_file(
              blr_test_path, static_cast<int>(train->dim())));
      }
      const bool full_batch =
          blr_batch == 0 ||
          blr_batch >= static_cast<std::size_t>(train->size());
      dpvb::blr::BlrModel model(
          *train, test ? &*test : nullptr,
          {.a0 = blr_a0, .b0 = blr_b0, .metric_seed = blr_flags.seed});
      const auto config = make_config(blr_flags, full_batch ? 0 : blr_batch,
                                      blr_iters, blr_z, blr_delta,
                                      full_batch);
      const auto run = dpvb::ce_vb::run_vips(model, config);
      finish_run(run, blr_flags, blr_delta, blr_z);
      return 0;
    }

    if (sbn_cmd->parsed()) {
      if (sbn_path.empty() == sbn_bars.empty())
        throw std::domain_error(
            "sbn: give exactly one of data or --synthetic-bars");
      std::optional<dpvb::sbn::SbnData> train, test;
      if (!sbn_bars.empty()) {
        int j, k, n;
        if (std::sscanf(sbn_bars.c_str(), "%dx%d,%d", &j, &k, &n) != 3)
          throw std::domain_error("sbn: --synthetic-bars expects 'JxK,N'");
        train.emplace(dpvb::data::synth_bars(j, k, n, sbn_flags.seed));
        test.emplace(
            dpvb::data::synth_bars(j, k, std::max(1, n / 4),
                                   sbn_flags.seed + 1));
      } else {
        train.emplace(dpvb::data::load_binary_csv_file(sbn_path));
      }
      const bool full_batch =
          sbn_batch == 0 ||
          sbn_batch >= static_cast<std::size_t>(train->size());
      dpvb::sbn::SbnModel model(*train, test ? &*test : nullptr,
                                {.hidden = sbn_hidden, .sweeps = sbn_sweeps,
                                 .batch_mode = full_batch,
                                 .init_seed = sbn_flags.seed});
      const auto config = make_config(sbn_flags, full_batch ? 0 : sbn_batch,
                                      sbn_iters, sbn_z, sbn_delta,
                                      full_batch);
      const auto run = dpvb::ce_vb::run_vips(model, config);
      finish_run(run, sbn_flags, sbn_delta, sbn_z);
      return 0;
    }
  } catch (const dpvb::parse_error& e) {
    std::fprintf(stderr, "error: parse: %s\n", e.what());
    return kExitParse;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: domain: %s\n", e.what());
    return kExitDomain;
  } catch (const dpvb::calibration_error& e) {
    std::fprintf(stderr, "error: calibration: %s\n", e.what());
    return kExitNumeric;
  } catch (const dpvb::numeric_error& e) {
    std::fprintf(stderr, "error: numeric: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
