// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dggen/config_file.hpp"
#include "dggen/evaluation.hpp"
#include "dggen/event_store.hpp"
#include "dggen/generator.hpp"
#include "dggen/model.hpp"
#include "dggen/plots.hpp"
#include "dggen/rng.hpp"
#include "dggen/toy.hpp"
#include "dggen/trainer.hpp"

namespace dggen {
namespace {

std::string prefixed(const std::string& path, const char* env) {
  if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
  const char* base = std::getenv(env);
  if (base == nullptr || *base == '\0') return path;
  return (std::filesystem::path(base) / path).string();
}

std::string in_path(const std::string& p) { return prefixed(p, "DGGEN_DATA_DIR"); }
std::string out_path(const std::string& p) { return prefixed(p, "DGGEN_OUT_DIR"); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error("io error: cannot write '" + path + "'");
}

std::string fmt(const char* format, auto... values) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, values...);
  return buf;
}

// Unknown config keys are treated as typos; keys belonging to another
// command's section pass so one file can configure a whole pipeline.
void reject_unknown_keys(const KeyValueConfig& kv,
                         const std::vector<std::string>& foreign_prefixes) {
  std::string bad;
  for (const std::string& key : kv.unused()) {
    bool foreign = false;
    for (const std::string& prefix : foreign_prefixes)
      if (key.starts_with(prefix)) {
        foreign = true;
        break;
      }
    if (!foreign) bad += (bad.empty() ? "" : ", ") + key;
  }
  if (!bad.empty())
    throw std::invalid_argument("config: unknown key(s): " + bad);
}

struct MakeToyArgs {
  std::string out;
  ToyConfig toy;
};

int run_make_toy(const MakeToyArgs& a) {
  const EventStream stream = make_toy(a.toy);
  const std::string path = out_path(a.out);
  write_events(stream, path);
  std::cout << "wrote " << stream.size() << " events to " << path
            << " (nodes=" << stream.num_nodes()
            << ", schema=" << stream.schema().to_string() << ")\n";
  return 0;
}

struct IngestArgs {
  std::string data, schema, out, out_prefix;
  std::vector<double> split;  // f_train, f_val
};

int run_ingest(const IngestArgs& a) {
  const FeatureSchema schema = FeatureSchema::parse(a.schema);
  const EventStream stream = load_events(in_path(a.data), schema);
  std::cout << "loaded " << stream.size() << " events, " << stream.num_nodes()
            << " nodes, t in ["
            << fmt("%.6g, %.6g", stream.interactions().front().t,
                   stream.interactions().back().t)
            << "]\n";
  if (!a.out.empty()) {
    const std::string path = out_path(a.out);
    write_events(stream, path);
    std::cout << "wrote normalized copy to " << path << "\n";
  }
  if (!a.split.empty()) {
    const auto [train, val, test] =
        chronological_split(stream, a.split[0], a.split[1]);
    const std::string prefix = out_path(a.out_prefix);
    write_events(train, prefix + ".train.csv");
    write_events(val, prefix + ".val.csv");
    write_events(test, prefix + ".test.csv");
    std::cout << "split " << train.size() << "/" << val.size() << "/"
              << test.size() << " events into " << prefix
              << ".{train,val,test}.csv\n";
  }
  return 0;
}

struct TrainArgs {
  std::string data, schema, out, config, resume, log;
  int epochs = 0, batch_size = 0, run_epochs = -1;
  double lr = 0.0, candidate_multiplier = 0.0;
  double sigma_start = 0.0, sigma_end = 0.0;
  std::uint64_t seed = 0;
  bool disable_noise = false, disable_attention = false;
  const CLI::App* cmd = nullptr;  // for was-this-flag-given queries
};

int run_train(const TrainArgs& a) {
  KeyValueConfig kv;
  if (!a.config.empty()) kv = KeyValueConfig::load(in_path(a.config));

  ModelConfig mc;
  mc.d_mem = kv.get_int("model.d_mem", mc.d_mem);
  mc.d_emb = kv.get_int("model.d_emb", mc.d_emb);
  mc.d_time = kv.get_int("model.d_time", mc.d_time);
  mc.k_nbr = kv.get_int("model.k_nbr", mc.k_nbr);
  mc.attn_heads = kv.get_int("model.attn_heads", mc.attn_heads);
  mc.d_hidden = kv.get_int("model.d_hidden", mc.d_hidden);
  mc.d_seq_hidden = kv.get_int("model.d_seq_hidden", mc.d_seq_hidden);
  mc.d_seq_in = kv.get_int("model.d_seq_in", mc.d_seq_in);
  mc.gmm_components = kv.get_int("model.gmm_components", mc.gmm_components);

  TrainConfig tc;
  tc.batch_size = kv.get_int("train.batch_size", tc.batch_size);
  tc.epochs = kv.get_int("train.epochs", tc.epochs);
  tc.learning_rate = kv.get_double("train.learning_rate", tc.learning_rate);
  tc.candidate_multiplier =
      kv.get_double("train.candidate_multiplier", tc.candidate_multiplier);
  tc.noise_sigma_start =
      kv.get_double("train.noise_sigma_start", tc.noise_sigma_start);
  tc.noise_sigma_end = kv.get_double("train.noise_sigma_end", tc.noise_sigma_end);
  tc.seed = kv.get_uint64("train.seed", tc.seed);
  tc.disable_noise = kv.get_bool("train.disable_noise", tc.disable_noise);
  tc.disable_attention =
      kv.get_bool("train.disable_attention", tc.disable_attention);
  reject_unknown_keys(kv, {"generate."});

  const CLI::App& cmd = *a.cmd;
  if (cmd.count("--epochs")) tc.epochs = a.epochs;
  if (cmd.count("--batch-size")) tc.batch_size = a.batch_size;
  if (cmd.count("--lr")) tc.learning_rate = a.lr;
  if (cmd.count("--candidate-multiplier"))
    tc.candidate_multiplier = a.candidate_multiplier;
  if (cmd.count("--sigma-start")) tc.noise_sigma_start = a.sigma_start;
  if (cmd.count("--sigma-end")) tc.noise_sigma_end = a.sigma_end;
  if (cmd.count("--seed")) tc.seed = a.seed;
  if (a.disable_noise) tc.disable_noise = true;
  if (a.disable_attention) tc.disable_attention = true;

  TrainerSession session = [&] {
    if (!a.resume.empty()) return TrainerSession::load(in_path(a.resume));
    if (a.schema.empty())
      throw std::invalid_argument("train: --schema is required without --resume");
    const FeatureSchema schema = FeatureSchema::parse(a.schema);
    const EventStream stream = load_events(in_path(a.data), schema);
    mc.disable_attention = tc.disable_attention;
    Rng init_rng = Rng::stream(tc.seed, "init");
    Model model(schema, mc, init_rng);
    return TrainerSession(std::move(model), stream.num_nodes(),
                          stream.origin_time(), tc);
  }();

  const EventStream stream = load_events(in_path(a.data), session.model().schema());
  if (stream.num_nodes() != session.num_nodes())
    throw std::runtime_error(
        fmt("train: data holds %d nodes but the session expects %d (resume "
            "must use the original training file)",
            stream.num_nodes(), session.num_nodes()));

  std::cout << "training on " << stream.size() << " events, "
            << stream.num_nodes() << " nodes, schema "
            << session.model().schema().to_string() << "\n"
            << "epoch,mean_nll,sigma,wall_seconds\n";
  std::string log_lines = "epoch,mean_nll,sigma\n";
  const std::vector<EpochLog> logs = session.fit(stream, a.run_epochs);
  for (const EpochLog& l : logs) {
    std::cout << fmt("%d,%.9g,%.9g,%.3f\n", l.epoch, l.mean_nll, l.sigma,
                     l.wall_seconds);
    // Wall time stays off the log file so identical reruns stay byte-identical.
    log_lines += fmt("%d,%.9g,%.9g\n", l.epoch, l.mean_nll, l.sigma);
  }
  if (!a.log.empty()) write_text(out_path(a.log), log_lines);

  const std::string ckpt = out_path(a.out);
  session.save(ckpt);
  std::cout << "saved checkpoint to " << ckpt << " (epochs_done="
            << session.epochs_done() << ", global_step=" << session.global_step()
            << ")\n";
  return 0;
}

struct GenerateArgs {
  std::string ckpt, out, config;
  long long num = 0;
  int batch_size = 0, pool = 0;
  std::uint64_t seed = 0;
  const CLI::App* cmd = nullptr;
};

int run_generate(const GenerateArgs& a) {
  const TrainerSession session = TrainerSession::load(in_path(a.ckpt));

  KeyValueConfig kv;
  if (!a.config.empty()) kv = KeyValueConfig::load(in_path(a.config));
  GenerationConfig gc;
  gc.num_interactions = a.num;
  gc.batch_size = kv.get_int("generate.batch_size", gc.batch_size);
  gc.node_pool_size = kv.get_int("generate.node_pool_size", session.num_nodes());
  gc.seed = kv.get_uint64("generate.seed", gc.seed);
  reject_unknown_keys(kv, {"model.", "train."});
  const CLI::App& cmd = *a.cmd;
  if (cmd.count("--batch-size")) gc.batch_size = a.batch_size;
  if (cmd.count("--pool")) gc.node_pool_size = a.pool;
  if (cmd.count("--seed")) gc.seed = a.seed;

  GenerationStats stats;
  const EventStream synth = generate(session.model(), gc, &stats);
  const std::string path = out_path(a.out);
  write_events(synth, path);
  std::cout << "wrote " << synth.size() << " generated events to " << path
            << " (pool=" << gc.node_pool_size
            << ", self_loop_skips=" << stats.self_loop_skips
            << ", destination_resamples=" << stats.destination_resamples
            << ")\n";
  return 0;
}

struct EvaluateArgs {
  std::string real, synth, schema, report, plots;
  int snapshots = 10, bins = 100, pair_bins = 50;
};

int run_evaluate(const EvaluateArgs& a) {
  const FeatureSchema schema = FeatureSchema::parse(a.schema);
  // Literal file ids make the exact-triple overlap comparable across two
  // independently loaded files; every other statistic ignores labeling.
  const EventStream real = with_literal_ids(load_events(in_path(a.real), schema));
  const EventStream synth =
      with_literal_ids(load_events(in_path(a.synth), schema));
  const FidelityReport rep =
      evaluate_fidelity(real, synth, a.snapshots, a.bins, a.pair_bins);

  std::cout << fmt("mae: cc=%.6g md=%.6g nc=%.6g ple=%.6g wc=%.6g\n",
                   rep.mae.cc, rep.mae.md, rep.mae.nc, rep.mae.ple, rep.mae.wc)
            << fmt("js: single_mean=%.6g single_std=%.6g pairs_mean=%.6g "
                   "pairs_std=%.6g\n",
                   rep.js_single_mean, rep.js_single_std, rep.js_pairs_mean,
                   rep.js_pairs_std)
            << fmt("overlap=%.6g real_mean_md=%.6g\n", rep.overlap,
                   rep.real_mean_md);

  if (!a.report.empty()) {
    nlohmann::json j;
    j["snapshots"] = a.snapshots;
    j["mae"] = {{"cc", rep.mae.cc},
                {"md", rep.mae.md},
                {"nc", rep.mae.nc},
                {"ple", rep.mae.ple},
                {"wc", rep.mae.wc}};
    j["real_mean_md"] = rep.real_mean_md;
    j["overlap"] = rep.overlap;
    nlohmann::json singles = nlohmann::json::array();
    for (int f = 0; f < schema.size(); ++f)
      singles.push_back({{"feature", schema.features[f].name},
                         {"value", rep.js_single[f]}});
    nlohmann::json pairs = nlohmann::json::array();
    for (std::size_t k = 0; k < rep.pair_index.size(); ++k) {
      const auto [i, jx] = rep.pair_index[k];
      pairs.push_back({{"features", {schema.features[i].name,
                                     schema.features[jx].name}},
                       {"value", rep.js_pairs[k]}});
    }
    j["js"] = {{"single", singles},
               {"single_mean", rep.js_single_mean},
               {"single_std", rep.js_single_std},
               {"pairs", pairs},
               {"pairs_mean", rep.js_pairs_mean},
               {"pairs_std", rep.js_pairs_std}};
    const std::string path = out_path(a.report);
    write_text(path, j.dump(2) + "\n");
    std::cout << "report written to " << path << "\n";
  }

  if (!a.plots.empty()) {
    const std::filesystem::path dir(out_path(a.plots));
    std::filesystem::create_directories(dir);
    for (int f = 0; f < schema.size(); ++f)
      write_histogram_svg(
          rep.real_hist[f], rep.synth_hist[f], schema.features[f].name,
          (dir / ("feature_" + schema.features[f].name + ".svg")).string());
    if (schema.size() >= 1) {
      Eigen::MatrixXd js(schema.size(), schema.size());
      std::vector<std::string> names;
      for (int f = 0; f < schema.size(); ++f) {
        js(f, f) = rep.js_single[f];
        names.push_back(schema.features[f].name);
      }
      for (std::size_t k = 0; k < rep.pair_index.size(); ++k) {
        const auto [i, jx] = rep.pair_index[k];
        js(i, jx) = js(jx, i) = rep.js_pairs[k];
      }
      write_js_heatmap_svg(js, names, (dir / "js_heatmap.svg").string());
    }
    std::cout << "plots written to " << dir.string() << "\n";
  }
  return 0;
}

struct LinkpredArgs {
  std::string ckpt, train, test, report, sampling = "inductive";
  std::uint64_t seed = 0;
  int batch_size = 200;
};

int run_linkpred(const LinkpredArgs& a) {
  const TrainerSession session = TrainerSession::load(in_path(a.ckpt));
  const FeatureSchema& schema = session.model().schema();
  const EventStream train_stream = load_events(in_path(a.train), schema);
  if (train_stream.num_nodes() != session.num_nodes())
    throw std::runtime_error(
        fmt("linkpred: training data holds %d nodes but the checkpoint "
            "expects %d (pass the file the checkpoint was trained on)",
            train_stream.num_nodes(), session.num_nodes()));
  // A separate load assigns its own dense ids; realign through literal ids.
  const EventStream test_stream =
      align_to_universe(train_stream, load_events(in_path(a.test), schema));

  const NegativeSampling sampling = a.sampling == "standard"
                                        ? NegativeSampling::standard
                                        : NegativeSampling::inductive;
  const LinkPredictionResult r =
      link_prediction(session.model(), session.states(), train_stream,
                      test_stream, a.seed, a.batch_size, sampling);
  std::cout << fmt("ap=%.6g auroc=%.6g queries=%zu skipped=%lld\n", r.ap,
                   r.auroc, r.num_queries, r.skipped);
  if (!a.report.empty()) {
    const nlohmann::json j = {{"ap", r.ap},
                              {"auroc", r.auroc},
                              {"num_queries", r.num_queries},
                              {"skipped", r.skipped},
                              {"sampling", a.sampling}};
    const std::string path = out_path(a.report);
    write_text(path, j.dump(2) + "\n");
    std::cout << "report written to " << path << "\n";
  }
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"dggen: generative modeling of continuous-time interaction streams"};
  app.require_subcommand(1);

  MakeToyArgs toy;
  CLI::App* toy_cmd = app.add_subcommand(
      "make-toy", "Synthesize the planted-structure bipartite stream");
  toy_cmd->add_option("--out", toy.out, "output CSV path")->required();
  toy_cmd->add_option("--events", toy.toy.n_events, "number of events");
  toy_cmd->add_option("--seed", toy.toy.seed, "rng seed");
  toy_cmd->add_option("--src-nodes", toy.toy.n_src_nodes, "source node count");
  toy_cmd->add_option("--dst-nodes", toy.toy.n_dst_nodes, "destination node count");
  toy_cmd->add_option("--blocks", toy.toy.n_dst_blocks, "destination block count");
  toy_cmd->add_option("--rate", toy.toy.rate, "exponential inter-event rate");
  toy_cmd->add_option("--prefer", toy.toy.prefer_prob,
                      "probability of the preferred block");

  IngestArgs ingest;
  CLI::App* ingest_cmd = app.add_subcommand(
      "ingest", "Validate a CSV stream; optionally rewrite or split it");
  ingest_cmd->add_option("--data", ingest.data, "input CSV path")->required();
  ingest_cmd->add_option("--schema", ingest.schema,
                         "feature schema, e.g. cat:2,num")->required();
  ingest_cmd->add_option("--out", ingest.out,
                         "write a normalized copy (dense renumbered ids)");
  CLI::Option* split_opt =
      ingest_cmd->add_option("--split", ingest.split,
                             "chronological split fractions F_TRAIN F_VAL")
          ->expected(2);
  CLI::Option* prefix_opt = ingest_cmd->add_option(
      "--out-prefix", ingest.out_prefix, "prefix for .{train,val,test}.csv");
  split_opt->needs(prefix_opt);
  prefix_opt->needs(split_opt);

  TrainArgs train;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Fit a model and write a checkpoint");
  train.cmd = train_cmd;
  train_cmd->add_option("--data", train.data, "training CSV path")->required();
  train_cmd->add_option("--schema", train.schema,
                        "feature schema (required unless --resume)");
  train_cmd->add_option("--out", train.out, "checkpoint output path")->required();
  train_cmd->add_option("--config", train.config,
                        "key=value config file (model.* and train.* keys)");
  train_cmd->add_option("--resume", train.resume,
                        "resume from a checkpoint (schema/model flags ignored)");
  train_cmd->add_option("--epochs", train.epochs, "training epochs");
  train_cmd->add_option("--run-epochs", train.run_epochs,
                        "epochs to run now (-1 = all remaining)");
  train_cmd->add_option("--batch-size", train.batch_size, "events per step");
  train_cmd->add_option("--lr", train.lr, "Adam learning rate");
  train_cmd->add_option("--candidate-multiplier", train.candidate_multiplier,
                        "sampled-softmax candidates per batch event");
  train_cmd->add_option("--sigma-start", train.sigma_start,
                        "initial feature-noise level");
  train_cmd->add_option("--sigma-end", train.sigma_end,
                        "final feature-noise level");
  train_cmd->add_option("--seed", train.seed, "rng seed (init and train)");
  train_cmd->add_flag("--disable-noise", train.disable_noise,
                      "turn off feature noising");
  train_cmd->add_flag("--disable-attention", train.disable_attention,
                      "zero the attention block (memory-only embeddings)");
  train_cmd->add_option("--log", train.log, "write per-epoch records here");

  GenerateArgs gen;
  CLI::App* gen_cmd =
      app.add_subcommand("generate", "Sample a synthetic stream from a checkpoint");
  gen.cmd = gen_cmd;
  gen_cmd->add_option("--ckpt", gen.ckpt, "checkpoint path")->required();
  gen_cmd->add_option("--out", gen.out, "output CSV path")->required();
  gen_cmd->add_option("--num", gen.num, "number of events to generate")
      ->required();
  gen_cmd->add_option("--batch-size", gen.batch_size, "events per round");
  gen_cmd->add_option("--pool", gen.pool,
                      "fresh node pool size (default: training node count)");
  gen_cmd->add_option("--seed", gen.seed, "rng seed");
  gen_cmd->add_option("--config", gen.config,
                      "key=value config file (generate.* keys)");

  EvaluateArgs eval;
  CLI::App* eval_cmd = app.add_subcommand(
      "evaluate", "Compare a synthetic stream against a reference stream");
  eval_cmd->add_option("--real", eval.real, "reference CSV path")->required();
  eval_cmd->add_option("--synth", eval.synth, "synthetic CSV path")->required();
  eval_cmd->add_option("--schema", eval.schema, "feature schema")->required();
  eval_cmd->add_option("--report", eval.report, "write a JSON report here");
  eval_cmd->add_option("--snapshots", eval.snapshots, "time-bin snapshot count");
  eval_cmd->add_option("--bins", eval.bins, "1D histogram bins");
  eval_cmd->add_option("--pair-bins", eval.pair_bins, "2D histogram bins per axis");
  eval_cmd->add_option("--plots", eval.plots, "write SVG plots into this directory");

  LinkpredArgs lp;
  CLI::App* lp_cmd = app.add_subcommand(
      "linkpred", "Score held-out interactions against sampled negatives");
  lp_cmd->add_option("--ckpt", lp.ckpt, "checkpoint path")->required();
  lp_cmd->add_option("--train", lp.train, "training CSV (checkpoint's file)")
      ->required();
  lp_cmd->add_option("--test", lp.test, "held-out CSV path")->required();
  lp_cmd->add_option("--report", lp.report, "write a JSON report here");
  lp_cmd->add_option("--seed", lp.seed, "negative-sampling seed");
  lp_cmd->add_option("--batch-size", lp.batch_size,
                     "events folded into memory per chunk");
  lp_cmd->add_option("--sampling", lp.sampling, "negative-sampling protocol")
      ->check(CLI::IsMember({"inductive", "standard"}));

  try {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("dggen");
    for (const std::string& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (toy_cmd->parsed()) return run_make_toy(toy);
    if (ingest_cmd->parsed()) return run_ingest(ingest);
    if (train_cmd->parsed()) return run_train(train);
    if (gen_cmd->parsed()) return run_generate(gen);
    if (eval_cmd->parsed()) return run_evaluate(eval);
    if (lp_cmd->parsed()) return run_linkpred(lp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;  // unreachable: require_subcommand(1) forces a dispatch
}

}  // namespace dggen
