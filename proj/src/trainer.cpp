// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace dggen {

namespace {

int distinct_node_count(std::span<const Interaction> batch) {
  std::unordered_set<int> seen;
  for (const Interaction& ev : batch) {
    seen.insert(ev.src);
    seen.insert(ev.dst);
  }
  return static_cast<int>(seen.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("config error: batch_size must be positive");
  if (epochs < 0) throw std::invalid_argument("config error: epochs must be nonnegative");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("config error: learning_rate must be positive");
  if (!(candidate_multiplier >= 1.0))
    throw std::invalid_argument("config error: candidate_multiplier must be >= 1");
  if (!(noise_sigma_start >= noise_sigma_end) || !(noise_sigma_end >= 0.0))
    throw std::invalid_argument(
        "config error: need noise_sigma_start >= noise_sigma_end >= 0");
}

double noise_sigma(long long step, long long total_steps, const TrainConfig& config) {
  if (config.disable_noise || config.noise_sigma_start <= 0.0) return 0.0;
  if (step <= 0) return config.noise_sigma_start;
  if (step >= total_steps) return config.noise_sigma_end;
  const double ratio = config.noise_sigma_end / config.noise_sigma_start;
  return config.noise_sigma_start *
         std::pow(ratio, static_cast<double>(step) / static_cast<double>(total_steps));
}

std::vector<int> sample_candidates(int num_nodes, std::span<const Interaction> batch,
                                   int target_size, Rng& rng) {
  std::vector<int> out;
  std::unordered_set<int> seen;
  for (const Interaction& ev : batch) {
    for (int node : {ev.src, ev.dst}) {
      if (node < 0 || node >= num_nodes)
        throw std::invalid_argument("sample_candidates: node id outside universe");
      if (seen.insert(node).second) out.push_back(node);
    }
  }
  if (static_cast<int>(out.size()) > target_size)
    throw std::invalid_argument(
        "sample_candidates: target_size smaller than batch node count");
  const int want = std::min(target_size, num_nodes);
  while (static_cast<int>(out.size()) < want) {
    const int extra = static_cast<int>(rng.uniform_below(num_nodes));
    if (seen.insert(extra).second) out.push_back(extra);
  }
  return out;
}

ad::Var batch_nll(ad::Tape& tape, const Model& model, const ModelRefs& refs,
                  const NodeStates& states, const AdvanceVars* adv,
                  std::span<const Interaction> batch,
                  const std::vector<int>& candidates, double prev_time,
                  double sigma, Rng* noise_rng) {
  if (batch.empty()) throw std::invalid_argument("batch_nll: empty batch");
  if (sigma > 0.0 && noise_rng == nullptr)
    throw std::invalid_argument("batch_nll: noise requested without an rng");
  const double t0 = batch.front().t;
  if (prev_time > t0)
    throw std::invalid_argument("batch_nll: prev_time after first batch event");

  std::unordered_map<int, int> slot;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (!slot.emplace(candidates[i], static_cast<int>(i)).second)
      throw std::invalid_argument("batch_nll: duplicate candidate");

  const int B = static_cast<int>(batch.size());
  std::vector<int> src_slots(B), dst_slots(B);
  for (int b = 0; b < B; ++b) {
    const auto src_it = slot.find(batch[b].src);
    const auto dst_it = slot.find(batch[b].dst);
    if (src_it == slot.end() || dst_it == slot.end())
      throw std::invalid_argument("batch_nll: batch node missing from candidates");
    src_slots[b] = src_it->second;
    dst_slots[b] = dst_it->second;
  }

  // Realized values: noise perturbs deltas (clamped at 0) and numerical
  // features; the perturbed value is both the teacher-forced input and the
  // likelihood target.  Draw order: per event, delta first, then features
  // in schema order.
  const FeatureSchema& schema = model.schema();
  const int n_feat = schema.size();
  RealizedBatch realized;
  realized.deltas.resize(B);
  realized.features.assign(n_feat, std::vector<double>(B));
  std::vector<std::vector<int>> cat_targets(n_feat);
  double prev = prev_time;
  for (int b = 0; b < B; ++b) {
    double delta = batch[b].t - prev;
    prev = batch[b].t;
    if (sigma > 0.0) delta = std::max(0.0, delta + sigma * noise_rng->normal());
    realized.deltas[b] = delta;
    for (int f = 0; f < n_feat; ++f) {
      double value = batch[b].features[f];
      if (schema.features[f].kind == FeatureKind::numerical) {
        if (sigma > 0.0) value += sigma * noise_rng->normal();
      } else {
        const double r = std::round(value);
        if (r != value || r < 0.0 || r >= schema.features[f].cardinality)
          throw std::domain_error("batch_nll: categorical value out of support");
        cat_targets[f].push_back(static_cast<int>(r));
      }
      realized.features[f][b] = value;
    }
  }

  const ad::Var z = embed_nodes(tape, model, refs, states, adv, candidates, t0);
  const ad::Var z_src = tape.gather_cols(z, src_slots);
  const ad::Var z_dst = tape.gather_cols(z, dst_slots);

  // Source term: one score row over candidates, replicated per event.
  const ad::Var src_row = reshape_scores_row(tape, refs, z);
  const ad::Var src_mat = tape.matmul(tape.transpose(src_row),
                                      tape.constant(ad::Mat::Ones(1, B)));
  ad::Var total = categorical_log_prob_row(tape, src_mat, src_slots);

  // Destination term: full candidate-by-event logit matrix.
  const ad::Var dst_logits = destination_logit_matrix(tape, refs, z_src, z);
  total = tape.add(total, categorical_log_prob_row(tape, dst_logits, dst_slots));

  // Time and feature terms from the sequence decoder.
  const ad::Var h0 = merge_h0(tape, refs, z_src, z_dst);
  const SeqHeads heads = build_time_msg(tape, model, refs, h0, realized);
  ad::Mat delta_row(1, B);
  for (int b = 0; b < B; ++b) delta_row(0, b) = realized.deltas[b];
  total = tape.add(total, tape.sub(tape.log_(heads.rate),
                                   tape.cmul(heads.rate,
                                             tape.constant(std::move(delta_row)))));
  for (int f = 0; f < n_feat; ++f) {
    if (schema.features[f].kind == FeatureKind::categorical) {
      total = tape.add(total,
                       categorical_log_prob_row(tape, heads.raw[f], cat_targets[f]));
    } else {
      total = tape.add(total,
                       gmm_log_density_row(tape, heads.raw[f], realized.features[f],
                                           model.config().gmm_components));
    }
  }
  return tape.neg(tape.sum_all(total));
}

TrainerSession::TrainerSession(Model model, int num_nodes, double origin_time,
                               TrainConfig config)
    : model_(std::move(model)),
      num_nodes_(num_nodes),
      origin_(origin_time),
      config_(config),
      states_(num_nodes, model_.config().d_mem, origin_time),
      adam_(config.learning_rate),
      rng_(Rng::stream(config.seed, "train")) {
  config_.validate();
  if (num_nodes_ < 1)
    throw std::invalid_argument("trainer: num_nodes must be positive");
  adam_.init(model_.params());
}

std::vector<EpochLog> TrainerSession::fit(const EventStream& stream, int run_epochs) {
  const std::vector<Interaction>& events = stream.interactions();
  if (events.empty()) throw std::invalid_argument("fit: empty stream");
  const long long n = static_cast<long long>(events.size());
  const int bs = config_.batch_size;
  const long long steps_per_epoch = (n + bs - 1) / bs;
  const long long total_steps =
      std::max<long long>(1, steps_per_epoch * config_.epochs);
  const int todo = run_epochs < 0
                       ? std::max(0, config_.epochs - epochs_done_)
                       : run_epochs;

  std::vector<EpochLog> logs;
  for (int e = 0; e < todo; ++e) {
    const auto t_begin = std::chrono::steady_clock::now();
    states_.reset(stream.origin_time());
    std::vector<Interaction> pending;
    double prev_time = stream.origin_time();
    double nll_sum = 0.0;
    double sigma_last = 0.0;

    for (long long at = 0; at < n; at += bs) {
      const auto batch =
          std::span(events).subspan(at, std::min<long long>(bs, n - at));
      const double sigma = noise_sigma(global_step_, total_steps, config_);

      ad::Tape tape(true);
      const ModelRefs refs = model_.make_refs(tape);
      const AdvanceVars adv = advance_states(tape, model_, refs, states_, pending);
      const int target = std::max(
          distinct_node_count(batch),
          static_cast<int>(std::llround(config_.candidate_multiplier *
                                        static_cast<double>(batch.size()))));
      const std::vector<int> candidates =
          sample_candidates(num_nodes_, batch, target, rng_);
      const ad::Var loss = batch_nll(tape, model_, refs, states_, &adv, batch,
                                     candidates, prev_time, sigma, &rng_);
      const double value = tape.val(loss)(0, 0);
      if (!std::isfinite(value))
        throw std::runtime_error(
            "training diverged: non-finite loss at epoch " +
            std::to_string(epochs_done_ + 1) + ", batch " +
            std::to_string(at / bs));
      tape.backward(loss);
      std::vector<ad::Mat> grads;
      grads.reserve(model_.params().count());
      for (int i = 0; i < model_.params().count(); ++i)
        grads.push_back(tape.grad_of(refs.leaves[i]));
      adam_.step(model_.params(), grads);

      nll_sum += value;
      sigma_last = sigma;
      pending.assign(batch.begin(), batch.end());
      prev_time = batch.back().t;
      ++global_step_;
    }

    ++epochs_done_;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
            .count();
    logs.push_back({epochs_done_, nll_sum / static_cast<double>(n), sigma_last, secs});

    // The stream's tail is folded into the memory once training finishes so
    // the session state reflects every event.
    if (epochs_done_ == config_.epochs && !pending.empty())
      update_memory(model_, states_, pending);
  }
  return logs;
}

double TrainerSession::stream_nll(const EventStream& stream, NodeStates& states,
                                  double prev_time) const {
  const std::vector<Interaction>& events = stream.interactions();
  if (events.empty()) throw std::invalid_argument("stream_nll: empty stream");
  std::vector<int> universe(num_nodes_);
  std::iota(universe.begin(), universe.end(), 0);

  const long long n = static_cast<long long>(events.size());
  const int bs = config_.batch_size;
  double sum = 0.0;
  double prev = prev_time;
  std::vector<Interaction> pending;
  for (long long at = 0; at < n; at += bs) {
    const auto batch =
        std::span(events).subspan(at, std::min<long long>(bs, n - at));
    ad::Tape tape(false);
    const ModelRefs refs = model_.make_refs(tape);
    const AdvanceVars adv = advance_states(tape, model_, refs, states, pending);
    const ad::Var loss = batch_nll(tape, model_, refs, states, &adv, batch,
                                   universe, prev, 0.0, nullptr);
    sum += tape.val(loss)(0, 0);
    pending.assign(batch.begin(), batch.end());
    prev = batch.back().t;
  }
  if (!pending.empty()) update_memory(model_, states, pending);
  return sum / static_cast<double>(n);
}

// --- checkpoint serialization (versioned binary, magic "DGG1") ---

namespace {

constexpr char kMagic[4] = {'D', 'G', 'G', '1'};
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::ostream& os, const void* p, std::size_t len) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
}

template <typename T>
void put(std::ostream& os, const T& v) {
  static_assert(std::is_trivially_copyable_v<T>);
  put_bytes(os, &v, sizeof(v));
}

void put_str(std::ostream& os, const std::string& s) {
  put<std::uint64_t>(os, s.size());
  put_bytes(os, s.data(), s.size());
}

void put_mat(std::ostream& os, const ad::Mat& m) {
  put<std::uint64_t>(os, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(m.cols()));
  put_bytes(os, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

void get_bytes(std::istream& is, void* p, std::size_t len) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
  if (!is) throw std::runtime_error("checkpoint error: truncated file");
}

template <typename T>
T get(std::istream& is) {
  static_assert(std::is_trivially_copyable_v<T>);
  T v;
  get_bytes(is, &v, sizeof(v));
  return v;
}

std::string get_str(std::istream& is) {
  const auto len = get<std::uint64_t>(is);
  if (len > (1u << 20)) throw std::runtime_error("checkpoint error: oversized string");
  std::string s(len, '\0');
  get_bytes(is, s.data(), len);
  return s;
}

ad::Mat get_mat(std::istream& is) {
  const auto rows = get<std::uint64_t>(is);
  const auto cols = get<std::uint64_t>(is);
  if (rows > (1u << 24) || cols > (1u << 24))
    throw std::runtime_error("checkpoint error: oversized matrix");
  ad::Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  get_bytes(is, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  return m;
}

}  // namespace

void TrainerSession::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint error: cannot open " + path);

  put_bytes(os, kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put_str(os, model_.schema().to_string());

  const ModelConfig& mc = model_.config();
  for (int v : {mc.d_mem, mc.d_emb, mc.d_time, mc.k_nbr, mc.attn_heads, mc.d_hidden,
                mc.d_seq_hidden, mc.d_seq_in, mc.gmm_components})
    put<std::int32_t>(os, v);
  put<std::uint8_t>(os, mc.disable_attention ? 1 : 0);

  put<std::int32_t>(os, config_.batch_size);
  put<std::int32_t>(os, config_.epochs);
  put<double>(os, config_.learning_rate);
  put<double>(os, config_.candidate_multiplier);
  put<double>(os, config_.noise_sigma_start);
  put<double>(os, config_.noise_sigma_end);
  put<std::uint64_t>(os, config_.seed);
  put<std::uint8_t>(os, config_.disable_noise ? 1 : 0);
  put<std::uint8_t>(os, config_.disable_attention ? 1 : 0);

  put<std::int32_t>(os, num_nodes_);
  put<double>(os, origin_);
  put<std::int64_t>(os, global_step_);
  put<std::int32_t>(os, epochs_done_);

  const ParamStore& params = model_.params();
  put<std::uint32_t>(os, static_cast<std::uint32_t>(params.count()));
  for (int i = 0; i < params.count(); ++i) {
    put_str(os, params.name(i));
    put_mat(os, params.value(i));
  }

  put<std::int64_t>(os, adam_.steps_taken());
  for (const ad::Mat& m : adam_.first_moments()) put_mat(os, m);
  for (const ad::Mat& v : adam_.second_moments()) put_mat(os, v);

  put<std::uint32_t>(os, static_cast<std::uint32_t>(states_.size()));
  for (int i = 0; i < states_.size(); ++i) {
    const NodeState& s = states_[i];
    put<std::uint64_t>(os, static_cast<std::uint64_t>(s.memory.size()));
    put_bytes(os, s.memory.data(),
              sizeof(double) * static_cast<std::size_t>(s.memory.size()));
    put<double>(os, s.last_update);
    put<std::uint64_t>(os, s.neighbors.size());
    for (const NeighborEntry& nb : s.neighbors) {
      put<std::int32_t>(os, nb.peer);
      put<double>(os, nb.t);
      put<std::uint64_t>(os, nb.features.size());
      put_bytes(os, nb.features.data(), sizeof(double) * nb.features.size());
    }
  }

  const std::array<std::uint64_t, 4> state = rng_.state();
  for (std::uint64_t w : state) put<std::uint64_t>(os, w);

  if (!os.good()) throw std::runtime_error("checkpoint error: write failed");
}

TrainerSession TrainerSession::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint error: cannot open " + path);

  char magic[4];
  get_bytes(is, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint error: bad magic");
  if (const auto version = get<std::uint32_t>(is); version != kVersion)
    throw std::runtime_error("checkpoint error: unsupported version " +
                             std::to_string(version));

  const FeatureSchema schema = FeatureSchema::parse(get_str(is));
  ModelConfig mc;
  mc.d_mem = get<std::int32_t>(is);
  mc.d_emb = get<std::int32_t>(is);
  mc.d_time = get<std::int32_t>(is);
  mc.k_nbr = get<std::int32_t>(is);
  mc.attn_heads = get<std::int32_t>(is);
  mc.d_hidden = get<std::int32_t>(is);
  mc.d_seq_hidden = get<std::int32_t>(is);
  mc.d_seq_in = get<std::int32_t>(is);
  mc.gmm_components = get<std::int32_t>(is);
  mc.disable_attention = get<std::uint8_t>(is) != 0;

  TrainConfig tc;
  tc.batch_size = get<std::int32_t>(is);
  tc.epochs = get<std::int32_t>(is);
  tc.learning_rate = get<double>(is);
  tc.candidate_multiplier = get<double>(is);
  tc.noise_sigma_start = get<double>(is);
  tc.noise_sigma_end = get<double>(is);
  tc.seed = get<std::uint64_t>(is);
  tc.disable_noise = get<std::uint8_t>(is) != 0;
  tc.disable_attention = get<std::uint8_t>(is) != 0;

  const int num_nodes = get<std::int32_t>(is);
  const double origin = get<double>(is);
  const long long global_step = get<std::int64_t>(is);
  const int epochs_done = get<std::int32_t>(is);

  Rng init_rng(0);
  TrainerSession session(Model(schema, mc, init_rng), num_nodes, origin, tc);

  ParamStore& params = session.model_.params();
  const auto count = get<std::uint32_t>(is);
  if (static_cast<int>(count) != params.count())
    throw std::runtime_error("checkpoint error: parameter count mismatch");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = get_str(is);
    ad::Mat m = get_mat(is);
    const int id = params.find(name);
    if (id < 0) throw std::runtime_error("checkpoint error: unknown parameter " + name);
    if (params.value(id).rows() != m.rows() || params.value(id).cols() != m.cols())
      throw std::runtime_error("checkpoint error: shape mismatch for " + name);
    params.value(id) = std::move(m);
  }

  session.adam_.set_steps_taken(get<std::int64_t>(is));
  for (ad::Mat& m : session.adam_.first_moments()) m = get_mat(is);
  for (ad::Mat& v : session.adam_.second_moments()) v = get_mat(is);

  const auto n_states = get<std::uint32_t>(is);
  if (static_cast<int>(n_states) != session.states_.size())
    throw std::runtime_error("checkpoint error: node state count mismatch");
  for (std::uint32_t i = 0; i < n_states; ++i) {
    NodeState& s = session.states_[static_cast<int>(i)];
    const auto mem_size = get<std::uint64_t>(is);
    s.memory.resize(static_cast<Eigen::Index>(mem_size));
    get_bytes(is, s.memory.data(), sizeof(double) * mem_size);
    s.last_update = get<double>(is);
    s.neighbors.resize(get<std::uint64_t>(is));
    for (NeighborEntry& nb : s.neighbors) {
      nb.peer = get<std::int32_t>(is);
      nb.t = get<double>(is);
      nb.features.resize(get<std::uint64_t>(is));
      get_bytes(is, nb.features.data(), sizeof(double) * nb.features.size());
    }
  }

  std::array<std::uint64_t, 4> rng_state;
  for (std::uint64_t& w : rng_state) w = get<std::uint64_t>(is);
  session.rng_.set_state(rng_state);
  session.global_step_ = global_step;
  session.epochs_done_ = epochs_done;
  return session;
}

}  // namespace dggen
