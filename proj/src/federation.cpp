#include "mmffc/federation.hpp"

#include "mmffc/fitness.hpp"
#include "mmffc/niching.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace mmffc {

namespace {

class Writer {
 public:
  void put_int(std::int32_t v) { put(static_cast<std::uint32_t>(v)); }
  void put_real(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void put_vector(const Eigen::VectorXd& v) {
    for (Index d = 0; d < v.size(); ++d) put_real(v[d]);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  template <typename U>
  void put(U v) {
    for (std::size_t k = 0; k < sizeof(U); ++k) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::int32_t get_int() { return static_cast<std::int32_t>(get<std::uint32_t>()); }
  double get_real() { return std::bit_cast<double>(get<std::uint64_t>()); }
  Eigen::VectorXd get_vector(Index n) {
    Eigen::VectorXd v(n);
    for (Index d = 0; d < n; ++d) v[d] = get_real();
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  template <typename U>
  U get() {
    if (pos_ + sizeof(U) > bytes_.size()) throw std::invalid_argument("truncated message");
    U v = 0;
    for (std::size_t k = 0; k < sizeof(U); ++k) v |= static_cast<U>(static_cast<U>(bytes_[pos_ + k]) << (8 * k));
    pos_ += sizeof(U);
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void evaluate_stale(ClientState& state, const ProgramShape& shape, int bins) {
  for (auto& agent : state.population)
    if (!agent.fitness) agent.fitness = evaluate_program(agent.position, shape, state.data, bins);
}

}  // namespace

void RunConfig::validate() const {
  if (clients < 2) throw std::invalid_argument("federation requires M >= 2 clients");
  if (population < 1) throw std::invalid_argument("population must be positive");
  if (local_iters < 1) throw std::invalid_argument("local_iters must be positive");
  if (global_rounds < 1) throw std::invalid_argument("at least 1 round is required");
  if (ns_min < 1 || ns_min > ns_max) throw std::invalid_argument("niche size range must satisfy 1 <= ns_min <= ns_max");
  if (ns_max > population) throw std::invalid_argument("ns_max must not exceed the population size");
  if (depth < 1) throw std::invalid_argument("program depth must be >= 1");
  if (arity < 2) throw std::invalid_argument("operator arity must be >= 2");
  if (operators.empty()) throw std::invalid_argument("operator set is empty");
  if (bins < 2) throw std::invalid_argument("bins must be >= 2");
  if (beta_max < 0) throw std::invalid_argument("beta_max must be >= 0");
  if (!(igr_threshold >= 0.0)) throw std::invalid_argument("igr_threshold must be >= 0");
  GsaParams{g0, alpha, epsilon, 1}.validate();
}

ProgramShape RunConfig::shape(Index n_features) const {
  ProgramShape s{n_features, depth, arity, operators};
  s.validate();
  return s;
}

int RunConfig::resolved_beta_max(Index n_features) const {
  if (beta_max > 0) return beta_max;
  return std::max<int>(3, static_cast<int>((n_features + 3) / 4));
}

std::vector<std::uint8_t> encode(const ChampionReport& report) {
  Writer w;
  w.put_int(report.client_id);
  for (const auto& c : report.champions) {
    w.put_vector(c.position);
    w.put_vector(c.velocity);
    w.put_real(c.fitness);
    w.put_int(c.local_index);
  }
  return w.take();
}

std::vector<std::uint8_t> encode_update(int client_id, const std::vector<UpdateEntry>& entries) {
  Writer w;
  w.put_int(client_id);
  for (const auto& e : entries) {
    w.put_vector(e.position);
    w.put_vector(e.velocity);
    w.put_int(e.local_index);
  }
  return w.take();
}

ChampionReport decode_report(std::span<const std::uint8_t> bytes, Index dimension, int n_champions) {
  Reader r(bytes);
  ChampionReport report;
  report.client_id = r.get_int();
  for (int k = 0; k < n_champions; ++k) {
    ChampionEntry c;
    c.position = r.get_vector(dimension);
    c.velocity = r.get_vector(dimension);
    c.fitness = r.get_real();
    c.local_index = r.get_int();
    report.champions.push_back(std::move(c));
  }
  if (!r.done()) throw std::invalid_argument("trailing bytes in report");
  return report;
}

std::size_t wire_size(const ChampionReport& report) { return encode(report).size(); }

std::size_t wire_size(const GlobalUpdate& update) {
  std::size_t n = 0;
  for (const auto& [id, entries] : update.clients) n += encode_update(id, entries).size();
  return n;
}

ClientState init_client(int client_id, Dataset local_train, const RunConfig& config) {
  if (local_train.n_samples() == 0) throw std::invalid_argument("client " + std::to_string(client_id) + " has no data");
  const ProgramShape shape = config.shape(local_train.n_features());
  ClientState state;
  state.client_id = client_id;
  state.data = std::move(local_train);
  Rng rng = Rng::stream(config.seed, StreamTag::kPopulationInit, {static_cast<std::uint64_t>(client_id)});
  state.population.reserve(static_cast<std::size_t>(config.population));
  for (int k = 0; k < config.population; ++k) state.population.push_back(Agent::at(random_position(shape, rng)));
  return state;
}

double evaluate_program(const Eigen::Ref<const Eigen::VectorXd>& position, const ProgramShape& shape,
                        const Dataset& data, int bins) {
  const DecodedProgram dp = decode(position, shape);
  if (!dp.has_selected_feature()) return 0.0;
  const Eigen::VectorXd values = evaluate_feature(build_tree(dp, shape), data.X);
  return igr(values, data.y, data.n_classes(), bins);
}

ChampionReport local_phase(ClientState& state, int n_niches, int niche_size, const std::vector<UpdateEntry>& incoming,
                           int round, const RunConfig& config) {
  if (state.data.n_samples() == 0) throw std::invalid_argument("empty local dataset");
  const ProgramShape shape = config.shape(state.data.n_features());
  const auto s = static_cast<int>(state.population.size());
  if (niche_count(s, niche_size) != n_niches) throw std::invalid_argument("niche count does not match niche size");

  for (const auto& e : incoming) {
    if (e.local_index < 0 || e.local_index >= s)
      throw std::out_of_range("update index " + std::to_string(e.local_index) + " outside the local population");
    auto& agent = state.population[static_cast<std::size_t>(e.local_index)];
    agent.position = e.position;
    agent.velocity = e.velocity;
    agent.fitness.reset();
  }

  const auto cid = static_cast<std::uint64_t>(state.client_id);
  const auto rid = static_cast<std::uint64_t>(round);
  std::vector<DecodedProgram> decoded;
  decoded.reserve(state.population.size());
  for (const auto& a : state.population) decoded.push_back(decode(a.position, shape));
  Rng cluster_rng = Rng::stream(config.seed, StreamTag::kClustering, {cid, rid});
  const NicheAssignment assignment = crowding_cluster(decoded, niche_size, shape, cluster_rng);

  const GsaParams params{config.g0, config.alpha, config.epsilon, config.local_iters};
  const GeneBox box = GeneBox::of(shape);
  std::vector<Rng> niche_rngs;
  for (std::size_t k = 0; k < assignment.niches.size(); ++k)
    niche_rngs.push_back(Rng::stream(config.seed, StreamTag::kNicheStep, {cid, rid, static_cast<std::uint64_t>(k)}));

  std::vector<Agent> members;
  for (int it = 0; it < config.local_iters; ++it) {
    evaluate_stale(state, shape, config.bins);
    for (std::size_t k = 0; k < assignment.niches.size(); ++k) {
      const auto& niche = assignment.niches[k];
      members.clear();
      for (Index i : niche) members.push_back(state.population[static_cast<std::size_t>(i)]);
      step(members, it, params, box, niche_rngs[k]);
      for (std::size_t m = 0; m < niche.size(); ++m) state.population[static_cast<std::size_t>(niche[m])] = members[m];
    }
  }
  evaluate_stale(state, shape, config.bins);

  ChampionReport report;
  report.client_id = state.client_id;
  for (const auto& niche : assignment.niches) {
    Index best = niche.front();
    for (Index i : niche) {
      const double fi = *state.population[static_cast<std::size_t>(i)].fitness;
      const double fb = *state.population[static_cast<std::size_t>(best)].fitness;
      if (fi > fb || (fi == fb && i < best)) best = i;
    }
    const auto& agent = state.population[static_cast<std::size_t>(best)];
    report.champions.push_back({agent.position, agent.velocity, *agent.fitness, static_cast<int>(best)});
  }
  return report;
}

GlobalUpdate global_phase(const std::vector<ChampionReport>& reports, int round, const RunConfig& config,
                          const GeneBox& box, int n_niches) {
  if (static_cast<int>(reports.size()) != config.clients)
    throw std::invalid_argument("expected " + std::to_string(config.clients) + " reports, got " +
                                std::to_string(reports.size()));
  std::vector<Agent> pool;
  std::vector<std::pair<int, int>> owner;
  for (const auto& r : reports) {
    if (static_cast<int>(r.champions.size()) != n_niches)
      throw std::invalid_argument("client " + std::to_string(r.client_id) + " reported " +
                                  std::to_string(r.champions.size()) + " champions, expected " +
                                  std::to_string(n_niches));
    for (const auto& c : r.champions) {
      pool.push_back(Agent{c.position, c.velocity, c.fitness});
      owner.emplace_back(r.client_id, c.local_index);
    }
  }

  const GsaParams params{config.g0, config.alpha, config.epsilon, config.global_rounds};
  Rng rng = Rng::stream(config.seed, StreamTag::kGlobalStep, {static_cast<std::uint64_t>(round)});
  step(pool, round, params, box, rng);

  GlobalUpdate update;
  for (std::size_t k = 0; k < pool.size(); ++k)
    update.clients[owner[k].first].push_back({pool[k].position, pool[k].velocity, owner[k].second});
  return update;
}

std::vector<ConstructedFeature> select_final_features(const std::vector<ChampionReport>& reports, int round,
                                                      const RunConfig& config, Index n_features) {
  const ProgramShape shape = config.shape(n_features);
  std::vector<ConstructedFeature> unique;
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& r : reports) {
    for (const auto& c : r.champions) {
      const DecodedProgram dp = decode(c.position, shape);
      if (!dp.has_selected_feature()) continue;
      ConstructedFeature f{build_tree(dp, shape), {}, c.fitness, r.client_id, round};
      f.expr = canonical_string(f.tree);
      auto [it, inserted] = seen.try_emplace(f.expr, unique.size());
      if (inserted) {
        unique.push_back(std::move(f));
      } else if (f.fitness > unique[it->second].fitness) {
        unique[it->second] = std::move(f);
      }
    }
  }
  if (unique.empty()) throw std::runtime_error("no non-degenerate champion to construct a feature from");

  std::sort(unique.begin(), unique.end(), [](const ConstructedFeature& a, const ConstructedFeature& b) {
    return a.fitness > b.fitness || (a.fitness == b.fitness && a.expr < b.expr);
  });
  std::vector<ConstructedFeature> out;
  for (auto& f : unique)
    if (f.fitness >= config.igr_threshold) out.push_back(f);
  if (out.empty()) out.push_back(unique.front());
  const auto beta = static_cast<std::size_t>(config.resolved_beta_max(n_features));
  if (out.size() > beta) out.resize(beta);
  return out;
}

FfcResult run_ffc(const RunConfig& config, const std::vector<Dataset>& client_data, int threads,
                  const RunObserver& observer) {
  config.validate();
  if (static_cast<int>(client_data.size()) != config.clients)
    throw std::invalid_argument("expected " + std::to_string(config.clients) + " client datasets, got " +
                                std::to_string(client_data.size()));
  const Index n_features = client_data.front().n_features();
  for (const auto& d : client_data)
    if (d.n_features() != n_features) throw std::invalid_argument("clients disagree on the feature set");
  const ProgramShape shape = config.shape(n_features);
  const GeneBox box = GeneBox::of(shape);

  std::vector<ClientState> states;
  states.reserve(client_data.size());
  for (int m = 0; m < config.clients; ++m) states.push_back(init_client(m, client_data[static_cast<std::size_t>(m)], config));

  threads = std::clamp(threads, 1, config.clients);
  FfcResult result;
  GlobalUpdate pending;
  std::vector<ChampionReport> reports(static_cast<std::size_t>(config.clients));

  for (int t = 0; t < config.global_rounds; ++t) {
    Rng ns_rng = Rng::stream(config.seed, StreamTag::kNicheSize, {static_cast<std::uint64_t>(t)});
    const int ns = static_cast<int>(ns_rng.uniform_int(config.ns_min, config.ns_max));
    const int a = niche_count(config.population, ns);

    auto run_client = [&](int m) {
      static const std::vector<UpdateEntry> kNone;
      auto it = pending.clients.find(m);
      reports[static_cast<std::size_t>(m)] =
          local_phase(states[static_cast<std::size_t>(m)], a, ns, it == pending.clients.end() ? kNone : it->second, t, config);
    };
    if (threads == 1) {
      for (int m = 0; m < config.clients; ++m) run_client(m);
    } else {
      std::atomic<int> next{0};
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(config.clients));
      {
        std::vector<std::jthread> workers;
        for (int w = 0; w < threads; ++w)
          workers.emplace_back([&] {
            for (int m = next++; m < config.clients; m = next++) {
              try {
                run_client(m);
              } catch (...) {
                errors[static_cast<std::size_t>(m)] = std::current_exception();
              }
            }
          });
      }
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }

    RoundRecord rec;
    rec.round = t;
    rec.ns = ns;
    rec.a = a;
    double sum = 0.0;
    double best = 0.0;
    std::size_t count = 0;
    for (const auto& r : reports) {
      if (observer.on_report) observer.on_report(t, r);
      rec.bytes_up += wire_size(r);
      for (const auto& c : r.champions) {
        best = std::max(best, c.fitness);
        sum += c.fitness;
        ++count;
      }
    }
    rec.best_fitness = best;
    rec.mean_fitness = sum / static_cast<double>(count);

    pending = global_phase(reports, t, config, box, a);
    if (observer.on_update) observer.on_update(t, pending);
    rec.bytes_down = wire_size(pending);
    result.rounds.push_back(rec);
  }

  result.features = select_final_features(reports, config.global_rounds - 1, config, n_features);
  result.final_reports = std::move(reports);
  return result;
}

}  // namespace mmffc
