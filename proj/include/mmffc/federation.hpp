#pragma once

#include "mmffc/data.hpp"
#include "mmffc/genome.hpp"
#include "mmffc/gsa.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace mmffc {

struct RunConfig {
  int clients = 10;
  int population = 30;
  int local_iters = 5;
  int global_rounds = 100;
  int ns_min = 3;
  int ns_max = 10;
  int depth = 3;
  int arity = 2;
  std::vector<Operator> operators{Operator::kAdd, Operator::kSub, Operator::kMul, Operator::kDiv};
  int bins = 10;
  /// 0 selects max(3, ceil(L / 4)).
  int beta_max = 0;
  double igr_threshold = 0.01;
  double g0 = 100.0;
  double alpha = 20.0;
  double epsilon = 1e-9;
  std::uint64_t seed = 42;

  void validate() const;
  ProgramShape shape(Index n_features) const;
  int resolved_beta_max(Index n_features) const;
};

// Messages. These are the only values that cross the client/server
// boundary; they never carry samples or labels.

struct ChampionEntry {
  Position position;
  Eigen::VectorXd velocity;
  double fitness = 0.0;
  int local_index = 0;
};

struct ChampionReport {
  int client_id = 0;
  std::vector<ChampionEntry> champions;
};

struct UpdateEntry {
  Position position;
  Eigen::VectorXd velocity;
  int local_index = 0;
};

struct GlobalUpdate {
  std::map<int, std::vector<UpdateEntry>> clients;
};

/// Canonical little-endian wire encoding: 8 bytes per real, 4 per index or
/// id, no framing. Report: client id, then per champion position, velocity,
/// fitness, local index. Update (per client): client id, then per entry
/// position, velocity, local index.
std::vector<std::uint8_t> encode(const ChampionReport& report);
std::vector<std::uint8_t> encode_update(int client_id, const std::vector<UpdateEntry>& entries);
ChampionReport decode_report(std::span<const std::uint8_t> bytes, Index dimension, int n_champions);

std::size_t wire_size(const ChampionReport& report);
std::size_t wire_size(const GlobalUpdate& update);

struct ClientState {
  int client_id = 0;
  Dataset data;
  std::vector<Agent> population;
};

ClientState init_client(int client_id, Dataset local_train, const RunConfig& config);

/// Fitness of one position on a client's data; 0 for an empty mask.
double evaluate_program(const Eigen::Ref<const Eigen::VectorXd>& position, const ProgramShape& shape,
                        const Dataset& data, int bins);

/// Local phase on one client for one round. `incoming` is empty in round 0.
ChampionReport local_phase(ClientState& state, int n_niches, int niche_size, const std::vector<UpdateEntry>& incoming,
                           int round, const RunConfig& config);

/// Global phase at the edge server: one GSA move of the pooled champions,
/// routed back to their owners by local index.
GlobalUpdate global_phase(const std::vector<ChampionReport>& reports, int round, const RunConfig& config,
                          const GeneBox& box, int n_niches);

struct ConstructedFeature {
  ExpressionTree tree;
  std::string expr;
  double fitness = 0.0;
  int client = 0;
  int round = 0;
};

std::vector<ConstructedFeature> select_final_features(const std::vector<ChampionReport>& reports, int round,
                                                      const RunConfig& config, Index n_features);

struct RoundRecord {
  int round = 0;
  int ns = 0;
  int a = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  std::size_t bytes_up = 0;
  std::size_t bytes_down = 0;
};

struct RunObserver {
  std::function<void(int round, const ChampionReport&)> on_report;
  std::function<void(int round, const GlobalUpdate&)> on_update;
};

struct FfcResult {
  std::vector<ConstructedFeature> features;
  std::vector<RoundRecord> rounds;
  std::vector<ChampionReport> final_reports;
};

/// Full federated construction run. Client phases fan out over `threads`
/// workers; the result does not depend on the thread count.
FfcResult run_ffc(const RunConfig& config, const std::vector<Dataset>& client_data, int threads = 1,
                  const RunObserver& observer = {});

}  // namespace mmffc
