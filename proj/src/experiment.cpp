#include "mmffc/experiment.hpp"

#include "mmffc/eval.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

namespace mmffc {

namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

template <typename T>
void take(json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("config key '") + key + "' has the wrong type");
  }
  j.erase(it);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(json j, const std::string& base_dir) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  ExperimentConfig c;
  take(j, "name", c.name);
  take(j, "dataset", c.dataset);
  take(j, "label_column", c.label_column);
  take(j, "partition", c.partition);
  std::string mode = to_string(c.mode);
  take(j, "mode", mode);
  c.mode = parse_partition_mode(mode);
  take(j, "shards", c.shards);
  take(j, "test_fraction", c.test_fraction);
  take(j, "min_leaf", c.min_leaf);
  c.run = config_from_json(j);
  if (!j.empty()) throw std::invalid_argument("unknown config key: " + j.begin().key());
  if (c.dataset.empty()) throw std::invalid_argument("config needs a 'dataset' path");
  c.dataset = resolve(c.dataset, base_dir);
  c.partition = resolve(c.partition, base_dir);
  if (c.name.empty()) c.name = fs::path(c.dataset).stem().string();
  return c;
}

json ExperimentConfig::to_json() const {
  json j = config_to_json(run);
  j["name"] = name;
  j["dataset"] = dataset;
  j["label_column"] = label_column;
  j["partition"] = partition;
  j["mode"] = mmffc::to_string(mode);
  j["shards"] = shards;
  j["test_fraction"] = test_fraction;
  j["min_leaf"] = min_leaf;
  return j;
}

void ExperimentConfig::validate() const {
  run.validate();
  if (shards < 1) throw std::invalid_argument("shards must be >= 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::invalid_argument("test_fraction must lie in (0, 1)");
  if (min_leaf < 1) throw std::invalid_argument("min_leaf must be >= 1");
  if (!partition.empty() && !fs::exists(partition)) throw std::invalid_argument("partition file not found: " + partition);
  if (!fs::exists(dataset)) throw std::invalid_argument("dataset file not found: " + dataset);
}

std::string ExperimentResult::results_text() const { return results.dump(2) + "\n"; }

std::string ExperimentResult::rounds_text() const {
  std::string out;
  for (const auto& r : rounds) out += round_to_jsonl(r) + "\n";
  return out;
}

std::string ExperimentResult::features_text() const { return features_to_json(features).dump(2) + "\n"; }

ExperimentResult run_experiment(const ExperimentConfig& config, int threads, const RunObserver& observer) {
  config.validate();
  const Dataset ds = load_csv(config.dataset, config.label_column);
  const Split split = stratified_split(ds, config.test_fraction, config.run.seed);
  const Dataset train = ds.subset(split.train);
  const Dataset test = ds.subset(split.test);

  std::vector<IndexList> client_rows;
  if (!config.partition.empty()) {
    const Partition p = partition_from_json(read_json_file(config.partition));
    if (p.n_clients() != config.run.clients)
      throw DataError("partition has " + std::to_string(p.n_clients()) + " clients but the config asks for " +
                      std::to_string(config.run.clients));
    // Map full-dataset rows to training rows; test rows stay with the server.
    std::vector<Index> train_pos(static_cast<std::size_t>(ds.n_samples()), -1);
    for (std::size_t k = 0; k < split.train.size(); ++k) train_pos[static_cast<std::size_t>(split.train[k])] = static_cast<Index>(k);
    for (const auto& [id, rows] : p.clients) {
      IndexList local;
      for (Index r : rows) {
        if (r < 0 || r >= ds.n_samples()) throw DataError("partition row out of range: " + std::to_string(r));
        if (train_pos[static_cast<std::size_t>(r)] >= 0) local.push_back(train_pos[static_cast<std::size_t>(r)]);
      }
      if (local.empty()) throw DataError("client " + std::to_string(id) + " has no training rows after the split");
      client_rows.push_back(std::move(local));
    }
  } else {
    const Partition p = config.mode == PartitionMode::kIid
                            ? partition_iid(train, config.run.clients, config.run.seed)
                            : partition_noniid(train, config.run.clients, config.shards, config.run.seed);
    for (const auto& [id, rows] : p.clients) client_rows.push_back(rows);
  }

  std::vector<Dataset> clients;
  for (const auto& rows : client_rows) clients.push_back(train.subset(rows));

  FfcResult ffc = run_ffc(config.run, clients, threads, observer);

  std::vector<ExpressionTree> trees;
  for (const auto& f : ffc.features) trees.push_back(f.tree);
  const auto model = train_c45(transform(train, trees), config.min_leaf);
  const double acc_constructed = accuracy(model, transform(test, trees));
  const double acc_baseline = baseline_no_fc(ds, split, config.min_leaf);

  const int tf = static_cast<int>(ds.n_features());
  const int cf = static_cast<int>(trees.size());

  ExperimentResult out;
  json resolved = config.to_json();
  resolved["beta_max"] = config.run.resolved_beta_max(ds.n_features());
  out.results = {{"dataset", config.name},
                 {"tf", tf},
                 {"cf", cf},
                 {"fr", feature_reduction(tf, cf)},
                 {"acc_constructed", acc_constructed},
                 {"acc_baseline", acc_baseline},
                 {"seed", config.run.seed},
                 {"rounds", config.run.global_rounds},
                 {"n_train", split.train.size()},
                 {"n_test", split.test.size()},
                 {"config", resolved}};
  out.rounds = std::move(ffc.rounds);
  out.features = std::move(ffc.features);
  return out;
}

void write_outputs(const ExperimentResult& result, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const std::vector<std::pair<std::string, std::string>> files{
      {"results.json", result.results_text()},
      {"rounds.jsonl", result.rounds_text()},
      {"features.json", result.features_text()},
  };
  std::vector<fs::path> written;
  try {
    for (const auto& [name, text] : files) {
      const fs::path path = fs::path(out_dir) / name;
      written.push_back(path);
      write_text_file(path.string(), text);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
}

}  // namespace mmffc
