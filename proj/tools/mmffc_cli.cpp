// mmffc: federated feature construction simulator.
//
//   mmffc partition --input data.csv --clients 10 --mode iid --seed 7 --out part.json
//   mmffc run --config run.json --out results/
//   mmffc evaluate --input data.csv --features results/features.json --seed 42
//   mmffc baseline --input data.csv --seed 42

#include "mmffc/data.hpp"
#include "mmffc/eval.hpp"
#include "mmffc/experiment.hpp"
#include "mmffc/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

namespace {

using namespace mmffc;

constexpr int kExitInvalid = 2;
constexpr int kExitInternal = 1;

int default_threads() {
  if (const char* env = std::getenv("FFC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct PartitionArgs {
  std::string input;
  std::string label_column;
  int clients = 10;
  std::string mode = "iid";
  int shards = 2;
  std::uint64_t seed = 0;
  std::string out;
};

struct RunArgs {
  std::string config;
  std::string out;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::optional<int> global_rounds;
  std::optional<int> clients;
  std::optional<int> beta_max;
  std::optional<std::string> mode;
  std::optional<std::string> partition;
};

struct EvalArgs {
  std::string input;
  std::string label_column;
  std::string features;
  std::uint64_t seed = 42;
  double test_fraction = 0.3;
  int min_leaf = 2;
};

int cmd_partition(const PartitionArgs& a) {
  const Dataset ds = load_csv(a.input, a.label_column);
  const PartitionMode mode = parse_partition_mode(a.mode);
  const Partition p = mode == PartitionMode::kIid ? partition_iid(ds, a.clients, a.seed)
                                                  : partition_noniid(ds, a.clients, a.shards, a.seed);
  write_text_file(a.out, partition_to_json(p).dump() + "\n");
  for (const auto& [id, rows] : p.clients) {
    std::vector<int> hist(static_cast<std::size_t>(ds.n_classes()), 0);
    for (Index r : rows) ++hist[static_cast<std::size_t>(ds.y[static_cast<std::size_t>(r)])];
    std::cout << "client " << id << ": " << rows.size() << " samples, labels";
    for (int c = 0; c < ds.n_classes(); ++c) std::cout << ' ' << ds.class_names[static_cast<std::size_t>(c)] << '=' << hist[static_cast<std::size_t>(c)];
    std::cout << '\n';
  }
  return 0;
}

int cmd_run(const RunArgs& a) {
  json raw = read_json_file(a.config);
  const auto base = std::filesystem::path(a.config).parent_path().string();
  ExperimentConfig config = ExperimentConfig::from_json(std::move(raw), base);
  if (a.seed) config.run.seed = *a.seed;
  if (a.global_rounds) config.run.global_rounds = *a.global_rounds;
  if (a.clients) config.run.clients = *a.clients;
  if (a.beta_max) config.run.beta_max = *a.beta_max;
  if (a.mode) config.mode = parse_partition_mode(*a.mode);
  if (a.partition) config.partition = *a.partition;

  const int threads = a.threads > 0 ? a.threads : default_threads();
  const ExperimentResult result = run_experiment(config, threads);
  write_outputs(result, a.out);
  std::cout << result.results.dump() << '\n';
  return 0;
}

Split evaluation_split(const Dataset& ds, const EvalArgs& a) { return stratified_split(ds, a.test_fraction, a.seed); }

int cmd_evaluate(const EvalArgs& a) {
  const Dataset ds = load_csv(a.input, a.label_column);
  const Split split = evaluation_split(ds, a);
  const auto features = features_from_json(read_json_file(a.features));
  std::vector<ExpressionTree> trees;
  for (const auto& f : features) trees.push_back(f.tree);
  const auto model = train_c45(transform(ds.subset(split.train), trees), a.min_leaf);
  const double acc = accuracy(model, transform(ds.subset(split.test), trees));
  const int tf = static_cast<int>(ds.n_features());
  const int cf = static_cast<int>(trees.size());
  const json out{{"tf", tf},
                 {"cf", cf},
                 {"fr", feature_reduction(tf, cf)},
                 {"acc_constructed", acc},
                 {"acc_baseline", baseline_no_fc(ds, split, a.min_leaf)},
                 {"seed", a.seed}};
  std::cout << out.dump() << '\n';
  return 0;
}

int cmd_baseline(const EvalArgs& a) {
  const Dataset ds = load_csv(a.input, a.label_column);
  const json out{{"tf", ds.n_features()}, {"acc_baseline", baseline_no_fc(ds, evaluation_split(ds, a), a.min_leaf)},
                 {"seed", a.seed}};
  std::cout << out.dump() << '\n';
  return 0;
}

void add_eval_options(CLI::App* cmd, EvalArgs& a) {
  cmd->add_option("--input", a.input, "CSV dataset")->required();
  cmd->add_option("--label-column", a.label_column, "label column (default: last)");
  cmd->add_option("--seed", a.seed, "split seed");
  cmd->add_option("--test-fraction", a.test_fraction, "held-out fraction");
  cmd->add_option("--min-leaf", a.min_leaf, "minimum samples per leaf");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated feature construction with niched gravitational search programming"};
  app.require_subcommand(1);

  PartitionArgs part;
  auto* partition = app.add_subcommand("partition", "split a dataset across simulated clients");
  partition->add_option("--input", part.input, "CSV dataset")->required();
  partition->add_option("--label-column", part.label_column, "label column (default: last)");
  partition->add_option("--clients", part.clients, "number of clients M (>= 2)");
  partition->add_option("--mode", part.mode, "iid or noniid")->check(CLI::IsMember({"iid", "noniid"}));
  partition->add_option("--shards", part.shards, "shards per client in noniid mode");
  partition->add_option("--seed", part.seed, "random seed");
  partition->add_option("--out", part.out, "output JSON")->required();

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "federated construction followed by evaluation");
  run_cmd->add_option("--config", run.config, "JSON run configuration")->required();
  run_cmd->add_option("--out", run.out, "output directory")->required();
  run_cmd->add_option("--threads", run.threads, "client worker threads (default: FFC_THREADS or all cores)");
  run_cmd->add_option("--seed", run.seed, "override master seed");
  run_cmd->add_option("--global-rounds", run.global_rounds, "override number of rounds");
  run_cmd->add_option("--clients", run.clients, "override number of clients");
  run_cmd->add_option("--beta-max", run.beta_max, "override maximum constructed features");
  run_cmd->add_option("--mode", run.mode, "override partition mode")->check(CLI::IsMember({"iid", "noniid"}));
  run_cmd->add_option("--partition", run.partition, "override partition file");

  EvalArgs eval;
  auto* evaluate = app.add_subcommand("evaluate", "C4.5 accuracy of a saved constructed feature set");
  add_eval_options(evaluate, eval);
  evaluate->add_option("--features", eval.features, "features.json from a run")->required();

  EvalArgs base;
  auto* baseline = app.add_subcommand("baseline", "C4.5 accuracy on the original features");
  add_eval_options(baseline, base);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*partition) return cmd_partition(part);
    if (*run_cmd) return cmd_run(run);
    if (*evaluate) return cmd_evaluate(eval);
    if (*baseline) return cmd_baseline(base);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
