#include "mmffc/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mmffc {

namespace {

json vector_to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

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

json partition_to_json(const Partition& p) {
  json clients = json::object();
  for (const auto& [id, rows] : p.clients) clients[std::to_string(id)] = rows;
  return {{"clients", clients}, {"seed", p.seed}, {"mode", to_string(p.mode)}};
}

Partition partition_from_json(const json& j) {
  Partition p;
  try {
    for (const auto& [key, rows] : j.at("clients").items()) p.clients[std::stoi(key)] = rows.get<IndexList>();
    p.seed = j.value("seed", std::uint64_t{0});
    p.mode = parse_partition_mode(j.value("mode", std::string("iid")));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed partition: ") + e.what());
  }
  int expected = 0;
  for (const auto& [id, rows] : p.clients)
    if (id != expected++) throw DataError("partition client ids must be 0..M-1");
  return p;
}

json features_to_json(const std::vector<ConstructedFeature>& features) {
  json out = json::array();
  for (const auto& f : features)
    out.push_back({{"expr", f.expr}, {"fitness", f.fitness}, {"client", f.client}, {"round", f.round}});
  return out;
}

std::vector<ConstructedFeature> features_from_json(const json& j) {
  std::vector<ConstructedFeature> out;
  if (!j.is_array()) throw std::invalid_argument("features file must hold a JSON array");
  for (const auto& item : j) {
    ConstructedFeature f;
    f.expr = item.at("expr").get<std::string>();
    f.tree = parse_canonical(f.expr);
    f.fitness = item.value("fitness", 0.0);
    f.client = item.value("client", 0);
    f.round = item.value("round", 0);
    out.push_back(std::move(f));
  }
  return out;
}

std::string round_to_jsonl(const RoundRecord& r) {
  nlohmann::ordered_json o;
  o["round"] = r.round;
  o["ns"] = r.ns;
  o["a"] = r.a;
  o["best_fitness"] = r.best_fitness;
  o["mean_fitness"] = r.mean_fitness;
  o["bytes_up"] = r.bytes_up;
  o["bytes_down"] = r.bytes_down;
  return o.dump();
}

json report_to_json(const ChampionReport& r) {
  json champions = json::array();
  for (const auto& c : r.champions)
    champions.push_back({{"position", vector_to_json(c.position)},
                         {"velocity", vector_to_json(c.velocity)},
                         {"fitness", c.fitness},
                         {"local_index", c.local_index}});
  return {{"client_id", r.client_id}, {"champions", champions}};
}

json update_to_json(const GlobalUpdate& u) {
  json clients = json::object();
  for (const auto& [id, entries] : u.clients) {
    json list = json::array();
    for (const auto& e : entries)
      list.push_back({{"position", vector_to_json(e.position)},
                      {"velocity", vector_to_json(e.velocity)},
                      {"local_index", e.local_index}});
    clients[std::to_string(id)] = list;
  }
  return {{"clients", clients}};
}

json config_to_json(const RunConfig& c) {
  std::vector<std::string> ops;
  for (auto op : c.operators) ops.push_back(operator_name(op));
  return {{"clients", c.clients},         {"population", c.population},     {"local_iters", c.local_iters},
          {"global_rounds", c.global_rounds}, {"ns_min", c.ns_min},          {"ns_max", c.ns_max},
          {"depth", c.depth},             {"arity", c.arity},               {"operators", ops},
          {"bins", c.bins},               {"beta_max", c.beta_max},         {"igr_threshold", c.igr_threshold},
          {"g0", c.g0},                   {"alpha", c.alpha},               {"epsilon", c.epsilon},
          {"seed", c.seed}};
}

RunConfig config_from_json(json& j) {
  RunConfig c;
  take(j, "clients", c.clients);
  take(j, "population", c.population);
  take(j, "local_iters", c.local_iters);
  take(j, "global_rounds", c.global_rounds);
  take(j, "ns_min", c.ns_min);
  take(j, "ns_max", c.ns_max);
  take(j, "depth", c.depth);
  take(j, "arity", c.arity);
  std::vector<std::string> ops;
  take(j, "operators", ops);
  if (!ops.empty()) {
    c.operators.clear();
    for (const auto& name : ops) c.operators.push_back(parse_operator(name));
  }
  take(j, "bins", c.bins);
  take(j, "beta_max", c.beta_max);
  take(j, "igr_threshold", c.igr_threshold);
  take(j, "g0", c.g0);
  take(j, "alpha", c.alpha);
  take(j, "epsilon", c.epsilon);
  take(j, "seed", c.seed);
  return c;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("cannot parse " + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace mmffc
