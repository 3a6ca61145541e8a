#include "qmini/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qmini/circuit.hpp"
#include "qmini/errors.hpp"

namespace qmini {

namespace {

nlohmann::json task_to_json(const TaskResult& t) {
  nlohmann::json j{{"id", t.task_id},         {"kind", to_string(t.kind)},
                   {"worker_id", t.worker_id}, {"start", t.start},
                   {"end", t.end},             {"wall_time", t.wall_time},
                   {"ok", t.ok()}};
  if (t.value) j["value"] = outcome_to_json(*t.value);
  if (t.error) j["error"] = *t.error;
  if (t.circuit_hash) j["circuit_hash"] = hex_digest(*t.circuit_hash);
  return j;
}

TaskResult task_from_report_json(const nlohmann::json& j) {
  TaskResult t;
  t.task_id = j.at("id").get<std::string>();
  t.kind = task_kind_from_string(j.at("kind").get<std::string>());
  t.worker_id = j.at("worker_id").get<int>();
  t.start = j.at("start").get<double>();
  t.end = j.at("end").get<double>();
  t.wall_time = j.at("wall_time").get<double>();
  if (j.contains("value")) t.value = outcome_from_json(j.at("value"));
  if (j.contains("error")) t.error = j.at("error").get<std::string>();
  if (j.contains("circuit_hash")) {
    t.circuit_hash = std::stoull(j.at("circuit_hash").get<std::string>(), nullptr, 16);
  }
  return t;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

class SchemaChecker {
 public:
  explicit SchemaChecker(std::vector<std::string>& errors) : errors_(errors) {}

  const nlohmann::json* field(const nlohmann::json& obj, const std::string& path,
                              const std::string& key, bool required = true) {
    if (!obj.is_object()) {
      errors_.push_back(path + " must be an object");
      return nullptr;
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) errors_.push_back(path + "." + key + " is required");
      return nullptr;
    }
    return &*it;
  }

  void number(const nlohmann::json& obj, const std::string& path, const std::string& key,
              bool required = true, double minimum = -std::numeric_limits<double>::infinity()) {
    const auto* v = field(obj, path, key, required);
    if (!v) return;
    if (!v->is_number()) {
      errors_.push_back(path + "." + key + " must be a number");
    } else if (v->get<double>() < minimum) {
      errors_.push_back(path + "." + key + " must be >= " + std::to_string(minimum));
    }
  }

  void integer(const nlohmann::json& obj, const std::string& path, const std::string& key,
               bool required = true, long long minimum = 0) {
    const auto* v = field(obj, path, key, required);
    if (!v) return;
    if (!v->is_number_integer() || v->get<long long>() < minimum) {
      errors_.push_back(path + "." + key + " must be an integer >= " + std::to_string(minimum));
    }
  }

  void string(const nlohmann::json& obj, const std::string& path, const std::string& key,
              bool required = true) {
    const auto* v = field(obj, path, key, required);
    if (v && !v->is_string()) errors_.push_back(path + "." + key + " must be a string");
  }

  void boolean(const nlohmann::json& obj, const std::string& path, const std::string& key) {
    const auto* v = field(obj, path, key);
    if (v && !v->is_boolean()) errors_.push_back(path + "." + key + " must be a boolean");
  }

  void fail(std::string message) { errors_.push_back(std::move(message)); }

 private:
  std::vector<std::string>& errors_;
};

}  // namespace

std::uint64_t digest_task_hashes(std::span<const TaskResult> results) {
  std::vector<const TaskResult*> ordered;
  for (const auto& r : results) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const TaskResult* a, const TaskResult* b) { return a->task_id < b->task_id; });
  std::vector<std::uint64_t> hashes;
  for (const auto* r : ordered) {
    if (r->circuit_hash) hashes.push_back(*r->circuit_hash);
  }
  return combine_hashes(hashes);
}

MetricsReport build_report(nlohmann::json config, const ResourceSpec& resources,
                           std::vector<TaskResult> results, const MetricsReport* baseline) {
  MetricsReport r;
  r.config = std::move(config);
  r.resources = resources;
  std::sort(results.begin(), results.end(),
            [](const TaskResult& a, const TaskResult& b) { return a.task_id < b.task_id; });
  if (!results.empty()) {
    double first = results.front().start;
    double last = results.front().end;
    for (const auto& t : results) {
      first = std::min(first, t.start);
      last = std::max(last, t.end);
    }
    r.makespan = std::max(0.0, last - first);
    r.throughput = r.makespan > 0.0 ? static_cast<double>(results.size()) / r.makespan : 0.0;
  }
  r.circuit_digest = hex_digest(digest_task_hashes(results));
  r.tasks = std::move(results);
  if (baseline) attach_baseline(r, *baseline);
  return r;
}

void attach_baseline(MetricsReport& report, const MetricsReport& baseline) {
  report.baseline_makespan = baseline.makespan;
  if (report.makespan > 0.0) {
    report.speedup = baseline.makespan / report.makespan;
    report.efficiency = *report.speedup / static_cast<double>(report.resources.total_pes());
  }
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : r.tasks) tasks.push_back(task_to_json(t));
  nlohmann::json j{{"schema_version", r.schema_version},
                   {"config", r.config},
                   {"resources", to_json(r.resources)},
                   {"total_pes", r.resources.total_pes()},
                   {"tasks", std::move(tasks)},
                   {"makespan", r.makespan},
                   {"throughput", r.throughput},
                   {"circuit_digest", r.circuit_digest},
                   {"results", r.results}};
  if (r.baseline_makespan) j["baseline_makespan"] = *r.baseline_makespan;
  if (r.speedup) j["speedup"] = *r.speedup;
  if (r.efficiency) j["efficiency"] = *r.efficiency;
  if (r.exchange) j["exchange_stats"] = to_json(*r.exchange);
  if (!r.stages.empty()) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : r.stages) {
      stages.push_back({{"name", s.name},
                        {"depends_on", s.depends_on},
                        {"start", s.start},
                        {"end", s.end},
                        {"makespan", s.makespan},
                        {"task_count", s.task_count}});
    }
    j["stages"] = std::move(stages);
  }
  return j;
}

MetricsReport report_from_json(const nlohmann::json& j) {
  if (auto errors = validate_report(j); !errors.empty()) {
    throw InvalidArgument("invalid MetricsReport: " + errors.front());
  }
  MetricsReport r;
  r.schema_version = j.at("schema_version").get<std::string>();
  r.config = j.at("config");
  r.resources = resource_spec_from_json(j.at("resources"));
  for (const auto& t : j.at("tasks")) r.tasks.push_back(task_from_report_json(t));
  r.makespan = j.at("makespan").get<double>();
  r.throughput = j.at("throughput").get<double>();
  r.circuit_digest = j.at("circuit_digest").get<std::string>();
  r.results = j.value("results", nlohmann::json::object());
  if (j.contains("baseline_makespan")) r.baseline_makespan = j["baseline_makespan"].get<double>();
  if (j.contains("speedup")) r.speedup = j["speedup"].get<double>();
  if (j.contains("efficiency")) r.efficiency = j["efficiency"].get<double>();
  if (j.contains("exchange_stats")) r.exchange = exchange_stats_from_json(j["exchange_stats"]);
  if (j.contains("stages")) {
    for (const auto& s : j["stages"]) {
      r.stages.push_back({s.at("name").get<std::string>(),
                          s.at("depends_on").get<std::vector<std::string>>(),
                          s.at("start").get<double>(), s.at("end").get<double>(),
                          s.at("makespan").get<double>(), s.at("task_count").get<std::size_t>()});
    }
  }
  return r;
}

std::vector<std::string> validate_report(const nlohmann::json& j) {
  std::vector<std::string> errors;
  SchemaChecker check(errors);
  if (!j.is_object()) return {"report must be a JSON object"};

  if (const auto* v = check.field(j, "$", "schema_version")) {
    if (!v->is_string() || v->get<std::string>() != kReportSchemaVersion) {
      check.fail(std::string("$.schema_version must be \"") + kReportSchemaVersion + "\"");
    }
  }
  if (const auto* cfg = check.field(j, "$", "config")) {
    check.string(*cfg, "$.config", "miniapp");
    if (const auto* p = check.field(*cfg, "$.config", "parameters"); p && !p->is_object()) {
      check.fail("$.config.parameters must be an object");
    }
    check.integer(*cfg, "$.config", "seed");
  }
  if (const auto* res = check.field(j, "$", "resources")) {
    check.integer(*res, "$.resources", "nodes", true, 1);
    check.integer(*res, "$.resources", "pes_per_node", true, 1);
    if (const auto* b = check.field(*res, "$.resources", "backend")) {
      try {
        backend_from_string(b->is_string() ? b->get<std::string>() : std::string{});
      } catch (const Error&) {
        check.fail("$.resources.backend must be serial, pool or sharded_cluster");
      }
    }
  }
  check.integer(j, "$", "total_pes", true, 1);
  check.number(j, "$", "makespan", true, 0.0);
  check.number(j, "$", "throughput", true, 0.0);
  check.number(j, "$", "baseline_makespan", false, 0.0);
  check.number(j, "$", "speedup", false, 0.0);
  check.number(j, "$", "efficiency", false, 0.0);
  check.string(j, "$", "circuit_digest");
  if (const auto* v = check.field(j, "$", "results"); v && !v->is_object()) {
    check.fail("$.results must be an object");
  }

  if (const auto* tasks = check.field(j, "$", "tasks")) {
    if (!tasks->is_array()) {
      check.fail("$.tasks must be an array");
    } else {
      for (std::size_t i = 0; i < tasks->size(); ++i) {
        const auto& t = (*tasks)[i];
        const std::string path = "$.tasks[" + std::to_string(i) + "]";
        check.string(t, path, "id");
        if (const auto* k = check.field(t, path, "kind")) {
          try {
            task_kind_from_string(k->is_string() ? k->get<std::string>() : std::string{});
          } catch (const Error&) {
            check.fail(path + ".kind is not a known task kind");
          }
        }
        check.integer(t, path, "worker_id");
        check.number(t, path, "start");
        check.number(t, path, "end");
        check.number(t, path, "wall_time", true, 0.0);
        check.boolean(t, path, "ok");
        check.string(t, path, "error", false);
        check.string(t, path, "circuit_hash", false);
        if (t.is_object() && t.contains("ok") && t["ok"].is_boolean()) {
          if (t["ok"].get<bool>() && !t.contains("value")) check.fail(path + " ok without value");
          if (!t["ok"].get<bool>() && !t.contains("error")) check.fail(path + " failed without error");
        }
      }
    }
  }

  if (const auto* ex = check.field(j, "$", "exchange_stats", false)) {
    check.integer(*ex, "$.exchange_stats", "messages_sent");
    check.integer(*ex, "$.exchange_stats", "bytes_exchanged");
    check.integer(*ex, "$.exchange_stats", "exchange_rounds");
  }
  if (const auto* stages = check.field(j, "$", "stages", false)) {
    if (!stages->is_array()) {
      check.fail("$.stages must be an array");
    } else {
      for (std::size_t i = 0; i < stages->size(); ++i) {
        const auto& s = (*stages)[i];
        const std::string path = "$.stages[" + std::to_string(i) + "]";
        check.string(s, path, "name");
        if (const auto* d = check.field(s, path, "depends_on"); d && !d->is_array()) {
          check.fail(path + ".depends_on must be an array");
        }
        check.number(s, path, "start");
        check.number(s, path, "end");
        check.number(s, path, "makespan", true, 0.0);
        check.integer(s, path, "task_count");
      }
    }
  }
  return errors;
}

std::string report_to_csv(const MetricsReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "id,kind,worker_id,start,end,wall_time,ok,value,circuit_hash\n";
  for (const auto& t : r.tasks) {
    std::string value;
    if (t.value) {
      const auto& v = *t.value;
      if (const auto* d = std::get_if<double>(&v)) {
        std::ostringstream num;
        num.precision(17);
        num << *d;
        value = num.str();
      } else {
        value = outcome_to_json(v).dump();
      }
    } else if (t.error) {
      value = *t.error;
    }
    out << csv_escape(t.task_id) << ',' << to_string(t.kind) << ',' << t.worker_id << ','
        << t.start << ',' << t.end << ',' << t.wall_time << ',' << (t.ok() ? "true" : "false")
        << ',' << csv_escape(value) << ','
        << (t.circuit_hash ? hex_digest(*t.circuit_hash) : std::string{}) << '\n';
  }
  return out.str();
}

std::string trace_to_csv(const MetricsReport& r) {
  const auto it = r.results.find("trace");
  if (it == r.results.end() || !it->contains("iterations")) {
    throw InvalidArgument("report carries no variational trace");
  }
  std::ostringstream out;
  out.precision(17);
  out << "iteration,cost\n";
  for (const auto& step : it->at("iterations")) {
    out << step.at("iteration").get<long long>() << ',' << step.at("cost").get<double>() << '\n';
  }
  return out.str();
}

}  // namespace qmini
