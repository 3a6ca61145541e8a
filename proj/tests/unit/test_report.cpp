#include <gtest/gtest.h>

#include "qmini/errors.hpp"
#include "qmini/report.hpp"

using namespace qmini;

namespace {

TaskResult finished(std::string id, double start, double end, double value) {
  TaskResult t;
  t.task_id = std::move(id);
  t.kind = TaskKind::expectation;
  t.start = start;
  t.end = end;
  t.wall_time = end - start;
  t.value = value;
  t.circuit_hash = 0x1234 + static_cast<std::uint64_t>(value);
  return t;
}

nlohmann::json echo() {
  return {{"miniapp", "circuit-execution"}, {"parameters", nlohmann::json::object()}, {"seed", 1}};
}

}  // namespace

TEST(Report, MakespanAndThroughput) {
  const ResourceSpec res{1, 2, Backend::pool, "cpu"};
  const MetricsReport r = build_report(echo(), res, {finished("b", 1.0, 3.0, 2), finished("a", 0.5, 1.5, 1)});
  EXPECT_DOUBLE_EQ(r.makespan, 2.5);
  EXPECT_DOUBLE_EQ(r.throughput, 2 / 2.5);
  EXPECT_EQ(r.tasks.front().task_id, "a");
  EXPECT_EQ(r.circuit_digest.size(), 16u);
}

TEST(Report, EmptyRunHasZeroMakespan) {
  const MetricsReport r = build_report(echo(), ResourceSpec{}, {});
  EXPECT_EQ(r.makespan, 0.0);
  EXPECT_EQ(r.throughput, 0.0);
  EXPECT_TRUE(validate_report(to_json(r)).empty());
}

TEST(Report, DigestDependsOnIdOrderNotSubmissionOrder) {
  const auto a = finished("a", 0, 1, 1);
  const auto b = finished("b", 0, 1, 2);
  const std::vector<TaskResult> ab{a, b};
  const std::vector<TaskResult> ba{b, a};
  EXPECT_EQ(digest_task_hashes(ab), digest_task_hashes(ba));
  auto c = b;
  c.circuit_hash = 99;
  const std::vector<TaskResult> ac{a, c};
  EXPECT_NE(digest_task_hashes(ab), digest_task_hashes(ac));
}

TEST(Report, BaselineGivesSpeedupAndEfficiency) {
  const MetricsReport base = build_report(echo(), ResourceSpec{}, {finished("a", 0, 4, 1)});
  MetricsReport fast = build_report(echo(), {1, 4, Backend::pool, "cpu"}, {finished("a", 0, 1, 1)}, &base);
  EXPECT_DOUBLE_EQ(*fast.speedup, 4.0);
  EXPECT_DOUBLE_EQ(*fast.efficiency, 1.0);
  EXPECT_DOUBLE_EQ(*fast.baseline_makespan, 4.0);
}

TEST(Report, JsonRoundTripPreservesEverything) {
  MetricsReport r = build_report(echo(), {2, 2, Backend::pool, "cpu"},
                                 {finished("a", 0, 1, 1), finished("b", 0.5, 2, 2)});
  TaskResult failed;
  failed.task_id = "c";
  failed.error = "boom";
  r.tasks.push_back(failed);
  r.exchange = ExchangeStats{3, 96, 1};
  r.stages.push_back({"s", {"t"}, 0.0, 1.0, 1.0, 2});
  r.results = {{"answer", 42}};
  const nlohmann::json j = to_json(r);
  EXPECT_TRUE(validate_report(j).empty());
  const MetricsReport back = report_from_json(j);
  EXPECT_EQ(to_json(back), j);
}

TEST(Report, ValidatorNamesTheBrokenField) {
  nlohmann::json j = to_json(build_report(echo(), ResourceSpec{}, {finished("a", 0, 1, 1)}));
  const auto first_error = [](const nlohmann::json& doc) {
    const auto errs = validate_report(doc);
    return errs.empty() ? std::string() : errs.front();
  };
  auto broken = j;
  broken.erase("makespan");
  EXPECT_NE(first_error(broken).find("makespan"), std::string::npos);
  broken = j;
  broken["schema_version"] = "0";
  EXPECT_NE(first_error(broken).find("schema_version"), std::string::npos);
  broken = j;
  broken["tasks"][0]["kind"] = "nope";
  EXPECT_NE(first_error(broken).find("kind"), std::string::npos);
  broken = j;
  broken["config"].erase("seed");
  EXPECT_NE(first_error(broken).find("seed"), std::string::npos);
  broken = j;
  broken["tasks"][0].erase("value");
  EXPECT_FALSE(first_error(broken).empty());
  EXPECT_THROW(report_from_json(broken), InvalidArgument);
}

TEST(Report, CsvHasOneRowPerTask) {
  MetricsReport r = build_report(echo(), ResourceSpec{}, {finished("a", 0, 1, 0.5), finished("b,x", 0, 1, 2)});
  const std::string csv = report_to_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(csv.find("\"b,x\""), std::string::npos);
  EXPECT_NE(csv.find(",0.5,"), std::string::npos);
}

TEST(Report, TraceCsv) {
  MetricsReport r = build_report(echo(), ResourceSpec{}, {});
  EXPECT_THROW(trace_to_csv(r), InvalidArgument);
  r.results["trace"] = {{"iterations", {{{"iteration", 0}, {"cost", -1.5}}, {{"iteration", 1}, {"cost", -2.0}}}}};
  EXPECT_EQ(trace_to_csv(r), "iteration,cost\n0,-1.5\n1,-2\n");
}
