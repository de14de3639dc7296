#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lpwfcm/arff.hpp"
#include "lpwfcm/error.hpp"
#include "lpwfcm/experiment.hpp"
#include "lpwfcm/statcmp.hpp"

namespace lpwfcm {

/// One line of metrics.csv.
struct MetricRow {
  std::string dataset;
  int algorithm = 1;
  std::size_t fold = 0;
  std::string metric;
  double value = 0.0;
};

inline constexpr std::string_view kMetricsHeader = "dataset,algorithm,fold,metric,value";

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

inline std::vector<std::vector<std::string>> read_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    rows.push_back(split_quoted(line, ',', no));
  }
  return rows;
}

}  // namespace detail

inline std::vector<MetricRow> metric_rows(const std::string& dataset, Algorithm alg,
                                          const std::vector<FoldResult>& results) {
  std::vector<MetricRow> rows;
  for (const auto& r : results) {
    const auto values = r.report.values();
    for (std::size_t k = 0; k < values.size(); ++k)
      rows.push_back({dataset, static_cast<int>(alg), r.fold, MetricReport::names()[k], values[k]});
  }
  return rows;
}

inline std::string write_metrics_csv(const std::vector<MetricRow>& rows) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const auto& r : rows)
    out += detail::csv_field(r.dataset) + ',' + std::to_string(r.algorithm) + ',' + std::to_string(r.fold) + ',' +
           r.metric + ',' + detail::format_double(r.value) + '\n';
  return out;
}

inline bool is_metrics_csv(std::string_view text) {
  const auto nl = text.find('\n');
  return detail::trim(text.substr(0, nl)) == kMetricsHeader;
}

inline std::vector<MetricRow> read_metrics_csv(std::string_view text) {
  auto rows = detail::read_csv(text);
  if (rows.empty()) fail(ErrorKind::schema, "metrics csv is empty");
  std::vector<MetricRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != 5) fail(ErrorKind::schema, "metrics csv row " + std::to_string(i + 1) + " needs 5 fields");
    MetricRow r;
    r.dataset = f[0];
    double alg = 0, fold = 0;
    if (!detail::parse_double(f[1], alg) || !detail::parse_double(f[2], fold) || !detail::parse_double(f[4], r.value))
      fail(ErrorKind::parse, "metrics csv row " + std::to_string(i + 1) + " has a non-numeric field");
    r.algorithm = static_cast<int>(alg);
    r.fold = static_cast<std::size_t>(fold);
    r.metric = f[3];
    out.push_back(std::move(r));
  }
  return out;
}

/// How metrics.csv rows are grouped into ResultTable rows: one row per dataset
/// (fold mean) or one row per (dataset, fold).
enum class BlockKind { dataset, fold };

/// metric name -> ResultTable; algorithm columns in ascending numeric order.
inline std::map<std::string, ResultTable> tables_from_rows(const std::vector<MetricRow>& rows, BlockKind blocks) {
  std::vector<int> algs;
  for (const auto& r : rows) algs.push_back(r.algorithm);
  std::sort(algs.begin(), algs.end());
  algs.erase(std::unique(algs.begin(), algs.end()), algs.end());

  // metric -> block -> alg -> (sum, count)
  std::map<std::string, std::map<std::string, std::map<int, std::pair<double, std::size_t>>>> acc;
  std::vector<std::string> block_order;
  for (const auto& r : rows) {
    const std::string block = blocks == BlockKind::dataset ? r.dataset : r.dataset + "#" + std::to_string(r.fold);
    if (std::find(block_order.begin(), block_order.end(), block) == block_order.end()) block_order.push_back(block);
    auto& cell = acc[r.metric][block][r.algorithm];
    cell.first += r.value;
    cell.second += 1;
  }
  std::map<std::string, ResultTable> out;
  for (const auto& [metric, by_block] : acc) {
    ResultTable t;
    for (int a : algs) t.algorithms.push_back(std::to_string(a));
    t.values = Matrix(0, algs.size());
    for (const auto& block : block_order) {
      auto it = by_block.find(block);
      if (it == by_block.end()) fail(ErrorKind::schema, "metric " + metric + " missing for " + block);
      std::vector<double> row;
      for (int a : algs) {
        auto c = it->second.find(a);
        if (c == it->second.end())
          fail(ErrorKind::schema, "metric " + metric + " missing algorithm " + std::to_string(a) + " for " + block);
        row.push_back(c->second.first / static_cast<double>(c->second.second));
      }
      t.datasets.push_back(block);
      t.values.append_row(row);
    }
    out.emplace(metric, std::move(t));
  }
  return out;
}

inline std::string write_result_table_csv(const ResultTable& t) {
  std::string out = "dataset";
  for (const auto& a : t.algorithms) out += ',' + detail::csv_field(a);
  out += '\n';
  for (std::size_t i = 0; i < t.datasets.size(); ++i) {
    out += detail::csv_field(t.datasets[i]);
    for (double v : t.values.row(i)) out += ',' + detail::format_double(v);
    out += '\n';
  }
  return out;
}

inline ResultTable read_result_table_csv(std::string_view text) {
  auto rows = detail::read_csv(text);
  if (rows.size() < 2) fail(ErrorKind::schema, "result table csv needs a header and at least one row");
  ResultTable t;
  t.algorithms.assign(rows[0].begin() + 1, rows[0].end());
  t.values = Matrix(0, t.algorithms.size());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      fail(ErrorKind::schema, "result table row " + std::to_string(i + 1) + " has the wrong width");
    t.datasets.push_back(rows[i][0]);
    std::vector<double> row;
    for (std::size_t j = 1; j < rows[i].size(); ++j) {
      double v = 0;
      if (!detail::parse_double(rows[i][j], v))
        fail(ErrorKind::parse, "result table row " + std::to_string(i + 1) + " has a non-numeric entry");
      row.push_back(v);
    }
    t.values.append_row(row);
  }
  return t;
}

inline nlohmann::json to_json(const ComparisonReport& rep, const ResultTable& t) {
  nlohmann::json pw = nlohmann::json::array();
  for (const auto& pc : rep.pairwise) {
    nlohmann::json e{{"a", t.algorithms[pc.a]}, {"b", t.algorithms[pc.b]}};
    if (pc.test) {
      e["w_plus"] = pc.test->w_plus;
      e["w_minus"] = pc.test->w_minus;
      e["n"] = pc.test->n;
      e["exact"] = pc.test->exact;
      e["p"] = pc.test->p;
      e["p_holm"] = pc.p_holm;
    } else {
      e["p"] = nullptr;
      e["p_holm"] = nullptr;
      e["note"] = pc.note;
    }
    pw.push_back(std::move(e));
  }
  nlohmann::json ranks = nlohmann::json::object();
  for (std::size_t j = 0; j < t.algorithms.size(); ++j) ranks[t.algorithms[j]] = rep.friedman.average_ranks[j];
  nlohmann::json j{{"blocks", t.datasets.size()},
                   {"alpha", rep.alpha},
                   {"wilcoxon", std::move(pw)},
                   {"friedman", {{"chi_square", rep.friedman.chi_square}, {"p", rep.friedman.p}}},
                   {"average_ranks", std::move(ranks)}};
  j["nemenyi_cd"] = rep.nemenyi_cd ? nlohmann::json(*rep.nemenyi_cd) : nlohmann::json(nullptr);
  return j;
}

}  // namespace lpwfcm
