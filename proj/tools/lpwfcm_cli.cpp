// Batch experiment runner: run / compare / stats.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lpwfcm/lpwfcm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lpwfcm;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) fail(ErrorKind::io, "write to '" + path.string() + "' failed");
}

struct SyntheticSpec {
  std::size_t n = 600, L = 5, d = 10;
  double noise = 0.3;

  std::string name() const {
    return "synthetic_n" + std::to_string(n) + "_L" + std::to_string(L) + "_d" + std::to_string(d) + "_noise" +
           detail::format_double(noise);
  }
};

SyntheticSpec parse_synthetic(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    double x = 0;
    if (!detail::parse_double(tok, x)) fail(ErrorKind::argument, "--synthetic expects n,L,d,noise");
    v.push_back(x);
  }
  if (v.size() != 4) fail(ErrorKind::argument, "--synthetic expects n,L,d,noise");
  return {static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]), static_cast<std::size_t>(v[2]), v[3]};
}

struct NamedDataset {
  std::string name;
  MultiLabelDataset data;
};

struct DataSources {
  std::vector<std::string> arff;
  std::vector<std::string> xml;
  std::optional<SyntheticSpec> synthetic;
};

NamedDataset load_arff_pair(const std::string& arff, const std::string& xml) {
  const auto labels = parse_label_xml(read_file(xml));
  return {fs::path(arff).stem().string(), parse_arff(read_file(arff), labels)};
}

void check_pairs(const DataSources& src) {
  if (src.arff.size() != src.xml.size())
    fail(ErrorKind::schema, "every --data ARFF needs a matching --labels-xml manifest (got " +
                                std::to_string(src.arff.size()) + " ARFF, " + std::to_string(src.xml.size()) + " XML)");
}

struct RunConfig {
  DataSources src;
  std::vector<int> algorithms{1, 2, 3};
  std::string learner = "stump";
  int epochs = 10;
  std::size_t folds = 10;
  double t = 0.6;
  std::uint64_t seed = 1;
  std::string rrc = "beta_mc";
  std::vector<double> beta_grid = default_beta_grid();
  std::vector<double> gamma_grid = default_gamma_grid();
  std::string out = "results";
  bool trace = false;
};

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    double x = 0;
    if (!detail::parse_double(tok, x)) fail(ErrorKind::argument, "expected a comma-separated integer list: " + s);
    v.push_back(static_cast<int>(x));
  }
  return v;
}

void apply_config_json(RunConfig& c, const json& j) {
  try {
    if (j.contains("data")) j.at("data").get_to(c.src.arff);
    if (j.contains("labels_xml")) j.at("labels_xml").get_to(c.src.xml);
    if (j.contains("synthetic")) {
      const auto& s = j.at("synthetic");
      if (s.is_string()) {
        c.src.synthetic = parse_synthetic(s.get<std::string>());
      } else {
        SyntheticSpec sp;
        sp.n = s.value("n", sp.n);
        sp.L = s.value("L", sp.L);
        sp.d = s.value("d", sp.d);
        sp.noise = s.value("noise", sp.noise);
        c.src.synthetic = sp;
      }
    }
    if (j.contains("algorithms")) j.at("algorithms").get_to(c.algorithms);
    if (j.contains("learner")) j.at("learner").get_to(c.learner);
    if (j.contains("epochs")) j.at("epochs").get_to(c.epochs);
    if (j.contains("folds")) j.at("folds").get_to(c.folds);
    if (j.contains("t")) j.at("t").get_to(c.t);
    if (j.contains("seed")) j.at("seed").get_to(c.seed);
    if (j.contains("rrc")) j.at("rrc").get_to(c.rrc);
    if (j.contains("beta_grid")) j.at("beta_grid").get_to(c.beta_grid);
    if (j.contains("gamma_grid")) j.at("gamma_grid").get_to(c.gamma_grid);
    if (j.contains("out")) j.at("out").get_to(c.out);
    if (j.contains("trace")) j.at("trace").get_to(c.trace);
  } catch (const json::exception& e) {
    fail(ErrorKind::schema, std::string("config: ") + e.what());
  }
}

json config_echo(const RunConfig& c) {
  json j{{"data", c.src.arff},   {"labels_xml", c.src.xml}, {"algorithms", c.algorithms},
         {"learner", c.learner}, {"epochs", c.epochs},      {"folds", c.folds},
         {"t", c.t},             {"seed", c.seed},          {"rrc", c.rrc},
         {"beta_grid", c.beta_grid}, {"gamma_grid", c.gamma_grid}, {"out", c.out}, {"trace", c.trace}};
  if (c.src.synthetic) {
    const auto& s = *c.src.synthetic;
    j["synthetic"] = {{"n", s.n}, {"L", s.L}, {"d", s.d}, {"noise", s.noise}};
  }
  return j;
}

int cmd_run(const RunConfig& c) {
  check_pairs(c.src);
  if (c.src.arff.empty() && !c.src.synthetic) fail(ErrorKind::argument, "run needs --data/--labels-xml or --synthetic");
  ExperimentConfig cfg;
  cfg.folds = c.folds;
  cfg.t = c.t;
  cfg.seed = c.seed;
  cfg.learner.kind = learner_kind_from_string(c.learner);
  cfg.learner.epochs = c.epochs;
  cfg.rrc = rrc_mode_from_string(c.rrc);
  cfg.beta_grid = c.beta_grid;
  cfg.gamma_grid = c.gamma_grid;
  std::vector<Algorithm> algs;
  for (int a : c.algorithms) algs.push_back(algorithm_from_int(a));
  if (algs.empty()) fail(ErrorKind::argument, "no algorithms selected");

  std::vector<NamedDataset> datasets;
  for (std::size_t i = 0; i < c.src.arff.size(); ++i) datasets.push_back(load_arff_pair(c.src.arff[i], c.src.xml[i]));
  if (c.src.synthetic) {
    const auto& s = *c.src.synthetic;
    datasets.push_back({s.name(), generate_synthetic(s.n, s.L, s.d, s.noise, c.seed)});
  }

  std::vector<MetricRow> rows;
  json tuning = json::array();
  json ds_info = json::array();
  std::string trace_csv = "dataset,algorithm,fold,row,pair,d1,d2,weight\n";
  for (const auto& nd : datasets) {
    ds_info.push_back({{"name", nd.name}, {"N", nd.data.size()}, {"d", nd.data.dim()}, {"L", nd.data.label_count()}});
    // one RRC memo per dataset, shared by the algorithms: values depend only on (seed, pair, support)
    auto cache = std::make_shared<RrcCache>(cfg.rrc, derive_seed(cfg.seed, {40}));
    for (auto alg : algs) {
      TraceSink sink;
      if (c.trace)
        sink = [&](const TraceRecord& r) {
          trace_csv += detail::csv_field(nd.name) + ',' + std::to_string(static_cast<int>(alg)) + ',' +
                       std::to_string(r.fold) + ',' + std::to_string(r.row) + ',' + std::to_string(r.pair) + ',' +
                       detail::format_double(r.d1) + ',' + detail::format_double(r.d2) + ',' +
                       detail::format_double(r.weight) + '\n';
        };
      std::vector<FoldResult> results;
      try {
        results = run_experiment(nd.data, alg, cfg, cache, sink);
      } catch (const Error& e) {
        throw Error(e.kind(), nd.name + ", algorithm " + std::to_string(static_cast<int>(alg)) + ": " + e.detail());
      }
      auto r = metric_rows(nd.name, alg, results);
      rows.insert(rows.end(), r.begin(), r.end());
      for (const auto& f : results)
        if (f.tuning)
          tuning.push_back({{"dataset", nd.name},
                            {"algorithm", static_cast<int>(alg)},
                            {"fold", f.fold},
                            {"beta", f.tuning->beta},
                            {"gamma", f.tuning->gamma},
                            {"objective", f.tuning->objective}});
    }
  }

  const fs::path out(c.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) fail(ErrorKind::io, "cannot create output directory '" + c.out + "'");
  write_file(out / "metrics.csv", write_metrics_csv(rows));
  write_file(out / "tuning.json", tuning.dump(2) + "\n");
  json manifest{{"tool", "lpwfcm"},
                {"version", kVersion},
                {"seeds",
                 {{"run", c.seed},
                  {"folds", derive_seed(c.seed, {10})},
                  {"rrc", derive_seed(c.seed, {40})},
                  {"synthetic", c.seed}}},
                {"datasets", ds_info},
                {"config", config_echo(c)}};
  write_file(out / "run-manifest.json", manifest.dump(2) + "\n");
  if (c.trace) write_file(out / "trace.csv", trace_csv);
  std::cerr << "wrote " << rows.size() << " metric values to " << (out / "metrics.csv").string() << "\n";
  return kOk;
}

int cmd_compare(const std::vector<std::string>& files, const std::string& out_dir, double alpha,
                const std::string& blocks) {
  if (files.empty()) fail(ErrorKind::argument, "compare needs at least one table");
  const BlockKind bk = blocks == "fold" ? BlockKind::fold : BlockKind::dataset;
  if (blocks != "fold" && blocks != "dataset") fail(ErrorKind::argument, "--blocks must be dataset or fold");

  std::vector<MetricRow> long_rows;
  std::map<std::string, ResultTable> tables;
  for (const auto& f : files) {
    const auto text = read_file(f);
    if (is_metrics_csv(text)) {
      auto r = read_metrics_csv(text);
      long_rows.insert(long_rows.end(), r.begin(), r.end());
    } else {
      tables[fs::path(f).stem().string()] = read_result_table_csv(text);
    }
  }
  if (!long_rows.empty())
    for (auto& [metric, t] : tables_from_rows(long_rows, bk)) {
      if (tables.count(metric)) fail(ErrorKind::schema, "metric '" + metric + "' given twice");
      tables.emplace(metric, std::move(t));
    }

  const fs::path out(out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) fail(ErrorKind::io, "cannot create output directory '" + out_dir + "'");

  json report = json::object();
  std::string pair_csv = "metric,algorithm_a,algorithm_b,n,w_plus,w_minus,p,p_holm\n";
  std::string summary_csv = "metric,algorithm,average_rank,friedman_chi_square,friedman_p,nemenyi_cd\n";
  for (const auto& [metric, t] : tables) {
    if (t.datasets.size() < 2)
      fail(ErrorKind::schema, "metric '" + metric + "' has " + std::to_string(t.datasets.size()) +
                                  " block(s); need >= 2 (pass more datasets or --blocks fold)");
    const auto rep = compare_algorithms(t, alpha, true);
    report[metric] = to_json(rep, t);
    write_file(out / ("table_" + metric + ".csv"), write_result_table_csv(t));
    for (const auto& pc : rep.pairwise) {
      pair_csv += metric + ',' + t.algorithms[pc.a] + ',' + t.algorithms[pc.b] + ',';
      if (pc.test)
        pair_csv += std::to_string(pc.test->n) + ',' + detail::format_double(pc.test->w_plus) + ',' +
                    detail::format_double(pc.test->w_minus) + ',' + detail::format_double(pc.test->p) + ',' +
                    detail::format_double(pc.p_holm) + '\n';
      else
        pair_csv += ",,,,\n";
    }
    for (std::size_t j = 0; j < t.algorithms.size(); ++j)
      summary_csv += metric + ',' + t.algorithms[j] + ',' + detail::format_double(rep.friedman.average_ranks[j]) + ',' +
                     detail::format_double(rep.friedman.chi_square) + ',' + detail::format_double(rep.friedman.p) +
                     ',' + (rep.nemenyi_cd ? detail::format_double(*rep.nemenyi_cd) : std::string()) + '\n';
  }
  write_file(out / "compare.json", report.dump(2) + "\n");
  write_file(out / "compare.csv", pair_csv);
  write_file(out / "ranks.csv", summary_csv);
  return kOk;
}

int cmd_stats(const DataSources& src, const std::string& out_path, std::uint64_t seed) {
  check_pairs(src);
  std::string csv = "dataset,N,d,L,LC,LD,avIR,error\n";
  bool any_failed = false;
  auto emit = [&](const std::string& name, const MultiLabelDataset& ds) {
    try {
      const auto s = compute_stats(ds);
      csv += detail::csv_field(name) + ',' + std::to_string(ds.size()) + ',' + std::to_string(ds.dim()) + ',' +
             std::to_string(ds.label_count()) + ',' + detail::format_double(s.label_cardinality) + ',' +
             detail::format_double(s.label_density) + ',' + detail::format_double(s.avg_imbalance_ratio) + ",\n";
    } catch (const Error& e) {
      any_failed = true;
      std::cerr << name << ": " << e.what() << "\n";
      csv += detail::csv_field(name) + ',' + std::to_string(ds.size()) + ',' + std::to_string(ds.dim()) + ',' +
             std::to_string(ds.label_count()) + ",,,," + detail::csv_field(e.what()) + '\n';
    }
  };
  for (std::size_t i = 0; i < src.arff.size(); ++i) {
    const std::string name = fs::path(src.arff[i]).stem().string();
    try {
      auto nd = load_arff_pair(src.arff[i], src.xml[i]);
      emit(nd.name, nd.data);
    } catch (const Error& e) {
      any_failed = true;
      std::cerr << name << ": " << e.what() << "\n";
      csv += detail::csv_field(name) + ",,,,,,," + detail::csv_field(e.what()) + '\n';
    }
  }
  if (src.synthetic) {
    const auto& s = *src.synthetic;
    emit(s.name(), generate_synthetic(s.n, s.L, s.d, s.noise, seed));
  }
  if (out_path.empty() || out_path == "-") std::cout << csv;
  else write_file(out_path, csv);
  return any_failed ? kData : kOk;
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::argument: return kUsage;
    case ErrorKind::parse:
    case ErrorKind::schema:
    case ErrorKind::value:
    case ErrorKind::stats:
    case ErrorKind::io: return kData;
    default: return kInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-pairwise multi-label ensembles with fuzzy confusion matrix correction"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "cross-validated comparison of algorithms 1 (plain), 2 (fcm), 3 (weighted fcm)");
  RunConfig rc;
  std::string config_path, synthetic, alg_list, rrc_mode, learner;
  std::vector<std::string> run_data, run_xml;
  std::size_t folds = 0;
  double t = 0;
  std::uint64_t seed = 0;
  std::string out;
  int epochs = 0;
  run->add_option("--config", config_path, "JSON config; flags override it");
  auto* o_data = run->add_option("--data", run_data, "dense ARFF file (repeatable)");
  auto* o_xml = run->add_option("--labels-xml", run_xml, "label manifest for each --data (repeatable)");
  auto* o_syn = run->add_option("--synthetic", synthetic, "synthetic dataset n,L,d,noise");
  auto* o_alg = run->add_option("--alg", alg_list, "algorithms, e.g. 1,2,3");
  auto* o_learner = run->add_option("--learner", learner, "base learner: nb, vp or stump");
  auto* o_epochs = run->add_option("--epochs", epochs, "voted perceptron epochs");
  auto* o_folds = run->add_option("--folds", folds, "cross-validation folds (default 10)");
  auto* o_t = run->add_option("--t", t, "training share of each training fold (default 0.6)");
  auto* o_seed = run->add_option("--seed", seed, "global seed");
  auto* o_rrc = run->add_option("--rrc", rrc_mode, "RRC model: beta_mc or soft");
  auto* o_out = run->add_option("--out", out, "output directory");
  bool trace = false;
  auto* o_trace = run->add_flag("--trace", trace, "write per-query pair supports and weights to trace.csv");

  // compare
  auto* cmp = app.add_subcommand("compare", "statistical comparison of metrics.csv or result-table CSVs");
  std::vector<std::string> cmp_files;
  std::string cmp_out = "compare", blocks = "dataset";
  double alpha = 0.05;
  cmp->add_option("tables", cmp_files, "metrics.csv files and/or dataset x algorithm CSVs")->required();
  cmp->add_option("--out", cmp_out, "output directory");
  cmp->add_option("--alpha", alpha, "significance level for the Nemenyi CD (0.05 or 0.10)");
  cmp->add_option("--blocks", blocks, "table rows: dataset (fold means) or fold");

  // stats
  auto* st = app.add_subcommand("stats", "dataset characteristics: N, d, L, LC, LD, avIR");
  DataSources st_src;
  std::string st_syn, st_out;
  std::uint64_t st_seed = 1;
  st->add_option("--data", st_src.arff, "dense ARFF file (repeatable)");
  st->add_option("--labels-xml", st_src.xml, "label manifest for each --data (repeatable)");
  st->add_option("--synthetic", st_syn, "synthetic dataset n,L,d,noise");
  st->add_option("--seed", st_seed, "seed for --synthetic");
  st->add_option("--out", st_out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*run) {
      if (!config_path.empty()) {
        try {
          apply_config_json(rc, json::parse(read_file(config_path)));
        } catch (const json::parse_error& e) {
          fail(ErrorKind::parse, "config: " + std::string(e.what()));
        }
      }
      if (o_data->count()) rc.src.arff = run_data;
      if (o_xml->count()) rc.src.xml = run_xml;
      if (o_syn->count()) rc.src.synthetic = parse_synthetic(synthetic);
      if (o_alg->count()) rc.algorithms = parse_int_list(alg_list);
      if (o_learner->count()) rc.learner = learner;
      if (o_epochs->count()) rc.epochs = epochs;
      if (o_folds->count()) rc.folds = folds;
      if (o_t->count()) rc.t = t;
      if (o_seed->count()) rc.seed = seed;
      if (o_rrc->count()) rc.rrc = rrc_mode;
      if (o_out->count()) rc.out = out;
      if (o_trace->count()) rc.trace = trace;
      return cmd_run(rc);
    }
    if (*cmp) return cmd_compare(cmp_files, cmp_out, alpha, blocks);
    if (*st) {
      if (!st_syn.empty()) st_src.synthetic = parse_synthetic(st_syn);
      if (st_src.arff.empty() && !st_src.synthetic) fail(ErrorKind::argument, "stats needs --data or --synthetic");
      return cmd_stats(st_src, st_out, st_seed);
    }
  } catch (const Error& e) {
    std::cerr << "lpwfcm: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "lpwfcm: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
