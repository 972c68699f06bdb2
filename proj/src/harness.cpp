#include "classbench/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace classbench {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<Prediction> predict_knn(const Dataset& train, const Dataset& test,
                                    const KnnConfig& cfg) {
  std::vector<Prediction> out;
  for (std::size_t r = 0; r < test.num_instances(); ++r) {
    const auto dist = classify(train, test.instance(r), cfg);
    out.push_back({*test.class_of(r), dist.probabilities(), dist.predicted()});
  }
  return out;
}

std::vector<Prediction> predict_mlp(const Dataset& train, const Dataset& test,
                                    const MlpConfig& cfg) {
  const auto net = classbench::train<double>(train, cfg);
  std::vector<Prediction> out;
  for (std::size_t r = 0; r < test.num_instances(); ++r) {
    const auto dist = forward(net, encode_instance(test, r));
    out.push_back({*test.class_of(r), dist.probabilities(), dist.predicted()});
  }
  return out;
}

std::vector<Prediction> predict_majority(const Dataset& train, const Dataset& test) {
  std::vector<double> counts(train.num_classes(), 0.0);
  for (std::size_t r = 0; r < train.num_instances(); ++r) counts[*train.class_of(r)] += 1.0;
  const ClassDistribution dist(counts);
  std::vector<Prediction> out;
  for (std::size_t r = 0; r < test.num_instances(); ++r)
    out.push_back({*test.class_of(r), dist.probabilities(), dist.predicted()});
  return out;
}

Summary summarize(const std::vector<SeedResult>& seeds, double SeedResult::*field) {
  Summary s;
  if (seeds.empty()) return s;
  for (const auto& r : seeds) s.mean += r.*field;
  s.mean /= static_cast<double>(seeds.size());
  if (seeds.size() > 1) {
    double ss = 0.0;
    for (const auto& r : seeds) ss += (r.*field - s.mean) * (r.*field - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(seeds.size() - 1));
  }
  return s;
}

std::string trim_copy(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      auto item = trim_copy(s.substr(start, i - start));
      if (!item.empty()) out.push_back(std::move(item));
      start = i + 1;
    }
  }
  return out;
}

template <typename T>
T parse_value(const std::string& text, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument((line ? "grid line " + std::to_string(line) + ": " : std::string()) +
                                "invalid value '" + text + "'");
  return v;
}

template <typename T>
std::vector<T> parse_values(std::string_view s, std::size_t line) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) out.push_back(parse_value<T>(item, line));
  return out;
}

}  // namespace

std::string describe(const ClassifierSpec& spec) {
  return std::visit(
      overloaded{
          [](const KnnConfig& c) {
            return "knn:k=" + std::to_string(c.k) + ":" + std::string(to_string(c.weighting));
          },
          [](const MlpConfig& c) {
            return "mlp:lr=" + format_number(c.learning_rate) + ":momentum=" +
                   format_number(c.momentum) + ":hidden=" + std::to_string(c.hidden_units) +
                   ":epochs=" + std::to_string(c.epochs);
          },
          [](const MajorityConfig&) { return std::string("majority"); },
      },
      spec);
}

ClassifierSpec parse_spec(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i)
    if (i == text.size() || text[i] == ':') {
      parts.push_back(trim_copy(text.substr(start, i - start)));
      start = i + 1;
    }
  const auto bad = [&](const std::string& why) {
    return std::invalid_argument("classifier '" + std::string(text) + "': " + why);
  };
  const auto kind = parts.front();
  if (kind == "majority") {
    if (parts.size() > 1) throw bad("majority takes no parameters");
    return MajorityConfig{};
  }
  if (kind != "knn" && kind != "mlp") throw bad("expected knn, mlp or majority");
  KnnConfig knn;
  MlpConfig mlp;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto& p = parts[i];
    const auto eq = p.find('=');
    if (kind == "knn" && eq == std::string::npos) {
      knn.weighting = parse_weighting(p);
      continue;
    }
    if (eq == std::string::npos) throw bad("expected key=value, got '" + p + "'");
    const auto key = p.substr(0, eq);
    const auto value = p.substr(eq + 1);
    if (kind == "knn" && key == "k") knn.k = parse_value<std::size_t>(value, 0);
    else if (kind == "knn" && key == "weighting") knn.weighting = parse_weighting(value);
    else if (kind == "mlp" && (key == "lr" || key == "learning_rate"))
      mlp.learning_rate = parse_value<double>(value, 0);
    else if (kind == "mlp" && key == "momentum") mlp.momentum = parse_value<double>(value, 0);
    else if (kind == "mlp" && key == "hidden") mlp.hidden_units = parse_value<std::size_t>(value, 0);
    else if (kind == "mlp" && key == "epochs") mlp.epochs = parse_value<std::size_t>(value, 0);
    else throw bad("unknown parameter '" + key + "'");
  }
  if (kind == "knn") {
    knn.validate();
    return knn;
  }
  mlp.validate();
  return mlp;
}

std::string_view to_string(MissingMethod m) {
  switch (m) {
    case MissingMethod::default_handling: return "default";
    case MissingMethod::mean_mode: return "mean-mode";
    case MissingMethod::multiple_imputation: return "mi";
  }
  return "default";
}

MissingMethod parse_missing_method(std::string_view text) {
  if (text == "default" || text == "ignore") return MissingMethod::default_handling;
  if (text == "mean-mode" || text == "mean_mode") return MissingMethod::mean_mode;
  if (text == "mi" || text == "multiple-imputation" || text == "multiple_imputation")
    return MissingMethod::multiple_imputation;
  throw std::invalid_argument("unknown missing-value method '" + std::string(text) + "'");
}

EvaluationReport cross_validate(const Dataset& d, const ClassifierSpec& spec, std::size_t folds,
                                std::uint64_t seed, const CvOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto split = stratified_folds(d, folds, seed);
  const std::size_t classes = d.num_classes();
  if (options.roc_positive >= classes) throw std::invalid_argument("ROC positive class out of range");

  std::optional<MinMaxScaling> global_scaling;
  std::optional<Dataset> global_filled;
  if (!options.per_fold_normalization) {
    global_scaling = fit_min_max(d);
    if (std::holds_alternative<MlpConfig>(spec)) {
      global_filled = apply_mean_mode(fit_mean_mode(d, false, true), d);
      global_scaling = fit_min_max(*global_filled);
    }
  }

  std::vector<Prediction> all;
  std::vector<FoldResult> fold_results;
  for (std::size_t f = 0; f < split.size(); ++f) {
    const auto train_rows = split.training_indices(f);
    const Dataset train = d.select(train_rows);
    const Dataset test = d.select(split.folds[f]);

    auto preds = std::visit(
        overloaded{
            [&](const KnnConfig& cfg) {
              if (cfg.k > train.num_instances())
                throw std::invalid_argument(
                    "training fold has " + std::to_string(train.num_instances()) +
                    " instances, fewer than k=" + std::to_string(cfg.k) + "; use a smaller k");
              const auto scaling = global_scaling ? *global_scaling : fit_min_max(train);
              return predict_knn(apply_min_max(scaling, train), apply_min_max(scaling, test), cfg);
            },
            [&](const MlpConfig& cfg) {
              const auto fill = fit_mean_mode(train, false, true);
              const Dataset train_filled = apply_mean_mode(fill, train);
              const Dataset test_filled = apply_mean_mode(fill, test);
              const auto scaling = global_scaling ? *global_scaling : fit_min_max(train_filled);
              auto fold_cfg = cfg;
              fold_cfg.seed = derive_seed(seed, {cfg.seed, f});
              return predict_mlp(nominal_to_binary(apply_min_max(scaling, train_filled)),
                                 nominal_to_binary(apply_min_max(scaling, test_filled)), fold_cfg);
            },
            [&](const MajorityConfig&) { return predict_majority(train, test); },
        },
        spec);
    fold_results.push_back(fold_result(f, preds, classes));
    all.insert(all.end(), std::make_move_iterator(preds.begin()),
               std::make_move_iterator(preds.end()));
  }

  auto report = make_report(all, classes, options.roc_positive);
  report.folds = std::move(fold_results);
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void SweepGrid::validate() const {
  if (kind == Kind::knn) {
    if (k.empty() || weightings.empty())
      throw std::invalid_argument("knn grid needs non-empty k and weighting lists");
    for (auto v : k) KnnConfig{v, Weighting::uniform}.validate();
  } else {
    if (learning_rates.empty() || momenta.empty() || hidden_units.empty())
      throw std::invalid_argument(
          "mlp grid needs non-empty learning_rate, momentum and hidden lists");
    for (double lr : learning_rates)
      for (double m : momenta) MlpConfig{lr, m, 0, epochs, 0}.validate();
  }
}

std::vector<ClassifierSpec> SweepGrid::cells() const {
  validate();
  std::vector<ClassifierSpec> out;
  if (kind == Kind::knn) {
    for (auto w : weightings)
      for (auto v : k) out.emplace_back(KnnConfig{v, w});
  } else {
    for (double lr : learning_rates)
      for (double m : momenta)
        for (auto h : hidden_units) out.emplace_back(MlpConfig{lr, m, h, epochs, 0});
  }
  return out;
}

GridFile parse_grid(std::istream& in) {
  GridFile file;
  bool have_kind = false;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const auto text = trim_copy(std::string_view(raw).substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("grid line " + std::to_string(line) + ": expected key = value");
    const auto key = trim_copy(std::string_view(text).substr(0, eq));
    const auto value = std::string_view(text).substr(eq + 1);
    auto& g = file.grid;
    if (key == "classifier") {
      const auto v = trim_copy(value);
      if (v == "knn" || v == "ibk") g.kind = SweepGrid::Kind::knn;
      else if (v == "mlp") g.kind = SweepGrid::Kind::mlp;
      else throw std::invalid_argument("grid line " + std::to_string(line) + ": unknown classifier '" + v + "'");
      have_kind = true;
    } else if (key == "k") {
      g.k = parse_values<std::size_t>(value, line);
    } else if (key == "weighting") {
      for (const auto& w : split_list(value)) g.weightings.push_back(parse_weighting(w));
    } else if (key == "learning_rate") {
      g.learning_rates = parse_values<double>(value, line);
    } else if (key == "momentum") {
      g.momenta = parse_values<double>(value, line);
    } else if (key == "hidden") {
      g.hidden_units = parse_values<std::size_t>(value, line);
    } else if (key == "epochs") {
      g.epochs = parse_value<std::size_t>(trim_copy(value), line);
    } else if (key == "folds") {
      file.folds = parse_value<std::size_t>(trim_copy(value), line);
    } else if (key == "seeds") {
      file.seeds = parse_values<std::uint64_t>(value, line);
    } else {
      throw std::invalid_argument("grid line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }
  if (!have_kind) throw std::invalid_argument("grid file does not name a classifier");
  if (file.grid.kind == SweepGrid::Kind::knn && file.grid.weightings.empty())
    file.grid.weightings = {Weighting::uniform};
  file.grid.validate();
  return file;
}

GridFile load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grid file '" + path.string() + "'");
  return parse_grid(in);
}

Summary TableRow::accuracy() const { return summarize(seeds, &SeedResult::accuracy); }
Summary TableRow::rmse() const { return summarize(seeds, &SeedResult::rmse); }
Summary TableRow::kappa() const { return summarize(seeds, &SeedResult::kappa); }
Summary TableRow::wall_time() const { return summarize(seeds, &SeedResult::wall_time); }

void rank(ComparisonTable& table) {
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const TableRow& a, const TableRow& b) {
    const double aa = a.accuracy().mean, ba = b.accuracy().mean;
    if (aa != ba) return aa > ba;
    return a.rmse().mean < b.rmse().mean;
  });
  for (std::size_t i = 0; i < table.rows.size(); ++i) table.rows[i].best = (i == 0);
}

namespace {

SeedResult seed_result(std::uint64_t seed, const EvaluationReport& r) {
  SeedResult s;
  s.seed = seed;
  s.accuracy = r.accuracy;
  s.rmse = r.rmse;
  s.kappa = r.kappa;
  s.wall_time = r.wall_time;
  return s;
}

SeedResult pooled_result(std::uint64_t seed, const std::vector<EvaluationReport>& reports) {
  std::vector<SeedResult> each;
  double time = 0.0;
  for (const auto& r : reports) {
    each.push_back(seed_result(seed, r));
    time += r.wall_time;
  }
  SeedResult s;
  s.seed = seed;
  const auto acc = summarize(each, &SeedResult::accuracy);
  const auto err = summarize(each, &SeedResult::rmse);
  const auto kap = summarize(each, &SeedResult::kappa);
  s.accuracy = acc.mean;
  s.accuracy_sd = acc.sd;
  s.rmse = err.mean;
  s.rmse_sd = err.sd;
  s.kappa = kap.mean;
  s.kappa_sd = kap.sd;
  s.wall_time = time;
  return s;
}

}  // namespace

ComparisonTable sweep(const Dataset& d, const std::string& dataset_name, const SweepGrid& grid,
                      std::size_t folds, std::span<const std::uint64_t> seeds,
                      const CvOptions& options) {
  if (seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");
  const Dataset data = drop_missing_class(d);
  ComparisonTable table;
  for (const auto& spec : grid.cells()) {
    TableRow row{dataset_name, describe(spec), std::string(to_string(MissingMethod::default_handling)), {}, false};
    for (auto seed : seeds) row.seeds.push_back(seed_result(seed, cross_validate(data, spec, folds, seed, options)));
    table.rows.push_back(std::move(row));
  }
  rank(table);
  return table;
}

std::vector<Dataset> prepare_for_method(const Dataset& d, MissingMethod method,
                                        const ImputationConfig& imputation, std::uint64_t seed) {
  switch (method) {
    case MissingMethod::default_handling:
      return {drop_missing_class(d)};
    case MissingMethod::mean_mode:
      return {drop_missing_class(mean_mode_impute(d, imputation.include_class))};
    case MissingMethod::multiple_imputation: {
      auto cfg = imputation;
      cfg.seed = derive_seed(seed, {imputation.seed, 0x4d49});
      auto mi = multiple_impute(d, cfg);
      std::vector<Dataset> out;
      for (const auto& completed : mi.datasets) out.push_back(drop_missing_class(completed));
      return out;
    }
  }
  return {};
}

ComparisonTable compare_missing_methods(const Dataset& d, const std::string& dataset_name,
                                        std::span<const ClassifierSpec> specs,
                                        std::span<const MissingMethod> methods, std::size_t folds,
                                        std::span<const std::uint64_t> seeds,
                                        const ImputationConfig& imputation,
                                        const CvOptions& options) {
  if (seeds.empty()) throw std::invalid_argument("comparison needs at least one seed");
  ComparisonTable table;
  for (auto method : methods) {
    std::vector<TableRow> rows;
    for (const auto& spec : specs)
      rows.push_back({dataset_name, describe(spec), std::string(to_string(method)), {}, false});
    for (auto seed : seeds) {
      const auto prepared = prepare_for_method(d, method, imputation, seed);
      for (std::size_t s = 0; s < specs.size(); ++s) {
        std::vector<EvaluationReport> reports;
        for (const auto& data : prepared)
          reports.push_back(cross_validate(data, specs[s], folds, seed, options));
        rows[s].seeds.push_back(pooled_result(seed, reports));
      }
    }
    table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  }
  return table;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  throw std::invalid_argument("unknown report format '" + std::string(text) + "'");
}

nlohmann::json table_to_json(const ComparisonTable& table, bool with_timing) {
  auto rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    auto seeds = nlohmann::json::array();
    for (const auto& s : row.seeds) {
      nlohmann::json js = {{"seed", s.seed},         {"accuracy", s.accuracy},
                           {"accuracy_sd", s.accuracy_sd}, {"rmse", s.rmse},
                           {"rmse_sd", s.rmse_sd},   {"kappa", s.kappa},
                           {"kappa_sd", s.kappa_sd}};
      if (with_timing) js["wall_time"] = s.wall_time;
      seeds.push_back(std::move(js));
    }
    auto summary = [](Summary s) { return nlohmann::json{{"mean", s.mean}, {"sd", s.sd}}; };
    nlohmann::json jr = {{"dataset", row.dataset},
                         {"classifier", row.classifier},
                         {"missing_method", row.missing_method},
                         {"best", row.best},
                         {"seeds", std::move(seeds)},
                         {"accuracy", summary(row.accuracy())},
                         {"rmse", summary(row.rmse())},
                         {"kappa", summary(row.kappa())}};
    if (with_timing) jr["wall_time"] = summary(row.wall_time());
    rows.push_back(std::move(jr));
  }
  return nlohmann::json{{"rows", std::move(rows)}};
}

ComparisonTable table_from_json(const nlohmann::json& j) {
  ComparisonTable table;
  for (const auto& jr : j.at("rows")) {
    TableRow row;
    row.dataset = jr.at("dataset").get<std::string>();
    row.classifier = jr.at("classifier").get<std::string>();
    row.missing_method = jr.at("missing_method").get<std::string>();
    row.best = jr.at("best").get<bool>();
    for (const auto& js : jr.at("seeds")) {
      SeedResult s;
      s.seed = js.at("seed").get<std::uint64_t>();
      s.accuracy = js.at("accuracy").get<double>();
      s.accuracy_sd = js.at("accuracy_sd").get<double>();
      s.rmse = js.at("rmse").get<double>();
      s.rmse_sd = js.at("rmse_sd").get<double>();
      s.kappa = js.at("kappa").get<double>();
      s.kappa_sd = js.at("kappa_sd").get<double>();
      s.wall_time = js.value("wall_time", 0.0);
      row.seeds.push_back(s);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_table(std::ostream& out, const ComparisonTable& table, ReportFormat format,
                 bool with_timing) {
  if (format == ReportFormat::json) {
    out << table_to_json(table, with_timing).dump(2) << '\n';
    return;
  }
  out << "dataset,classifier,missing_method,seed,accuracy,accuracy_sd,rmse,rmse_sd,kappa,kappa_sd,"
         "best"
      << (with_timing ? ",wall_time" : "") << '\n';
  for (const auto& row : table.rows) {
    for (const auto& s : row.seeds) {
      out << row.dataset << ',' << row.classifier << ',' << row.missing_method << ',' << s.seed
          << ',' << format_number(s.accuracy) << ',' << format_number(s.accuracy_sd) << ','
          << format_number(s.rmse) << ',' << format_number(s.rmse_sd) << ','
          << format_number(s.kappa) << ',' << format_number(s.kappa_sd) << ','
          << (row.best ? 1 : 0);
      if (with_timing) out << ',' << format_number(s.wall_time);
      out << '\n';
    }
  }
}

void emit_report(const ComparisonTable& table, ReportFormat format,
                 const std::filesystem::path& path, bool with_timing) {
  if (table.rows.empty()) throw std::invalid_argument("refusing to write an empty table");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report to '" + path.string() + "'");
  write_table(out, table, format, with_timing);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace classbench
