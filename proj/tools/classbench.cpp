// classbench: command-line front end for the evaluation harness.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "classbench/harness.hpp"

namespace fs = std::filesystem;
using namespace classbench;

namespace {

struct InputOptions {
  std::string path;
  int class_index = -1;  // -1: last attribute
};

void add_input(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("path", in.path, "Dataset file (.arff or .csv)")->required();
  cmd->add_option("--class-index", in.class_index,
                  "Zero-based class attribute index (default: last attribute)");
}

Dataset load(const InputOptions& in) {
  std::optional<std::size_t> cls;
  if (in.class_index >= 0) cls = static_cast<std::size_t>(in.class_index);
  return load_dataset(in.path, cls);
}

std::string dataset_name(const InputOptions& in) { return fs::path(in.path).stem().string(); }

struct RunOptions {
  std::size_t folds = 10;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  bool global_normalization = false;
  std::string out;
  std::string format = "csv";
  bool timing = false;
};

void add_run(CLI::App* cmd, RunOptions& run, bool with_seeds = true) {
  cmd->add_option("--folds", run.folds, "Cross-validation folds")->check(CLI::Range(2, 1 << 30));
  if (with_seeds)
    cmd->add_option("--seeds", run.seeds, "Master seeds, comma separated")->delimiter(',');
  cmd->add_flag("--global-normalization", run.global_normalization,
                "Fit normalization on the whole dataset instead of each training fold");
  cmd->add_option("--out", run.out, "Output file (default: standard output)");
  cmd->add_option("--format", run.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--timing", run.timing, "Include wall time in the output");
}

struct ClassifierOptions {
  std::string classifier = "knn";
  std::size_t k = 1;
  std::string weighting = "uniform";
  double learning_rate = 0.3;
  double momentum = 0.2;
  std::size_t hidden = 0;
  std::size_t epochs = 500;
};

void add_classifier(CLI::App* cmd, ClassifierOptions& c) {
  cmd->add_option("--classifier", c.classifier, "knn, mlp or majority")
      ->check(CLI::IsMember({"knn", "mlp", "majority"}));
  cmd->add_option("--k", c.k, "Neighbours (odd)");
  cmd->add_option("--weighting", c.weighting, "uniform, inverse (1/d) or complement (1-d)");
  cmd->add_option("--lr", c.learning_rate, "MLP learning rate");
  cmd->add_option("--momentum", c.momentum, "MLP momentum");
  cmd->add_option("--hidden", c.hidden, "MLP hidden units (0: no hidden layer)");
  cmd->add_option("--epochs", c.epochs, "MLP training epochs");
}

ClassifierSpec make_spec(const ClassifierOptions& c) {
  if (c.classifier == "knn") {
    KnnConfig cfg{c.k, parse_weighting(c.weighting)};
    cfg.validate();
    return cfg;
  }
  if (c.classifier == "mlp") {
    MlpConfig cfg;
    cfg.learning_rate = c.learning_rate;
    cfg.momentum = c.momentum;
    cfg.hidden_units = c.hidden;
    cfg.epochs = c.epochs;
    cfg.validate();
    return cfg;
  }
  return MajorityConfig{};
}

struct ImputeOptions {
  std::size_t m = 5;
  std::size_t burn_in = 200;
  std::size_t thin = 100;
  std::uint64_t seed = 0;
  double em_tolerance = 1e-6;
  std::size_t em_max_iterations = 1000;
  bool include_class = false;

  ImputationConfig config() const {
    ImputationConfig cfg;
    cfg.m = m;
    cfg.burn_in = burn_in;
    cfg.thin = thin;
    cfg.seed = seed;
    cfg.em_tolerance = em_tolerance;
    cfg.em_max_iterations = em_max_iterations;
    cfg.include_class = include_class;
    cfg.validate();
    return cfg;
  }
};

void add_imputation(CLI::App* cmd, ImputeOptions& o, bool with_seed) {
  cmd->add_option("--m", o.m, "Number of imputed datasets");
  cmd->add_option("--burn-in", o.burn_in, "Data augmentation burn-in steps");
  cmd->add_option("--thin", o.thin, "Data augmentation steps between kept draws");
  if (with_seed) cmd->add_option("--seed", o.seed, "Imputation seed");
  cmd->add_option("--em-tol", o.em_tolerance, "EM convergence tolerance");
  cmd->add_option("--em-max-iter", o.em_max_iterations, "EM iteration cap");
  cmd->add_flag("--include-class", o.include_class, "Impute the class attribute as well");
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void emit(const ComparisonTable& table, const RunOptions& run) {
  std::ostringstream text;
  write_table(text, table, parse_report_format(run.format), run.timing);
  write_output(run.out, text.str());
}

std::size_t resolve_class(const Dataset& d, const std::string& name) {
  if (auto c = d.class_attribute().category_index(name)) return *c;
  std::string known;
  for (const auto& c : d.class_attribute().categories) known += (known.empty() ? "" : ", ") + c;
  throw std::invalid_argument("unknown class '" + name + "'; classes are: " + known);
}

// "data info"
int data_info(const InputOptions& in, bool as_json) {
  const Dataset d = load(in);
  const auto miss = missingness_summary(d);
  std::vector<std::size_t> counts(d.num_classes(), 0);
  std::size_t unlabeled = 0;
  for (std::size_t r = 0; r < d.num_instances(); ++r) {
    if (auto c = d.class_of(r)) ++counts[*c];
    else ++unlabeled;
  }

  nlohmann::ordered_json j;
  j["relation"] = d.relation();
  j["instances"] = d.num_instances();
  j["attributes"] = d.num_attributes();
  j["class"] = d.class_attribute().name;
  auto dist = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < counts.size(); ++c) dist[d.class_attribute().categories[c]] = counts[c];
  j["class_counts"] = dist;
  j["missing_class"] = unlabeled;
  j["missing_fraction"] = miss.overall_fraction;
  j["instances_with_missing"] = miss.affected_instances;
  auto attrs = nlohmann::ordered_json::array();
  for (std::size_t a = 0; a < d.num_attributes(); ++a) {
    const auto& attr = d.attribute(a);
    attrs.push_back({{"name", attr.name},
                     {"type", attr.is_nominal() ? "nominal" : "numeric"},
                     {"categories", attr.category_count()},
                     {"missing_fraction", miss.attribute_fraction[a]}});
  }
  j["attribute_list"] = attrs;
  if (as_json) {
    std::cout << j.dump(2) << '\n';
    return 0;
  }

  std::cout << "relation: " << d.relation() << '\n'
            << "instances: " << d.num_instances() << '\n'
            << "attributes: " << d.num_attributes() << '\n'
            << "class: " << d.class_attribute().name << " (" << d.num_classes() << " classes)\n";
  for (std::size_t c = 0; c < counts.size(); ++c)
    std::cout << "  " << d.class_attribute().categories[c] << ": " << counts[c] << '\n';
  if (unlabeled) std::cout << "  (missing): " << unlabeled << '\n';
  std::cout << "missing cells: " << format_number(100.0 * miss.overall_fraction) << "% in "
            << miss.affected_instances << " instances\n";
  for (std::size_t a = 0; a < d.num_attributes(); ++a) {
    const auto& attr = d.attribute(a);
    std::cout << "  " << attr.name << ": "
              << (attr.is_nominal() ? "nominal(" + std::to_string(attr.category_count()) + ")"
                                    : std::string("numeric"));
    if (miss.attribute_fraction[a] > 0)
      std::cout << ", missing " << format_number(100.0 * miss.attribute_fraction[a]) << '%';
    std::cout << '\n';
  }
  return 0;
}

fs::path suffixed(const fs::path& out, std::size_t i) {
  fs::path p = out;
  p.replace_filename(out.stem().string() + "_" + std::to_string(i) + out.extension().string());
  return p;
}

int impute(const InputOptions& in, const std::string& method, const ImputeOptions& opts,
           const std::string& out) {
  const Dataset d = load(in);
  const fs::path target(out);
  if (method == "mean-mode") {
    save_dataset(target, mean_mode_impute(d, opts.include_class));
    return 0;
  }
  const auto cfg = opts.config();
  const auto mi = multiple_impute(d, cfg);
  if (mi.datasets.size() == 1) {
    save_dataset(target, mi.datasets.front());
  } else {
    for (std::size_t i = 0; i < mi.datasets.size(); ++i)
      save_dataset(suffixed(target, i + 1), mi.datasets[i]);
  }
  write_output(target.string() + ".json", imputation_sidecar(mi, cfg, d).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classifier benchmarking: kNN and MLP evaluation with missing-value handling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "classbench 1.0");

  // data info
  InputOptions info_in;
  bool info_json = false;
  auto* data_cmd = app.add_subcommand("data", "Dataset utilities");
  data_cmd->require_subcommand(1);
  auto* info_cmd = data_cmd->add_subcommand("info", "Summarize a dataset");
  add_input(info_cmd, info_in);
  info_cmd->add_flag("--json", info_json, "Print JSON instead of text");

  // impute
  InputOptions imp_in;
  std::string imp_method = "mi";
  std::string imp_out;
  ImputeOptions imp_opts;
  auto* imp_cmd = app.add_subcommand("impute", "Fill missing values and write the completed data");
  add_input(imp_cmd, imp_in);
  imp_cmd->add_option("--method", imp_method, "mean-mode or mi")
      ->check(CLI::IsMember({"mean-mode", "mi"}));
  imp_cmd->add_option("--out", imp_out, "Output dataset; with m > 1 files get _1.._m suffixes")
      ->required();
  add_imputation(imp_cmd, imp_opts, true);

  // eval
  InputOptions eval_in;
  ClassifierOptions eval_cls;
  RunOptions eval_run;
  std::string eval_missing = "default";
  ImputeOptions eval_imp;
  auto* eval_cmd = app.add_subcommand("eval", "Cross-validate one classifier over several seeds");
  add_input(eval_cmd, eval_in);
  add_classifier(eval_cmd, eval_cls);
  add_run(eval_cmd, eval_run);
  eval_cmd->add_option("--missing", eval_missing, "default, mean-mode or mi")
      ->check(CLI::IsMember({"default", "mean-mode", "mi"}));
  add_imputation(eval_cmd, eval_imp, false);

  // sweep
  InputOptions sweep_in;
  RunOptions sweep_run;
  std::string grid_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate every cell of a hyperparameter grid");
  add_input(sweep_cmd, sweep_in);
  sweep_cmd->add_option("--grid", grid_path, "Grid definition file")->required();
  add_run(sweep_cmd, sweep_run);

  // compare-missing
  InputOptions cmp_in;
  RunOptions cmp_run;
  std::vector<std::string> cmp_specs;
  std::vector<std::string> cmp_methods{"mean-mode", "mi"};
  ImputeOptions cmp_imp;
  auto* cmp_cmd = app.add_subcommand("compare-missing", "Compare missing-value methods");
  add_input(cmp_cmd, cmp_in);
  cmp_cmd->add_option("--classifier", cmp_specs,
                      "Classifier spec, repeatable (e.g. knn:k=5:uniform, mlp:lr=1:momentum=0.7:hidden=2)")
      ->required();
  cmp_cmd->add_option("--methods", cmp_methods, "Methods, comma separated")->delimiter(',');
  add_run(cmp_cmd, cmp_run);
  add_imputation(cmp_cmd, cmp_imp, false);

  // roc
  InputOptions roc_in;
  ClassifierOptions roc_cls;
  RunOptions roc_run;
  std::string roc_positive;
  std::uint64_t roc_seed = 1;
  auto* roc_cmd = app.add_subcommand("roc", "Pooled cross-validated ROC points for one class");
  add_input(roc_cmd, roc_in);
  roc_cmd->add_option("--positive", roc_positive, "Positive class label")->required();
  roc_cmd->add_option("--seed", roc_seed, "Master seed");
  add_classifier(roc_cmd, roc_cls);
  add_run(roc_cmd, roc_run, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*data_cmd) return data_info(info_in, info_json);
    if (*imp_cmd) return impute(imp_in, imp_method, imp_opts, imp_out);

    if (*eval_cmd) {
      const Dataset d = load(eval_in);
      const std::vector<ClassifierSpec> specs{make_spec(eval_cls)};
      const std::vector<MissingMethod> methods{parse_missing_method(eval_missing)};
      CvOptions cv;
      cv.per_fold_normalization = !eval_run.global_normalization;
      emit(compare_missing_methods(d, dataset_name(eval_in), specs, methods, eval_run.folds,
                                   eval_run.seeds, eval_imp.config(), cv),
           eval_run);
      return 0;
    }

    if (*sweep_cmd) {
      const Dataset d = load(sweep_in);
      const auto grid = load_grid(grid_path);
      const auto folds = sweep_cmd->count("--folds") || !grid.folds ? sweep_run.folds : *grid.folds;
      const auto& seeds =
          sweep_cmd->count("--seeds") || grid.seeds.empty() ? sweep_run.seeds : grid.seeds;
      CvOptions cv;
      cv.per_fold_normalization = !sweep_run.global_normalization;
      emit(sweep(d, dataset_name(sweep_in), grid.grid, folds, seeds, cv), sweep_run);
      return 0;
    }

    if (*cmp_cmd) {
      const Dataset d = load(cmp_in);
      std::vector<ClassifierSpec> specs;
      for (const auto& s : cmp_specs) specs.push_back(parse_spec(s));
      std::vector<MissingMethod> methods;
      for (const auto& m : cmp_methods) methods.push_back(parse_missing_method(m));
      CvOptions cv;
      cv.per_fold_normalization = !cmp_run.global_normalization;
      emit(compare_missing_methods(d, dataset_name(cmp_in), specs, methods, cmp_run.folds,
                                   cmp_run.seeds, cmp_imp.config(), cv),
           cmp_run);
      return 0;
    }

    if (*roc_cmd) {
      const Dataset d = drop_missing_class(load(roc_in));
      CvOptions cv;
      cv.per_fold_normalization = !roc_run.global_normalization;
      cv.roc_positive = resolve_class(d, roc_positive);
      const auto report = cross_validate(d, make_spec(roc_cls), roc_run.folds, roc_seed, cv);
      if (report.roc.empty())
        throw std::runtime_error("ROC is undefined: class '" + roc_positive +
                                 "' has no positive or no negative instance");
      std::ostringstream text;
      if (roc_run.format == "json") {
        auto j = report_to_json(report, roc_run.timing);
        text << j.dump(2) << '\n';
      } else {
        write_roc_csv(text, report.roc);
      }
      write_output(roc_run.out, text.str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "classbench: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
