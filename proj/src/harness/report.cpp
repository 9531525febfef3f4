#include "affectlab/harness/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Core>
#include <json.hpp>

#include "affectlab/core/csv.hpp"
#include "affectlab/core/error.hpp"

namespace affectlab::harness {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Numbers go through format_double so the text never depends on the
// library's float printing.
json num(double v) { return json::parse(format_double(v)); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << s;
  if (!out) throw Error("write failed: " + p.string());
}

}  // namespace

std::vector<std::string> class_names(int classes) {
  if (classes == 4) return {"HVHA", "LVHA", "LVLA", "HVLA"};
  return {"Low", "High"};
}

std::string report_json(const ExperimentReport& r) {
  json j;
  j["name"] = r.name;
  j["protocol"] = r.protocol;
  j["target"] = r.target;
  j["classes"] = r.classes;
  j["class_names"] = class_names(r.classes);
  j["datasets"] = r.datasets;
  j["feature_methods"] = r.methods;
  j["accuracy"] = num(r.eval.accuracy);
  j["accuracy_std"] = num(r.eval.accuracy_std);
  j["macro_f1"] = num(r.eval.macro_f1);
  j["macro_f1_std"] = num(r.eval.macro_f1_std);
  j["n_scored"] = r.n_scored;
  j["n_correct"] = r.n_correct;
  j["accuracy_ci95"] = {num(r.accuracy_ci.lo), num(r.accuracy_ci.hi)};
  json conf = json::array();
  for (Eigen::Index i = 0; i < r.eval.confusion.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < r.eval.confusion.cols(); ++k) row.push_back(r.eval.confusion(i, k));
    conf.push_back(row);
  }
  j["confusion"] = conf;
  json folds = json::array();
  for (const auto& f : r.eval.per_fold)
    folds.push_back({{"name", f.name}, {"n_test", f.n_test}, {"accuracy", num(f.accuracy)}, {"macro_f1", num(f.macro_f1)}});
  j["per_fold"] = folds;
  json preds = json::array();
  for (const auto& p : r.predictions)
    preds.push_back({{"trial", p.trial_id}, {"subject", p.subject_id}, {"fold", p.fold}, {"truth", p.truth}, {"pred", p.pred}});
  j["predictions"] = preds;
  j["missing_policy"] = r.missing_policy;
  json ex = json::array();
  for (const auto& s : r.excluded) ex.push_back({{"trial", s.trial_id}, {"reason", s.reason}});
  j["excluded"] = ex;
  j["warnings"] = r.warnings;
  json prov = json::object();
  for (const auto& [k, v] : r.provenance) prov[k] = v;
  j["provenance"] = prov;
  return j.dump(2) + "\n";
}

std::string format_table(const ExperimentReport& r) {
  std::ostringstream o;
  o << "experiment " << r.name << "  protocol " << r.protocol << "  target " << r.target << "\n";
  o << "datasets   " << r.datasets << "\n";
  o << "features   ";
  for (std::size_t i = 0; i < r.methods.size(); ++i) o << (i ? "+" : "") << r.methods[i];
  o << "\n";
  o << "accuracy   " << fixed(r.eval.accuracy, 2) << " %";
  if (r.eval.per_fold.size() > 1) o << "  (std " << fixed(r.eval.accuracy_std, 2) << ")";
  o << "  95% CI [" << fixed(100 * r.accuracy_ci.lo, 1) << ", " << fixed(100 * r.accuracy_ci.hi, 1) << "]\n";
  o << "macro F1   " << fixed(r.eval.macro_f1, 3);
  if (r.eval.per_fold.size() > 1) o << "  (std " << fixed(r.eval.macro_f1_std, 3) << ")";
  o << "\n";
  o << "scored     " << r.n_scored << " trials, " << r.excluded.size() << " excluded (" << r.missing_policy << ")\n";
  o << "\n  fold                     n    acc %    F1\n";
  for (const auto& f : r.eval.per_fold) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-20s %5zu %8s %6s\n", f.name.c_str(), f.n_test, fixed(f.accuracy, 1).c_str(),
                  fixed(f.macro_f1, 3).c_str());
    o << line;
  }
  const auto names = class_names(r.classes);
  o << "\n  confusion (rows = truth)\n        ";
  for (const auto& n : names) {
    char cell[16];
    std::snprintf(cell, sizeof cell, "%6s", n.c_str());
    o << cell;
  }
  o << "\n";
  for (Eigen::Index i = 0; i < r.eval.confusion.rows(); ++i) {
    char cell[16];
    std::snprintf(cell, sizeof cell, "  %-6s", names[static_cast<std::size_t>(i)].c_str());
    o << cell;
    for (Eigen::Index k = 0; k < r.eval.confusion.cols(); ++k) {
      std::snprintf(cell, sizeof cell, "%6d", r.eval.confusion(i, k));
      o << cell;
    }
    o << "\n";
  }
  for (const auto& w : r.warnings) o << "warning: " << w << "\n";
  return o.str();
}

std::string confusion_csv(const ExperimentReport& r) {
  const auto names = class_names(r.classes);
  std::ostringstream o;
  o << "truth\\pred";
  for (const auto& n : names) o << "," << n;
  o << "\n";
  for (Eigen::Index i = 0; i < r.eval.confusion.rows(); ++i) {
    o << names[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < r.eval.confusion.cols(); ++k) o << "," << r.eval.confusion(i, k);
    o << "\n";
  }
  return o.str();
}

void write_report_files(const ExperimentReport& r, const ExperimentSpec& spec, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "report.json", report_json(r));
  write_text(dir / "report.txt", format_table(r));
  write_text(dir / "confusion.csv", confusion_csv(r));
  json p;
  p["tool"] = r.provenance.count("tool") ? r.provenance.at("tool") : "affectlab";
  p["spec_hash"] = fnv1a_hex(spec_to_json(spec));
  p["seed"] = spec.seed;
  p["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  p["compiler"] = __VERSION__;
  p["fp_contract"] = "off";
  json rec = json::object();
  for (const auto& [k, v] : r.provenance) rec[k] = v;
  p["report_provenance"] = rec;
  p["spec"] = json::parse(spec_to_json(spec));
  write_text(dir / "provenance.json", p.dump(2) + "\n");
}

}  // namespace affectlab::harness
