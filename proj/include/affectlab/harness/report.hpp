#pragma once

#include <filesystem>
#include <string>

#include "affectlab/harness/experiment.hpp"

namespace affectlab::harness {

// Deterministic JSON (fixed key order, shortest round-trip numbers).
std::string report_json(const ExperimentReport& r);

// Human-readable summary: accuracy, F1, per-fold rows, confusion matrix.
std::string format_table(const ExperimentReport& r);

// Header row "truth\pred,<class>...", one row per true class.
std::string confusion_csv(const ExperimentReport& r);

// Class names for a report: Low/High or the four quadrants.
std::vector<std::string> class_names(int classes);

// Writes report.json, report.txt, confusion.csv and provenance.json (spec,
// spec hash, seed, tool and library versions) into `dir`.
void write_report_files(const ExperimentReport& r, const ExperimentSpec& spec, const std::filesystem::path& dir);

}  // namespace affectlab::harness
