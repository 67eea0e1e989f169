#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tadk/dataset.hpp"
#include "tadk/forest.hpp"

namespace tadk::rf {

/// Classification metrics. Confusion rows are true classes, columns are
/// predictions. Precision or recall with an empty denominator is 0.
struct Report {
  std::vector<std::string> classes;
  std::vector<std::vector<std::uint64_t>> confusion;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<std::uint64_t> support;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::uint64_t total = 0;
};

/// Builds a report from class-id pairs.
Report make_report(std::vector<std::string> classes, const std::vector<std::size_t>& truth,
                   const std::vector<std::size_t>& predicted);

/// Predicts every row of `ds`. Labels the model has never seen get their
/// own row and column after the model classes.
Report evaluate(const Model& model, const Dataset& ds);

/// Aligned table for people.
std::string format_report_text(const Report& r);
/// One record per line:
///   class,<name>,<precision>,<recall>,<f1>,<support>
///   macro,<precision>,<recall>,<f1>
///   accuracy,<accuracy>,<total>
///   confusion,<true>,<predicted>,<count>
std::string format_report_rows(const Report& r);

}  // namespace tadk::rf
