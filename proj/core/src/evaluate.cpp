#include "tadk/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "tadk/error.hpp"

namespace tadk::rf {
namespace {

double ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

Report make_report(std::vector<std::string> classes, const std::vector<std::size_t>& truth,
                   const std::vector<std::size_t>& predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(Errc::InvalidArgs, "truth and prediction lengths differ");
  }
  Report r;
  const std::size_t n = classes.size();
  r.classes = std::move(classes);
  r.confusion.assign(n, std::vector<std::uint64_t>(n, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= n || predicted[i] >= n) throw Error(Errc::InvalidArgs, "class id out of range");
    ++r.confusion[truth[i]][predicted[i]];
  }
  r.total = truth.size();
  std::uint64_t diag = 0;
  for (std::size_t c = 0; c < n; ++c) {
    std::uint64_t row = 0;
    std::uint64_t col = 0;
    for (std::size_t k = 0; k < n; ++k) {
      row += r.confusion[c][k];
      col += r.confusion[k][c];
    }
    const auto tp = static_cast<double>(r.confusion[c][c]);
    diag += r.confusion[c][c];
    r.support.push_back(row);
    r.precision.push_back(ratio(tp, static_cast<double>(col)));
    r.recall.push_back(ratio(tp, static_cast<double>(row)));
    const double p = r.precision.back();
    const double q = r.recall.back();
    r.f1.push_back(ratio(2 * p * q, p + q));
  }
  r.accuracy = ratio(static_cast<double>(diag), static_cast<double>(r.total));
  if (n > 0) {
    for (std::size_t c = 0; c < n; ++c) {
      r.macro_precision += r.precision[c];
      r.macro_recall += r.recall[c];
      r.macro_f1 += r.f1[c];
    }
    r.macro_precision /= static_cast<double>(n);
    r.macro_recall /= static_cast<double>(n);
    r.macro_f1 /= static_cast<double>(n);
  }
  return r;
}

Report evaluate(const Model& model, const Dataset& ds) {
  std::vector<std::string> classes = model.classes;
  std::vector<std::string> extra;
  for (const auto& label : ds.labels) {
    if (std::find(model.classes.begin(), model.classes.end(), label) == model.classes.end()) extra.push_back(label);
  }
  std::sort(extra.begin(), extra.end());
  extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
  classes.insert(classes.end(), extra.begin(), extra.end());

  std::vector<std::size_t> truth;
  std::vector<std::size_t> predicted;
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    const auto& label = ds.labels[i];
    const auto it = std::find(model.classes.begin(), model.classes.end(), label);
    if (it != model.classes.end()) {
      truth.push_back(static_cast<std::size_t>(it - model.classes.begin()));
    } else {
      truth.push_back(model.classes.size() +
                      static_cast<std::size_t>(std::lower_bound(extra.begin(), extra.end(), label) -
                                               extra.begin()));
    }
    predicted.push_back(model.predict(ds.row(i)).cls);
  }
  return make_report(std::move(classes), truth, predicted);
}

std::string format_report_text(const Report& r) {
  std::size_t width = 5;
  for (const auto& c : r.classes) width = std::max(width, c.size());
  std::ostringstream out;
  auto pad = [&](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
  auto lpad = [&](const std::string& s, std::size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; };

  out << pad("class", width) << lpad("precision", 11) << lpad("recall", 9) << lpad("f1", 9)
      << lpad("support", 9) << '\n';
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    out << pad(r.classes[c], width) << lpad(fixed(r.precision[c]), 11) << lpad(fixed(r.recall[c]), 9)
        << lpad(fixed(r.f1[c]), 9) << lpad(std::to_string(r.support[c]), 9) << '\n';
  }
  out << pad("macro", width) << lpad(fixed(r.macro_precision), 11) << lpad(fixed(r.macro_recall), 9)
      << lpad(fixed(r.macro_f1), 9) << lpad(std::to_string(r.total), 9) << '\n';
  out << "accuracy " << fixed(r.accuracy) << " (" << r.total << " samples)\n\n";

  std::size_t cell = 6;
  for (const auto& row : r.confusion) {
    for (auto v : row) cell = std::max(cell, std::to_string(v).size() + 1);
  }
  for (const auto& c : r.classes) cell = std::max(cell, std::min<std::size_t>(c.size(), 12) + 1);
  out << pad("true\\pred", width);
  for (const auto& c : r.classes) out << lpad(c.substr(0, 12), cell);
  out << '\n';
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    out << pad(r.classes[c], width);
    for (auto v : r.confusion[c]) out << lpad(std::to_string(v), cell);
    out << '\n';
  }
  return out.str();
}

std::string format_report_rows(const Report& r) {
  std::ostringstream out;
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    out << "class," << r.classes[c] << ',' << fixed(r.precision[c], 6) << ',' << fixed(r.recall[c], 6)
        << ',' << fixed(r.f1[c], 6) << ',' << r.support[c] << '\n';
  }
  out << "macro," << fixed(r.macro_precision, 6) << ',' << fixed(r.macro_recall, 6) << ','
      << fixed(r.macro_f1, 6) << '\n';
  out << "accuracy," << fixed(r.accuracy, 6) << ',' << r.total << '\n';
  for (std::size_t t = 0; t < r.classes.size(); ++t) {
    for (std::size_t p = 0; p < r.classes.size(); ++p) {
      out << "confusion," << r.classes[t] << ',' << r.classes[p] << ',' << r.confusion[t][p] << '\n';
    }
  }
  return out.str();
}

}  // namespace tadk::rf
