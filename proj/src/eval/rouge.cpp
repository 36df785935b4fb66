#include "tsum/rouge.hpp"

#include <algorithm>
#include <cstdio>

#include "tsum/errors.hpp"

namespace tsum::rouge {

RecallF1 from_counts(std::size_t matched, std::size_t candidate_total, std::size_t reference_total) {
  RecallF1 out;
  out.recall = reference_total ? static_cast<double>(matched) / static_cast<double>(reference_total) : 0.0;
  out.precision = candidate_total ? static_cast<double>(matched) / static_cast<double>(candidate_total) : 0.0;
  const double denom = out.recall + out.precision;
  out.f1 = denom > 0.0 ? 2.0 * out.recall * out.precision / denom : 0.0;
  return out;
}

RecallF1 rouge_n(const Tokens& candidate, const Tokens& reference, std::size_t n) {
  require(n >= 1, "rouge_n requires n >= 1");
  return rouge_n<std::string>(candidate, reference, n);
}

RecallF1 rouge_l(const Tokens& candidate, const Tokens& reference) {
  return rouge_l<std::string>(candidate, reference);
}

RougeScore score_pair(const Tokens& candidate, const Tokens& reference) {
  return {rouge_n(candidate, reference, 1), rouge_n(candidate, reference, 2), rouge_l(candidate, reference)};
}

namespace {

// Sorting first makes the sum independent of pair order.
double mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

RecallF1 mean_of(const std::vector<RougeScore>& per, RecallF1 RougeScore::*field) {
  std::vector<double> r, p, f;
  for (const auto& s : per) {
    r.push_back((s.*field).recall);
    p.push_back((s.*field).precision);
    f.push_back((s.*field).f1);
  }
  return {mean(std::move(r)), mean(std::move(p)), mean(std::move(f))};
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v * 100.0);
  return buf;
}

std::string metric_json(const RecallF1& m) {
  return "{\"recall\":" + fmt2(m.recall) + ",\"precision\":" + fmt2(m.precision) + ",\"f1\":" + fmt2(m.f1) + "}";
}

}  // namespace

RougeScore evaluate_corpus(std::span<const std::pair<Tokens, Tokens>> pairs) {
  if (pairs.empty()) throw ConfigError("evaluate_corpus: no candidate/reference pairs");
  std::vector<RougeScore> per(pairs.size());
  const auto count = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < count; ++i)
    per[static_cast<std::size_t>(i)] = score_pair(pairs[static_cast<std::size_t>(i)].first,
                                                  pairs[static_cast<std::size_t>(i)].second);
  return {mean_of(per, &RougeScore::rouge1), mean_of(per, &RougeScore::rouge2), mean_of(per, &RougeScore::rougeL)};
}

std::string report_json(const RougeScore& score) {
  return "{\"rouge1\":" + metric_json(score.rouge1) + ",\"rouge2\":" + metric_json(score.rouge2) +
         ",\"rougeL\":" + metric_json(score.rougeL) + "}";
}

std::string report_text(const RougeScore& score) {
  std::string out = "metric   recall  precision     f1\n";
  auto line = [&](const char* name, const RecallF1& m) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-7s %7s %10s %6s\n", name, fmt2(m.recall).c_str(),
                  fmt2(m.precision).c_str(), fmt2(m.f1).c_str());
    out += buf;
  };
  line("Rouge1", score.rouge1);
  line("Rouge2", score.rouge2);
  line("RougeL", score.rougeL);
  return out;
}

}  // namespace tsum::rouge
