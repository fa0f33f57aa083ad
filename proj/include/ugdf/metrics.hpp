#pragma once

#include <map>
#include <string>

#include "ugdf/scene_gen.hpp"

namespace ugdf::eval {

struct MetricsReport {
  double abs_rel = 0, rmse = 0, sq_rel = 0, rmse_log = 0;
  double a1 = 0, a2 = 0, a3 = 0;
  int64_t valid_pixels = 0;
};

// Running sums so reports aggregate over the pooled pixel set.
struct MetricsAccum {
  double sum_abs_rel = 0, sum_sq = 0, sum_sq_rel = 0, sum_sq_log = 0;
  int64_t n_a1 = 0, n_a2 = 0, n_a3 = 0;
  int64_t n = 0;

  void add(double gt, double pred);
  void merge(const MetricsAccum& other);
  MetricsReport report() const;
};

// Standard depth error/accuracy metrics over the valid-pixel set. The mask
// (optional) ANDs with finiteness of both maps.
MetricsReport compute_metrics(const scene::DepthMap& pred, const scene::DepthMap& gt,
                              const Tensor<float>* mask = nullptr);
MetricsAccum accumulate_metrics(const scene::DepthMap& pred, const scene::DepthMap& gt,
                                const Tensor<float>* mask = nullptr);

struct IntervalBin {
  double lo = 0, hi = 0;
  int64_t count = 0;
  double a1 = 0, a2 = 0, a3 = 0;
  bool empty = true;
};

struct IntervalReport {
  std::vector<double> bin_edges;
  // branch name -> per-bin accuracy rows
  std::map<std::string, std::vector<IntervalBin>> branches;
};

// Bins by GT depth, left-closed right-open; content outside the edge span is
// folded into the end bins so bins partition the valid pixel set.
IntervalReport interval_accuracy(const std::map<std::string, scene::DepthMap>& preds,
                                 const scene::DepthMap& gt,
                                 const std::vector<double>& bin_edges);

// Pixel-pooled aggregate over per-sample accumulators.
MetricsReport assemble_report(const std::vector<MetricsAccum>& samples);

std::string format_report_table(const std::map<std::string, MetricsReport>& rows);
std::string format_report_jsonl(const std::map<std::string, MetricsReport>& rows);
std::string format_interval_csv(const IntervalReport& report);

}  // namespace ugdf::eval
