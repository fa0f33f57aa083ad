#include "ugdf/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ugdf::eval {

void MetricsAccum::add(double gt, double pred) {
  if (gt <= 0 || pred <= 0)
    throw std::domain_error("metrics: non-positive depth at a valid pixel");
  const double err = gt - pred;
  sum_abs_rel += std::abs(err) / gt;
  sum_sq += err * err;
  sum_sq_rel += err * err / gt;
  const double lerr = std::log(pred) - std::log(gt);
  sum_sq_log += lerr * lerr;
  const double ratio = std::max(pred / gt, gt / pred);
  if (ratio < 1.25) ++n_a1;
  if (ratio < 1.25 * 1.25) ++n_a2;
  if (ratio < 1.25 * 1.25 * 1.25) ++n_a3;
  ++n;
}

void MetricsAccum::merge(const MetricsAccum& o) {
  sum_abs_rel += o.sum_abs_rel;
  sum_sq += o.sum_sq;
  sum_sq_rel += o.sum_sq_rel;
  sum_sq_log += o.sum_sq_log;
  n_a1 += o.n_a1;
  n_a2 += o.n_a2;
  n_a3 += o.n_a3;
  n += o.n;
}

MetricsReport MetricsAccum::report() const {
  if (n == 0) throw std::invalid_argument("metrics: no valid pixels");
  MetricsReport r;
  const double dn = static_cast<double>(n);
  r.abs_rel = sum_abs_rel / dn;
  r.rmse = std::sqrt(sum_sq / dn);
  r.sq_rel = sum_sq_rel / dn;
  r.rmse_log = std::sqrt(sum_sq_log / dn);
  r.a1 = n_a1 / dn;
  r.a2 = n_a2 / dn;
  r.a3 = n_a3 / dn;
  r.valid_pixels = n;
  return r;
}

MetricsAccum accumulate_metrics(const scene::DepthMap& pred, const scene::DepthMap& gt,
                                const Tensor<float>* mask) {
  if (pred.shape != gt.shape) throw std::invalid_argument("metrics: shape mismatch");
  MetricsAccum acc;
  for (int64_t i = 0; i < gt.size(); ++i) {
    if (std::isnan(gt[i]) || std::isnan(pred[i])) continue;
    if (mask && (*mask)[i] == 0.0f) continue;
    acc.add(gt[i], pred[i]);
  }
  return acc;
}

MetricsReport compute_metrics(const scene::DepthMap& pred, const scene::DepthMap& gt,
                              const Tensor<float>* mask) {
  return accumulate_metrics(pred, gt, mask).report();
}

IntervalReport interval_accuracy(const std::map<std::string, scene::DepthMap>& preds,
                                 const scene::DepthMap& gt,
                                 const std::vector<double>& bin_edges) {
  if (bin_edges.size() < 2) throw std::invalid_argument("interval_accuracy: need >= 2 edges");
  for (size_t i = 1; i < bin_edges.size(); ++i)
    if (bin_edges[i] <= bin_edges[i - 1])
      throw std::invalid_argument("interval_accuracy: edges must be strictly increasing");

  const size_t nbins = bin_edges.size() - 1;
  auto bin_of = [&](double d) {
    if (d < bin_edges.front()) return size_t{0};
    for (size_t b = 0; b < nbins; ++b)
      if (d >= bin_edges[b] && d < bin_edges[b + 1]) return b;
    return nbins - 1;  // >= last edge folds into the last bin
  };

  IntervalReport out;
  out.bin_edges = bin_edges;
  bool any_valid = false;
  for (const auto& [name, pred] : preds) {
    if (pred.shape != gt.shape)
      throw std::invalid_argument("interval_accuracy: shape mismatch for branch " + name);
    std::vector<MetricsAccum> accs(nbins);
    for (int64_t i = 0; i < gt.size(); ++i) {
      if (std::isnan(gt[i]) || std::isnan(pred[i])) continue;
      accs[bin_of(gt[i])].add(gt[i], pred[i]);
      any_valid = true;
    }
    std::vector<IntervalBin> bins(nbins);
    for (size_t b = 0; b < nbins; ++b) {
      bins[b].lo = bin_edges[b];
      bins[b].hi = bin_edges[b + 1];
      bins[b].count = accs[b].n;
      bins[b].empty = accs[b].n == 0;
      if (!bins[b].empty) {
        const auto r = accs[b].report();
        bins[b].a1 = r.a1;
        bins[b].a2 = r.a2;
        bins[b].a3 = r.a3;
      }
    }
    out.branches[name] = std::move(bins);
  }
  if (!any_valid) throw std::invalid_argument("interval_accuracy: no valid pixels");
  return out;
}

MetricsReport assemble_report(const std::vector<MetricsAccum>& samples) {
  if (samples.empty()) throw std::invalid_argument("assemble_report: no samples");
  MetricsAccum pooled;
  for (const auto& s : samples) pooled.merge(s);
  return pooled.report();
}

std::string format_report_table(const std::map<std::string, MetricsReport>& rows) {
  std::ostringstream os;
  os << "Branch      Abs_Rel    RMSE       Sq_Rel     RMSE_log   a1       a2       a3\n";
  char buf[256];
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%-10s  %-9.4f  %-9.3f  %-9.3f  %-9.4f  %-7.4f  %-7.4f  %-7.4f\n",
                  name.c_str(), r.abs_rel, r.rmse, r.sq_rel, r.rmse_log, r.a1, r.a2, r.a3);
    os << buf;
  }
  return os.str();
}

std::string format_report_jsonl(const std::map<std::string, MetricsReport>& rows) {
  std::ostringstream os;
  for (const auto& [name, r] : rows) {
    nlohmann::json j{{"branch", name},       {"abs_rel", r.abs_rel}, {"rmse", r.rmse},
                     {"sq_rel", r.sq_rel},   {"rmse_log", r.rmse_log}, {"a1", r.a1},
                     {"a2", r.a2},           {"a3", r.a3},
                     {"valid_pixels", r.valid_pixels}};
    os << j.dump() << "\n";
  }
  return os.str();
}

std::string format_interval_csv(const IntervalReport& report) {
  std::ostringstream os;
  os << "branch,bin_lo,bin_hi,count,a1,a2,a3\n";
  for (const auto& [name, bins] : report.branches)
    for (const auto& b : bins) {
      os << name << "," << b.lo << "," << b.hi << "," << b.count << ",";
      if (b.empty)
        os << ",,\n";
      else
        os << b.a1 << "," << b.a2 << "," << b.a3 << "\n";
    }
  return os.str();
}

}  // namespace ugdf::eval
