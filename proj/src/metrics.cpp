// SPDX-License-Identifier: Apache-2.0
#include "seqguard/metrics.hpp"

#include "seqguard/error.hpp"

namespace seqguard {

void Confusion::add(Label predicted, Label truth) {
  if (truth == Label::anomaly)
    (predicted == Label::anomaly ? tp : fn) += 1;
  else
    (predicted == Label::anomaly ? fp : tn) += 1;
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

namespace {

ClassMetrics class_metrics(std::size_t hit, std::size_t false_pos,
                           std::size_t false_neg) {
  ClassMetrics m;
  m.support = hit + false_neg;
  if (hit + false_pos > 0)
    m.precision = static_cast<double>(hit) / static_cast<double>(hit + false_pos);
  else
    m.undefined = true;
  if (hit + false_neg > 0)
    m.recall = static_cast<double>(hit) / static_cast<double>(hit + false_neg);
  else
    m.undefined = true;
  if (m.precision + m.recall == 0.0) m.undefined = true;
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

}  // namespace

double anomaly_f1(const Confusion& c) { return anomaly_metrics(c).f1; }

ClassMetrics anomaly_metrics(const Confusion& c) {
  return class_metrics(c.tp, c.fp, c.fn);
}

ClassMetrics good_metrics(const Confusion& c) {
  return class_metrics(c.tn, c.fn, c.fp);
}

std::vector<BucketMetrics> empty_length_buckets() {
  return {{"2-5", 1, 5, 0, {}, {}}, {"6-10", 6, 10, 0, {}, {}},
          {"11+", 11, 0, 0, {}, {}}};
}

EvalReport compute_metrics(std::span<const Label> predictions,
                           std::span<const Label> labels,
                           std::span<const std::size_t> lengths,
                           std::span<const std::string> sources, double threshold,
                           double beta) {
  if (predictions.size() != labels.size() ||
      (!lengths.empty() && lengths.size() != labels.size()) ||
      (!sources.empty() && sources.size() != labels.size()))
    throw DimensionError("compute_metrics: misaligned inputs (" +
                         std::to_string(predictions.size()) + " predictions, " +
                         std::to_string(labels.size()) + " labels)");
  EvalReport r;
  r.count = labels.size();
  r.threshold = threshold;
  r.beta = beta;
  if (!lengths.empty()) r.length_buckets = empty_length_buckets();
  std::map<std::string, std::size_t> source_count;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    r.confusion.add(predictions[i], labels[i]);
    if (!sources.empty()) {
      r.per_source_confusion[sources[i]].add(predictions[i], labels[i]);
      ++source_count[sources[i]];
    }
    if (!lengths.empty()) {
      for (auto& b : r.length_buckets) {
        if (lengths[i] >= b.min_steps && (b.max_steps == 0 || lengths[i] <= b.max_steps)) {
          ++b.count;
          b.confusion.add(predictions[i], labels[i]);
          break;
        }
      }
    }
  }
  r.anomaly = anomaly_metrics(r.confusion);
  r.good = good_metrics(r.confusion);
  const double n_anom = static_cast<double>(r.anomaly.support);
  const double n_good = static_cast<double>(r.good.support);
  if (n_anom + n_good > 0) {
    const double wa = n_anom / (n_anom + n_good), wg = n_good / (n_anom + n_good);
    r.weighted.precision = wa * r.anomaly.precision + wg * r.good.precision;
    r.weighted.recall = wa * r.anomaly.recall + wg * r.good.recall;
    r.weighted.f1 = wa * r.anomaly.f1 + wg * r.good.f1;
    r.weighted.support = r.count;
    r.weighted.undefined = r.anomaly.undefined || r.good.undefined;
  }
  for (auto& b : r.length_buckets) b.anomaly = anomaly_metrics(b.confusion);
  if (!source_count.empty()) {
    for (const auto& [src, c] : r.per_source_confusion) {
      const ClassMetrics m = anomaly_metrics(c);
      r.per_source[src] = m;
      const double w =
          static_cast<double>(source_count[src]) / static_cast<double>(r.count);
      r.source_weighted.precision += w * m.precision;
      r.source_weighted.recall += w * m.recall;
      r.source_weighted.f1 += w * m.f1;
      r.source_weighted.support += m.support;
      r.source_weighted.undefined = r.source_weighted.undefined || m.undefined;
    }
  }
  return r;
}

Json to_json(const ClassMetrics& m) {
  return Json{{"precision", m.precision},
              {"recall", m.recall},
              {"f1", m.f1},
              {"support", m.support},
              {"undefined", m.undefined}};
}

Json to_json(const Confusion& c) {
  return Json{{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

Json EvalReport::to_json() const {
  Json sources = Json::object();
  for (const auto& [src, m] : per_source) {
    Json entry = seqguard::to_json(m);
    entry["confusion"] = seqguard::to_json(per_source_confusion.at(src));
    sources[src] = entry;
  }
  Json buckets = Json::array();
  for (const auto& b : length_buckets) {
    buckets.push_back(Json{{"bucket", b.name},
                           {"count", b.count},
                           {"confusion", seqguard::to_json(b.confusion)},
                           {"anomaly", seqguard::to_json(b.anomaly)}});
  }
  return Json{{"count", count},
              {"positive_class", "anomaly"},
              {"threshold", threshold},
              {"beta", beta},
              {"confusion", seqguard::to_json(confusion)},
              {"anomaly", seqguard::to_json(anomaly)},
              {"good", seqguard::to_json(good)},
              {"weighted", seqguard::to_json(weighted)},
              {"per_source", sources},
              {"source_weighted_anomaly", seqguard::to_json(source_weighted)},
              {"length_buckets", buckets}};
}

}  // namespace seqguard
