// Copyright 2026 The Chronolink Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CHRONOLINK_METRICS_REPORT_HPP_
#define CHRONOLINK_METRICS_REPORT_HPP_

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "chronolink/metrics/text_metrics.hpp"
#include "chronolink/util/jsonl.hpp"
#include "chronolink/util/status_macros.hpp"
#include "chronolink/util/strings.hpp"

namespace chronolink {

struct PredictionRecord {
  std::string mention_id;
  std::vector<std::string> ranked;
  std::string gold;
  std::string segment;
  double jaccard = 0.0;

  bool operator==(const PredictionRecord&) const = default;

  absl::Status Validate() const {
    if (ranked.empty()) {
      return absl::InvalidArgumentError(StrCat("empty ranking for ", mention_id));
    }
    std::set<std::string> seen(ranked.begin(), ranked.end());
    if (seen.size() != ranked.size()) {
      return absl::InvalidArgumentError(StrCat("duplicate entity in ranking for ", mention_id));
    }
    return absl::OkStatus();
  }
};

enum class GroupBy { kNone, kSegment, kBin };

inline constexpr char kAllGroup[] = "all";

struct Accuracy {
  std::int64_t correct = 0;
  std::int64_t total = 0;

  double Percent() const {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
  }
  bool operator==(const Accuracy&) const = default;
};

inline std::string GroupKey(const PredictionRecord& r, GroupBy by) {
  switch (by) {
    case GroupBy::kSegment:
      return r.segment;
    case GroupBy::kBin:
      return StrCat(JaccardBin(r.jaccard));
    case GroupBy::kNone:
      break;
  }
  return kAllGroup;
}

// Top-1 accuracy per group; bin groups are keyed "1".."5".
inline absl::StatusOr<std::map<std::string, Accuracy>> LinkingAccuracy(
    const std::vector<PredictionRecord>& records, GroupBy by) {
  if (records.empty()) return absl::InvalidArgumentError("no prediction records");
  std::map<std::string, Accuracy> out;
  for (const PredictionRecord& r : records) {
    RETURN_IF_ERROR(r.Validate());
    Accuracy& a = out[GroupKey(r, by)];
    ++a.total;
    if (r.ranked.front() == r.gold) ++a.correct;
  }
  return out;
}

// Percent of records whose gold entity is within the first n ranks. Short
// rankings count as misses beyond their length.
inline std::map<int, double> RecallAtN(const std::vector<PredictionRecord>& records,
                                       const std::vector<int>& ns) {
  std::map<int, double> out;
  for (int n : ns) {
    std::int64_t hits = 0;
    for (const PredictionRecord& r : records) {
      const auto limit = std::min<std::size_t>(r.ranked.size(), n < 0 ? 0 : n);
      if (std::find(r.ranked.begin(), r.ranked.begin() + limit, r.gold) !=
          r.ranked.begin() + limit) {
        ++hits;
      }
    }
    out[n] = records.empty() ? 0.0
                             : 100.0 * static_cast<double>(hits) /
                                   static_cast<double>(records.size());
  }
  return out;
}

struct AccuracyRow {
  std::string segment;  // "all" across segments
  int bin = 0;          // 0 across bins
  std::int64_t n_mentions = 0;
  double accuracy = 0.0;
  bool operator==(const AccuracyRow&) const = default;
};

struct RecallRow {
  std::string segment;
  int n = 0;
  double recall = 0.0;
  bool operator==(const RecallRow&) const = default;
};

struct QaRow {
  std::string segment;
  std::string variant;
  std::string split;       // hit | miss | all
  std::string resolution;  // success | failure | all
  double mean_f1 = 0.0;
  std::int64_t count = 0;
  bool operator==(const QaRow&) const = default;
};

struct MetricsReport {
  std::vector<AccuracyRow> accuracy;
  std::vector<RecallRow> recall;
  std::vector<QaRow> qa;
  bool operator==(const MetricsReport&) const = default;

  const AccuracyRow* FindAccuracy(std::string_view segment, int bin) const {
    for (const AccuracyRow& r : accuracy) {
      if (r.segment == segment && r.bin == bin) return &r;
    }
    return nullptr;
  }
};

inline const std::vector<int>& DefaultRecallNs() {
  static const std::vector<int> ns = {1, 2, 4, 8, 16, 32, 64};
  return ns;
}

// Rows per (segment, bin) with "all"/0 aggregates; recall per segment and
// overall.
inline absl::StatusOr<MetricsReport> BuildLinkingReport(
    const std::vector<PredictionRecord>& records,
    const std::vector<int>& ns = DefaultRecallNs()) {
  MetricsReport report;
  if (records.empty()) return report;
  std::map<std::string, std::vector<PredictionRecord>> by_segment;
  for (const PredictionRecord& r : records) {
    RETURN_IF_ERROR(r.Validate());
    by_segment[r.segment].push_back(r);
  }
  by_segment[kAllGroup] = records;
  for (const auto& [segment, group] : by_segment) {
    std::map<int, Accuracy> bins;
    Accuracy total;
    for (const PredictionRecord& r : group) {
      const bool ok = r.ranked.front() == r.gold;
      Accuracy& b = bins[JaccardBin(r.jaccard)];
      ++b.total;
      ++total.total;
      b.correct += ok;
      total.correct += ok;
    }
    report.accuracy.push_back({segment, 0, total.total, total.Percent()});
    for (const auto& [bin, acc] : bins) {
      report.accuracy.push_back({segment, bin, acc.total, acc.Percent()});
    }
    for (const auto& [n, recall] : RecallAtN(group, ns)) {
      report.recall.push_back({segment, n, recall});
    }
  }
  return report;
}

inline Json ReportToJson(const MetricsReport& report) {
  Json j{{"accuracy", Json::array()}, {"recall", Json::array()}, {"qa", Json::array()}};
  for (const AccuracyRow& r : report.accuracy) {
    j["accuracy"].push_back({{"segment", r.segment},
                             {"bin", r.bin},
                             {"n_mentions", r.n_mentions},
                             {"accuracy", r.accuracy}});
  }
  for (const RecallRow& r : report.recall) {
    j["recall"].push_back({{"segment", r.segment}, {"n", r.n}, {"recall", r.recall}});
  }
  for (const QaRow& r : report.qa) {
    j["qa"].push_back({{"segment", r.segment},
                       {"variant", r.variant},
                       {"split", r.split},
                       {"resolution", r.resolution},
                       {"mean_f1", r.mean_f1},
                       {"count", r.count}});
  }
  return j;
}

inline absl::StatusOr<MetricsReport> ReportFromJson(const Json& j) {
  MetricsReport report;
  try {
    for (const Json& r : j.at("accuracy")) {
      report.accuracy.push_back({r.at("segment").get<std::string>(), r.at("bin").get<int>(),
                                 r.at("n_mentions").get<std::int64_t>(),
                                 r.at("accuracy").get<double>()});
    }
    for (const Json& r : j.at("recall")) {
      report.recall.push_back({r.at("segment").get<std::string>(), r.at("n").get<int>(),
                               r.at("recall").get<double>()});
    }
    for (const Json& r : j.at("qa")) {
      report.qa.push_back({r.at("segment").get<std::string>(),
                           r.at("variant").get<std::string>(),
                           r.at("split").get<std::string>(),
                           r.at("resolution").get<std::string>(),
                           r.at("mean_f1").get<double>(), r.at("count").get<std::int64_t>()});
    }
  } catch (const Json::exception& e) {
    return absl::InvalidArgumentError(StrCat("malformed report: ", e.what()));
  }
  return report;
}

inline std::string FormatReal(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

struct CsvTables {
  std::string accuracy;
  std::string recall;
  std::string qa;
};

inline CsvTables ReportToCsv(const MetricsReport& report) {
  CsvTables t;
  t.accuracy = "segment,bin,n_mentions,accuracy\n";
  for (const AccuracyRow& r : report.accuracy) {
    t.accuracy += StrCat(r.segment, ",", r.bin == 0 ? std::string(kAllGroup) : StrCat(r.bin),
                         ",", r.n_mentions, ",", FormatReal(r.accuracy), "\n");
  }
  t.recall = "segment,n,recall\n";
  for (const RecallRow& r : report.recall) {
    t.recall += StrCat(r.segment, ",", r.n, ",", FormatReal(r.recall), "\n");
  }
  t.qa = "segment,variant,split,resolution,mean_f1,count\n";
  for (const QaRow& r : report.qa) {
    t.qa += StrCat(r.segment, ",", r.variant, ",", r.split, ",", r.resolution, ",",
                   FormatReal(r.mean_f1), ",", r.count, "\n");
  }
  return t;
}

enum class ReportFormat { kJson, kCsv };

// JSON goes to `path`. CSV writes the accuracy table to `path` and the recall
// and QA tables beside it as <stem>.recall.csv and <stem>.qa.csv.
inline absl::Status EmitReport(const MetricsReport& report, ReportFormat format,
                               const std::string& path) {
  if (format == ReportFormat::kJson) {
    return WriteTextFile(path, ReportToJson(report).dump(2) + "\n");
  }
  const CsvTables t = ReportToCsv(report);
  std::string stem = path;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") {
    stem.resize(stem.size() - 4);
  }
  RETURN_IF_ERROR(WriteTextFile(path, t.accuracy));
  RETURN_IF_ERROR(WriteTextFile(stem + ".recall.csv", t.recall));
  return WriteTextFile(stem + ".qa.csv", t.qa);
}

inline absl::StatusOr<MetricsReport> ParseReport(const std::string& path) {
  ASSIGN_OR_RETURN(std::string text, ReadTextFile(path));
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) return absl::InvalidArgumentError(StrCat(path, ": not JSON"));
  return ReportFromJson(j);
}

}  // namespace chronolink

#endif  // CHRONOLINK_METRICS_REPORT_HPP_
