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

// Partitions a dated corpus into contiguous month-aligned segments, with the
// leading segments marked for training and the rest for testing.

#ifndef CHRONOLINK_TIMELINE_HPP_
#define CHRONOLINK_TIMELINE_HPP_

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chronolink/util/strings.hpp"
#include "chronolink/records.hpp"

namespace chronolink {

using CivilDate = std::chrono::year_month_day;

struct SegmentRule {
  CivilDate window_start{std::chrono::year{2023}, std::chrono::month{5},
                         std::chrono::day{1}};
  CivilDate window_end{std::chrono::year{2024}, std::chrono::month{4},
                       std::chrono::day{30}};
  int months_per_segment = 2;
  int num_train = 3;
};

// Accepts "YYYY-MM-DD" optionally followed by a time part ("T..." or " ...").
inline absl::StatusOr<CivilDate> ParseDate(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  std::string buf(text.substr(0, 10));
  char tail = 0;
  if (text.size() < 10 ||
      std::sscanf(buf.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3 ||
      (text.size() > 10 && text[10] != 'T' && text[10] != ' ')) {
    return absl::InvalidArgumentError(StrCat("bad date \"", text, "\""));
  }
  CivilDate date{std::chrono::year{y}, std::chrono::month{m},
                 std::chrono::day{d}};
  if (!date.ok()) {
    return absl::InvalidArgumentError(StrCat("bad date \"", text, "\""));
  }
  return date;
}

inline std::string FormatDate(const CivilDate& date) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u",
                static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()),
                static_cast<unsigned>(date.day()));
  return buf;
}

namespace internal {

inline int MonthIndex(const CivilDate& d) {
  return static_cast<int>(d.year()) * 12 +
         static_cast<int>(static_cast<unsigned>(d.month())) - 1;
}

}  // namespace internal

struct SegmentWindow {
  TimeSegment segment;
  int first_month = 0;  // absolute month index, inclusive
  int last_month = 0;   // inclusive
};

inline absl::StatusOr<std::vector<SegmentWindow>> BuildSegmentWindows(
    const SegmentRule& rule) {
  if (!rule.window_start.ok() || !rule.window_end.ok() ||
      std::chrono::sys_days(rule.window_end) <
          std::chrono::sys_days(rule.window_start)) {
    return absl::InvalidArgumentError("invalid segment window");
  }
  if (rule.months_per_segment < 1) {
    return absl::InvalidArgumentError("months_per_segment must be >= 1");
  }
  if (rule.num_train < 0) {
    return absl::InvalidArgumentError("num_train must be >= 0");
  }
  const int first = internal::MonthIndex(rule.window_start);
  const int last = internal::MonthIndex(rule.window_end);
  std::vector<SegmentWindow> windows;
  for (int start = first; start <= last; start += rule.months_per_segment) {
    const int end = std::min(start + rule.months_per_segment - 1, last);
    char label[8];
    std::snprintf(label, sizeof(label), "%02d%02d", start % 12 + 1,
                  end % 12 + 1);
    const int ordinal = static_cast<int>(windows.size());
    windows.push_back(
        {TimeSegment{label, ordinal,
                     ordinal < rule.num_train ? Phase::kTrain : Phase::kTest},
         start, end});
  }
  return windows;
}

struct TimelineAssignment {
  std::vector<TimeSegment> segments;
  std::map<std::string, std::string> doc_segment;  // doc_id -> label
};

// Assigns every (doc_id, date) pair to exactly one segment.
inline absl::StatusOr<TimelineAssignment> SegmentTimeline(
    const std::vector<std::pair<std::string, std::string>>& doc_dates,
    const SegmentRule& rule) {
  auto windows = BuildSegmentWindows(rule);
  if (!windows.ok()) return windows.status();
  TimelineAssignment out;
  for (const SegmentWindow& w : *windows) out.segments.push_back(w.segment);
  const auto lo = std::chrono::sys_days(rule.window_start);
  const auto hi = std::chrono::sys_days(rule.window_end);
  for (const auto& [doc_id, date_text] : doc_dates) {
    auto date = ParseDate(date_text);
    if (!date.ok()) {
      return absl::InvalidArgumentError(
          StrCat("document ", doc_id, ": ", date.status().message()));
    }
    const auto day = std::chrono::sys_days(*date);
    if (day < lo || day > hi) {
      return absl::OutOfRangeError(StrCat(
          "document ", doc_id, ": date ", date_text, " outside window ",
          FormatDate(rule.window_start), "..", FormatDate(rule.window_end)));
    }
    const int month = internal::MonthIndex(*date);
    for (const SegmentWindow& w : *windows) {
      if (month >= w.first_month && month <= w.last_month) {
        out.doc_segment[doc_id] = w.segment.label;
        break;
      }
    }
  }
  return out;
}

}  // namespace chronolink

#endif  // CHRONOLINK_TIMELINE_HPP_
