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

#ifndef CHRONOLINK_UTIL_JSONL_HPP_
#define CHRONOLINK_UTIL_JSONL_HPP_

#include <cstddef>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chronolink/util/strings.hpp"
#include "json.hpp"

namespace chronolink {

using Json = nlohmann::json;

// Calls `fn(line_number, record)` for every non-blank line of a JSON-lines
// file. Line numbers are 1-based. Parse failures are reported with the line.
inline absl::Status ForEachJsonLine(
    const std::string& path,
    const std::function<absl::Status(std::size_t, const Json&)>& fn) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(StrCat("cannot open ", path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      return absl::InvalidArgumentError(
          StrCat(path, ":", line_no, ": malformed record: ", e.what()));
    }
    if (!record.is_object()) {
      return absl::InvalidArgumentError(
          StrCat(path, ":", line_no, ": record is not a JSON object"));
    }
    absl::Status status = fn(line_no, record);
    if (!status.ok()) return status;
  }
  return absl::OkStatus();
}

// Typed field access with a line-numbered error on absence or type mismatch.
template <typename T>
absl::StatusOr<T> RequiredField(const Json& record, std::string_view key,
                                std::size_t line_no) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) {
    return absl::InvalidArgumentError(StrCat(
        "line ", line_no, ": malformed record: missing field \"", key, "\""));
  }
  try {
    return it->template get<T>();
  } catch (const Json::exception&) {
    return absl::InvalidArgumentError(StrCat(
        "line ", line_no, ": malformed record: bad type for \"", key, "\""));
  }
}

template <typename T>
absl::StatusOr<std::optional<T>> OptionalField(const Json& record,
                                               std::string_view key,
                                               std::size_t line_no) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return std::optional<T>();
  try {
    return std::optional<T>(it->template get<T>());
  } catch (const Json::exception&) {
    return absl::InvalidArgumentError(StrCat(
        "line ", line_no, ": malformed record: bad type for \"", key, "\""));
  }
}

inline absl::Status WriteTextFile(const std::string& path,
                                  std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::PermissionDeniedError(StrCat("cannot write ", path));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) return absl::DataLossError(StrCat("short write to ", path));
  return absl::OkStatus();
}

inline absl::StatusOr<std::string> ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(StrCat("cannot open ", path));
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace chronolink

#endif  // CHRONOLINK_UTIL_JSONL_HPP_
