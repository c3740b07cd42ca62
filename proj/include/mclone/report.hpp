// Copyright 2026 The mclone Authors
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

#pragma once

// Text output: locale-independent numbers, verification reports as JSON
// lines, and the fidelity-versus-dimension table.

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "mclone/optimize.hpp"

namespace mclone {

/// Shortest round-trip of the value rounded to 12 significant digits, '.'
/// as decimal separator. Non-finite values print as "nan", "inf", "-inf".
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 12);
  if (res.ec != std::errc()) throw InvalidInput("format_number: conversion failed");
  return std::string(buf, res.ptr);
}

/// JSON value carrying exactly the digits of format_number, so CSV and JSON agree.
inline nlohmann::json number_json(double x) {
  if (!std::isfinite(x)) return format_number(x);
  return nlohmann::json::parse(format_number(x));
}

enum class Status { Pass, Warn, Fail };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Pass: return "PASS";
    case Status::Warn: return "WARN";
    case Status::Fail: return "FAIL";
  }
  return "?";
}

struct ReportEntry {
  std::string id;
  std::string reference;  ///< which published result the check is anchored to
  double computed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  Status status = Status::Pass;
  std::string note;

  nlohmann::json to_json() const {
    return nlohmann::json{{"id", id},
                          {"reference", reference},
                          {"computed", number_json(computed)},
                          {"expected", number_json(expected)},
                          {"tolerance", number_json(tolerance)},
                          {"status", to_string(status)},
                          {"note", note}};
  }
};

struct VerificationReport {
  std::vector<ReportEntry> entries;

  /// PASS when |computed - expected| <= tolerance, FAIL otherwise.
  const ReportEntry& check(std::string id, std::string reference, double computed, double expected,
                           double tolerance, std::string note = {}) {
    const bool ok = std::isfinite(computed) && std::abs(computed - expected) <= tolerance;
    entries.push_back({std::move(id), std::move(reference), computed, expected, tolerance,
                       ok ? Status::Pass : Status::Fail, std::move(note)});
    return entries.back();
  }

  /// Printed value against a recomputation: agreement is PASS, disagreement
  /// WARN with both values kept.
  const ReportEntry& compare_printed(std::string id, std::string reference, double computed, double printed,
                                     double tolerance, std::string note = {}) {
    const bool ok = std::abs(computed - printed) <= tolerance;
    entries.push_back({std::move(id), std::move(reference), computed, printed, tolerance,
                       ok ? Status::Pass : Status::Warn, std::move(note)});
    return entries.back();
  }

  const ReportEntry& require(std::string id, std::string reference, bool ok, std::string note = {}) {
    entries.push_back({std::move(id), std::move(reference), ok ? 1.0 : 0.0, 1.0, 0.0,
                       ok ? Status::Pass : Status::Fail, std::move(note)});
    return entries.back();
  }

  std::size_t count(Status s) const {
    std::size_t n = 0;
    for (const ReportEntry& e : entries) n += e.status == s;
    return n;
  }
  bool has_failure() const { return count(Status::Fail) > 0; }

  void write_json_lines(std::ostream& os) const {
    for (const ReportEntry& e : entries) os << e.to_json().dump() << '\n';
  }
};

struct FigureRow {
  std::size_t d = 2;
  double clone = 0.0;
  double learn = 0.0;
  double estimate = 0.0;
};

inline std::vector<FigureRow> figure_table(std::size_t d_max) {
  if (d_max < 2) throw DimensionError("figure_table: d_max must be >= 2");
  std::vector<FigureRow> rows;
  for (std::size_t d = 2; d <= d_max; ++d) {
    rows.push_back({d, cloning_fidelity_closed(d), learning_fidelity_closed(d), estimate_prepare_fidelity(d)});
  }
  return rows;
}

inline void write_figure_csv(std::ostream& os, const std::vector<FigureRow>& rows) {
  os << "d,f_clone,f_learn,f_estimate\n";
  for (const FigureRow& r : rows) {
    os << r.d << ',' << format_number(r.clone) << ',' << format_number(r.learn) << ','
       << format_number(r.estimate) << '\n';
  }
}

inline void write_figure_json(std::ostream& os, const std::vector<FigureRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const FigureRow& r : rows) {
    arr.push_back({{"d", r.d},
                   {"f_clone", number_json(r.clone)},
                   {"f_learn", number_json(r.learn)},
                   {"f_estimate", number_json(r.estimate)}});
  }
  os << arr.dump(2) << '\n';
}

}  // namespace mclone
