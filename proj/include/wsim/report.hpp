#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "wsim/qstate.hpp"

// Structured report and table emission.  Reports are JSON objects with
// insertion-ordered keys; every floating-point number is serialized with
// 17 significant digits so that a parse reproduces it bit for bit and a
// rerun with the same configuration produces byte-identical numeric
// content.

namespace wsim::report {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "wsim";
inline constexpr const char* kToolVersion = "1.0.0";

// %.17g, rejecting non-finite values (they have no JSON representation).
std::string format_double(double v);

// Serializes with 2-space indentation and %.17g doubles.
std::string dump(const Json& j);

void write_file(const std::string& path, const Json& j);
Json read_file(const std::string& path);

// The deterministic part of a report: the config and results subtrees,
// serialized.  The provenance block carries the only field (the
// timestamp) that legitimately differs between reruns.
std::string numeric_dump(const Json& full_report);

// {"labels": [...], "real": [[...]], "imag": [[...]]}
Json complex_matrix_json(const std::vector<qstate::ModeId>& labels,
                         const Eigen::MatrixXcd& m);

// ISO 8601 UTC, second resolution.
std::string timestamp_utc();

// Comma-separated table with a header row; every cell prints with
// format_double.  Rows must match the header width.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace wsim::report
