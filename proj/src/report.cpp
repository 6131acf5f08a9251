#include "wsim/report.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wsim::report {

namespace {

void dump_rec(const Json& j, std::string& out, int depth) {
  const std::string pad(static_cast<size_t>(depth) * 2, ' ');
  const std::string pad_in(static_cast<size_t>(depth + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      size_t k = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++k) {
        out += pad_in;
        out += Json(it.key()).dump();  // escaped key
        out += ": ";
        dump_rec(it.value(), out, depth + 1);
        if (k + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (size_t k = 0; k < j.size(); ++k) {
        out += pad_in;
        dump_rec(j[k], out, depth + 1);
        if (k + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();  // strings, ints, bools, null
      return;
  }
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v))
    throw std::invalid_argument("non-finite value in report output");
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string dump(const Json& j) {
  std::string out;
  dump_rec(j, out, 0);
  out += "\n";
  return out;
}

void write_file(const std::string& path, const Json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << dump(j);
  if (!f) throw std::runtime_error("failed writing " + path);
}

Json read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return Json::parse(f);
}

std::string numeric_dump(const Json& full_report) {
  Json numeric = Json::object();
  numeric["config"] = full_report.at("config");
  numeric["results"] = full_report.at("results");
  return dump(numeric);
}

Json complex_matrix_json(const std::vector<qstate::ModeId>& labels,
                         const Eigen::MatrixXcd& m) {
  Json out = Json::object();
  out["labels"] = labels;
  Json re = Json::array();
  Json im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json re_row = Json::array();
    Json im_row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re_row.push_back(m(r, c).real());
      im_row.push_back(m(r, c).imag());
    }
    re.push_back(re_row);
    im.push_back(im_row);
  }
  out["real"] = re;
  out["imag"] = im;
  return out;
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  for (size_t k = 0; k < header.size(); ++k)
    f << header[k] << (k + 1 < header.size() ? "," : "");
  f << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("CSV row width does not match header");
    for (size_t k = 0; k < row.size(); ++k)
      f << format_double(row[k]) << (k + 1 < row.size() ? "," : "");
    f << "\n";
  }
  if (!f) throw std::runtime_error("failed writing " + path);
}

}  // namespace wsim::report
