#include "llrd/cli/output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "llrd/errors.hpp"

namespace llrd::cli {

std::string format_number(double v) {
  if (std::isnan(v)) throw Error("output filter: NaN reached the output");
  if (std::isinf(v)) {
    if (v < 0.0) throw Error("output filter: -inf reached the output");
    return "inf";
  }
  if (v == 0.0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

Json sanitize_at(const Json& v, const std::string& path) {
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isnan(x)) throw Error("output filter: NaN at " + path);
    if (std::isinf(x)) {
      if (x < 0.0) throw Error("output filter: -inf at " + path);
      return "inf";
    }
    return v;
  }
  if (v.is_array()) {
    Json out = Json::array();
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(sanitize_at(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }
  if (v.is_object()) {
    Json out = Json::object();
    for (const auto& [k, item] : v.items()) out[k] = sanitize_at(item, path + "." + k);
    return out;
  }
  return v;
}

}  // namespace

Json sanitize(const Json& doc) { return sanitize_at(doc, "$"); }

void CsvTable::add_row(const std::vector<double>& values, const std::vector<std::string>& text) {
  if (values.size() + text.size() != columns_.size()) {
    throw Error("csv: row has " + std::to_string(values.size() + text.size()) + " cells, expected " +
                std::to_string(columns_.size()));
  }
  std::vector<std::string> row;
  for (double v : values) row.push_back(format_number(v));
  for (const std::string& t : text) row.push_back(t);
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
  }
}

}  // namespace llrd::cli
