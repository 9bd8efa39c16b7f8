// Copyright 2026 The oner-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "oner/config.hpp"

namespace oner {

// Header comment lines shared by every output file of one run.
struct Provenance {
  std::string command;
  std::string hash;
  std::vector<std::string> lines;  // without the leading "# "

  static Provenance make(const std::string& command, const RunConfig& cfg) {
    Provenance p;
    p.command = command;
    p.hash = config_hash(command, cfg.document);
    p.lines = {"oner-sim " + std::string(kVersion), "command: " + command, "config_hash: fnv1a64:" + p.hash, atom_header(cfg.atom)};
    return p;
  }
};

using Cell = std::variant<double, long long, std::string, std::monostate>;  // monostate: empty field

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", *d);
    return buf;
  }
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return "";
}

inline Cell optional_cell(const std::optional<double>& v, double scale = 1.0) {
  if (!v) return std::monostate{};
  return *v * scale;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const Provenance& prov, const std::vector<std::string>& extra_header,
            const std::vector<std::string>& columns)
      : path_(path), out_(path), columns_(columns.size()) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    for (const auto& l : prov.lines) out_ << "# " << l << '\n';
    for (const auto& l : extra_header) out_ << "# " << l << '\n';
    write_fields(columns);
  }

  void row(const std::vector<Cell>& cells) {
    if (cells.size() != columns_) throw std::logic_error("csv row width mismatch in " + path_.string());
    std::vector<std::string> f;
    f.reserve(cells.size());
    for (const auto& c : cells) f.push_back(format_cell(c));
    write_fields(f);
    ++rows_;
  }

  size_t rows() const { return rows_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  void write_fields(const std::vector<std::string>& f) {
    for (size_t i = 0; i < f.size(); ++i) out_ << (i ? "," : "") << f[i];
    out_ << '\n';
  }

  std::filesystem::path path_;
  std::ofstream out_;
  size_t columns_;
  size_t rows_ = 0;
};

// manifest.json: provenance plus one record per output file. Rewritten after
// each update so an interrupted run leaves a consistent partial manifest.
class Manifest {
 public:
  Manifest(std::filesystem::path dir, const Provenance& prov, const Json& config) : path_(std::move(dir) / "manifest.json") {
    doc_["tool"] = "oner-sim";
    doc_["version"] = kVersion;
    doc_["command"] = prov.command;
    doc_["config_hash"] = prov.hash;
    doc_["config"] = config;
    doc_["status"] = "running";
    doc_["files"] = Json::array();
    flush();
  }

  void add_file(const std::filesystem::path& file, size_t rows, const Json& provenance = Json::object()) {
    Json e = {{"file", file.filename().string()}, {"rows", rows}};
    if (!provenance.empty()) e["provenance"] = provenance;
    doc_["files"].push_back(e);
    flush();
  }

  void set(const std::string& key, const Json& value) {
    doc_[key] = value;
    flush();
  }

  void complete() { set("status", "complete"); }

 private:
  void flush() const {
    std::ofstream out(path_);
    out << doc_.dump(2) << '\n';
  }

  std::filesystem::path path_;
  Json doc_;
};

}  // namespace oner
