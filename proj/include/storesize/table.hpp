#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "storesize/errors.hpp"

namespace storesize {

// Rectangular result set plus leading `# key: value` metadata lines.
// All numeric formatting goes through format_double (12 significant
// digits) so outputs are stable across runs and platforms.
struct Table {
  std::vector<std::string> meta;  // "key: value" strings, emitted as comments
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string to_csv(const Table& t) {
  std::ostringstream os;
  for (const auto& m : t.meta) os << "# " << m << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    os << (i ? "," : "") << csv_escape(t.columns[i]);
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << csv_escape(row[i]);
    os << "\n";
  }
  return os.str();
}

inline std::string to_json(const Table& t) {
  nlohmann::ordered_json doc;
  for (const auto& m : t.meta) {
    const auto pos = m.find(": ");
    if (pos != std::string::npos)
      doc["meta"][m.substr(0, pos)] = m.substr(pos + 2);
  }
  doc["columns"] = t.columns;
  auto& rows = doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size() && i < t.columns.size(); ++i)
      obj[t.columns[i]] = row[i];
    rows.push_back(std::move(obj));
  }
  return doc.dump(2) + "\n";
}

// Writes via a sibling temp file and an atomic rename, so readers never
// observe a half-written table.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os)
      throw InvalidConfigError("cannot open output file " + tmp.string());
    os << content;
    os.flush();
    if (!os)
      throw InvalidConfigError("failed writing output file " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace storesize
