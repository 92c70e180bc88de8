#include "sembed/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "sembed/errors.hpp"

namespace sembed {

namespace {

std::string pad(const std::string& s, std::size_t width) {
  std::string out = s;
  out.resize(std::max(width, s.size()), ' ');
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string to_markdown(const ReportTable& table) {
  std::vector<std::size_t> widths(table.header.size());
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    widths[c] = table.header[c].size();
  }
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size() && c < widths.size(); ++c) {
      widths[c] = std::max(widths[c], row[c].size());
    }
  }
  std::string out = "|";
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    out += " " + pad(table.header[c], widths[c]) + " |";
  }
  out += "\n|";
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    out += std::string(widths[c] + 2, '-') + "|";
  }
  out += "\n";
  for (const auto& row : table.rows) {
    out += "|";
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      out += " " + pad(c < row.size() ? row[c] : "", widths[c]) + " |";
    }
    out += "\n";
  }
  return out;
}

std::string to_csv(const ReportTable& table) {
  std::string out;
  auto emit_row = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv_field(row[c]);
    }
    out += '\n';
  };
  emit_row(table.header);
  for (const auto& row : table.rows) emit_row(row);
  return out;
}

std::string format_real(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open for write: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw InputError("failed writing: " + path);
}

}  // namespace sembed
