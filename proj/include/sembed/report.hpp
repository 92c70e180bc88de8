#pragma once

#include <string>
#include <vector>

namespace sembed {

// Small tabular report, rendered as aligned markdown or CSV.
struct ReportTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string to_markdown(const ReportTable& table);
std::string to_csv(const ReportTable& table);

std::string format_real(double v, int precision = 6);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace sembed
