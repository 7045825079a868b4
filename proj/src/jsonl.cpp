#include "rulebench/jsonl.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rulebench {

std::string json_line(const nlohmann::json& j) { return j.dump(); }

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& records) {
  std::string content;
  for (const auto& r : records) {
    content += json_line(r);
    content += '\n';
  }
  write_text_file(path, content);
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::string content = read_text_file(path);
  std::vector<nlohmann::json> records;
  size_t pos = 0, line_no = 0;
  while (pos < content.size()) {
    size_t nl = content.find('\n', pos);
    std::string line =
        nl == std::string::npos ? content.substr(pos) : content.substr(pos, nl - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) {
      try {
        records.push_back(nlohmann::json::parse(line));
      } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return records;
}

}  // namespace rulebench
