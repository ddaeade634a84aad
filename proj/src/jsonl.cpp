#include "typescore/jsonl.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "typescore/errors.hpp"

namespace typescore::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void for_each_record_in(std::string_view text,
                        const std::function<void(const Json&, std::size_t)>& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(std::string("malformed record: ") + e.what(), line_no);
    }
    if (!record.is_object()) throw ParseError("record is not an object", line_no);
    fn(record, line_no);
  }
}

void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const Json&, std::size_t)>& fn) {
  for_each_record_in(read_file(path), fn);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot replace " + path.string());
  }
}

std::string to_jsonl(const std::vector<Json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::string require_string(const Json& record, std::string_view field, std::size_t line) {
  const auto it = record.find(std::string(field));
  if (it == record.end() || !it->is_string()) {
    throw ParseError("missing string field '" + std::string(field) + "'", line);
  }
  return it->get<std::string>();
}

double require_number(const Json& record, std::string_view field, std::size_t line) {
  const auto it = record.find(std::string(field));
  if (it == record.end() || !it->is_number()) {
    throw ParseError("missing or non-numeric field '" + std::string(field) + "'", line);
  }
  return it->get<double>();
}

}  // namespace typescore::io
