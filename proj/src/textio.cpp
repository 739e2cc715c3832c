#include "btx/textio.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "btx/error.hpp"

namespace btx {

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

void check_field(std::string_view s, const std::filesystem::path& path) {
  if (s.find_first_of("\t\n") != std::string_view::npos) {
    throw FormatError(path.string() + ": text contains a tab or newline: " + std::string(s.substr(0, 40)));
  }
}

double parse_double(std::string_view s, const std::filesystem::path& path, std::size_t line, const char* field) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw FormatError(where(path, line) + "bad " + field + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  const std::string text = slurp(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    lines.emplace_back(text, start, nl - start);
    start = nl + 1;
  }
  return lines;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("cannot write " + path.string());
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& l : lines) {
    if (l.find('\n') != std::string::npos) throw FormatError(path.string() + ": line contains a newline");
    text += l;
    text += '\n';
  }
  write_text(path, text);
}

Bitext read_bitext(const std::filesystem::path& path) {
  Bitext out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto f = split_tabs(lines[i]);
    if (f.size() != 2) throw FormatError(where(path, i + 1) + "expected 2 tab-separated fields, got " + std::to_string(f.size()));
    out.push_back({std::string(f[0]), std::string(f[1])});
  }
  return out;
}

void write_bitext(const std::filesystem::path& path, const Bitext& bitext) {
  std::string text;
  for (const auto& p : bitext) {
    check_field(p.src, path);
    check_field(p.tgt, path);
    text += p.src + '\t' + p.tgt + '\n';
  }
  write_text(path, text);
}

ScoredBitext read_scored(const std::filesystem::path& path) {
  ScoredBitext out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto f = split_tabs(lines[i]);
    if (f.size() != 3) throw FormatError(where(path, i + 1) + "expected 3 tab-separated fields, got " + std::to_string(f.size()));
    out.push_back({std::string(f[1]), std::string(f[2]), parse_double(f[0], path, i + 1, "score")});
  }
  return out;
}

void write_scored(const std::filesystem::path& path, const ScoredBitext& scored) {
  std::string text;
  for (const auto& p : scored) {
    check_field(p.src, path);
    check_field(p.tgt, path);
    text += format_fixed(p.score) + '\t' + p.src + '\t' + p.tgt + '\n';
  }
  write_text(path, text);
}

std::vector<LidPrediction> read_lid(const std::filesystem::path& path) {
  std::vector<LidPrediction> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto f = split_tabs(lines[i]);
    if (f.size() != 4) throw FormatError(where(path, i + 1) + "expected 4 tab-separated fields, got " + std::to_string(f.size()));
    auto conf = [&](std::string_view s) -> std::optional<double> {
      if (s == "-") return std::nullopt;
      return parse_double(s, path, i + 1, "confidence");
    };
    out.push_back({{std::string(f[0]), conf(f[1])}, {std::string(f[2]), conf(f[3])}});
  }
  return out;
}

std::vector<bool> read_labels(const std::filesystem::path& path) {
  std::vector<bool> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i] == "1") {
      out.push_back(true);
    } else if (lines[i] == "0") {
      out.push_back(false);
    } else {
      throw FormatError(where(path, i + 1) + "label must be 0 or 1");
    }
  }
  return out;
}

void write_labels(const std::filesystem::path& path, const std::vector<bool>& labels) {
  std::string text;
  for (bool b : labels) text += b ? "1\n" : "0\n";
  write_text(path, text);
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void Report::add(std::string key, std::string value) { entries_.emplace_back(std::move(key), std::move(value)); }
void Report::add(std::string key, std::uint64_t value) { add(std::move(key), std::to_string(value)); }
void Report::add(std::string key, double value) { add(std::move(key), format_fixed(value)); }

std::string Report::str() const {
  std::string s;
  for (const auto& [k, v] : entries_) s += k + '\t' + v + '\n';
  return s;
}

void Report::write(const std::filesystem::path& path) const { write_text(path, str()); }

std::map<std::string, std::string> read_report(const std::filesystem::path& path) {
  std::map<std::string, std::string> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tab = lines[i].find('\t');
    if (tab == std::string::npos) throw FormatError(where(path, i + 1) + "expected key<TAB>value");
    out[lines[i].substr(0, tab)] = lines[i].substr(tab + 1);
  }
  return out;
}

}  // namespace btx
