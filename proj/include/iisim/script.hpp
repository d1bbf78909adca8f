#pragma once

// Text schedule scripts.
//
// IIS: one round per line, blocks separated by '|', e.g. "1 | 2 3" is the
// partition {1},{2,3}. A final "repeat" line repeats all rounds above it.
// AS: one process id per line; "crash <id>" stops <id> from the next step on.
// '#' starts a comment in both formats.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "iisim/core.hpp"
#include "iisim/schedule.hpp"

namespace iisim {

class ParseError : public InvalidInput {
 public:
  ParseError(std::string source, int line, const std::string& msg)
      : InvalidInput(source + ":" + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::string_view strip_comment(std::string_view s) {
  auto h = s.find('#');
  return trim(h == std::string_view::npos ? s : s.substr(0, h));
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t k = 0;
  while (k < s.size()) {
    while (k < s.size() && (s[k] == ' ' || s[k] == '\t')) ++k;
    std::size_t e = k;
    while (e < s.size() && s[e] != ' ' && s[e] != '\t') ++e;
    if (e > k) out.push_back(s.substr(k, e - k));
    k = e;
  }
  return out;
}

inline bool parse_id(std::string_view tok, int& out) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

inline std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace detail

// n = 0 infers the system size from the largest id.
inline IISSchedule parse_iis_script(std::istream& in, int n = 0, const std::string& source = "<iis>") {
  IISSchedule s;
  int max_id = 0, lineno = 0;
  bool repeat_seen = false;
  for (const auto& raw : detail::read_lines(in)) {
    ++lineno;
    auto line = detail::strip_comment(raw);
    if (line.empty()) continue;
    if (repeat_seen) throw ParseError(source, lineno, "rounds after 'repeat'");
    if (line == "repeat") {
      if (s.rounds.empty()) throw ParseError(source, lineno, "'repeat' before any round");
      repeat_seen = true;
      continue;
    }
    OrderedPartition part;
    ProcSet seen;
    std::size_t start = 0;
    while (start <= line.size()) {
      auto bar = line.find('|', start);
      auto chunk = line.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start);
      ProcSet block;
      for (auto tok : detail::split_ws(chunk)) {
        int id = 0;
        if (!detail::parse_id(tok, id) || id < 1 || id > kMaxProcesses)
          throw ParseError(source, lineno, "bad process id '" + std::string(tok) + "'");
        if (n > 0 && id > n) throw ParseError(source, lineno, "process " + std::to_string(id) + " exceeds n");
        if (seen.contains(id)) throw ParseError(source, lineno, "process " + std::to_string(id) + " repeated");
        seen.insert(id);
        block.insert(id);
        max_id = std::max(max_id, id);
      }
      if (block.empty()) throw ParseError(source, lineno, "empty block");
      part.blocks.push_back(block);
      if (bar == std::string_view::npos) break;
      start = bar + 1;
    }
    s.rounds.push_back(std::move(part));
  }
  if (s.rounds.empty()) throw ParseError(source, lineno, "no rounds");
  s.n = n > 0 ? n : max_id;
  s.repeat = repeat_seen;
  try {
    IISTrace t = s.expand(static_cast<int>(s.rounds.size()) * (s.repeat ? 2 : 1));
    validate_iis_trace(t);
  } catch (const InvalidInput& e) {
    throw ParseError(source, lineno, e.what());
  }
  return s;
}

struct ASScript {
  int n = 0;
  std::vector<ProcessId> steps;
  std::map<ProcessId, std::size_t> crashes;

  Schedule schedule() const { return Schedule::script(n, steps, crashes); }
};

inline ASScript parse_as_script(std::istream& in, int n = 0, const std::string& source = "<as>") {
  ASScript s;
  int max_id = 0, lineno = 0;
  auto id_at = [&](std::string_view tok) {
    int id = 0;
    if (!detail::parse_id(tok, id) || id < 1 || id > kMaxProcesses)
      throw ParseError(source, lineno, "bad process id '" + std::string(tok) + "'");
    if (n > 0 && id > n) throw ParseError(source, lineno, "process " + std::to_string(id) + " exceeds n");
    max_id = std::max(max_id, id);
    return id;
  };
  for (const auto& raw : detail::read_lines(in)) {
    ++lineno;
    auto toks = detail::split_ws(detail::strip_comment(raw));
    if (toks.empty()) continue;
    if (toks[0] == "crash") {
      if (toks.size() != 2) throw ParseError(source, lineno, "expected 'crash <id>'");
      int id = id_at(toks[1]);
      if (s.crashes.contains(id)) throw ParseError(source, lineno, "process " + std::to_string(id) + " crashes twice");
      s.crashes[id] = s.steps.size();
      continue;
    }
    if (toks.size() != 1) throw ParseError(source, lineno, "expected one process id");
    s.steps.push_back(id_at(toks[0]));
  }
  if (s.steps.empty()) throw ParseError(source, lineno, "no steps");
  s.n = n > 0 ? n : max_id;
  return s;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 64-bit FNV-1a, used to identify script contents in trace headers.
inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace iisim
