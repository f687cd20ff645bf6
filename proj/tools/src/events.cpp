#include "qneq/cli/events.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "qneq/error.hpp"

namespace qneq::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

int parse_outcome(std::string_view s, std::size_t line) {
  if (s == "1" || s == "+1") return 1;
  if (s == "-1" || s == "0") return -1;
  fail(line, "outcome must be one of 1, +1, -1, 0");
}

std::uint64_t parse_index(std::string_view s, std::size_t line) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) fail(line, "invalid index '" + std::string(s) + "'");
  return v;
}

double parse_theta(std::string_view s, std::size_t line) {
  double v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v))
    fail(line, "invalid angle '" + std::string(s) + "'");
  return v;
}

PhotonEvent parse_csv(std::string_view s, std::size_t line) {
  std::string_view fields[3];
  std::size_t count = 0;
  while (true) {
    const auto comma = s.find(',');
    if (count == 3) fail(line, "expected 3 fields");
    fields[count++] = trim(s.substr(0, comma));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  if (count != 3) fail(line, "expected 3 fields");
  return {parse_index(fields[0], line), parse_theta(fields[1], line), parse_outcome(fields[2], line)};
}

PhotonEvent parse_jsonl(std::string_view s, std::size_t line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(s);
  } catch (const nlohmann::json::exception&) {
    fail(line, "invalid JSON");
  }
  if (!j.is_object() || j.size() != 3 || !j.contains("index") || !j.contains("theta") || !j.contains("outcome"))
    fail(line, "expected an object with index, theta, outcome");
  const auto& idx = j["index"];
  const auto& th = j["theta"];
  const auto& out = j["outcome"];
  if (!idx.is_number_unsigned()) fail(line, "index must be a non-negative integer");
  if (!th.is_number() || !std::isfinite(th.get<double>())) fail(line, "theta must be a finite number");
  int outcome = 0;
  if (out.is_number_integer()) {
    const auto v = out.get<long long>();
    if (v == 1) outcome = 1;
    else if (v == -1 || v == 0) outcome = -1;
  } else if (out.is_string()) {
    outcome = parse_outcome(out.get<std::string>(), line);
  }
  if (outcome == 0) fail(line, "outcome must be one of 1, +1, -1, 0");
  return {idx.get<std::uint64_t>(), th.get<double>(), outcome};
}

}  // namespace

EventFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".jsonl" ? EventFormat::Jsonl : EventFormat::Csv;
}

void write_events(std::ostream& out, std::span<const PhotonEvent> events, EventFormat format) {
  char buf[96];
  if (format == EventFormat::Csv) out << "index,theta,outcome\n";
  for (const auto& e : events) {
    const int n = format == EventFormat::Csv
                      ? std::snprintf(buf, sizeof buf, "%llu,%.17g,%d\n", static_cast<unsigned long long>(e.index),
                                      e.theta, e.outcome)
                      : std::snprintf(buf, sizeof buf, "{\"index\":%llu,\"theta\":%.17g,\"outcome\":%d}\n",
                                      static_cast<unsigned long long>(e.index), e.theta, e.outcome);
    out.write(buf, n);
  }
}

std::vector<PhotonEvent> read_events(std::istream& in, EventFormat format) {
  std::vector<PhotonEvent> events;
  std::string raw;
  std::size_t line = 0;
  bool header_allowed = true;
  while (std::getline(in, raw)) {
    ++line;
    const auto s = trim(raw);
    if (s.empty() || s.front() == '#') continue;
    if (format == EventFormat::Csv) {
      if (header_allowed && s == "index,theta,outcome") {
        header_allowed = false;
        continue;
      }
      events.push_back(parse_csv(s, line));
    } else {
      events.push_back(parse_jsonl(s, line));
    }
    header_allowed = false;
  }
  if (events.empty()) throw DataError("empty input: no events");
  return events;
}

std::vector<PhotonEvent> read_events(std::istream& in) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  EventFormat format = EventFormat::Csv;
  std::istringstream lines(text);
  std::string raw;
  while (std::getline(lines, raw)) {
    const auto s = trim(raw);
    if (s.empty() || s.front() == '#') continue;
    if (s.front() == '{') format = EventFormat::Jsonl;
    break;
  }
  std::istringstream again(text);
  return read_events(again, format);
}

}  // namespace qneq::cli
