#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "messages.hpp"
#include "time.hpp"

namespace rplsim {

/// Event trace: '#' header lines followed by one tab-separated line per
/// event. Column 1 is the time in seconds (six decimals), column 2 the event
/// tag. Tags:
///   TX       kind sender receiver bytes attempt fields...  (one per transmission)
///   BOOT     node
///   GEN      node pkt=
///   DELIVER  origin pkt= created=
///   DAORECV  origin dao= trigger=
///   DROP     node kind reason= ...
///   ALARM    origin dao=
///   DTSN     node dtsn=
///   ATTACK   node dtsn=
///   ROOTINC  node dtsn=
///   PARENT   node parent= rank=
struct Trace {
  std::vector<std::string> header;
  std::vector<std::string> lines;

  void write(std::ostream& os) const {
    for (const auto& h : header) os << h << '\n';
    for (const auto& l : lines) os << l << '\n';
  }

  std::string str() const {
    std::string out;
    for (const auto& h : header) (out += h) += '\n';
    for (const auto& l : lines) (out += l) += '\n';
    return out;
  }

  static Trace read(std::istream& is) {
    Trace t;
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      (line[0] == '#' ? t.header : t.lines).push_back(line);
    }
    return t;
  }

  /// Value of the first header line "# <key> <value>".
  std::optional<std::string> header_value(std::string_view key) const {
    for (const auto& h : header) {
      const std::string prefix = "# " + std::string(key) + " ";
      if (h.rfind(prefix, 0) == 0) return h.substr(prefix.size());
    }
    return std::nullopt;
  }
};

/// Tab-split view of one trace line; the line must outlive the view.
class TraceLine {
 public:
  explicit TraceLine(std::string&&) = delete;
  explicit TraceLine(std::string_view line) {
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      cols_.push_back(line.substr(start, tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (cols_.size() < 2) throw std::runtime_error("malformed trace line: " + std::string(line));
  }

  SimTime time() const { return parse_time(cols_[0]); }
  std::string_view tag() const { return cols_[1]; }
  std::string_view col(std::size_t i) const { return i < cols_.size() ? cols_[i] : std::string_view{}; }
  std::size_t size() const { return cols_.size(); }

  std::optional<std::string_view> field(std::string_view key) const {
    for (std::size_t i = 2; i < cols_.size(); ++i) {
      const auto c = cols_[i];
      if (c.size() > key.size() && c.substr(0, key.size()) == key && c[key.size()] == '=') {
        return c.substr(key.size() + 1);
      }
    }
    return std::nullopt;
  }

  static std::uint64_t to_uint(std::string_view s) {
    std::uint64_t v = 0;
    if (s.empty()) throw std::runtime_error("empty numeric trace field");
    for (char c : s) {
      if (c < '0' || c > '9') throw std::runtime_error("bad numeric trace field: " + std::string(s));
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
  }

  static SimTime parse_time(std::string_view s) {
    bool neg = false;
    if (!s.empty() && s[0] == '-') {
      neg = true;
      s.remove_prefix(1);
    }
    const auto dot = s.find('.');
    if (dot == std::string_view::npos || s.size() - dot - 1 != 6) {
      throw std::runtime_error("bad trace time: " + std::string(s));
    }
    const auto t = static_cast<SimTime>(to_uint(s.substr(0, dot)) * kMicrosPerSecond +
                                        to_uint(s.substr(dot + 1)));
    return neg ? -t : t;
  }

 private:
  std::vector<std::string_view> cols_;
};

inline std::string trace_event(SimTime t, std::string_view tag, NodeId node,
                               std::string_view rest = {}) {
  std::string out = format_time(t);
  out += '\t';
  out += tag;
  out += '\t';
  out += node_field(node);
  if (!rest.empty()) {
    out += '\t';
    out += rest;
  }
  return out;
}

}  // namespace rplsim
