#pragma once

// Line-delimited JSON trace files. Every line is one object tagged by "type":
//   meta         header: n, direction, source, horizon, crashes, windows
//   iis_round    one ordered partition
//   as_event     one AS update or snapshot
//   status_entry one status-log record published by a simulator (as-to-iis)
//   sim_view     a simulated output: an IIS view (as-to-iis) or a snapshot
//                counter vector (iis-to-as)

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "iisim/as_to_iis.hpp"
#include "iisim/core.hpp"
#include "iisim/iis_to_as.hpp"
#include "iisim/script.hpp"

namespace iisim {

enum class Direction : std::uint8_t { as_to_iis, iis_to_as };

inline const char* to_string(Direction d) { return d == Direction::as_to_iis ? "as-to-iis" : "iis-to-as"; }

inline std::optional<Direction> parse_direction(std::string_view s) {
  if (s == "as-to-iis") return Direction::as_to_iis;
  if (s == "iis-to-as") return Direction::iis_to_as;
  return std::nullopt;
}

inline std::optional<HelpMode> parse_mode(std::string_view s) {
  if (s == "helping") return HelpMode::helping;
  if (s == "baseline") return HelpMode::baseline;
  return std::nullopt;
}

struct TraceMeta {
  int n = 0;
  Direction direction = Direction::as_to_iis;
  HelpMode mode = HelpMode::helping;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> script_hash;
  std::size_t horizon = 0;
  std::size_t steps = 0;
  std::map<ProcessId, std::size_t> crashes;
  WindowParams window;
  WindowParams output_window;
  bool operator==(const TraceMeta& o) const {
    return n == o.n && direction == o.direction && mode == o.mode && seed == o.seed &&
           script_hash == o.script_hash && horizon == o.horizon && steps == o.steps && crashes == o.crashes &&
           window.burn_in == o.window.burn_in && window.width == o.window.width &&
           output_window.burn_in == o.output_window.burn_in && output_window.width == o.output_window.width;
  }
};

struct ViewRecord {
  ProcessId process = 1;
  int round = 1;
  View view;
  std::size_t step = 0;
  bool operator==(const ViewRecord&) const = default;
};

struct TraceFile {
  TraceMeta meta;
  std::vector<OrderedPartition> rounds;
  // as-to-iis
  ASTrace<RegisterSummary> register_events;
  std::vector<std::size_t> event_steps;
  std::vector<StatusRecord> status;
  std::vector<ViewRecord> views;
  // iis-to-as
  std::vector<SnapshotOutput> outputs;
  ASTrace<std::int64_t> value_events;

  IISTrace iis_trace() const { return {meta.n, rounds}; }
  bool operator==(const TraceFile&) const = default;
};

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson set_json(ProcSet s) {
  ojson a = ojson::array();
  for (ProcessId p : s.members()) a.push_back(p);
  return a;
}

inline ojson summary_json(const RegisterSummary& r) {
  return ojson{{"counter", r.counter}, {"log_lengths", r.log_lengths}, {"rap_length", r.rap_length}};
}

inline ojson counters_json(const CounterVector& c) { return ojson(c.values()); }

template <class V, class F>
ojson event_json(const ASEvent<V>& ev, std::size_t index, std::optional<std::size_t> step, F value) {
  ojson j{{"type", "as_event"}, {"index", index}};
  if (step) j["step"] = *step;
  j["actor"] = ev.actor;
  if (const auto* up = std::get_if<Update<V>>(&ev.op)) {
    j["op"] = "update";
    j["value"] = value(up->value);
  } else {
    j["op"] = "snapshot";
    ojson cells = ojson::array();
    for (const auto& c : std::get<SnapshotResult<V>>(ev.op).cells) cells.push_back(c ? value(*c) : ojson(nullptr));
    j["cells"] = std::move(cells);
  }
  return j;
}

}  // namespace detail

inline void write_trace(std::ostream& out, const TraceFile& tf) {
  using detail::ojson;
  const auto& m = tf.meta;
  ojson meta{{"type", "meta"}, {"format", 1}, {"n", m.n}, {"direction", to_string(m.direction)}};
  if (m.direction == Direction::iis_to_as) meta["mode"] = to_string(m.mode);
  meta["seed"] = m.seed ? ojson(*m.seed) : ojson(nullptr);
  meta["script_hash"] = m.script_hash ? ojson(*m.script_hash) : ojson(nullptr);
  meta["horizon"] = m.horizon;
  if (m.direction == Direction::as_to_iis) meta["steps"] = m.steps;
  ojson crashes = ojson::array();
  for (const auto& [p, at] : m.crashes) crashes.push_back({p, at});
  meta["crashes"] = std::move(crashes);
  meta["window"] = {{"burn_in", m.window.burn_in}, {"width", m.window.width}};
  if (m.direction == Direction::iis_to_as)
    meta["output_window"] = {{"burn_in", m.output_window.burn_in}, {"width", m.output_window.width}};
  out << meta.dump() << '\n';

  for (std::size_t r = 0; r < tf.rounds.size(); ++r) {
    ojson blocks = ojson::array();
    for (ProcSet b : tf.rounds[r].blocks) blocks.push_back(detail::set_json(b));
    out << ojson{{"type", "iis_round"}, {"round", r + 1}, {"blocks", std::move(blocks)}}.dump() << '\n';
  }

  if (m.direction == Direction::as_to_iis) {
    for (const auto& rec : tf.status) {
      ojson j{{"type", "status_entry"},       {"step", rec.step},
              {"simulator", rec.simulator},   {"process", rec.process},
              {"disposition", to_string(rec.entry.disposition)},
              {"round", rec.entry.at.round},  {"level", rec.entry.at.level}};
      if (rec.view) j["view"] = detail::set_json(*rec.view);
      out << j.dump() << '\n';
    }
    for (const auto& v : tf.views) {
      out << ojson{{"type", "sim_view"},  {"process", v.process}, {"round", v.round},
                   {"view", detail::set_json(v.view)}, {"step", v.step}}
                 .dump()
          << '\n';
    }
    for (std::size_t k = 0; k < tf.register_events.events.size(); ++k) {
      std::optional<std::size_t> step;
      if (k < tf.event_steps.size()) step = tf.event_steps[k];
      out << detail::event_json(tf.register_events.events[k], k, step, detail::summary_json).dump() << '\n';
    }
  } else {
    for (const auto& o : tf.outputs) {
      out << ojson{{"type", "sim_view"}, {"process", o.process}, {"round", o.round},
                   {"snapshot", detail::counters_json(o.snapshot)}}
                 .dump()
          << '\n';
    }
    for (std::size_t k = 0; k < tf.value_events.events.size(); ++k) {
      out << detail::event_json(tf.value_events.events[k], k, std::nullopt,
                                [](std::int64_t v) { return detail::ojson(v); })
                 .dump()
          << '\n';
    }
  }
}

inline std::string trace_to_string(const TraceFile& tf) {
  std::ostringstream ss;
  write_trace(ss, tf);
  return ss.str();
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

using json = nlohmann::json;

class LineReader {
 public:
  LineReader(const json& j, int line, const std::string& source) : j_(j), line_(line), source_(source) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(source_, line_, msg); }

  const json& field(const char* key) const {
    auto it = j_.find(key);
    if (it == j_.end()) fail(std::string("missing field '") + key + "'");
    return *it;
  }
  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <class T>
  T integer(const json& v, const char* what) const {
    if (!v.is_number_integer()) fail(std::string("field '") + what + "' is not an integer");
    return v.get<T>();
  }
  template <class T>
  T integer(const char* key) const {
    return integer<T>(field(key), key);
  }
  std::string text(const char* key) const {
    const auto& v = field(key);
    if (!v.is_string()) fail(std::string("field '") + key + "' is not a string");
    return v.get<std::string>();
  }
  ProcessId process(const char* key, int n) const {
    int p = integer<int>(key);
    if (p < 1 || p > n) fail(std::string("field '") + key + "' out of range");
    return p;
  }
  ProcSet set(const json& v, int n, const char* what) const {
    if (!v.is_array()) fail(std::string("field '") + what + "' is not an array");
    ProcSet s;
    for (const auto& x : v) {
      int p = integer<int>(x, what);
      if (p < 1 || p > n) fail(std::string("process out of range in '") + what + "'");
      if (s.contains(p)) fail(std::string("duplicate process in '") + what + "'");
      s.insert(p);
    }
    return s;
  }
  WindowParams window(const char* key) const {
    const auto& w = field(key);
    if (!w.is_object() || !w.contains("burn_in") || !w.contains("width")) fail(std::string("bad '") + key + "'");
    return {integer<int>(w.at("burn_in"), "burn_in"), integer<int>(w.at("width"), "width")};
  }
  RegisterSummary summary(const json& v) const {
    if (!v.is_object()) fail("register value is not an object");
    RegisterSummary r;
    r.counter = integer<std::uint64_t>(v.contains("counter") ? v.at("counter") : json(), "counter");
    const json& lens = v.contains("log_lengths") ? v.at("log_lengths") : json();
    if (!lens.is_array()) fail("field 'log_lengths' is not an array");
    for (const auto& x : lens) r.log_lengths.push_back(integer<std::uint32_t>(x, "log_lengths"));
    r.rap_length = integer<std::uint32_t>(v.contains("rap_length") ? v.at("rap_length") : json(), "rap_length");
    return r;
  }

  template <class V, class F>
  ASEvent<V> event(int n, F value) const {
    ASEvent<V> ev;
    ev.actor = process("actor", n);
    const std::string op = text("op");
    if (op == "update") {
      ev.op = Update<V>{value(field("value"))};
    } else if (op == "snapshot") {
      const auto& cells = field("cells");
      if (!cells.is_array() || static_cast<int>(cells.size()) != n) fail("snapshot must have n cells");
      SnapshotResult<V> snap;
      for (const auto& c : cells) snap.cells.push_back(c.is_null() ? std::nullopt : std::optional<V>(value(c)));
      ev.op = std::move(snap);
    } else {
      fail("unknown op '" + op + "'");
    }
    return ev;
  }

 private:
  const json& j_;
  int line_;
  const std::string& source_;
};

}  // namespace detail

// Throws ParseError (with the line number) on malformed input.
inline TraceFile read_trace(std::istream& in, const std::string& source = "<trace>") {
  using detail::json;
  TraceFile tf;
  bool have_meta = false;
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(source, lineno, "record is not an object");
    detail::LineReader rd(j, lineno, source);
    const std::string type = rd.text("type");
    if (type == "meta") {
      if (have_meta) rd.fail("second meta record");
      have_meta = true;
      auto& m = tf.meta;
      m.n = rd.integer<int>("n");
      if (m.n < 1 || m.n > kMaxProcesses) rd.fail("n out of range");
      auto dir = parse_direction(rd.text("direction"));
      if (!dir) rd.fail("unknown direction");
      m.direction = *dir;
      if (m.direction == Direction::iis_to_as) {
        auto mode = parse_mode(rd.text("mode"));
        if (!mode) rd.fail("unknown mode");
        m.mode = *mode;
        m.output_window = rd.window("output_window");
      }
      if (rd.has("seed")) m.seed = rd.integer<std::uint64_t>("seed");
      if (rd.has("script_hash")) m.script_hash = rd.text("script_hash");
      m.horizon = rd.integer<std::size_t>("horizon");
      if (m.direction == Direction::as_to_iis) m.steps = rd.integer<std::size_t>("steps");
      const auto& crashes = rd.field("crashes");
      if (!crashes.is_array()) rd.fail("field 'crashes' is not an array");
      for (const auto& c : crashes) {
        if (!c.is_array() || c.size() != 2) rd.fail("crash entries are [process, step] pairs");
        int p = rd.integer<int>(c[0], "crashes");
        if (p < 1 || p > m.n) rd.fail("crash process out of range");
        m.crashes[p] = rd.integer<std::size_t>(c[1], "crashes");
      }
      m.window = rd.window("window");
      continue;
    }
    if (!have_meta) rd.fail("first record must be meta");
    const int n = tf.meta.n;
    if (type == "iis_round") {
      if (rd.integer<int>("round") != static_cast<int>(tf.rounds.size()) + 1) rd.fail("rounds out of order");
      const auto& blocks = rd.field("blocks");
      if (!blocks.is_array()) rd.fail("field 'blocks' is not an array");
      OrderedPartition part;
      for (const auto& b : blocks) part.blocks.push_back(rd.set(b, n, "blocks"));
      try {
        validate_partition(part, n);
      } catch (const InvalidInput& e) {
        rd.fail(e.what());
      }
      tf.rounds.push_back(std::move(part));
    } else if (type == "status_entry") {
      if (tf.meta.direction != Direction::as_to_iis) rd.fail("status_entry in an iis-to-as trace");
      StatusRecord rec;
      rec.step = rd.integer<std::size_t>("step");
      rec.simulator = rd.process("simulator", n);
      rec.process = rd.process("process", n);
      const std::string d = rd.text("disposition");
      if (d == "run") rec.entry.disposition = Disposition::run;
      else if (d == "blocked") rec.entry.disposition = Disposition::blocked;
      else rd.fail("unknown disposition '" + d + "'");
      rec.entry.at = {rd.integer<int>("round"), rd.integer<int>("level")};
      if (rec.entry.at.round < 1 || rec.entry.at.level < 1 || rec.entry.at.level > n) rd.fail("round-level out of range");
      if (rd.has("view")) rec.view = rd.set(rd.field("view"), n, "view");
      tf.status.push_back(rec);
    } else if (type == "sim_view") {
      if (tf.meta.direction == Direction::as_to_iis) {
        ViewRecord v;
        v.process = rd.process("process", n);
        v.round = rd.integer<int>("round");
        if (v.round < 1) rd.fail("round out of range");
        v.view = rd.set(rd.field("view"), n, "view");
        v.step = rd.integer<std::size_t>("step");
        tf.views.push_back(v);
      } else {
        SnapshotOutput o;
        o.process = rd.process("process", n);
        o.round = rd.integer<int>("round");
        const auto& snap = rd.field("snapshot");
        if (!snap.is_array() || static_cast<int>(snap.size()) != n) rd.fail("snapshot must have n entries");
        std::vector<std::int64_t> vals;
        for (const auto& x : snap) vals.push_back(rd.integer<std::int64_t>(x, "snapshot"));
        o.snapshot = CounterVector(std::move(vals));
        tf.outputs.push_back(std::move(o));
      }
    } else if (type == "as_event") {
      if (rd.integer<std::size_t>("index") != (tf.meta.direction == Direction::as_to_iis
                                                    ? tf.register_events.events.size()
                                                    : tf.value_events.events.size()))
        rd.fail("events out of order");
      if (tf.meta.direction == Direction::as_to_iis) {
        tf.register_events.events.push_back(
            rd.event<RegisterSummary>(n, [&](const json& v) { return rd.summary(v); }));
        tf.event_steps.push_back(rd.integer<std::size_t>("step"));
      } else {
        tf.value_events.events.push_back(
            rd.event<std::int64_t>(n, [&](const json& v) { return rd.integer<std::int64_t>(v, "value"); }));
      }
    } else {
      rd.fail("unknown record type '" + type + "'");
    }
  }
  if (!have_meta) throw ParseError(source, lineno, "missing meta record");
  tf.register_events.n = tf.meta.n;
  tf.value_events.n = tf.meta.n;
  return tf;
}

inline TraceFile trace_from_string(const std::string& s, const std::string& source = "<trace>") {
  std::istringstream in(s);
  return read_trace(in, source);
}

}  // namespace iisim
