#pragma once

// Four-tier processing backbone: sample wire format, append-only match log,
// ordered ingestion queue, decision processing, presentation sinks and replay.
//
// Log format (one JSON object per line, UTF-8, '\n' terminated):
//
//   {"format":"aware-ground/1","layout_hash":"<16 hex>","sample_hz":100,
//    "rule":{"first_over":1,"last_over":15,"max_outside":2}}            header
//   {"t":0.01,"id":"ball","kind":"ball","x":..,"y":..,"z":..}            sample
//   {"t":..,"kind":"no_ball","verdict":"legal","measurements":{..}}      decision
//   {"t":..,"kind":"delivery_start","delivery":1,"over":3,"end":"north"}
//   {"t":..,"kind":"delivery_end","delivery":1}
//   {"t":..,"kind":"score","delivery":1,"batter":"b1","runs":4}
//   {"t":..,"kind":"decision_error","decision":"lbw_projection",
//    "code":"NeverReaches","message":".."}
//
// Numbers are written in the shortest form that reads back to the identical
// double, so a log re-serialized from its parsed records is byte-identical.
// Records are non-decreasing in t; ties are ordered delivery_start, samples
// (by sensor id), score, decisions (by kind), decision errors, delivery_end.

#include <algorithm>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"

#include "aware_ground/config_text.hpp"
#include "aware_ground/decision_engine.hpp"
#include "aware_ground/error.hpp"
#include "aware_ground/ground_model.hpp"
#include "aware_ground/positioning.hpp"

namespace aware_ground {

inline constexpr std::string_view kLogFormat = "aware-ground/1";

struct LogHeader {
  std::string format{kLogFormat};
  std::string layout_hash;
  double sample_hz = 100.0;
  FieldingRule rule;

  friend bool operator==(const LogHeader&, const LogHeader&) = default;
};

enum class AnnotationKind { kDeliveryStart, kDeliveryEnd, kScore };

struct Annotation {
  double t = 0.0;
  AnnotationKind kind = AnnotationKind::kDeliveryStart;
  long long delivery = 0;
  int over = 1;                              // delivery_start
  BowlingEnd end = BowlingEnd::kNorth;       // delivery_start
  std::string batter;                        // score
  int runs = 0;                              // score

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

using Record = std::variant<SensorSample, DecisionEvent, Annotation, DecisionFailure>;

inline double record_time(const Record& r) {
  return std::visit([](const auto& v) { return v.t; }, r);
}

struct MatchLog {
  std::optional<LogHeader> header;
  std::vector<Record> records;
};

/// In-memory append with the log's ordering rule.
inline MatchLog& append(MatchLog& log, Record record) {
  const double t = record_time(record);
  if (!std::isfinite(t)) throw Error(Errc::kInvalidArgument, "record time must be finite");
  if (!log.records.empty() && t < record_time(log.records.back())) {
    throw Error(Errc::kOutOfOrder, "record at t=" + config::format_double(t) +
                                       " precedes t=" +
                                       config::format_double(record_time(log.records.back())));
  }
  log.records.push_back(std::move(record));
  return log;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline void append_json_string(std::string& out, std::string_view s) {
  out.push_back('"');
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          static constexpr char kHex[] = "0123456789abcdef";
          out += "\\u00";
          out.push_back(kHex[c >> 4]);
          out.push_back(kHex[c & 0xf]);
        } else {
          out.push_back(ch);
        }
    }
  }
  out.push_back('"');
}

inline void key(std::string& out, std::string_view k) {
  out.push_back(',');
  append_json_string(out, k);
  out.push_back(':');
}

inline void begin(std::string& out, double t) {
  out += "{\"t\":";
  config::append_double(out, t);
}

inline std::string_view end_name(BowlingEnd e) { return e == BowlingEnd::kNorth ? "north" : "south"; }

inline std::optional<Errc> parse_errc(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(Errc::kInvalidArgument); ++i) {
    if (errc_name(static_cast<Errc>(i)) == s) return static_cast<Errc>(i);
  }
  return std::nullopt;
}

}  // namespace detail

inline std::string serialize_header(const LogHeader& h) {
  std::string out = "{\"format\":";
  detail::append_json_string(out, h.format);
  detail::key(out, "layout_hash");
  detail::append_json_string(out, h.layout_hash);
  detail::key(out, "sample_hz");
  config::append_double(out, h.sample_hz);
  out += ",\"rule\":{\"first_over\":" + std::to_string(h.rule.first_over) +
         ",\"last_over\":" + std::to_string(h.rule.last_over) +
         ",\"max_outside\":" + std::to_string(h.rule.max_outside) + "}}";
  return out;
}

inline void serialize_into(std::string& out, const SensorSample& s) {
  detail::begin(out, s.t);
  detail::key(out, "id");
  detail::append_json_string(out, s.sensor_id);
  detail::key(out, "kind");
  detail::append_json_string(out, sensor_kind_name(s.kind));
  out += ",\"x\":";
  config::append_double(out, s.pos.x);
  out += ",\"y\":";
  config::append_double(out, s.pos.y);
  out += ",\"z\":";
  config::append_double(out, s.pos.z);
  out.push_back('}');
}

inline void serialize_into(std::string& out, const DecisionEvent& e) {
  detail::begin(out, e.t);
  detail::key(out, "kind");
  detail::append_json_string(out, decision_kind_name(e.kind));
  detail::key(out, "verdict");
  detail::append_json_string(out, verdict_name(e.verdict));
  out += ",\"measurements\":{";
  bool first = true;
  for (const auto& m : e.measurements) {
    if (!first) out.push_back(',');
    first = false;
    detail::append_json_string(out, m.name);
    out.push_back(':');
    config::append_double(out, m.value);
  }
  out += "}}";
}

inline void serialize_into(std::string& out, const Annotation& a) {
  detail::begin(out, a.t);
  switch (a.kind) {
    case AnnotationKind::kDeliveryStart:
      out += ",\"kind\":\"delivery_start\",\"delivery\":" + std::to_string(a.delivery) +
             ",\"over\":" + std::to_string(a.over) + ",\"end\":";
      detail::append_json_string(out, detail::end_name(a.end));
      break;
    case AnnotationKind::kDeliveryEnd:
      out += ",\"kind\":\"delivery_end\",\"delivery\":" + std::to_string(a.delivery);
      break;
    case AnnotationKind::kScore:
      out += ",\"kind\":\"score\",\"delivery\":" + std::to_string(a.delivery) + ",\"batter\":";
      detail::append_json_string(out, a.batter);
      out += ",\"runs\":" + std::to_string(a.runs);
      break;
  }
  out.push_back('}');
}

inline void serialize_into(std::string& out, const DecisionFailure& f) {
  detail::begin(out, f.t);
  out += ",\"kind\":\"decision_error\"";
  detail::key(out, "decision");
  detail::append_json_string(out, decision_kind_name(f.kind));
  detail::key(out, "code");
  detail::append_json_string(out, errc_name(f.code));
  detail::key(out, "message");
  detail::append_json_string(out, f.message);
  out.push_back('}');
}

inline std::string serialize_record(const Record& r) {
  std::string out;
  out.reserve(96);
  std::visit([&](const auto& v) { serialize_into(out, v); }, r);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

using Json = nlohmann::ordered_json;

struct FieldError {
  std::string what;
};

inline const Json& field(const Json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) throw FieldError{std::string("missing field '") + name + "'"};
  return *it;
}

inline double number_field(const Json& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_number()) throw FieldError{std::string("field '") + name + "' must be a number"};
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw FieldError{std::string("field '") + name + "' must be finite"};
  return d;
}

inline long long integer_field(const Json& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_number_integer()) throw FieldError{std::string("field '") + name + "' must be an integer"};
  return v.get<long long>();
}

inline std::string string_field(const Json& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_string()) throw FieldError{std::string("field '") + name + "' must be a string"};
  return v.get<std::string>();
}

inline Annotation annotation(double t, AnnotationKind kind, long long delivery) {
  Annotation a;
  a.t = t;
  a.kind = kind;
  a.delivery = delivery;
  return a;
}

inline LogHeader header_from_json(const Json& j) {
  LogHeader h;
  h.format = string_field(j, "format");
  if (h.format != kLogFormat) {
    throw Error(Errc::kVersionMismatch,
                "log format '" + h.format + "' is not " + std::string(kLogFormat));
  }
  h.layout_hash = string_field(j, "layout_hash");
  h.sample_hz = number_field(j, "sample_hz");
  const auto& rule = field(j, "rule");
  h.rule.first_over = static_cast<int>(integer_field(rule, "first_over"));
  h.rule.last_over = static_cast<int>(integer_field(rule, "last_over"));
  h.rule.max_outside = static_cast<int>(integer_field(rule, "max_outside"));
  return h;
}

inline Record record_from_json(const Json& j) {
  if (!j.is_object()) throw FieldError{"record must be a JSON object"};
  const double t = number_field(j, "t");
  if (t < 0.0) throw FieldError{"t must be non-negative"};
  const auto kind = string_field(j, "kind");

  if (const auto sk = parse_sensor_kind(kind)) {
    return SensorSample{t, string_field(j, "id"), *sk,
                        {number_field(j, "x"), number_field(j, "y"), number_field(j, "z")}};
  }
  if (const auto dk = parse_decision_kind(kind)) {
    DecisionEvent e;
    e.t = t;
    e.kind = *dk;
    const auto v = parse_verdict(string_field(j, "verdict"));
    if (!v) throw FieldError{"unknown verdict"};
    e.verdict = *v;
    const auto& ms = field(j, "measurements");
    if (!ms.is_object()) throw FieldError{"measurements must be an object"};
    for (const auto& [name, value] : ms.items()) {
      if (!value.is_number()) throw FieldError{"measurement '" + name + "' must be a number"};
      e.measurements.push_back({name, value.get<double>()});
    }
    return e;
  }
  if (kind == "delivery_start") {
    auto a = annotation(t, AnnotationKind::kDeliveryStart, integer_field(j, "delivery"));
    a.over = static_cast<int>(integer_field(j, "over"));
    const auto end = string_field(j, "end");
    if (end != "north" && end != "south") throw FieldError{"end must be north or south"};
    a.end = end == "north" ? BowlingEnd::kNorth : BowlingEnd::kSouth;
    return a;
  }
  if (kind == "delivery_end") {
    return annotation(t, AnnotationKind::kDeliveryEnd, integer_field(j, "delivery"));
  }
  if (kind == "score") {
    auto a = annotation(t, AnnotationKind::kScore, integer_field(j, "delivery"));
    a.batter = string_field(j, "batter");
    a.runs = static_cast<int>(integer_field(j, "runs"));
    return a;
  }
  if (kind == "decision_error") {
    DecisionFailure f;
    f.t = t;
    const auto dk = parse_decision_kind(string_field(j, "decision"));
    if (!dk) throw FieldError{"unknown decision kind"};
    f.kind = *dk;
    const auto code = parse_errc(string_field(j, "code"));
    if (!code) throw FieldError{"unknown error code"};
    f.code = *code;
    f.message = string_field(j, "message");
    return f;
  }
  throw FieldError{"unknown record kind '" + kind + "'"};
}

inline Error corrupt(std::string_view source, std::size_t line, std::size_t offset,
                     const std::string& what) {
  return Error(Errc::kCorruptRecord,
               std::string(source) + ":" + std::to_string(line) + " (byte " +
                   std::to_string(offset) + "): " + what,
               std::string(source));
}

}  // namespace detail

/// Parses a single record line (no header).
inline Record parse_record(std::string_view line) {
  try {
    return detail::record_from_json(detail::Json::parse(line));
  } catch (const detail::FieldError& e) {
    throw Error(Errc::kCorruptRecord, e.what);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kCorruptRecord, e.what());
  }
}

/// Reads a whole log. A zero-byte input is an empty log without header.
inline MatchLog read_log(std::istream& in, std::string_view source = "<log>") {
  MatchLog log;
  std::string line;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    try {
      const auto j = detail::Json::parse(line);
      if (line_no == 1) {
        if (!j.is_object() || !j.contains("format")) {
          throw detail::FieldError{"first line must be the log header"};
        }
        log.header = detail::header_from_json(j);
        continue;
      }
      auto rec = detail::record_from_json(j);
      if (!log.records.empty() && record_time(rec) < record_time(log.records.back())) {
        throw detail::FieldError{"record time goes backwards"};
      }
      log.records.push_back(std::move(rec));
    } catch (const detail::FieldError& e) {
      throw detail::corrupt(source, line_no, line_offset, e.what);
    } catch (const nlohmann::json::exception& e) {
      throw detail::corrupt(source, line_no, line_offset, e.what());
    } catch (const Error& e) {
      if (e.code() == Errc::kVersionMismatch) {
        throw Error(Errc::kVersionMismatch,
                    std::string(source) + ":" + std::to_string(line_no) + ": " + e.what(),
                    std::string(source));
      }
      throw;
    }
  }
  return log;
}

inline MatchLog read_log_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoFailure, "cannot open log " + path, path);
  return read_log(in, path);
}

// ---------------------------------------------------------------------------
// Durable writer

/// Append-only NDJSON writer. Each record is written and flushed before
/// append() returns, so a concurrent reader sees whole lines only.
class MatchLogWriter {
 public:
  MatchLogWriter(std::ostream& out, const LogHeader& header, std::string name = "<stream>")
      : out_(&out), name_(std::move(name)) {
    write_line(serialize_header(header));
  }

  MatchLogWriter(const std::string& path, const LogHeader& header)
      : file_(std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc)),
        out_(file_.get()),
        name_(path) {
    if (!*file_) throw Error(Errc::kIoFailure, "cannot open " + path + " for writing", path);
    write_line(serialize_header(header));
  }

  void append(const Record& r) {
    const double t = record_time(r);
    if (records_ > 0 && t < last_t_) {
      throw Error(Errc::kOutOfOrder, "record at t=" + config::format_double(t) +
                                         " precedes t=" + config::format_double(last_t_),
                  name_);
    }
    line_.clear();
    std::visit([&](const auto& v) { serialize_into(line_, v); }, r);
    write_line(line_);
    last_t_ = t;
    ++records_;
  }

  std::size_t records() const noexcept { return records_; }

 private:
  void write_line(std::string_view s) {
    out_->write(s.data(), static_cast<std::streamsize>(s.size()));
    out_->put('\n');
    out_->flush();
    if (!*out_) throw Error(Errc::kIoFailure, "write to " + name_ + " failed", name_);
  }

  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
  std::string name_;
  std::string line_;
  double last_t_ = 0.0;
  std::size_t records_ = 0;
};

inline std::string serialize_log(const MatchLog& log) {
  std::string out;
  if (log.header) {
    out += serialize_header(*log.header);
    out.push_back('\n');
  }
  for (const auto& r : log.records) {
    std::visit([&](const auto& v) { serialize_into(out, v); }, r);
    out.push_back('\n');
  }
  return out;
}

// ---------------------------------------------------------------------------
// Presentation sinks

enum class SinkKind { kUmpireAlert, kScoreboard, kReportFile };

class Sink {
 public:
  explicit Sink(std::string id) : id_(std::move(id)) {}
  virtual ~Sink() = default;
  Sink(const Sink&) = delete;
  Sink& operator=(const Sink&) = delete;

  const std::string& id() const noexcept { return id_; }
  virtual SinkKind kind() const = 0;
  virtual void notify(const DecisionEvent& event) = 0;

 private:
  std::string id_;
};

/// Human-readable alarms for the on-field umpire.
class UmpireAlertSink final : public Sink {
 public:
  UmpireAlertSink(std::string id, std::ostream& out) : Sink(std::move(id)), out_(&out) {}
  SinkKind kind() const override { return SinkKind::kUmpireAlert; }

  void notify(const DecisionEvent& e) override {
    ++received_;
    const bool alarm = e.verdict == Verdict::kNoBall || e.verdict == Verdict::kViolation;
    if (!alarm && e.kind != DecisionKind::kLbwProjection) return;
    *out_ << (alarm ? "ALERT " : "INFO  ") << "t=" << config::format_double(e.t) << ' '
          << decision_kind_name(e.kind) << ": " << verdict_name(e.verdict);
    if (e.kind == DecisionKind::kNoBall) {
      if (const auto theta = e.measurement("theta")) {
        *out_ << " (angle " << radians_to_degrees(*theta) << " deg)";
      }
    } else if (e.kind == DecisionKind::kFieldingViolation) {
      *out_ << " (" << e.measurement("count_outside").value_or(0) << " outside ring)";
    }
    *out_ << '\n';
  }

  std::size_t received() const noexcept { return received_; }

 private:
  std::ostream* out_;
  std::size_t received_ = 0;
};

/// Running tallies for the scoring system.
class ScoreboardSink final : public Sink {
 public:
  using Sink::Sink;
  SinkKind kind() const override { return SinkKind::kScoreboard; }

  void notify(const DecisionEvent& e) override {
    ++received_;
    if (e.verdict == Verdict::kNoBall) ++no_balls_;
    if (e.verdict == Verdict::kViolation) ++fielding_violations_;
    if (e.verdict == Verdict::kHitting) ++lbw_hitting_;
  }

  std::size_t received() const noexcept { return received_; }
  std::size_t no_balls() const noexcept { return no_balls_; }
  std::size_t fielding_violations() const noexcept { return fielding_violations_; }
  std::size_t lbw_hitting() const noexcept { return lbw_hitting_; }

 private:
  std::size_t received_ = 0;
  std::size_t no_balls_ = 0;
  std::size_t fielding_violations_ = 0;
  std::size_t lbw_hitting_ = 0;
};

/// Decision records as NDJSON, one per line.
class ReportFileSink final : public Sink {
 public:
  ReportFileSink(std::string id, std::ostream& out) : Sink(std::move(id)), out_(&out) {}
  SinkKind kind() const override { return SinkKind::kReportFile; }

  void notify(const DecisionEvent& e) override {
    *out_ << serialize_record(e) << '\n';
    out_->flush();
  }

 private:
  std::ostream* out_;
};

/// Keeps every event it is given.
class RecordingSink final : public Sink {
 public:
  explicit RecordingSink(std::string id, SinkKind kind = SinkKind::kReportFile)
      : Sink(std::move(id)), kind_(kind) {}
  SinkKind kind() const override { return kind_; }
  void notify(const DecisionEvent& e) override { events_.push_back(e); }
  const std::vector<DecisionEvent>& events() const noexcept { return events_; }

 private:
  SinkKind kind_;
  std::vector<DecisionEvent> events_;
};

// ---------------------------------------------------------------------------
// Processing

struct PipelineSummary {
  std::size_t records_in = 0;
  std::size_t records_written = 0;
  std::size_t samples_accepted = 0;
  std::size_t dead_letters = 0;
  std::size_t stale_decisions_dropped = 0;
  std::size_t deliveries = 0;
  std::map<DecisionKind, std::size_t> decisions;
  std::map<std::string, std::size_t> verdicts;  // "<kind>:<verdict>"
  std::vector<DecisionFailure> failures;
  std::vector<std::string> dead_letter_reasons;

  std::size_t total_decisions() const {
    std::size_t n = 0;
    for (const auto& [_, c] : decisions) n += c;
    return n;
  }
};

/// Total order of records within a log: time, then record rank, then sensor
/// id or decision kind.
inline int record_rank(const Record& r) {
  if (const auto* a = std::get_if<Annotation>(&r)) {
    switch (a->kind) {
      case AnnotationKind::kDeliveryStart: return 0;
      case AnnotationKind::kScore: return 2;
      case AnnotationKind::kDeliveryEnd: return 5;
    }
  }
  if (std::holds_alternative<SensorSample>(r)) return 1;
  if (std::holds_alternative<DecisionEvent>(r)) return 3;
  return 4;
}

inline bool log_order_less(const Record& a, const Record& b) {
  const double ta = record_time(a), tb = record_time(b);
  if (ta != tb) return ta < tb;
  const int ra = record_rank(a), rb = record_rank(b);
  if (ra != rb) return ra < rb;
  if (ra == 1) return std::get<SensorSample>(a).sensor_id < std::get<SensorSample>(b).sensor_id;
  if (ra == 3) {
    return static_cast<int>(std::get<DecisionEvent>(a).kind) <
           static_cast<int>(std::get<DecisionEvent>(b).kind);
  }
  if (ra == 4) {
    return static_cast<int>(std::get<DecisionFailure>(a).kind) <
           static_cast<int>(std::get<DecisionFailure>(b).kind);
  }
  return false;
}

using RecordOutput = std::function<void(const Record&)>;

/// Streaming processing stage. Samples are checked for order per sensor and
/// globally; rejects are dead-lettered and never reach the log. Records are
/// held per delivery (between delivery_start and delivery_end markers, or
/// between markers for unannotated stretches), decided when the delivery
/// closes, merged into log order and then passed to the sinks and the output.
class Pipeline {
 public:
  Pipeline(const GroundLayout& layout, FieldingRule rule, std::vector<Sink*> sinks,
           RecordOutput output)
      : layout_(&layout), rule_(rule), sinks_(std::move(sinks)), output_(std::move(output)) {
    validate_rule(rule_);
  }

  void push(Record record) {
    ++summary_.records_in;
    std::visit([&](auto&& r) { accept(std::move(r)); }, std::move(record));
  }

  PipelineSummary finish() {
    close_segment();
    return summary_;
  }

  const PipelineSummary& summary() const noexcept { return summary_; }

 private:
  struct Segment {
    std::optional<Annotation> start;
    std::vector<Record> records;
    std::optional<SensorSample> foot;
    std::optional<Track> ball;
  };

  void dead_letter(const std::string& why) {
    ++summary_.dead_letters;
    summary_.dead_letter_reasons.push_back(why);
  }

  bool admit_time(double t, const std::string& what) {
    if (!std::isfinite(t) || t < 0.0) {
      dead_letter(what + ": invalid timestamp");
      return false;
    }
    if (t < last_t_) {
      dead_letter(what + " at t=" + config::format_double(t) + " arrived after t=" +
                  config::format_double(last_t_));
      return false;
    }
    return true;
  }

  void accept(SensorSample s) {
    const std::string what = "sample " + s.sensor_id;
    if (!is_finite(s.pos) || s.sensor_id.empty()) {
      dead_letter(what + ": malformed");
      return;
    }
    if (!admit_time(s.t, what)) return;
    if (const auto it = kinds_.find(s.sensor_id); it != kinds_.end() && it->second != s.kind) {
      dead_letter(what + ": sensor kind changed");
      return;
    }
    if (const auto it = last_sample_t_.find(s.sensor_id);
        it != last_sample_t_.end() && !(s.t > it->second)) {
      dead_letter(what + " at t=" + config::format_double(s.t) + " does not follow t=" +
                  config::format_double(it->second));
      return;
    }
    kinds_[s.sensor_id] = s.kind;
    last_sample_t_[s.sensor_id] = s.t;
    last_t_ = s.t;
    ++summary_.samples_accepted;

    switch (s.kind) {
      case SensorKind::kPlayer: {
        auto [it, _] = players_.try_emplace(s.sensor_id, s.sensor_id);
        it->second.ingest(s);
        break;
      }
      case SensorKind::kBall:
        if (!segment_.ball) segment_.ball.emplace(s.sensor_id);
        if (segment_.ball->sensor_id() == s.sensor_id) segment_.ball->ingest(s);
        break;
      case SensorKind::kBowlerFoot:
        if (!segment_.foot) segment_.foot = s;
        break;
    }
    segment_.records.push_back(std::move(s));
  }

  void accept(Annotation a) {
    const std::string what = "annotation";
    if (!admit_time(a.t, what)) return;
    switch (a.kind) {
      case AnnotationKind::kDeliveryStart:
        last_t_ = a.t;
        close_segment();
        segment_.start = a;
        segment_.records.push_back(std::move(a));
        break;
      case AnnotationKind::kDeliveryEnd:
        if (!segment_.start || segment_.start->delivery != a.delivery) {
          dead_letter("delivery_end for delivery " + std::to_string(a.delivery) +
                      " without matching start");
          return;
        }
        last_t_ = a.t;
        segment_.records.push_back(std::move(a));
        close_segment();
        break;
      case AnnotationKind::kScore:
        last_t_ = a.t;
        segment_.records.push_back(std::move(a));
        break;
    }
  }

  // Stored decisions are recomputed, never trusted.
  void accept(DecisionEvent) { ++summary_.stale_decisions_dropped; }
  void accept(DecisionFailure) { ++summary_.stale_decisions_dropped; }

  void close_segment() {
    Segment seg = std::move(segment_);
    segment_ = Segment{};
    const bool decide = seg.start.has_value() || seg.foot.has_value() || seg.ball.has_value();
    if (decide) {
      DeliveryLog dl;
      if (seg.start) {
        dl.over = seg.start->over;
        dl.end = seg.start->end;
        dl.start_t = seg.start->t;
      } else if (!seg.records.empty()) {
        dl.start_t = record_time(seg.records.front());
        if (seg.foot) dl.end = seg.foot->pos.x <= 0.0 ? BowlingEnd::kNorth : BowlingEnd::kSouth;
      }
      dl.foot = seg.foot;
      if (seg.ball) dl.ball = std::move(*seg.ball);
      for (const auto& [_, tr] : players_) dl.players.push_back(&tr);

      auto decided = decide_delivery(*layout_, rule_, dl);
      ++summary_.deliveries;
      for (auto& e : decided.events) seg.records.push_back(std::move(e));
      for (auto& f : decided.failures) {
        summary_.failures.push_back(f);
        seg.records.push_back(std::move(f));
      }
    }
    std::stable_sort(seg.records.begin(), seg.records.end(), log_order_less);

    for (auto& r : seg.records) {
      if (auto* e = std::get_if<DecisionEvent>(&r)) {
        e->sinks_notified.clear();
        for (Sink* sink : sinks_) {
          sink->notify(*e);
          e->sinks_notified.push_back(sink->id());
        }
        ++summary_.decisions[e->kind];
        ++summary_.verdicts[std::string(decision_kind_name(e->kind)) + ":" +
                            std::string(verdict_name(e->verdict))];
      }
      if (output_) output_(r);
      ++summary_.records_written;
    }
  }

  const GroundLayout* layout_;
  FieldingRule rule_;
  std::vector<Sink*> sinks_;
  RecordOutput output_;
  PipelineSummary summary_;
  Segment segment_;
  double last_t_ = 0.0;
  std::map<std::string, double> last_sample_t_;
  std::map<std::string, SensorKind> kinds_;
  std::map<std::string, Track> players_;
};

/// Bounded FIFO between the gathering and processing stages.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(T item) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_; });
    items_.push_back(std::move(item));
    not_empty_.notify_one();
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
  }

  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

 private:
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<T> items_;
  bool closed_ = false;
};

using RecordSource = std::function<std::optional<Record>()>;

inline RecordSource source_from(std::span<const Record> records) {
  return [records, i = std::size_t{0}]() mutable -> std::optional<Record> {
    if (i >= records.size()) return std::nullopt;
    return records[i++];
  };
}

inline constexpr std::size_t kQueueBatch = 256;
inline constexpr std::size_t kQueueCapacity = 16;  // batches

/// gather (source, on its own thread) -> communicate (ordered bounded queue)
/// -> process (decision engine) -> present (sinks, log output).
inline PipelineSummary run_pipeline(const GroundLayout& layout, const FieldingRule& rule,
                                    RecordSource source, std::vector<Sink*> sinks,
                                    RecordOutput output) {
  Pipeline pipeline(layout, rule, std::move(sinks), std::move(output));
  BoundedQueue<std::vector<Record>> queue(kQueueCapacity);
  std::exception_ptr gather_error;
  std::thread gatherer([&] {
    try {
      std::vector<Record> batch;
      batch.reserve(kQueueBatch);
      while (auto r = source()) {
        batch.push_back(std::move(*r));
        if (batch.size() == kQueueBatch) {
          queue.push(std::move(batch));
          batch = {};
          batch.reserve(kQueueBatch);
        }
      }
      if (!batch.empty()) queue.push(std::move(batch));
    } catch (...) {
      gather_error = std::current_exception();
    }
    queue.close();
  });

  std::exception_ptr process_error;
  while (auto batch = queue.pop()) {
    if (process_error) continue;  // drain so the gatherer can finish
    try {
      for (auto& r : *batch) pipeline.push(std::move(r));
    } catch (...) {
      process_error = std::current_exception();
    }
  }
  gatherer.join();
  if (gather_error) std::rethrow_exception(gather_error);
  if (process_error) std::rethrow_exception(process_error);
  return pipeline.finish();
}

inline RecordOutput output_to(MatchLogWriter& writer) {
  return [&writer](const Record& r) { writer.append(r); };
}

inline RecordOutput output_to(MatchLog& log) {
  return [&log](const Record& r) { append(log, r); };
}

inline LogHeader make_header(const GroundLayout& layout, const FieldingRule& rule,
                             double sample_hz) {
  LogHeader h;
  h.layout_hash = layout_hash(layout);
  h.sample_hz = sample_hz;
  h.rule = rule;
  return h;
}

// ---------------------------------------------------------------------------
// Replay

struct ReplayResult {
  MatchLog log;  // regenerated
  PipelineSummary summary;
  std::size_t stored_decisions = 0;
  std::size_t recomputed_decisions = 0;
  std::vector<std::string> divergences;
};

namespace detail {

inline bool is_decision(const Record& r) {
  return std::holds_alternative<DecisionEvent>(r) || std::holds_alternative<DecisionFailure>(r);
}

inline bool same_decision(const Record& a, const Record& b) {
  if (a.index() != b.index()) return false;
  if (const auto* ea = std::get_if<DecisionEvent>(&a)) {
    return ea->same_record(std::get<DecisionEvent>(b));
  }
  return std::get<DecisionFailure>(a) == std::get<DecisionFailure>(b);
}

}  // namespace detail

/// Feeds the stored samples and annotations back through the processing
/// stage and checks every recomputed decision against the stored one.
inline ReplayResult replay(const MatchLog& stored, const GroundLayout& layout,
                           std::vector<Sink*> sinks = {}) {
  ReplayResult result;
  if (!stored.header) return result;  // empty log
  if (stored.header->layout_hash != layout_hash(layout)) {
    throw Error(Errc::kLayoutMismatch, "log was recorded with layout " +
                                           stored.header->layout_hash + ", replay layout is " +
                                           layout_hash(layout));
  }
  result.log.header = stored.header;
  std::vector<Record> input;
  std::vector<const Record*> stored_decisions;
  for (const auto& r : stored.records) {
    if (detail::is_decision(r)) {
      stored_decisions.push_back(&r);
    } else {
      input.push_back(r);
    }
  }
  result.summary =
      run_pipeline(layout, stored.header->rule, source_from(input), std::move(sinks),
                   output_to(result.log));

  std::vector<const Record*> recomputed;
  for (const auto& r : result.log.records) {
    if (detail::is_decision(r)) recomputed.push_back(&r);
  }
  result.stored_decisions = stored_decisions.size();
  result.recomputed_decisions = recomputed.size();
  const std::size_t common = std::min(stored_decisions.size(), recomputed.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (!detail::same_decision(*stored_decisions[i], *recomputed[i])) {
      result.divergences.push_back("decision " + std::to_string(i) + ": stored " +
                                   serialize_record(*stored_decisions[i]) + " recomputed " +
                                   serialize_record(*recomputed[i]));
    }
  }
  if (stored_decisions.size() != recomputed.size()) {
    result.divergences.push_back("stored " + std::to_string(stored_decisions.size()) +
                                 " decisions, recomputed " + std::to_string(recomputed.size()));
  }
  if (result.log.records.size() != stored.records.size()) {
    result.divergences.push_back("stored " + std::to_string(stored.records.size()) +
                                 " records, regenerated " +
                                 std::to_string(result.log.records.size()));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Summary report

inline std::string format_summary(const PipelineSummary& s) {
  std::ostringstream os;
  const auto row = [&](std::string_view name, std::size_t v) {
    os << name << std::string(name.size() < 34 ? 34 - name.size() : 1, ' ') << v << '\n';
  };
  row("records in", s.records_in);
  row("records written", s.records_written);
  row("samples accepted", s.samples_accepted);
  row("dead letters", s.dead_letters);
  row("deliveries", s.deliveries);
  for (const auto& [kind, n] : s.decisions) row(std::string("decisions ") + std::string(decision_kind_name(kind)), n);
  for (const auto& [name, n] : s.verdicts) row("  " + name, n);
  row("decision errors", s.failures.size());
  return os.str();
}

inline std::string summary_record(const PipelineSummary& s) {
  std::string out = "{\"kind\":\"pipeline_summary\"";
  const auto num = [&](std::string_view k, std::size_t v) {
    detail::key(out, k);
    out += std::to_string(v);
  };
  num("records_in", s.records_in);
  num("records_written", s.records_written);
  num("samples_accepted", s.samples_accepted);
  num("dead_letters", s.dead_letters);
  num("deliveries", s.deliveries);
  out += ",\"decisions\":{";
  bool first = true;
  for (const auto& [name, n] : s.verdicts) {
    if (!first) out.push_back(',');
    first = false;
    detail::append_json_string(out, name);
    out += ":" + std::to_string(n);
  }
  out += "}";
  num("decision_errors", s.failures.size());
  out += "}";
  return out;
}

}  // namespace aware_ground
