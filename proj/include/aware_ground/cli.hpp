#pragma once

// Command-line front end: simulate, decide, replay and analyze over the
// layout/scenario text formats and the NDJSON match log.
//
// Exit codes: 0 success, 1 usage error, 2 data error (unreadable or malformed
// input, layout mismatch), 3 decision error (a decision could not be made, or
// replay diverged).

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "aware_ground/analytics.hpp"
#include "aware_ground/decision_engine.hpp"
#include "aware_ground/error.hpp"
#include "aware_ground/ground_model.hpp"
#include "aware_ground/match_sim.hpp"
#include "aware_ground/pipeline_store.hpp"

namespace aware_ground::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitDecision = 3 };

inline int exit_code_for(Errc code) {
  switch (code) {
    case Errc::kDegenerateTriangle:
    case Errc::kOutOfDomain:
    case Errc::kInsufficientAnchors:
    case Errc::kDegenerateGeometry:
    case Errc::kNoConvergence:
    case Errc::kInsufficientSamples:
    case Errc::kIllConditioned:
    case Errc::kNeverReaches:
    case Errc::kNoBallsFaced:
      return kExitDecision;
    case Errc::kInvalidArgument:
      return kExitUsage;
    default:
      return kExitData;
  }
}

// Seconds between the release times of consecutive simulated deliveries.
inline constexpr double kDeliverySpacing = 30.0;

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoFailure, "cannot open " + path, path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Errc::kIoFailure, "cannot read " + path, path);
  return ss.str();
}

/// Reads a text document and prefixes parse errors with the file name.
template <typename F>
auto load_document(const std::string& path, F&& parse) {
  const auto text = read_text_file(path);
  try {
    return parse(text);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what(), e.subject().empty() ? path : e.subject());
  }
}

inline GroundLayout layout_from(const std::string& path) {
  if (path.empty()) return default_layout();
  return load_document(path, [](std::string_view t) { return load_layout(t); });
}

inline FieldingRule parse_overs(const std::string& text, FieldingRule rule) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) {
    throw Error(Errc::kInvalidArgument, "--rule-overs expects a-b, got '" + text + "'");
  }
  config::Entry a{"rule-overs", text.substr(0, dash), 0};
  config::Entry b{"rule-overs", text.substr(dash + 1), 0};
  try {
    rule.first_over = static_cast<int>(config::integer(a));
    rule.last_over = static_cast<int>(config::integer(b));
  } catch (const Error&) {
    throw Error(Errc::kInvalidArgument, "--rule-overs expects a-b, got '" + text + "'");
  }
  return rule;
}

struct Options {
  std::string layout_path;
  std::vector<std::string> scenario_paths;
  std::string log_path;
  std::uint64_t seed = 0;
  double noise = 0.0;
  std::string out_path = "-";
  std::optional<int> rule_max_outside;
  std::string rule_overs;
  int repeat = 1;
  double cell_size = 2.0;
};

inline FieldingRule effective_rule(const Options& o, FieldingRule rule) {
  if (o.rule_max_outside) rule.max_outside = *o.rule_max_outside;
  if (!o.rule_overs.empty()) rule = parse_overs(o.rule_overs, rule);
  try {
    validate_rule(rule);
  } catch (const Error& e) {
    throw Error(Errc::kInvalidArgument, e.what());
  }
  return rule;
}

/// Where data goes: standard output for "-", otherwise a file. Human-readable
/// reports go to standard output only when it is not carrying data.
class DataTarget {
 public:
  DataTarget(const std::string& path, std::ostream& out, std::ostream& err) : path_(path) {
    if (path == "-") {
      data_ = &out;
      report_ = &err;
    } else {
      data_ = nullptr;
      report_ = &out;
    }
  }
  bool is_stdout() const { return data_ != nullptr; }
  std::ostream& data() { return *data_; }
  std::ostream& report() { return *report_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ostream* data_;
  std::ostream* report_;
};

inline std::unique_ptr<MatchLogWriter> open_writer(DataTarget& target, const LogHeader& header) {
  if (target.is_stdout()) return std::make_unique<MatchLogWriter>(target.data(), header, "<stdout>");
  return std::make_unique<MatchLogWriter>(target.path(), header);
}

inline MatchLog load_log(const std::string& path) {
  if (path.empty()) throw Error(Errc::kInvalidArgument, "--log is required");
  return read_log_file(path);
}

inline void require_layout_match(const LogHeader& header, const GroundLayout& layout,
                                 const std::string& log_path) {
  const auto hash = layout_hash(layout);
  if (header.layout_hash != hash) {
    throw Error(Errc::kLayoutMismatch,
                log_path + ": recorded with layout " + header.layout_hash +
                    " but the given layout hashes to " + hash + " (pass the matching --layout)",
                log_path);
  }
}

inline const LogHeader& require_header(const MatchLog& log, const std::string& path) {
  if (!log.header) throw Error(Errc::kCorruptRecord, path + ": log is empty (no header)", path);
  return *log.header;
}

// ---------------------------------------------------------------------------

/// One simulated delivery as log records in log order: delivery_start, the
/// foot, ball and fielder samples, an optional score, then delivery_end at the
/// last ball sample.
inline std::vector<Record> delivery_records(const GroundLayout& layout, const Scenario& sc,
                                            long long delivery, const SimOptions& opt) {
  const auto sim = simulate_delivery(layout, sc.delivery, opt);
  std::vector<Record> records;
  Annotation start;
  start.t = opt.t0;
  start.kind = AnnotationKind::kDeliveryStart;
  start.delivery = delivery;
  start.over = sc.fielding.over_number;
  start.end = sc.delivery.end;
  records.emplace_back(start);
  for (const auto& s : sim.samples) records.emplace_back(s);
  for (const auto& s : simulate_fielding(layout, sc.fielding, opt.t0)) records.emplace_back(s);
  double t_end = opt.t0;
  for (const auto& s : sim.samples) t_end = std::max(t_end, s.t);
  if (sc.score) {
    Annotation score;
    score.t = t_end;
    score.kind = AnnotationKind::kScore;
    score.delivery = delivery;
    score.batter = sc.score->batter;
    score.runs = sc.score->runs;
    records.emplace_back(score);
  }
  Annotation end;
  end.t = t_end;
  end.kind = AnnotationKind::kDeliveryEnd;
  end.delivery = delivery;
  records.emplace_back(end);
  std::stable_sort(records.begin(), records.end(), log_order_less);
  return records;
}

inline int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.scenario_paths.empty()) throw Error(Errc::kInvalidArgument, "--scenario is required");
  if (o.repeat < 1) throw Error(Errc::kInvalidArgument, "--repeat must be positive");
  const auto layout = layout_from(o.layout_path);
  const auto rule = effective_rule(o, FieldingRule{});
  std::vector<Scenario> scenarios;
  for (const auto& p : o.scenario_paths) {
    scenarios.push_back(load_document(p, [](std::string_view t) { return scenario_from_config(t); }));
  }

  DataTarget target(o.out_path, out, err);
  const auto writer = open_writer(target, make_header(layout, rule, scenarios.front().sample_hz));

  long long delivery = 0;
  double next_free = 0.0;
  for (int r = 0; r < o.repeat; ++r) {
    for (std::size_t k = 0; k < scenarios.size(); ++k) {
      const auto& sc = scenarios[k];
      ++delivery;
      SimOptions opt;
      opt.sample_hz = sc.sample_hz;
      opt.seed = o.seed + static_cast<std::uint64_t>(delivery - 1);
      opt.noise_sigma = o.noise;
      opt.t0 = std::max(static_cast<double>(delivery - 1) * kDeliverySpacing, next_free);
      const auto records = delivery_records(layout, sc, delivery, opt);
      for (const auto& rec : records) writer->append(rec);
      next_free = record_time(records.back()) + 1.0;
    }
  }
  target.report() << "simulated " << delivery << " deliveries, " << writer->records()
                  << " records\n";
  return kExitOk;
}

inline int cmd_decide(const Options& o, std::ostream& out, std::ostream& err) {
  const auto log = load_log(o.log_path);
  const auto& stored = require_header(log, o.log_path);
  const auto layout = layout_from(o.layout_path);
  require_layout_match(stored, layout, o.log_path);
  const auto rule = effective_rule(o, stored.rule);

  DataTarget target(o.out_path, out, err);
  LogHeader header = stored;
  header.rule = rule;
  const auto writer = open_writer(target, header);
  UmpireAlertSink umpire("umpire", err);
  ScoreboardSink scoreboard("scoreboard");
  const auto summary = run_pipeline(layout, rule, source_from(log.records), {&umpire, &scoreboard},
                                    output_to(*writer));

  auto& rep = target.report();
  rep << format_summary(summary);
  for (const auto& f : summary.failures) {
    err << o.log_path << ": t=" << config::format_double(f.t) << ' ' << decision_kind_name(f.kind)
        << " failed: " << f.message << '\n';
  }
  for (const auto& d : summary.dead_letter_reasons) err << o.log_path << ": dead letter: " << d << '\n';
  return summary.failures.empty() ? kExitOk : kExitDecision;
}

inline int cmd_replay(const Options& o, std::ostream& out, std::ostream& err) {
  const auto log = load_log(o.log_path);
  const auto layout = layout_from(o.layout_path);
  if (log.header) require_layout_match(*log.header, layout, o.log_path);
  const auto result = replay(log, layout);

  const bool emit = !o.out_path.empty();
  DataTarget target(emit ? o.out_path : std::string("<none>"), out, err);
  if (emit) {
    const auto text = serialize_log(result.log);
    if (target.is_stdout()) {
      target.data() << text;
      target.data().flush();
    } else {
      std::ofstream f(o.out_path, std::ios::binary | std::ios::trunc);
      f << text;
      f.flush();
      if (!f) throw Error(Errc::kIoFailure, "cannot write " + o.out_path, o.out_path);
    }
  }
  std::ostream& rep = emit && target.is_stdout() ? err : out;
  for (const auto& d : result.divergences) err << o.log_path << ": divergence: " << d << '\n';
  rep << result.stored_decisions << " stored decisions, " << result.recomputed_decisions
      << " recomputed, " << result.divergences.size() << " divergences\n";
  return result.divergences.empty() ? kExitOk : kExitDecision;
}

// Per-delivery material gathered from a log for analysis.
struct DeliveryMaterial {
  long long delivery = 0;
  double t = 0.0;
  Track ball;
};

inline void append_report_number(std::string& s, std::string_view key, double v) {
  s += ",\"";
  s += key;
  s += "\":";
  config::append_double(s, v);
}

inline int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err) {
  const auto log = load_log(o.log_path);
  require_header(log, o.log_path);
  const auto layout = layout_from(o.layout_path);

  std::vector<DeliveryMaterial> deliveries;
  std::map<std::string, Track> players;
  std::map<std::string, BattingRecord> batting;
  for (const auto& rec : log.records) {
    if (const auto* a = std::get_if<Annotation>(&rec)) {
      if (a->kind == AnnotationKind::kDeliveryStart) {
        deliveries.push_back({a->delivery, a->t, Track{}});
      } else if (a->kind == AnnotationKind::kScore) {
        auto& b = batting[a->batter];
        b.player_id = a->batter;
        b.runs += a->runs;
        b.balls_faced += 1;
      }
    } else if (const auto* s = std::get_if<SensorSample>(&rec)) {
      if (s->kind == SensorKind::kPlayer) {
        auto [it, _] = players.try_emplace(s->sensor_id, s->sensor_id);
        if (it->second.empty() || s->t > it->second.back().t) it->second.ingest(*s);
      } else if (s->kind == SensorKind::kBall) {
        if (deliveries.empty()) deliveries.push_back({0, s->t, Track{}});
        auto& ball = deliveries.back().ball;
        if (ball.empty()) ball = Track(s->sensor_id);
        if (ball.sensor_id() == s->sensor_id && (ball.empty() || s->t > ball.back().t)) {
          ball.ingest(*s);
        }
      }
    }
  }

  DataTarget target(o.out_path, out, err);
  std::unique_ptr<std::ofstream> file;
  std::ostream* data = nullptr;
  if (target.is_stdout()) {
    data = &target.data();
  } else {
    file = std::make_unique<std::ofstream>(o.out_path, std::ios::binary | std::ios::trunc);
    if (!*file) throw Error(Errc::kIoFailure, "cannot open " + o.out_path + " for writing", o.out_path);
    data = file.get();
  }
  auto& rep = target.report();
  rep << std::fixed << std::setprecision(2);

  rep << "delivery  speed_kmh  strike_power_mps\n";
  for (const auto& d : deliveries) {
    if (d.ball.size() < 4) continue;
    try {
      Track flight(d.ball.sensor_id());
      const auto contact = find_contact(d.ball);
      const std::size_t keep = contact ? *contact : d.ball.size();
      for (std::size_t i = 0; i < keep; ++i) flight.ingest(d.ball.samples()[i]);
      const auto windows = bounce_split(flight, layout.ball_radius);
      const double speed = ball_speed(d.ball, windows.front().t_start, windows.front().t_end);
      std::string line = "{\"kind\":\"ball_speed\",\"delivery\":" + std::to_string(d.delivery);
      append_report_number(line, "t", d.t);
      append_report_number(line, "speed_mps", speed);
      append_report_number(line, "speed_kmh", speed * kMetersPerSecondToKmh);
      line += "}";
      *data << line << '\n';
      rep << std::setw(8) << d.delivery << "  " << std::setw(9) << speed * kMetersPerSecondToKmh;
      if (contact) {
        const double bat_t = d.ball.samples()[*contact].t;
        const double power = strike_power(d.ball, bat_t);
        std::string p = "{\"kind\":\"strike_power\",\"delivery\":" + std::to_string(d.delivery);
        append_report_number(p, "t", bat_t);
        append_report_number(p, "power_mps", power);
        p += "}";
        *data << p << '\n';
        rep << "  " << std::setw(16) << power;
      }
      rep << '\n';
    } catch (const Error& e) {
      err << o.log_path << ": delivery " << d.delivery << ": " << e.what() << '\n';
    }
  }

  rep << "batter  runs  balls  strike_rate\n";
  for (const auto& [id, b] : batting) {
    std::string line = "{\"kind\":\"strike_rate\",\"batter\":";
    detail::append_json_string(line, id);
    line += ",\"runs\":" + std::to_string(b.runs) + ",\"balls\":" + std::to_string(b.balls_faced);
    append_report_number(line, "rate", strike_rate(b));
    line += "}";
    *data << line << '\n';
    rep << id << "  " << b.runs << "  " << b.balls_faced << "  " << strike_rate(b) << '\n';
  }

  std::vector<Track> tracks;
  for (auto& [_, tr] : players) tracks.push_back(tr);
  rep << "player  distance_m  cells\n";
  for (const auto& pc : fielder_coverage(tracks, o.cell_size)) {
    std::string line = "{\"kind\":\"coverage\",\"id\":";
    detail::append_json_string(line, pc.player_id);
    append_report_number(line, "distance", pc.distance_covered);
    append_report_number(line, "cell_size", pc.grid.cell_size());
    line += ",\"cells\":[";
    bool first = true;
    for (const auto& [key, seconds] : pc.grid.cells()) {
      if (!first) line += ',';
      first = false;
      line += "[" + std::to_string(key.first) + "," + std::to_string(key.second) + ",";
      config::append_double(line, seconds);
      line += "]";
    }
    line += "]}";
    *data << line << '\n';
    rep << pc.player_id << "  " << pc.distance_covered << "  " << pc.grid.cells().size() << '\n';
  }
  data->flush();
  if (!*data) throw Error(Errc::kIoFailure, "cannot write " + o.out_path, o.out_path);
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cricket ground decision support: simulate, decide, replay, analyze", "aware_ground"};
  app.require_subcommand(1, 1);
  Options o;

  const auto add_layout = [&](CLI::App* c) {
    c->add_option("--layout", o.layout_path, "Ground layout file (default: built-in ground)");
  };
  const auto add_out = [&](CLI::App* c, const char* what) {
    c->add_option("--out", o.out_path, std::string(what) + " path, or - for standard output");
  };
  const auto add_rule = [&](CLI::App* c) {
    c->add_option("--rule-max-outside", o.rule_max_outside,
                  "Most fielders allowed outside the ring while the restriction applies");
    c->add_option("--rule-overs", o.rule_overs, "Overs a-b during which the restriction applies");
  };
  const auto add_log = [&](CLI::App* c) {
    c->add_option("--log", o.log_path, "Match log (NDJSON)")->required();
  };

  auto* sim = app.add_subcommand("simulate", "Write a sample log from one or more scenarios");
  sim->add_option("--scenario", o.scenario_paths, "Scenario file; repeat for several deliveries")
      ->required();
  sim->add_option("--seed", o.seed, "Noise seed (default 0)");
  sim->add_option("--noise", o.noise, "Sensor noise standard deviation, meters (default 0)")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--repeat", o.repeat, "Simulate the scenario list this many times (default 1)")
      ->check(CLI::PositiveNumber);
  add_layout(sim);
  add_out(sim, "Output log");
  add_rule(sim);

  auto* decide = app.add_subcommand("decide", "Run the decision pipeline over a sample log");
  add_log(decide);
  add_layout(decide);
  add_out(decide, "Decided log");
  add_rule(decide);

  auto* rep = app.add_subcommand("replay", "Recompute every decision in a log and compare");
  add_log(rep);
  add_layout(rep);
  rep->add_option("--out", o.out_path, "Write the regenerated log to this path, or - for standard output");

  auto* an = app.add_subcommand("analyze", "Ball speed, strike rate, strike power, fielding coverage");
  add_log(an);
  add_layout(an);
  add_out(an, "Report (NDJSON)");
  an->add_option("--cell-size", o.cell_size, "Coverage grid cell size, meters (default 2)")
      ->check(CLI::Range(0.5, 10.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (rep->parsed() && rep->count("--out") == 0) o.out_path.clear();

  try {
    if (sim->parsed()) return cmd_simulate(o, out, err);
    if (decide->parsed()) return cmd_decide(o, out, err);
    if (rep->parsed()) return cmd_replay(o, out, err);
    return cmd_analyze(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace aware_ground::cli
