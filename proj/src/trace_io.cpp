// SPDX-License-Identifier: Apache-2.0
#include "deba/trace_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "deba/error.hpp"

namespace deba {
namespace {

struct Field {
  std::string_view text;
  std::size_t column = 0;  // 1-based
};

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<Field> split(std::string_view line, char sep) {
  std::vector<Field> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(sep, start);
    const std::string_view raw =
        line.substr(start, end == std::string_view::npos ? end : end - start);
    std::size_t lead = 0;
    while (lead < raw.size() && (raw[lead] == ' ' || raw[lead] == '\t')) ++lead;
    fields.push_back({trim(raw), start + lead + 1});
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return fields;
}

bool is_blank_or_comment(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

/// Line reader that tracks 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  /// Next line that is neither blank nor a comment.
  bool next_content(std::string& line) {
    while (next(line)) {
      if (!is_blank_or_comment(line)) return true;
    }
    return false;
  }

  std::size_t number() const { return number_; }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

std::int64_t parse_int_field(const Field& f, std::size_t line, Errc code,
                             std::string_view what) {
  std::int64_t value = 0;
  const char* first = f.text.data();
  const char* last = first + f.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (f.text.empty() || ec != std::errc() || ptr != last) {
    throw ParseError(code, line, f.column,
                     "expected integer " + std::string(what) + ", got '" +
                         std::string(f.text) + "'");
  }
  return value;
}

double parse_real_field(const Field& f, std::size_t line, Errc code,
                        std::string_view what) {
  const auto value = parse_real(f.text);
  if (!value) {
    throw ParseError(code, line, f.column,
                     "expected real " + std::string(what) + ", got '" +
                         std::string(f.text) + "'");
  }
  return *value;
}

void parse_magic(LineReader& reader, std::string_view magic) {
  std::string line;
  if (!reader.next_content(line)) {
    throw ParseError(Errc::ParseError, reader.number() + 1, 0,
                     "missing '" + std::string(magic) + "' header");
  }
  const std::string_view text = trim(line);
  const std::string prefix = std::string(magic) + " v";
  if (text.substr(0, prefix.size()) != prefix) {
    throw ParseError(Errc::ParseError, reader.number(), 1,
                     "expected '" + std::string(magic) + " v" +
                         std::to_string(kFormatVersion) + "' header");
  }
  const Field version{text.substr(prefix.size()), prefix.size() + 1};
  const std::int64_t v =
      parse_int_field(version, reader.number(), Errc::ParseError, "version");
  if (v != kFormatVersion) {
    throw ParseError(Errc::UnknownVersion, reader.number(), version.column,
                     "unsupported format version " + std::to_string(v));
  }
}

void put_le_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (std::size_t i = 0; i < 8; ++i) {
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  }
  out.write(bytes.data(), bytes.size());
}

bool get_le_u64(std::istream& in, std::uint64_t& v) {
  std::array<unsigned char, 8> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) return false;
  v = 0;
  for (std::size_t i = 0; i < 8; ++i) v |= std::uint64_t{bytes[i]} << (8 * i);
  return true;
}

void read_sidecar(const std::filesystem::path& path,
                  std::vector<EpochRecord>& records) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open sidecar " + path.string());
  for (EpochRecord& r : records) {
    std::uint64_t n = 0;
    if (!get_le_u64(in, n)) {
      throw Error(Errc::ParseError, "sidecar " + path.string() +
                                        " ends before epoch " +
                                        std::to_string(r.epoch));
    }
    RawGradient grad;
    grad.values.resize(static_cast<std::size_t>(n));
    for (double& g : grad.values) {
      std::uint64_t bits = 0;
      if (!get_le_u64(in, bits)) {
        throw Error(Errc::ParseError, "sidecar " + path.string() +
                                          " truncated in epoch " +
                                          std::to_string(r.epoch));
      }
      g = std::bit_cast<double>(bits);
    }
    r.grad_stats = std::move(grad);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(Errc::ParseError,
                "sidecar " + path.string() + " has data beyond the last epoch");
  }
}

std::string_view bool_name(bool b) { return b ? "true" : "false"; }

bool parse_bool_field(const Field& f, std::size_t line) {
  if (f.text == "true") return true;
  if (f.text == "false") return false;
  throw ParseError(Errc::ParseError, line, f.column,
                   "expected true or false, got '" + std::string(f.text) + "'");
}

}  // namespace

std::string format_real(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return {buf.data(), ptr};
}

std::optional<double> parse_real(std::string_view text) noexcept {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

Trace parse_trace(std::istream& in, const std::filesystem::path& sidecar_dir) {
  LineReader reader(in);
  parse_magic(reader, kTraceMagic);

  Trace trace;
  bool have_stats = false;
  std::string line;
  std::string_view expected_columns;
  while (true) {
    if (!reader.next_content(line)) {
      throw ParseError(Errc::ParseError, reader.number() + 1, 0,
                       "missing column line");
    }
    const std::string_view text = trim(line);
    if (text.substr(0, 5) == "epoch") {
      if (!have_stats) {
        throw ParseError(Errc::MissingKey, reader.number(), 0,
                         "header lacks the 'stats' key");
      }
      if (trace.header.stats == StatsConvention::Precomputed) {
        expected_columns = kPrecomputedColumns;
      } else {
        expected_columns =
            trace.header.sidecar ? kRawSidecarColumns : kRawInlineColumns;
      }
      if (text != expected_columns) {
        throw ParseError(Errc::ParseError, reader.number(), 1,
                         "expected columns '" + std::string(expected_columns) +
                             "'");
      }
      break;
    }
    const std::size_t colon = text.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError(Errc::ParseError, reader.number(), 1,
                       "expected 'key: value' header line");
    }
    const std::string_view key = trim(text.substr(0, colon));
    const Field value{trim(text.substr(colon + 1)), colon + 2};
    if (key == "producer") {
      trace.header.producer = std::string(value.text);
    } else if (key == "stats") {
      if (value.text == "precomputed") {
        trace.header.stats = StatsConvention::Precomputed;
      } else if (value.text == "raw") {
        trace.header.stats = StatsConvention::Raw;
      } else {
        throw ParseError(Errc::InvalidValue, reader.number(), value.column,
                         "stats must be 'precomputed' or 'raw'");
      }
      have_stats = true;
    } else if (key == "initial_batch") {
      trace.header.initial_batch = parse_int_field(
          value, reader.number(), Errc::InvalidValue, "initial_batch");
    } else if (key == "sidecar") {
      trace.header.sidecar = std::string(value.text);
    } else {
      throw ParseError(Errc::UnknownKey, reader.number(), 1,
                       "unknown header key '" + std::string(key) + "'");
    }
  }
  if (trace.header.sidecar && trace.header.stats != StatsConvention::Raw) {
    throw ParseError(Errc::InvalidValue, reader.number(), 0,
                     "sidecar requires stats: raw");
  }

  const std::size_t n_fields = split(expected_columns, ',').size();
  while (reader.next_content(line)) {
    const std::size_t ln = reader.number();
    const auto fields = split(line, ',');
    if (fields.size() != n_fields) {
      throw ParseError(Errc::ParseError, ln, 0,
                       "expected " + std::to_string(n_fields) + " fields, got " +
                           std::to_string(fields.size()));
    }
    EpochRecord r;
    r.epoch = parse_int_field(fields[0], ln, Errc::ParseError, "epoch");
    const std::int64_t expected = static_cast<std::int64_t>(trace.records.size());
    if (r.epoch != expected) {
      throw ParseError(Errc::NonContiguousEpochs, ln, fields[0].column,
                       "expected epoch " + std::to_string(expected) + ", got " +
                           std::to_string(r.epoch));
    }
    const std::string epoch_tag = "epoch " + std::to_string(r.epoch) + ": ";
    r.loss = parse_real_field(fields[1], ln, Errc::ParseError, "loss");
    if (!std::isfinite(r.loss)) {
      throw ParseError(Errc::NonFiniteValue, ln, fields[1].column,
                       epoch_tag + "loss is not finite");
    }
    if (trace.header.stats == StatsConvention::Precomputed) {
      PrecomputedStats s;
      s.grad_norm = parse_real_field(fields[2], ln, Errc::ParseError, "grad_norm");
      s.grad_variance =
          parse_real_field(fields[3], ln, Errc::ParseError, "grad_variance");
      for (const auto& [v, f] : {std::pair{s.grad_norm, fields[2]},
                                 std::pair{s.grad_variance, fields[3]}}) {
        if (!std::isfinite(v)) {
          throw ParseError(Errc::NonFiniteValue, ln, f.column,
                           epoch_tag + "gradient statistic is not finite");
        }
        if (v < 0.0) {
          throw ParseError(Errc::InvalidValue, ln, f.column,
                           epoch_tag + "gradient statistic is negative");
        }
      }
      r.grad_stats = s;
    } else if (!trace.header.sidecar) {
      RawGradient grad;
      std::string_view rest = fields[2].text;
      std::size_t col = fields[2].column;
      while (!rest.empty()) {
        const std::size_t sp = rest.find(' ');
        const Field comp{rest.substr(0, sp), col};
        if (!comp.text.empty()) {
          const double g = parse_real_field(comp, ln, Errc::ParseError, "gradient");
          if (!std::isfinite(g)) {
            throw ParseError(Errc::NonFiniteValue, ln, comp.column,
                             epoch_tag + "gradient component is not finite");
          }
          grad.values.push_back(g);
        }
        if (sp == std::string_view::npos) break;
        rest.remove_prefix(sp + 1);
        col += sp + 1;
      }
      if (grad.values.size() < 2) {
        throw ParseError(Errc::DegenerateGradient, ln, fields[2].column,
                         epoch_tag + "gradient needs at least 2 components");
      }
      r.grad_stats = std::move(grad);
    }
    trace.records.push_back(std::move(r));
  }

  if (trace.header.sidecar) {
    std::filesystem::path p(*trace.header.sidecar);
    if (p.is_relative()) p = sidecar_dir / p;
    read_sidecar(p, trace.records);
    for (const EpochRecord& r : trace.records) {
      const auto& g = std::get<RawGradient>(r.grad_stats).values;
      const std::string epoch_tag = "epoch " + std::to_string(r.epoch) + ": ";
      if (g.size() < 2) {
        throw Error(Errc::DegenerateGradient,
                    epoch_tag + "gradient needs at least 2 components");
      }
      for (double v : g) {
        if (!std::isfinite(v)) {
          throw Error(Errc::NonFiniteValue,
                      epoch_tag + "gradient component is not finite");
        }
      }
    }
  }
  return trace;
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open trace " + path.string());
  return parse_trace(in, path.parent_path());
}

void write_sidecar(std::span<const EpochRecord> records,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write sidecar " + path.string());
  for (const EpochRecord& r : records) {
    const auto* raw = std::get_if<RawGradient>(&r.grad_stats);
    if (!raw) {
      throw Error(Errc::InvalidValue,
                  "epoch " + std::to_string(r.epoch) + " has no raw gradient");
    }
    put_le_u64(out, raw->values.size());
    for (double g : raw->values) put_le_u64(out, std::bit_cast<std::uint64_t>(g));
  }
  if (!out) throw Error(Errc::IoError, "failed writing sidecar " + path.string());
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ostringstream out;
  const TraceHeader& h = trace.header;
  out << kTraceMagic << " v" << kFormatVersion << '\n';
  if (!h.producer.empty()) out << "producer: " << h.producer << '\n';
  const bool raw = h.stats == StatsConvention::Raw;
  out << "stats: " << (raw ? "raw" : "precomputed") << '\n';
  if (h.initial_batch) out << "initial_batch: " << *h.initial_batch << '\n';
  if (raw && h.sidecar) out << "sidecar: " << *h.sidecar << '\n';

  if (!raw) {
    out << kPrecomputedColumns << '\n';
  } else {
    out << (h.sidecar ? kRawSidecarColumns : kRawInlineColumns) << '\n';
  }
  for (const EpochRecord& r : trace.records) {
    out << r.epoch << ',' << format_real(r.loss);
    if (!raw) {
      const auto* s = std::get_if<PrecomputedStats>(&r.grad_stats);
      if (!s) {
        throw Error(Errc::InvalidValue, "epoch " + std::to_string(r.epoch) +
                                            " lacks precomputed stats");
      }
      out << ',' << format_real(s->grad_norm) << ','
          << format_real(s->grad_variance);
    } else if (!h.sidecar) {
      const auto* g = std::get_if<RawGradient>(&r.grad_stats);
      if (!g) {
        throw Error(Errc::InvalidValue,
                    "epoch " + std::to_string(r.epoch) + " lacks a raw gradient");
      }
      out << ',';
      for (std::size_t i = 0; i < g->values.size(); ++i) {
        if (i) out << ' ';
        out << format_real(g->values[i]);
      }
    }
    out << '\n';
  }
  write_text_file(path, out.str());
  if (raw && h.sidecar) {
    std::filesystem::path p(*h.sidecar);
    if (p.is_relative()) p = path.parent_path() / p;
    write_sidecar(trace.records, p);
  }
}

std::string format_decision_log(const DecisionLog& log) {
  std::ostringstream out;
  out << kDecisionLogMagic << " v" << kFormatVersion << '\n'
      << kDecisionLogColumns << '\n';
  for (const StepOutcome& o : log) {
    const SignalFrame& f = o.frame;
    out << f.epoch << ',' << format_real(f.grad_variance) << ','
        << format_real(f.grad_norm) << ',' << format_real(f.grad_norm_variation)
        << ',' << format_real(f.loss_variation) << ','
        << format_real(f.confidence) << ',' << bool_name(f.stable_gradients)
        << ',' << bool_name(f.stable_loss) << ','
        << action_name(o.decision.action) << ','
        << reason_name(o.decision.reason) << ',' << o.batch_before << ','
        << o.batch_after << '\n';
  }
  return out.str();
}

DecisionLog parse_decision_log(std::istream& in) {
  LineReader reader(in);
  parse_magic(reader, kDecisionLogMagic);
  std::string line;
  if (!reader.next_content(line) || trim(line) != kDecisionLogColumns) {
    throw ParseError(Errc::ParseError, reader.number(), 1,
                     "expected decision-log column line");
  }
  const std::size_t n_fields = split(kDecisionLogColumns, ',').size();
  DecisionLog log;
  while (reader.next_content(line)) {
    const std::size_t ln = reader.number();
    const auto fields = split(line, ',');
    if (fields.size() != n_fields) {
      throw ParseError(Errc::ParseError, ln, 0,
                       "expected " + std::to_string(n_fields) + " fields, got " +
                           std::to_string(fields.size()));
    }
    StepOutcome o;
    SignalFrame& f = o.frame;
    f.epoch = parse_int_field(fields[0], ln, Errc::ParseError, "epoch");
    f.grad_variance = parse_real_field(fields[1], ln, Errc::ParseError, "grad_variance");
    f.grad_norm = parse_real_field(fields[2], ln, Errc::ParseError, "grad_norm");
    f.grad_norm_variation =
        parse_real_field(fields[3], ln, Errc::ParseError, "grad_norm_variation");
    f.loss_variation =
        parse_real_field(fields[4], ln, Errc::ParseError, "loss_variation");
    f.confidence = parse_real_field(fields[5], ln, Errc::ParseError, "confidence");
    f.stable_gradients = parse_bool_field(fields[6], ln);
    f.stable_loss = parse_bool_field(fields[7], ln);
    const auto action = parse_action(fields[8].text);
    if (!action) {
      throw ParseError(Errc::ParseError, ln, fields[8].column,
                       "unknown decision '" + std::string(fields[8].text) + "'");
    }
    const auto reason = parse_reason(fields[9].text);
    if (!reason) {
      throw ParseError(Errc::ParseError, ln, fields[9].column,
                       "unknown reason '" + std::string(fields[9].text) + "'");
    }
    o.decision = {*action, *reason};
    if (!consistent(o.decision)) {
      throw ParseError(Errc::InvalidValue, ln, fields[9].column,
                       "reason does not match decision");
    }
    o.batch_before = parse_int_field(fields[10], ln, Errc::ParseError, "batch_before");
    o.batch_after = parse_int_field(fields[11], ln, Errc::ParseError, "batch_after");
    if (!log.empty() && f.epoch <= log.back().frame.epoch) {
      throw ParseError(Errc::NonContiguousEpochs, ln, fields[0].column,
                       "epochs must be strictly increasing");
    }
    log.push_back(o);
  }
  return log;
}

void write_decision_log(const DecisionLog& log,
                        const std::filesystem::path& path) {
  write_text_file(path, format_decision_log(log));
}

DecisionLog read_decision_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open decision log " + path.string());
  return parse_decision_log(in);
}

std::string format_config(const SchedulerConfig& c,
                          std::span<const std::string> comments) {
  std::ostringstream out;
  for (const std::string& line : comments) out << "# " << line << '\n';
  out << "theta_stab = " << format_real(c.theta_stab) << '\n'
      << "theta_conf = " << format_real(c.theta_conf) << '\n'
      << "alpha_grow = " << format_real(c.alpha_grow) << '\n'
      << "alpha_roll = " << format_real(c.alpha_roll) << '\n'
      << "b_min = " << c.b_min << '\n'
      << "b_max = " << c.b_max << '\n'
      << "cooldown_epochs = " << c.cooldown_epochs << '\n'
      << "window_len = " << c.window_len << '\n'
      << "stats_mode = " << stats_mode_name(c.stats_mode) << '\n'
      << "epsilon = " << format_real(c.epsilon) << '\n';
  return out.str();
}

SchedulerConfig parse_config(std::istream& in) {
  LineReader reader(in);
  SchedulerConfig c;
  std::map<ConfigField, std::size_t> field_line;
  std::map<std::string, std::size_t, std::less<>> seen;
  std::string line;
  while (reader.next_content(line)) {
    const std::size_t ln = reader.number();
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(Errc::ParseError, ln, 1, "expected 'key = value'");
    }
    const std::string key(trim(std::string_view(line).substr(0, eq)));
    std::size_t vcol = eq + 2;
    while (vcol <= line.size() && (line[vcol - 1] == ' ' || line[vcol - 1] == '\t')) ++vcol;
    const Field value{trim(std::string_view(line).substr(eq + 1)), vcol};
    if (seen.count(key)) {
      throw ParseError(Errc::ParseError, ln, 1, "duplicate key '" + key + "'");
    }
    seen.emplace(key, ln);

    const auto real = [&](double& dst, ConfigField field) {
      dst = parse_real_field(value, ln, Errc::InvalidValue, key);
      field_line[field] = ln;
    };
    const auto integer = [&](std::int64_t& dst, ConfigField field) {
      dst = parse_int_field(value, ln, Errc::InvalidValue, key);
      field_line[field] = ln;
    };
    if (key == "theta_stab") real(c.theta_stab, ConfigField::ThetaStab);
    else if (key == "theta_conf") real(c.theta_conf, ConfigField::ThetaConf);
    else if (key == "alpha_grow") real(c.alpha_grow, ConfigField::AlphaGrow);
    else if (key == "alpha_roll") real(c.alpha_roll, ConfigField::AlphaRoll);
    else if (key == "b_min") integer(c.b_min, ConfigField::BatchMin);
    else if (key == "b_max") integer(c.b_max, ConfigField::BatchMax);
    else if (key == "cooldown_epochs") integer(c.cooldown_epochs, ConfigField::CooldownEpochs);
    else if (key == "window_len") integer(c.window_len, ConfigField::WindowLen);
    else if (key == "epsilon") real(c.epsilon, ConfigField::Epsilon);
    else if (key == "stats_mode") {
      const auto mode = parse_stats_mode(value.text);
      if (!mode) {
        throw ParseError(Errc::InvalidValue, ln, value.column,
                         "stats_mode must be sliding_window or full_history");
      }
      c.stats_mode = *mode;
    } else {
      throw ParseError(Errc::UnknownKey, ln, 1, "unknown key '" + key + "'");
    }
  }

  try {
    validate(c);
  } catch (const ConfigError& e) {
    std::size_t ln = 0;
    if (auto it = field_line.find(e.field()); it != field_line.end()) {
      ln = it->second;
    } else if (e.field() == ConfigField::BatchBounds) {
      for (ConfigField f : {ConfigField::BatchMax, ConfigField::BatchMin}) {
        if (auto jt = field_line.find(f); jt != field_line.end()) ln = std::max(ln, jt->second);
      }
    }
    throw ParseError(Errc::InvalidValue, ln, 0, e.what());
  }
  return c;
}

void write_config(const SchedulerConfig& config,
                  const std::filesystem::path& path,
                  std::span<const std::string> comments) {
  write_text_file(path, format_config(config, comments));
}

SchedulerConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open config " + path.string());
  return parse_config(in);
}

namespace {

using nlohmann::json;

json window_to_json(const WindowStats& w) {
  json j;
  j["capacity"] = w.capacity() ? json(*w.capacity()) : json(nullptr);
  j["values"] = w.to_vector();
  return j;
}

WindowStats window_from_json(const json& j) {
  WindowStats w(j.at("capacity").is_null()
                    ? std::nullopt
                    : std::optional<std::size_t>(j.at("capacity").get<std::size_t>()));
  for (double v : j.at("values").get<std::vector<double>>()) w.push(v);
  return w;
}

template <typename T>
json optional_to_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

}  // namespace

std::string serialize_state(const SchedulerState& s) {
  json j;
  j["format"] = "deba-state";
  j["version"] = kFormatVersion;
  j["current_batch"] = s.current_batch;
  j["epoch"] = s.epoch;
  j["last_adaptation_epoch"] = optional_to_json(s.last_adaptation_epoch);
  j["variance_window"] = window_to_json(s.variance_window);
  j["norm_var_window"] = window_to_json(s.norm_var_window);
  j["loss_var_window"] = window_to_json(s.loss_var_window);
  j["prev_loss"] = optional_to_json(s.prev_loss);
  j["prev_grad_norm"] = optional_to_json(s.prev_grad_norm);
  // The log reuses the decision-log text so checkpoints stay diffable.
  j["decision_log"] = format_decision_log(s.decision_log);
  return j.dump(1) + "\n";
}

SchedulerState deserialize_state(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "deba-state") {
      throw Error(Errc::ParseError, "not a scheduler state checkpoint");
    }
    if (j.at("version") != kFormatVersion) {
      throw Error(Errc::UnknownVersion, "unsupported state checkpoint version");
    }
    SchedulerState s;
    s.current_batch = j.at("current_batch").get<std::int64_t>();
    s.epoch = j.at("epoch").get<std::int64_t>();
    s.last_adaptation_epoch =
        optional_from_json<std::int64_t>(j.at("last_adaptation_epoch"));
    s.variance_window = window_from_json(j.at("variance_window"));
    s.norm_var_window = window_from_json(j.at("norm_var_window"));
    s.loss_var_window = window_from_json(j.at("loss_var_window"));
    s.prev_loss = optional_from_json<double>(j.at("prev_loss"));
    s.prev_grad_norm = optional_from_json<double>(j.at("prev_grad_norm"));
    std::istringstream log(j.at("decision_log").get<std::string>());
    s.decision_log = parse_decision_log(log);
    return s;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("state checkpoint: ") + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw Error(Errc::IoError, "failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace deba
