#include "gaitkit/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

#include "gaitkit/error.hpp"
#include "gaitkit/textio.hpp"

namespace gaitkit {

using Json = nlohmann::ordered_json;

std::string format_fixed4(double value) {
  if (!std::isfinite(value)) throw Error(ErrorKind::NonFinite, "format_fixed4: non-finite value");
  std::array<char, 400> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed);
  std::string_view text(buf.data(), static_cast<std::size_t>(res.ptr - buf.data()));

  bool negative = false;
  if (!text.empty() && text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  const auto dot = text.find('.');
  std::string digits(text.substr(0, dot));
  const std::string_view frac = dot == std::string_view::npos ? "" : text.substr(dot + 1);
  digits += frac.substr(0, std::min<std::size_t>(4, frac.size()));
  digits.append(4 - std::min<std::size_t>(4, frac.size()), '0');

  bool round_up = false;
  if (frac.size() > 4) {
    const std::string_view rest = frac.substr(4);
    if (rest.front() > '5') {
      round_up = true;
    } else if (rest.front() == '5') {
      const bool beyond = rest.find_first_not_of('0', 1) != std::string_view::npos;
      round_up = beyond || ((digits.back() - '0') % 2 == 1);
    }
  }
  if (round_up) {
    std::size_t i = digits.size();
    while (i > 0) {
      --i;
      if (digits[i] == '9') {
        digits[i] = '0';
      } else {
        ++digits[i];
        break;
      }
      if (i == 0) digits.insert(digits.begin(), '1');
    }
  }
  const std::size_t split_at = digits.size() - 4;
  std::string out = digits.substr(0, split_at) + "." + digits.substr(split_at);
  if (negative && out.find_first_not_of("0.") != std::string::npos) out.insert(out.begin(), '-');
  return out;
}

bool shoe_label_less(std::string_view a, std::string_view b) {
  auto parts = [](std::string_view s) {
    std::size_t i = s.size();
    while (i > 0 && s[i - 1] >= '0' && s[i - 1] <= '9') --i;
    const std::string_view num = s.substr(i);
    std::uint64_t n = 0;
    std::from_chars(num.data(), num.data() + num.size(), n);
    return std::tuple(s.substr(0, i), num.empty() ? 0 : 1, n, s);
  };
  return parts(a) < parts(b);
}

std::vector<ShoeGroup> shoe_groups() {
  const ShoeClusters c = cluster_shoes(reference_shoes());
  std::vector<ShoeGroup> groups{{"walking_height", c.walking_height},
                                {"platform", c.platform},
                                {"overall_height", c.overall_height}};
  for (ShoeGroup& g : groups) std::sort(g.labels.begin(), g.labels.end(), shoe_label_less);
  return groups;
}

MetricsRow metrics_row(const SessionResult& r) {
  MetricsRow row;
  row.candidate_id = r.candidate_id;
  row.shoe = r.shoe.label;
  row.platform_in = r.shoe.platform_height_in;
  row.heel_in = r.shoe.heel_height_in;
  if (r.from_fixture) {
    row.step_cycle_time_s = r.stored.step_cycle_time_s;
    row.mean_accel_mps2 = r.stored.mean_accel_mps2;
    row.accel_variance_mps2sq = r.stored.accel_variance_mps2sq;
    return row;
  }
  const SessionMetrics& m = r.metrics;
  row.n_cycles = m.n_cycles;
  row.step_cycle_time_s = m.mean_step_cycle_time_s;
  row.mean_accel_mps2 = m.mean_accel_magnitude_mps2;
  row.accel_variance_mps2sq = m.accel_variance_mps2sq;
  row.mean_accel_dynamic_mps2 = m.mean_dynamic_accel_mps2;
  row.accel_dynamic_variance_mps2sq = m.dynamic_accel_variance_mps2sq;
  return row;
}

namespace {

bool key_less(const std::string& ca, const std::string& sa, const std::string& cb,
              const std::string& sb) {
  if (ca != cb) return ca < cb;
  return shoe_label_less(sa, sb);
}

}  // namespace

void sort_rows(std::vector<MetricsRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    return key_less(a.candidate_id, a.shoe, b.candidate_id, b.shoe);
  });
}

void sort_results(std::vector<SessionResult>& results) {
  std::stable_sort(results.begin(), results.end(),
                   [](const SessionResult& a, const SessionResult& b) {
                     return key_less(a.candidate_id, a.shoe.label, b.candidate_id, b.shoe.label);
                   });
}

namespace {

std::string opt4(const std::optional<double>& v) { return v ? format_fixed4(*v) : ""; }

// Inches as written in shoe specs: shortest form, always with a decimal point.
std::string inches(double v) {
  std::string s = format_double(v);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

std::string format_metrics_csv(std::span<const MetricsRow> rows) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const MetricsRow& r : rows) {
    out += r.candidate_id + ',' + r.shoe + ',' + format_double(r.platform_in) + ',' +
           format_double(r.heel_in) + ',' + format_fixed4(r.heel_in - r.platform_in) + ',' +
           (r.n_cycles ? std::to_string(*r.n_cycles) : "") + ',' + opt4(r.step_cycle_time_s) +
           ',' + opt4(r.mean_accel_mps2) + ',' + opt4(r.accel_variance_mps2sq) + ',' +
           opt4(r.mean_accel_dynamic_mps2) + ',' + opt4(r.accel_dynamic_variance_mps2sq) + '\n';
  }
  return out;
}

std::vector<MetricsRow> parse_metrics_csv(std::string_view text, const std::string& source) {
  if (text.empty()) throw ParseError(ErrorKind::EmptyInput, source, 0, 0, "empty file");
  std::vector<MetricsRow> rows;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != kMetricsHeader) {
        throw ParseError(ErrorKind::MalformedLine, source, 1, 1, "unexpected header");
      }
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 11) {
      throw ParseError(ErrorKind::MalformedLine, source, line_no, 0,
                       "expected 11 fields, got " + std::to_string(f.size()));
    }
    std::size_t col = 1;
    std::vector<std::size_t> cols;
    for (std::string_view x : f) {
      cols.push_back(col);
      col += x.size() + 1;
    }
    auto number = [&](std::size_t i) -> double {
      const auto v = parse_double(f[i]);
      if (!v) throw ParseError(ErrorKind::MalformedLine, source, line_no, cols[i], "expected a number");
      return *v;
    };
    auto optional = [&](std::size_t i) -> std::optional<double> {
      if (f[i].empty()) return std::nullopt;
      return number(i);
    };
    MetricsRow r;
    r.candidate_id = std::string(f[0]);
    r.shoe = std::string(f[1]);
    if (r.candidate_id.empty() || r.shoe.empty()) {
      throw ParseError(ErrorKind::MalformedLine, source, line_no, 1, "candidate and shoe are required");
    }
    r.platform_in = number(2);
    r.heel_in = number(3);
    if (!f[5].empty()) {
      const auto n = parse_int(f[5]);
      if (!n || *n < 0) throw ParseError(ErrorKind::MalformedLine, source, line_no, cols[5], "expected a count");
      r.n_cycles = static_cast<std::size_t>(*n);
    }
    r.step_cycle_time_s = optional(6);
    r.mean_accel_mps2 = optional(7);
    r.accel_variance_mps2sq = optional(8);
    r.mean_accel_dynamic_mps2 = optional(9);
    r.accel_dynamic_variance_mps2sq = optional(10);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string format_table_text(std::span<const MetricsRow> rows, AccelBasis basis) {
  std::vector<std::string> candidates;
  std::vector<std::string> shoes;
  std::map<std::string, std::pair<double, double>> geometry;
  std::map<std::pair<std::string, std::string>, const MetricsRow*> cell;
  for (const MetricsRow& r : rows) {
    if (std::find(candidates.begin(), candidates.end(), r.candidate_id) == candidates.end()) {
      candidates.push_back(r.candidate_id);
    }
    if (!geometry.contains(r.shoe)) {
      shoes.push_back(r.shoe);
      geometry[r.shoe] = {r.platform_in, r.heel_in};
    }
    cell.emplace(std::pair(r.candidate_id, r.shoe), &r);
  }
  std::sort(candidates.begin(), candidates.end());
  std::sort(shoes.begin(), shoes.end(), shoe_label_less);

  struct Block {
    std::string title;
    std::optional<double> MetricsRow::*field;
  };
  const bool dynamic = basis == AccelBasis::Dynamic;
  const std::vector<Block> blocks{
      {"Step cycle time (s)", &MetricsRow::step_cycle_time_s},
      {dynamic ? "Mean dynamic acceleration (m/s^2)" : "Mean acceleration (m/s^2)",
       dynamic ? &MetricsRow::mean_accel_dynamic_mps2 : &MetricsRow::mean_accel_mps2},
      {dynamic ? "Variance of dynamic acceleration (m/s^2)^2" : "Variance of acceleration (m/s^2)^2",
       dynamic ? &MetricsRow::accel_dynamic_variance_mps2sq : &MetricsRow::accel_variance_mps2sq},
  };

  // grid[row][col]; first two rows are headers
  std::vector<std::vector<std::string>> grid(2 + shoes.size());
  grid[0] = {"Shoe", "Platform", "Heel"};
  grid[1] = {"", "(in)", "(in)"};
  for (std::size_t i = 0; i < shoes.size(); ++i) {
    const auto [platform, heel] = geometry[shoes[i]];
    grid[2 + i] = {shoes[i], inches(platform), inches(heel)};
  }
  for (const Block& b : blocks) {
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      grid[0].push_back(c == 0 ? b.title : "");
      grid[1].push_back(candidates[c]);
      for (std::size_t i = 0; i < shoes.size(); ++i) {
        const auto it = cell.find({candidates[c], shoes[i]});
        const std::optional<double> v =
            it == cell.end() ? std::nullopt : it->second->*(b.field);
        grid[2 + i].push_back(v ? format_fixed4(*v) : "-");
      }
    }
  }

  const std::size_t ncol = grid[1].size();
  const std::size_t per_block = candidates.size();
  std::vector<std::size_t> width(ncol, 0);
  for (std::size_t r = 1; r < grid.size(); ++r) {
    for (std::size_t c = 0; c < ncol; ++c) width[c] = std::max(width[c], grid[r][c].size());
  }
  for (std::size_t c = 0; c < 3; ++c) width[c] = std::max(width[c], grid[0][c].size());
  // A block title spans its candidate columns; spread any shortfall over them.
  for (std::size_t c = 3; per_block > 0 && c < ncol; c += per_block) {
    std::size_t span = 2 * (per_block - 1);
    for (std::size_t k = c; k < c + per_block; ++k) span += width[k];
    if (grid[0][c].size() <= span) continue;
    const std::size_t extra = grid[0][c].size() - span;
    for (std::size_t k = 0; k < per_block; ++k) {
      width[c + k] += extra / per_block + (k < extra % per_block ? 1 : 0);
    }
  }
  auto is_block_start = [&](std::size_t c) { return c >= 3 && per_block > 0 && (c - 3) % per_block == 0; };

  std::string out;
  {
    std::string line;
    std::size_t c = 0;
    while (c < ncol) {
      if (c > 0) line += is_block_start(c) ? " | " : "  ";
      if (is_block_start(c)) {
        std::size_t span = 0;
        for (std::size_t k = c; k < c + per_block; ++k) span += width[k] + (k > c ? 2 : 0);
        std::string title = grid[0][c];
        if (title.size() < span) title.append(span - title.size(), ' ');
        line += title;
        c += per_block;
      } else {
        std::string t = grid[0][c];
        t.append(width[c] - t.size(), ' ');
        line += t;
        ++c;
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  }
  for (std::size_t r = 1; r < grid.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < ncol; ++c) {
      if (c > 0) line += is_block_start(c) ? " | " : "  ";
      const std::string& v = grid[r][c];
      const std::string pad(width[c] - v.size(), ' ');
      line += c == 0 ? v + pad : pad + v;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
    if (r == 1) out += std::string(out.find('\n'), '-') + '\n';
  }
  return out;
}

namespace {

Json stats_json(const BoxStats& b) {
  Json j;
  j["median"] = b.median;
  j["q1"] = b.q1;
  j["q3"] = b.q3;
  j["whisker_low"] = b.whisker_low;
  j["whisker_high"] = b.whisker_high;
  j["outliers"] = b.outliers;
  j["n"] = b.n;
  return j;
}

BoxStats stats_from_json(const Json& j) {
  BoxStats b;
  b.median = j.at("median").get<double>();
  b.q1 = j.at("q1").get<double>();
  b.q3 = j.at("q3").get<double>();
  b.whisker_low = j.at("whisker_low").get<double>();
  b.whisker_high = j.at("whisker_high").get<double>();
  b.outliers = j.at("outliers").get<std::vector<double>>();
  b.n = j.at("n").get<std::size_t>();
  return b;
}

std::map<JointKey, std::vector<double>> cycle_ranges(const SessionResult& r) {
  std::map<JointKey, std::vector<double>> out;
  for (const GaitCycle& c : r.cycles) {
    for (const auto& [key, range] : c.range_deg) out[key].push_back(range);
  }
  return out;
}

Json boxstats_tree(std::span<const SessionResult> results) {
  Json root;
  root["format"] = "gaitkit-boxstats/1";
  const std::vector<ShoeGroup> groups = shoe_groups();
  Json jg = Json::array();
  for (const ShoeGroup& g : groups) jg.push_back({{"name", g.name}, {"shoes", g.labels}});
  root["groups"] = jg;

  Json sessions = Json::array();
  // candidate -> joint -> shoe -> pooled ranges
  std::map<std::string, std::map<JointKey, std::map<std::string, std::vector<double>>>> pooled;
  for (const SessionResult& r : results) {
    Json s;
    s["candidate"] = r.candidate_id;
    s["shoe"] = r.shoe.label;
    s["n_cycles"] = r.cycles.size();
    Json joints = Json::object();
    for (const auto& [key, ranges] : cycle_ranges(r)) {
      Json j = stats_json(box_stats(ranges));
      j["ranges"] = ranges;
      joints[key.name()] = j;
      auto& dst = pooled[r.candidate_id][key][r.shoe.label];
      dst.insert(dst.end(), ranges.begin(), ranges.end());
    }
    s["joints"] = joints;
    sessions.push_back(s);
  }
  root["sessions"] = sessions;

  Json panels = Json::array();
  for (const auto& [candidate, joints] : pooled) {
    for (const auto& [key, by_shoe] : joints) {
      for (const ShoeGroup& g : groups) {
        Json boxes = Json::array();
        Json missing = Json::array();
        for (const std::string& label : g.labels) {
          const auto it = by_shoe.find(label);
          if (it == by_shoe.end() || it->second.empty()) {
            missing.push_back(label);
            continue;
          }
          Json b = stats_json(box_stats(it->second));
          b["shoe"] = label;
          boxes.push_back(b);
        }
        if (boxes.empty()) continue;
        panels.push_back({{"candidate", candidate},
                          {"joint", key.name()},
                          {"group", g.name},
                          {"missing", missing},
                          {"boxes", boxes}});
      }
    }
  }
  root["panels"] = panels;
  return root;
}

std::string safe_name(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

std::string num2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct TraceKey {
  std::string candidate;
  std::string shoe;
  std::string joint;
  auto operator<=>(const TraceKey&) const = default;
};

using TraceSet = std::map<TraceKey, std::vector<std::vector<double>>>;

TraceSet parse_traces(std::string_view text, const std::string& source) {
  TraceSet out;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() < 6) throw ParseError(ErrorKind::MalformedLine, source, line_no, 0, "too few fields");
    std::vector<double> trace;
    for (std::size_t i = 4; i < f.size(); ++i) {
      const auto v = parse_double(f[i]);
      if (!v) throw ParseError(ErrorKind::MalformedLine, source, line_no, 0, "expected a number");
      trace.push_back(*v);
    }
    out[{std::string(f[0]), std::string(f[1]), std::string(f[2])}].push_back(std::move(trace));
  }
  return out;
}

PlotSummary render_plots(const Json& tree, const TraceSet& traces,
                         const std::filesystem::path& out_dir) {
  PlotSummary summary;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::set<std::pair<std::string, std::string>> candidate_joints;
  for (const Json& p : tree.at("panels")) {
    const std::string candidate = p.at("candidate").get<std::string>();
    const std::string joint = p.at("joint").get<std::string>();
    const std::string group = p.at("group").get<std::string>();
    seen.insert({candidate, joint, group});
    candidate_joints.insert({candidate, joint});
    std::vector<BoxPlotEntry> boxes;
    for (const Json& b : p.at("boxes")) boxes.push_back({b.at("shoe").get<std::string>(), stats_from_json(b)});
    std::sort(boxes.begin(), boxes.end(), [](const BoxPlotEntry& a, const BoxPlotEntry& b) {
      return shoe_label_less(a.label, b.label);
    });
    for (const Json& m : p.at("missing")) {
      summary.warnings.push_back("panel " + candidate + "/" + joint + "/" + group + ": no data for " +
                                 m.get<std::string>());
    }
    const auto path = out_dir / ("box_" + safe_name(candidate) + "_" + safe_name(joint) + "_" +
                                 safe_name(group) + ".svg");
    write_text_file(path, boxplot_svg(candidate + " " + joint + " (" + group + ")", boxes));
    summary.files.push_back(path);
  }
  for (const auto& [candidate, joint] : candidate_joints) {
    for (const Json& g : tree.at("groups")) {
      const std::string group = g.at("name").get<std::string>();
      if (!seen.contains({candidate, joint, group})) {
        summary.warnings.push_back("group " + group + " has no sessions for " + candidate + "/" + joint);
      }
    }
  }
  for (const auto& [key, set] : traces) {
    const auto path = out_dir / ("cycles_" + safe_name(key.candidate) + "_" + safe_name(key.shoe) +
                                 "_" + safe_name(key.joint) + ".svg");
    write_text_file(path, cycle_overlay_svg(key.candidate + " " + key.shoe + " " + key.joint, set));
    summary.files.push_back(path);
  }
  return summary;
}

}  // namespace

std::string format_boxstats_json(std::span<const SessionResult> results) {
  return boxstats_tree(results).dump(2) + '\n';
}

std::string format_cycles_csv(std::span<const SessionResult> results) {
  std::string out = "candidate,shoe,joint,cycle,start_index,end_index,duration_s,range_deg\n";
  for (const SessionResult& r : results) {
    std::map<JointKey, std::size_t> counter;
    std::vector<std::pair<JointKey, std::string>> lines;
    for (std::size_t i = 0; i < r.cycles.size(); ++i) {
      const GaitCycle& c = r.cycles[i];
      for (const auto& [key, range] : c.range_deg) {
        lines.emplace_back(key, r.candidate_id + ',' + r.shoe.label + ',' + key.name() + ',' +
                                    std::to_string(i) + ',' + std::to_string(c.start_index) + ',' +
                                    std::to_string(c.end_index) + ',' + format_double(c.duration_s) +
                                    ',' + format_double(range) + '\n');
      }
    }
    std::stable_sort(lines.begin(), lines.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [key, line] : lines) out += line;
  }
  return out;
}

std::string format_cycle_traces_csv(std::span<const SessionResult> results) {
  std::string out = "candidate,shoe,joint,cycle";
  for (int p = 0; p <= 100; ++p) out += ",p" + std::to_string(p);
  out += '\n';
  for (const SessionResult& r : results) {
    for (const JointAngleSeries& s : r.angles) {
      for (std::size_t i = 0; i < r.cycles.size(); ++i) {
        const GaitCycle& c = r.cycles[i];
        const auto trace = normalize_cycle(s.primary_deg, c.start_index, c.end_index, 101);
        out += r.candidate_id + ',' + r.shoe.label + ',' + s.key().name() + ',' + std::to_string(i);
        for (double v : trace) out += ',' + format_fixed4(v);
        out += '\n';
      }
    }
  }
  return out;
}

std::string boxplot_svg(const std::string& title, std::span<const BoxPlotEntry> boxes,
                        const std::string& y_label) {
  constexpr double W = 480, H = 320, left = 60, right = 20, top = 40, bottom = 40;
  double lo = 0, hi = 1;
  bool first = true;
  for (const BoxPlotEntry& e : boxes) {
    double a = std::min(e.stats.whisker_low, e.stats.q1);
    double b = std::max(e.stats.whisker_high, e.stats.q3);
    for (double o : e.stats.outliers) a = std::min(a, o), b = std::max(b, o);
    lo = first ? a : std::min(lo, a);
    hi = first ? b : std::max(hi, b);
    first = false;
  }
  const double pad = hi > lo ? 0.08 * (hi - lo) : 1.0;
  lo -= pad;
  hi += pad;
  auto y = [&](double v) { return top + (H - top - bottom) * (hi - v) / (hi - lo); };
  const double slot = (W - left - right) / std::max<std::size_t>(1, boxes.size());

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"320\" viewBox=\"0 0 480 320\"";
  s += " data-y-min=\"" + format_double(lo) + "\" data-y-max=\"" + format_double(hi) + "\">\n";
  s += "<title>" + xml_escape(title) + "</title>\n";
  s += "<text x=\"240\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + xml_escape(title) + "</text>\n";
  s += "<line x1=\"" + num2(left) + "\" y1=\"" + num2(top) + "\" x2=\"" + num2(left) + "\" y2=\"" +
       num2(H - bottom) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    s += "<text x=\"" + num2(left - 6) + "\" y=\"" + num2(y(v) + 4) +
         "\" text-anchor=\"end\" font-size=\"10\">" + num2(v) + "</text>\n";
  }
  s += "<text x=\"14\" y=\"" + num2(H / 2) + "\" font-size=\"11\" transform=\"rotate(-90 14 " +
       num2(H / 2) + ")\" text-anchor=\"middle\">" + xml_escape(y_label) + "</text>\n";
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const BoxStats& b = boxes[i].stats;
    const double cx = left + slot * (static_cast<double>(i) + 0.5);
    const double hw = std::min(40.0, slot * 0.3);
    std::string outl;
    for (double o : b.outliers) outl += (outl.empty() ? "" : " ") + format_double(o);
    s += "<g class=\"box\" data-label=\"" + xml_escape(boxes[i].label) + "\" data-median=\"" +
         format_double(b.median) + "\" data-q1=\"" + format_double(b.q1) + "\" data-q3=\"" +
         format_double(b.q3) + "\" data-whisker-low=\"" + format_double(b.whisker_low) +
         "\" data-whisker-high=\"" + format_double(b.whisker_high) + "\" data-n=\"" +
         std::to_string(b.n) + "\" data-outliers=\"" + outl + "\">\n";
    s += "  <line x1=\"" + num2(cx) + "\" y1=\"" + num2(y(b.whisker_high)) + "\" x2=\"" + num2(cx) +
         "\" y2=\"" + num2(y(b.q3)) + "\" stroke=\"black\"/>\n";
    s += "  <line x1=\"" + num2(cx) + "\" y1=\"" + num2(y(b.q1)) + "\" x2=\"" + num2(cx) + "\" y2=\"" +
         num2(y(b.whisker_low)) + "\" stroke=\"black\"/>\n";
    for (double w : {b.whisker_low, b.whisker_high}) {
      s += "  <line x1=\"" + num2(cx - hw / 2) + "\" y1=\"" + num2(y(w)) + "\" x2=\"" +
           num2(cx + hw / 2) + "\" y2=\"" + num2(y(w)) + "\" stroke=\"black\"/>\n";
    }
    s += "  <rect x=\"" + num2(cx - hw) + "\" y=\"" + num2(y(b.q3)) + "\" width=\"" + num2(2 * hw) +
         "\" height=\"" + num2(y(b.q1) - y(b.q3)) + "\" fill=\"#cfe0f3\" stroke=\"black\"/>\n";
    s += "  <line x1=\"" + num2(cx - hw) + "\" y1=\"" + num2(y(b.median)) + "\" x2=\"" + num2(cx + hw) +
         "\" y2=\"" + num2(y(b.median)) + "\" stroke=\"#c0392b\" stroke-width=\"2\"/>\n";
    for (double o : b.outliers) {
      s += "  <circle cx=\"" + num2(cx) + "\" cy=\"" + num2(y(o)) + "\" r=\"3\" fill=\"none\" stroke=\"black\"/>\n";
    }
    s += "  <text x=\"" + num2(cx) + "\" y=\"" + num2(H - bottom + 16) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + xml_escape(boxes[i].label) + "</text>\n";
    s += "</g>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string cycle_overlay_svg(const std::string& title, std::span<const std::vector<double>> traces) {
  constexpr double W = 480, H = 320, left = 60, right = 20, top = 40, bottom = 40;
  double lo = 0, hi = 1;
  bool first = true;
  for (const auto& t : traces) {
    for (double v : t) {
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  }
  const double pad = hi > lo ? 0.05 * (hi - lo) : 1.0;
  lo -= pad;
  hi += pad;
  auto y = [&](double v) { return top + (H - top - bottom) * (hi - v) / (hi - lo); };
  auto x = [&](double pct) { return left + (W - left - right) * pct / 100.0; };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"320\" viewBox=\"0 0 480 320\"";
  s += " data-y-min=\"" + format_double(lo) + "\" data-y-max=\"" + format_double(hi) + "\">\n";
  s += "<title>" + xml_escape(title) + "</title>\n";
  s += "<text x=\"240\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + xml_escape(title) + "</text>\n";
  s += "<line x1=\"" + num2(left) + "\" y1=\"" + num2(H - bottom) + "\" x2=\"" + num2(W - right) +
       "\" y2=\"" + num2(H - bottom) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    s += "<text x=\"" + num2(left - 6) + "\" y=\"" + num2(y(v) + 4) +
         "\" text-anchor=\"end\" font-size=\"10\">" + num2(v) + "</text>\n";
    s += "<text x=\"" + num2(x(25.0 * t)) + "\" y=\"" + num2(H - bottom + 14) +
         "\" text-anchor=\"middle\" font-size=\"10\">" + std::to_string(25 * t) + "%</text>\n";
  }
  for (const auto& t : traces) {
    if (t.size() < 2) continue;
    s += "<polyline fill=\"none\" stroke=\"#2c6fbb\" stroke-opacity=\"0.6\" points=\"";
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double pct = 100.0 * static_cast<double>(k) / static_cast<double>(t.size() - 1);
      s += (k ? " " : "") + num2(x(pct)) + "," + num2(y(t[k]));
    }
    s += "\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

std::vector<std::filesystem::path> write_report(std::span<const SessionResult> results,
                                                const ReportConfig& config,
                                                const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<SessionResult> sorted(results.begin(), results.end());
  sort_results(sorted);
  std::vector<MetricsRow> rows;
  for (const SessionResult& r : sorted) rows.push_back(metrics_row(r));

  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text_file(out_dir / name, text);
    written.push_back(out_dir / name);
  };
  if (config.wants(OutputFormat::TableText)) emit("table.txt", format_table_text(rows, config.accel_basis));
  if (config.wants(OutputFormat::TableStructured)) emit("metrics.csv", format_metrics_csv(rows));
  const std::string traces = format_cycle_traces_csv(sorted);
  if (config.wants(OutputFormat::BoxstatsStructured)) {
    emit("boxstats.json", format_boxstats_json(sorted));
    emit("cycles.csv", format_cycles_csv(sorted));
    emit("cycle_traces.csv", traces);
  }
  if (config.wants(OutputFormat::PlotSvg)) {
    const PlotSummary plots =
        render_plots(boxstats_tree(sorted), parse_traces(traces, "cycle_traces.csv"), out_dir / "plots");
    written.insert(written.end(), plots.files.begin(), plots.files.end());
  }
  return written;
}

PlotSummary plot_bundle(const std::filesystem::path& bundle_dir, const std::filesystem::path& out_dir) {
  const auto json_path = bundle_dir / "boxstats.json";
  Json tree;
  try {
    tree = Json::parse(read_text_file(json_path));
    (void)tree.at("panels");
    (void)tree.at("groups");
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::MalformedLine, json_path.string() + ": " + e.what());
  }
  TraceSet traces;
  const auto trace_path = bundle_dir / "cycle_traces.csv";
  if (std::filesystem::exists(trace_path)) {
    traces = parse_traces(read_text_file(trace_path), trace_path.string());
  }
  try {
    return render_plots(tree, traces, out_dir);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::MalformedLine, json_path.string() + ": " + e.what());
  }
}

}  // namespace gaitkit
