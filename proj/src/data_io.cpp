#include "sphtraj/data_io.hpp"

#include <algorithm>
#include <array>
#include <boost/math/special_functions/beta.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <random>
#include <regex>
#include <sstream>

#include "sphtraj/serialization.hpp"

namespace sphtraj {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::optional<double> civil_seconds(int y, unsigned mo, unsigned d, int h, int mi, double s) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0.0 || s >= 61.0) return std::nullopt;
  const auto days = sys_days(ymd).time_since_epoch().count();
  return static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + s;
}

// "28.0N" -> 28.0, "94.8W" -> -94.8.
std::optional<double> parse_hemisphere(const std::string& s, char pos, char neg, double limit) {
  if (s.size() < 2) return std::nullopt;
  const char h = s.back();
  if (h != pos && h != neg) return std::nullopt;
  const auto v = parse_double(s.substr(0, s.size() - 1));
  if (!v || *v < 0.0 || *v > limit) return std::nullopt;
  return h == neg ? -*v : *v;
}

bool looks_like_header(const std::vector<std::string>& fields) {
  return !fields.empty() && !fields[0].empty() && std::isalpha(static_cast<unsigned char>(fields[0][0]));
}

struct PendingStorm {
  GeoTrack track;
  std::size_t declared = 0;
  std::size_t consumed = 0;
  std::size_t header_line = 0;
  bool header_ok = true;
  bool bad = false;
};

// Appends a fix unless its time does not advance, which is reported as a warning.
void add_fix(GeoTrack& track, const GeoFix& fix, std::size_t line, ParseResult& result) {
  if (!track.fixes.empty() && fix.time <= track.fixes.back().time) {
    result.issues.push_back({line, ErrorCode::MalformedDataLine,
                             "non-increasing timestamp in " + track.id + "; fix dropped", true});
    return;
  }
  track.fixes.push_back(fix);
}

void keep_if_long_enough(GeoTrack&& track, std::size_t line, ParseResult& result) {
  if (track.fixes.size() < 2) {
    ++result.dropped_short;
    result.issues.push_back({line, ErrorCode::DegenerateTrajectory,
                             track.id + " has fewer than two fixes; dropped", true});
    return;
  }
  result.tracks.push_back(std::move(track));
}

}  // namespace

int GeoTrack::start_year() const {
  using namespace std::chrono;
  const auto day = floor<days>(sys_seconds(seconds(static_cast<std::int64_t>(std::floor(fixes.front().time)))));
  return static_cast<int>(year_month_day(day).year());
}

std::size_t ParseResult::error_count() const {
  return static_cast<std::size_t>(std::count_if(issues.begin(), issues.end(), [](const auto& i) { return !i.warning; }));
}

std::size_t ParseResult::warning_count() const { return issues.size() - error_count(); }

ParseResult parse_hurdat2(std::istream& in) {
  static const std::regex id_pattern("^[A-Z]{2}[0-9]{6}$");
  ParseResult result;
  std::optional<PendingStorm> pending;

  auto finish = [&] {
    if (!pending) return;
    if (pending->header_ok && pending->consumed != pending->declared) {
      result.issues.push_back({pending->header_line, ErrorCode::MalformedHeader,
                               pending->track.id + " declares " + std::to_string(pending->declared) +
                                   " rows but has " + std::to_string(pending->consumed),
                               true});
    }
    if (!pending->bad) keep_if_long_enough(std::move(pending->track), pending->header_line, result);
    pending.reset();
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split(line);

    if (looks_like_header(fields)) {
      finish();
      ++result.header_lines;
      pending.emplace();
      pending->header_line = line_no;
      pending->track.id = fields[0];
      if (fields.size() < 3 || !std::regex_match(fields[0], id_pattern) || !all_digits(fields[2])) {
        pending->bad = true;
        pending->header_ok = false;
        result.issues.push_back({line_no, ErrorCode::MalformedHeader, "malformed header: " + line});
        continue;
      }
      pending->track.name = fields[1];
      pending->declared = std::stoul(fields[2]);
      continue;
    }

    ++result.data_lines;
    if (!pending) {
      result.issues.push_back({line_no, ErrorCode::MalformedDataLine, "data line before any header"});
      continue;
    }
    ++pending->consumed;
    if (pending->bad) continue;

    std::optional<double> time, lat, lon;
    if (fields.size() >= 6 && fields[0].size() == 8 && all_digits(fields[0]) && fields[1].size() == 4 &&
        all_digits(fields[1])) {
      const int y = std::stoi(fields[0].substr(0, 4));
      const auto mo = static_cast<unsigned>(std::stoi(fields[0].substr(4, 2)));
      const auto d = static_cast<unsigned>(std::stoi(fields[0].substr(6, 2)));
      time = civil_seconds(y, mo, d, std::stoi(fields[1].substr(0, 2)), std::stoi(fields[1].substr(2, 2)), 0.0);
      lat = parse_hemisphere(fields[4], 'N', 'S', 90.0);
      lon = parse_hemisphere(fields[5], 'E', 'W', 360.0);
    }
    if (!time || !lat || !lon) {
      pending->bad = true;
      result.issues.push_back({line_no, ErrorCode::MalformedDataLine,
                               "malformed data line in " + pending->track.id + ": " + line});
      continue;
    }
    add_fix(pending->track, GeoFix{*time, *lat, normalize_longitude(*lon)}, line_no, result);
  }
  finish();
  return result;
}

std::optional<double> parse_rfc3339(const std::string& text) {
  static const std::regex pattern(
      R"(^(\d{4})-(\d{2})-(\d{2})[Tt ](\d{2}):(\d{2}):(\d{2}(?:\.\d+)?)(?:([Zz])|([+-])(\d{2}):(\d{2}))$)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) return std::nullopt;
  const auto seconds = parse_double(m[6].str());
  if (!seconds) return std::nullopt;
  auto t = civil_seconds(std::stoi(m[1].str()), static_cast<unsigned>(std::stoi(m[2].str())),
                         static_cast<unsigned>(std::stoi(m[3].str())), std::stoi(m[4].str()), std::stoi(m[5].str()),
                         *seconds);
  if (!t) return std::nullopt;
  if (m[8].matched) {
    const int oh = std::stoi(m[9].str()), om = std::stoi(m[10].str());
    if (oh > 23 || om > 59) return std::nullopt;
    const double offset = oh * 3600.0 + om * 60.0;
    *t += m[8].str() == "+" ? -offset : offset;
  }
  return t;
}

std::string format_rfc3339(double seconds) {
  using namespace std::chrono;
  const double whole = std::floor(seconds);
  const sys_seconds tp{std::chrono::seconds(static_cast<std::int64_t>(whole))};
  const auto day = floor<days>(tp);
  const year_month_day ymd(day);
  const hh_mm_ss hms(tp - day);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  std::string out(buf);
  const double frac = seconds - whole;
  if (frac > 0.0) {
    std::snprintf(buf, sizeof(buf), "%.6f", frac);
    out += std::string(buf).substr(1);
  }
  return out + "Z";
}

ParseResult parse_track_csv(std::istream& in) {
  ParseResult result;
  std::map<std::string, std::size_t> index;
  std::vector<std::size_t> first_line;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split(line);
    if (!header_seen) {
      ++result.header_lines;
      if (fields != std::vector<std::string>{"id", "timestamp", "lat", "lon"}) {
        result.issues.push_back({line_no, ErrorCode::MalformedHeader, "expected header id,timestamp,lat,lon"});
        return result;
      }
      header_seen = true;
      continue;
    }
    ++result.data_lines;
    const auto time = fields.size() == 4 ? parse_rfc3339(fields[1]) : std::nullopt;
    const auto lat = fields.size() == 4 ? parse_double(fields[2]) : std::nullopt;
    const auto lon = fields.size() == 4 ? parse_double(fields[3]) : std::nullopt;
    if (fields.size() != 4 || fields[0].empty() || !time || !lat || !lon || std::abs(*lat) > 90.0) {
      result.issues.push_back({line_no, ErrorCode::MalformedDataLine, "malformed row: " + line});
      continue;
    }
    auto [it, inserted] = index.emplace(fields[0], result.tracks.size());
    if (inserted) {
      result.tracks.push_back(GeoTrack{fields[0], fields[0], {}});
      first_line.push_back(line_no);
    }
    add_fix(result.tracks[it->second], GeoFix{*time, *lat, normalize_longitude(*lon)}, line_no, result);
  }
  std::vector<GeoTrack> all = std::move(result.tracks);
  result.tracks.clear();
  for (std::size_t t = 0; t < all.size(); ++t) keep_if_long_enough(std::move(all[t]), first_line[t], result);
  return result;
}

ParseResult parse_tracks(std::istream& in) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::istringstream probe(text);
  std::string line;
  while (std::getline(probe, line) && trim(line).empty()) {
  }
  std::istringstream stream(text);
  return trim(line).rfind("id,", 0) == 0 ? parse_track_csv(stream) : parse_hurdat2(stream);
}

std::vector<GeoTrack> filter_tracks(const std::vector<GeoTrack>& tracks, const TrackFilter& filter) {
  std::vector<GeoTrack> out;
  for (const auto& t : tracks) {
    if (t.fixes.empty()) continue;
    const int year = t.start_year();
    if (t.fixes.front().lat < filter.start_lat_max && t.fixes.back().lat > filter.end_lat_min &&
        year >= filter.year_min && year <= filter.year_max) {
      out.push_back(t);
    }
  }
  return out;
}

double normalize_longitude(double lon) {
  lon = std::fmod(lon, 360.0);
  if (lon > 180.0) lon -= 360.0;
  if (lon <= -180.0) lon += 360.0;
  return lon;
}

SpherePoint to_sphere(double lat_deg, double lon_deg) {
  const double phi = lat_deg * kDeg, lambda = lon_deg * kDeg;
  return SpherePoint(std::cos(phi) * std::cos(lambda), std::cos(phi) * std::sin(lambda), std::sin(phi));
}

std::pair<double, double> to_lat_lon(const SpherePoint& p) {
  const double lat = std::atan2(p.z(), std::hypot(p.x(), p.y())) / kDeg;
  return {lat, normalize_longitude(std::atan2(p.y(), p.x()) / kDeg)};
}

Trajectory to_trajectory(const GeoTrack& track, std::size_t size) {
  if (track.fixes.size() < 2) throw Error(ErrorCode::DegenerateTrajectory, track.id + " has fewer than two fixes");
  if (size < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least two samples");
  std::vector<Vec3> pts;
  for (const auto& f : track.fixes) pts.push_back(to_sphere(f.lat, f.lon).coords());
  const double t0 = track.fixes.front().time, t1 = track.fixes.back().time;
  std::vector<Vec3> out(size);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < size; ++k) {
    const double target = k + 1 == size ? t1 : t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(size - 1);
    while (seg + 2 < track.fixes.size() && track.fixes[seg + 1].time < target) ++seg;
    const double a = track.fixes[seg].time, b = track.fixes[seg + 1].time;
    const double f = std::clamp((target - a) / (b - a), 0.0, 1.0);
    out[k] = f == 0.0 ? pts[seg] : f == 1.0 ? pts[seg + 1] : s2::slerp(pts[seg], pts[seg + 1], f);
  }
  return Trajectory::from_coords(out);
}

// Synthetic ---------------------------------------------------------------------------

Warp random_warp(std::size_t size, double strength, int components, double concentration, std::uint64_t seed) {
  if (strength < 0.0 || strength > 1.0 || components < 1 || concentration < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "warp parameters out of range");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> weight(components), a(components), b(components);
  double total = 0.0;
  for (int m = 0; m < components; ++m) {
    weight[m] = -std::log1p(-unit(rng));
    total += weight[m];
    a[m] = 1.0 + concentration * unit(rng);
    b[m] = 1.0 + concentration * unit(rng);
  }
  std::vector<double> values(size);
  for (std::size_t k = 0; k < size; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(size - 1);
    double mix = 0.0;
    for (int m = 0; m < components; ++m) mix += weight[m] / total * boost::math::ibeta(a[m], b[m], t);
    values[k] = strength == 0.0 ? t : (1.0 - strength) * t + strength * mix;
  }
  return Warp(std::move(values));
}

namespace {

double bump_profile(BaseShape shape, double height, double s) {
  switch (shape) {
    case BaseShape::GreatArc: return 0.0;
    case BaseShape::Bump: return height * std::sin(std::numbers::pi * s);
    case BaseShape::TwoBump: {
      const double v = std::sin(2.0 * std::numbers::pi * s);
      return height * v * v;
    }
  }
  return 0.0;
}

struct BasePath {
  Vec3 start, end, normal;
  BaseShape shape;
  double height;
  std::array<double, 3> noise{};

  Vec3 at(double s) const {
    double offset = bump_profile(shape, height, s);
    for (int j = 0; j < 3; ++j) offset += noise[j] * std::sin((j + 1) * std::numbers::pi * s) / (j + 1);
    const Vec3 g = s2::slerp(start, end, s);
    return (std::cos(offset) * g + std::sin(offset) * normal).normalized();
  }
};

BasePath base_path(const SyntheticSpec& spec) {
  const Vec3 a = to_sphere(spec.start_lat, spec.start_lon).coords();
  const Vec3 b = to_sphere(spec.end_lat, spec.end_lon).coords();
  const Vec3 n = a.cross(b);
  if (n.norm() < 1e-9) throw Error(ErrorCode::InvalidArgument, "synthetic endpoints must be distinct and not antipodal");
  return BasePath{a, b, n.normalized(), spec.base, spec.bump_height, {}};
}

Trajectory sample_path(const BasePath& path, const Warp& gamma) {
  std::vector<Vec3> pts(gamma.size());
  for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = path.at(gamma[k]);
  return Trajectory::from_coords(pts);
}

}  // namespace

Trajectory synthetic_base(const SyntheticSpec& spec) {
  return sample_path(base_path(spec), Warp::identity(spec.grid));
}

SyntheticFamily generate_synthetic_family(const SyntheticSpec& spec) {
  if (spec.count < 1 || spec.noise < 0.0 || spec.grid < 2) {
    throw Error(ErrorCode::InvalidArgument, "synthetic spec needs count >= 1, grid >= 2 and noise >= 0");
  }
  const BasePath base = base_path(spec);
  SyntheticFamily family;
  for (std::size_t i = 0; i < spec.count; ++i) {
    const std::uint64_t member_seed = derive_seed(spec.seed, i);
    BasePath path = base;
    if (spec.noise > 0.0) {
      std::mt19937_64 rng(derive_seed(member_seed, 1));
      std::normal_distribution<double> normal(0.0, spec.noise);
      for (auto& z : path.noise) z = normal(rng);
    }
    Warp gamma = random_warp(spec.grid, spec.warp_strength, spec.warp_components, spec.warp_concentration,
                             derive_seed(member_seed, 0));
    family.members.push_back(sample_path(path, gamma));
    family.warps.push_back(std::move(gamma));
  }
  return family;
}

std::vector<Trajectory> generate_synthetic(const SyntheticSpec& spec) { return generate_synthetic_family(spec).members; }

// Export -------------------------------------------------------------------------------

ExportFormat parse_export_format(const std::string& name) {
  if (name == "geojson") return ExportFormat::GeoJson;
  if (name == "csv") return ExportFormat::Csv;
  if (name == "json") return ExportFormat::Json;
  throw Error(ErrorCode::InvalidArgument, "unknown format '" + name + "' (geojson, csv, json)");
}

namespace {

json geojson_feature(const ExportTrack& t) {
  json coords = json::array();
  for (const auto& p : t.track.samples()) {
    const auto [lat, lon] = to_lat_lon(p);
    coords.push_back(json::array({lon, lat}));
  }
  json props = {{"id", t.id}, {"role", t.role}};
  if (t.cluster) props["cluster"] = *t.cluster;
  return {{"type", "Feature"}, {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}, {"properties", props}};
}

std::string tracks_geojson(const std::vector<ExportTrack>& tracks) {
  json features = json::array();
  for (const auto& t : tracks) features.push_back(geojson_feature(t));
  return dump_json({{"type", "FeatureCollection"}, {"features", features}}) + "\n";
}

std::string tracks_csv(const std::vector<ExportTrack>& tracks) {
  std::string out = "id,k,lat,lon\n";
  for (const auto& t : tracks) {
    if (t.id.find_first_of(",\"\n") != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "track id '" + t.id + "' cannot be written to CSV");
    }
    for (std::size_t k = 0; k < t.track.size(); ++k) {
      const auto [lat, lon] = to_lat_lon(t.track[k]);
      out += t.id + "," + std::to_string(k) + "," + format_double(lat) + "," + format_double(lon) + "\n";
    }
  }
  return out;
}

json tracks_json(const std::vector<ExportTrack>& tracks) {
  json out = json::array();
  for (const auto& t : tracks) {
    json item = {{"id", t.id}, {"role", t.role}, {"samples", to_json(t.track)}};
    if (t.cluster) item["cluster"] = *t.cluster;
    out.push_back(item);
  }
  return out;
}

}  // namespace

std::string export_tracks(const std::vector<ExportTrack>& tracks, ExportFormat format) {
  switch (format) {
    case ExportFormat::GeoJson: return tracks_geojson(tracks);
    case ExportFormat::Csv: return tracks_csv(tracks);
    case ExportFormat::Json: return dump_json({{"tracks", tracks_json(tracks)}}) + "\n";
  }
  throw Error(ErrorCode::UnsupportedCombination, "unknown export format");
}

std::string export_clusters(const ClusterResult& result, const std::vector<ExportTrack>& members, ExportFormat format) {
  if (members.size() != result.assignments.size()) {
    throw Error(ErrorCode::InvalidArgument, "member list does not match the assignments");
  }
  std::vector<ExportTrack> tracks;
  for (std::size_t i = 0; i < members.size(); ++i) {
    tracks.push_back({members[i].id, members[i].track, result.assignments[i], "member"});
  }
  for (int c = 0; c < static_cast<int>(result.centroids.size()); ++c) {
    tracks.push_back({"centroid-" + std::to_string(c), integrate(result.centroids[c]), c, "centroid"});
  }
  switch (format) {
    case ExportFormat::GeoJson: return tracks_geojson(tracks);
    case ExportFormat::Json: return dump_json({{"result", to_json(result)}, {"tracks", tracks_json(tracks)}}) + "\n";
    case ExportFormat::Csv: break;
  }
  throw Error(ErrorCode::UnsupportedCombination, "cluster results have no CSV form (use geojson or json)");
}

std::string export_karcher(const KarcherResult& result, const std::vector<std::string>& ids, ExportFormat format) {
  if (ids.size() != result.aligned.size()) throw Error(ErrorCode::InvalidArgument, "id list does not match the data");
  if (format == ExportFormat::Json) {
    json j = to_json(result);
    j["ids"] = ids;
    return dump_json(j) + "\n";
  }
  std::vector<ExportTrack> tracks{{"mean", integrate(result.mean), std::nullopt, "mean"}};
  for (std::size_t i = 0; i < ids.size(); ++i) tracks.push_back({ids[i], integrate(result.aligned[i]), std::nullopt, "aligned"});
  return export_tracks(tracks, format);
}

std::string export_pca(const PcaModel& model, ExportFormat format) {
  if (format != ExportFormat::Json) {
    throw Error(ErrorCode::UnsupportedCombination, "PCA models are exported as JSON only");
  }
  return dump_json(to_json(model)) + "\n";
}

std::vector<ExportTrack> import_tracks(const std::string& text, ExportFormat format) {
  std::vector<ExportTrack> out;
  try {
    const json doc = format == ExportFormat::Csv ? json() : json::parse(text);
    if (format == ExportFormat::GeoJson) {
      for (const auto& f : doc.at("features")) {
        std::vector<Vec3> pts;
        for (const auto& c : f.at("geometry").at("coordinates")) {
          pts.push_back(to_sphere(c.at(1).get<double>(), c.at(0).get<double>()).coords());
        }
        const auto& props = f.at("properties");
        std::optional<int> cluster;
        if (props.contains("cluster")) cluster = props.at("cluster").get<int>();
        out.push_back({props.at("id").get<std::string>(), Trajectory::from_coords(pts), cluster,
                       props.value("role", std::string())});
      }
      return out;
    }
    if (format == ExportFormat::Json) {
      for (const auto& t : doc.at("tracks")) {
        std::optional<int> cluster;
        if (t.contains("cluster")) cluster = t.at("cluster").get<int>();
        out.push_back({t.at("id").get<std::string>(), trajectory_from_json(t.at("samples")), cluster,
                       t.value("role", std::string())});
      }
      return out;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("track JSON: ") + e.what());
  }

  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (trim(line) != "id,k,lat,lon") throw Error(ErrorCode::MalformedHeader, "expected header id,k,lat,lon");
  std::vector<std::string> order;
  std::map<std::string, std::vector<Vec3>> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line));
    const auto lat = fields.size() == 4 ? parse_double(fields[2]) : std::nullopt;
    const auto lon = fields.size() == 4 ? parse_double(fields[3]) : std::nullopt;
    if (!lat || !lon || !all_digits(fields[1])) {
      throw Error(ErrorCode::MalformedDataLine, "line " + std::to_string(line_no) + ": " + line);
    }
    auto& pts = points[fields[0]];
    if (pts.empty()) order.push_back(fields[0]);
    if (std::stoul(fields[1]) != pts.size()) {
      throw Error(ErrorCode::MalformedDataLine, "line " + std::to_string(line_no) + ": sample index out of order");
    }
    pts.push_back(to_sphere(*lat, *lon).coords());
  }
  for (const auto& id : order) out.push_back({id, Trajectory::from_coords(points[id]), std::nullopt, ""});
  return out;
}

}  // namespace sphtraj
