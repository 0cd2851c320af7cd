#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sphtraj/clustering.hpp"

namespace sphtraj {

/// One position fix. Time is seconds since the Unix epoch (UTC).
struct GeoFix {
  double time;
  double lat;
  double lon;
};

struct GeoTrack {
  std::string id;
  std::string name;
  std::vector<GeoFix> fixes;

  /// Calendar year (UTC) of the first fix.
  int start_year() const;
};

/// A problem found while reading an input file. Errors drop the affected storm
/// or row; warnings keep the data.
struct ParseIssue {
  std::size_t line;
  ErrorCode code;
  std::string message;
  bool warning = false;
};

struct ParseResult {
  std::vector<GeoTrack> tracks;
  std::vector<ParseIssue> issues;
  /// Storms dropped because fewer than two usable fixes remained.
  std::size_t dropped_short = 0;
  std::size_t header_lines = 0;
  std::size_t data_lines = 0;

  std::size_t error_count() const;
  std::size_t warning_count() const;
};

/// Reads the HURDAT2 best-track layout: a header `BBNNYYYY, NAME, K,` followed by
/// K data lines `YYYYMMDD, HHMM, I, SS, LL.LH, LLL.LH, ...`. A malformed header or
/// data line drops that storm only and is reported in `issues`.
ParseResult parse_hurdat2(std::istream& in);

/// Reads `id,timestamp,lat,lon` rows (RFC 3339 timestamps) grouped by id in order
/// of first appearance. Malformed rows are reported and skipped.
ParseResult parse_track_csv(std::istream& in);

/// Reads either format, chosen from the first non-empty line.
ParseResult parse_tracks(std::istream& in);

/// Seconds since the epoch for an RFC 3339 timestamp; nullopt if malformed.
std::optional<double> parse_rfc3339(const std::string& text);
std::string format_rfc3339(double seconds);

struct TrackFilter {
  double start_lat_max = 20.0;
  double end_lat_min = 35.0;
  int year_min = 1969;
  int year_max = 2014;
};

/// Keeps tracks starting strictly south of start_lat_max, ending strictly north of
/// end_lat_min, whose first fix falls in [year_min, year_max].
std::vector<GeoTrack> filter_tracks(const std::vector<GeoTrack>& tracks, const TrackFilter& filter = {});

/// (cos(lat) cos(lon), cos(lat) sin(lon), sin(lat)), degrees in.
SpherePoint to_sphere(double lat_deg, double lon_deg);
/// Latitude in [-90, 90] and longitude in (-180, 180], degrees.
std::pair<double, double> to_lat_lon(const SpherePoint& p);
/// Wraps a longitude into (-180, 180].
double normalize_longitude(double lon_deg);

/// Resamples a track at T times evenly spaced between its first and last fix,
/// interpolating along great circles between neighbouring fixes.
Trajectory to_trajectory(const GeoTrack& track, std::size_t size = kDefaultGridSize);

// Synthetic families ----------------------------------------------------------------

enum class BaseShape { GreatArc, Bump, TwoBump };

struct SyntheticSpec {
  BaseShape base = BaseShape::TwoBump;
  std::size_t count = 10;
  std::size_t grid = kDefaultGridSize;
  /// Great arc between these (degrees); bumps are added sideways to it.
  double start_lat = 15.0, start_lon = -60.0;
  double end_lat = 40.0, end_lon = -30.0;
  /// Peak sideways offset of each bump, radians.
  double bump_height = 0.1;
  /// gamma = (1 - s) t + s sum_m pi_m I(t; a_m, b_m), with s the warp strength.
  double warp_strength = 0.5;
  int warp_components = 3;
  /// Beta parameters are drawn from 1 + concentration * U(0, 1).
  double warp_concentration = 3.0;
  /// Scale (radians) of the random smooth sideways perturbation of each member.
  double noise = 0.0;
  std::uint64_t seed = 1;
};

/// The unwarped, noise-free base path sampled on the grid.
Trajectory synthetic_base(const SyntheticSpec& spec);

struct SyntheticFamily {
  std::vector<Trajectory> members;
  /// The warp applied to each member (alpha_i = base_i o gamma_i).
  std::vector<Warp> warps;
};

SyntheticFamily generate_synthetic_family(const SyntheticSpec& spec);
std::vector<Trajectory> generate_synthetic(const SyntheticSpec& spec);

/// Random warp from the beta-CDF family; the identity when strength is 0.
Warp random_warp(std::size_t size, double strength, int components, double concentration, std::uint64_t seed);

// Export ----------------------------------------------------------------------------

enum class ExportFormat { GeoJson, Csv, Json };

ExportFormat parse_export_format(const std::string& name);

struct ExportTrack {
  std::string id;
  Trajectory track;
  std::optional<int> cluster;
  std::string role;
};

/// GeoJSON LineStrings ([lon, lat]), CSV rows (id, k, lat, lon), or JSON.
std::string export_tracks(const std::vector<ExportTrack>& tracks, ExportFormat format);

/// Member tracks tagged with their cluster plus centroid tracks; CSV is unsupported.
std::string export_clusters(const ClusterResult& result, const std::vector<ExportTrack>& members,
                            ExportFormat format);

/// Mean and aligned tracks (GeoJSON, CSV) or the full result (JSON).
std::string export_karcher(const KarcherResult& result, const std::vector<std::string>& ids, ExportFormat format);

/// JSON only.
std::string export_pca(const PcaModel& model, ExportFormat format);

/// Reads tracks written by export_tracks in CSV or GeoJSON form.
std::vector<ExportTrack> import_tracks(const std::string& text, ExportFormat format);

}  // namespace sphtraj
