#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "sphtraj/data_io.hpp"
#include "sphtraj/serialization.hpp"
#include "test_support.hpp"

using namespace sphtraj;
using namespace sphtraj::testing;

namespace {

ParseResult parse_fixture() {
  std::ifstream in(std::string(SPHTRAJ_TEST_DATA) + "/hurdat2_excerpt.txt");
  EXPECT_TRUE(in.good());
  return parse_hurdat2(in);
}

const GeoTrack* find(const ParseResult& r, const std::string& id) {
  for (const auto& t : r.tracks) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

bool has_issue(const ParseResult& r, std::size_t line, ErrorCode code, bool warning) {
  for (const auto& i : r.issues) {
    if (i.line == line && i.code == code && i.warning == warning) return true;
  }
  return false;
}

// Counts below were taken by hand from tests/data/hurdat2_excerpt.txt.
TEST(Hurdat2, ExcerptParsesToHandCountedTracks) {
  const ParseResult r = parse_fixture();
  EXPECT_EQ(r.header_lines, 8u);
  EXPECT_EQ(r.data_lines, 65u);
  ASSERT_EQ(r.tracks.size(), 5u);

  const GeoTrack* irene = find(r, "AL092011");
  ASSERT_NE(irene, nullptr);
  EXPECT_EQ(irene->name, "IRENE");
  ASSERT_EQ(irene->fixes.size(), 39u);
  EXPECT_DOUBLE_EQ(irene->fixes[0].lat, 15.0);
  EXPECT_DOUBLE_EQ(irene->fixes[0].lon, -59.0);
  EXPECT_EQ(format_rfc3339(irene->fixes[0].time), "2011-08-21T00:00:00Z");
  EXPECT_EQ(format_rfc3339(irene->fixes[1].time), "2011-08-21T06:00:00Z");
  EXPECT_EQ(irene->start_year(), 2011);

  // Malformed latitude drops GLORIA; a malformed id drops the storm on line 54.
  EXPECT_EQ(find(r, "AL041985"), nullptr);
  EXPECT_TRUE(has_issue(r, 51, ErrorCode::MalformedDataLine, false));
  EXPECT_TRUE(has_issue(r, 54, ErrorCode::MalformedHeader, false));
  // BRET declares 4 rows but has 3: kept with a warning.
  ASSERT_NE(find(r, "AL021999"), nullptr);
  EXPECT_EQ(find(r, "AL021999")->fixes.size(), 3u);
  EXPECT_TRUE(has_issue(r, 58, ErrorCode::MalformedHeader, true));
  // CAROLINE has a single fix.
  EXPECT_EQ(find(r, "AL031975"), nullptr);
  EXPECT_EQ(r.dropped_short, 1u);
  EXPECT_EQ(r.error_count(), 2u);
  EXPECT_EQ(r.warning_count(), 2u);
}

TEST(Hurdat2, EasternLongitudesWrapAcrossTheAntimeridian) {
  const ParseResult r = parse_fixture();
  const GeoTrack* cross = find(r, "EP202014");
  ASSERT_NE(cross, nullptr);
  ASSERT_EQ(cross->fixes.size(), 4u);
  EXPECT_DOUBLE_EQ(cross->fixes[0].lon, 178.0);
  EXPECT_DOUBLE_EQ(cross->fixes[2].lon, 180.0);
  EXPECT_DOUBLE_EQ(cross->fixes[3].lon, -179.0);
  // One degree of longitude per step, not 359.
  const Trajectory t = to_trajectory(*cross, 4);
  EXPECT_NEAR(s2::distance(t[2].coords(), t[3].coords()), haversine(32.0, 180.0, 40.0, -179.0), 1e-9);
  EXPECT_LT(s2::distance(t[2].coords(), t[3].coords()), 0.2);
}

TEST(Hurdat2, SingleStormAndLineGrammar) {
  std::ostringstream text;
  text << "AL092011, IRENE, 39,\n";
  for (int i = 0; i < 39; ++i) {
    text << "201108" << (21 + i / 4) << ", " << (i % 4 == 0 ? "0000" : i % 4 == 1 ? "0600" : i % 4 == 2 ? "1200" : "1800")
         << ", , TS, " << 15.0 + 0.1 * i << "N, 59.0W, 45, 1005,\n";
  }
  std::istringstream in(text.str());
  const ParseResult r = parse_hurdat2(in);
  ASSERT_EQ(r.tracks.size(), 1u);
  EXPECT_EQ(r.tracks[0].fixes.size(), 39u);
  EXPECT_TRUE(r.issues.empty());

  std::istringstream line("AL012000, X, 2,\n20000101, 0000, , TS, 15.0S, 59.0E,\n20000101, 0600, , TS, 16.0S, 60.0E,\n");
  const ParseResult s = parse_hurdat2(line);
  ASSERT_EQ(s.tracks.size(), 1u);
  EXPECT_DOUBLE_EQ(s.tracks[0].fixes[0].lat, -15.0);
  EXPECT_DOUBLE_EQ(s.tracks[0].fixes[0].lon, 59.0);
}

TEST(Hurdat2, EmptyInputGivesNoTracks) {
  std::istringstream in("");
  const ParseResult r = parse_hurdat2(in);
  EXPECT_TRUE(r.tracks.empty());
  EXPECT_TRUE(r.issues.empty());
}

TEST(Hurdat2, EveryLineIsOneHeaderOrOneDataLine) {
  std::ifstream in(std::string(SPHTRAJ_TEST_DATA) + "/hurdat2_excerpt.txt");
  std::size_t lines = 0;
  for (std::string s; std::getline(in, s);) lines += s.find_first_not_of(" \t\r") != std::string::npos;
  const ParseResult r = parse_fixture();
  EXPECT_EQ(r.header_lines + r.data_lines, lines);
}

TEST(Hurdat2, FilterSelectsByLatitudeAndYear) {
  const auto selected = filter_tracks(parse_fixture().tracks);
  std::vector<std::string> ids;
  for (const auto& t : selected) ids.push_back(t.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"AL092011", "AL011970", "EP202014"}));

  TrackFilter wide;
  wide.year_min = 1900;
  EXPECT_EQ(filter_tracks(parse_fixture().tracks, wide).size(), 4u);
}

TEST(Filter, Thresholds) {
  const auto fix = [](double lat) { return GeoFix{1e9, lat, -60.0}; };
  const auto fix2 = [](double lat) { return GeoFix{1e9 + 3600.0, lat, -60.0}; };
  const GeoTrack from25{"a", "a", {fix(25.0), fix2(40.0)}};
  const GeoTrack from15{"b", "b", {fix(15.0), fix2(40.0)}};
  const GeoTrack edge{"c", "c", {fix(20.0), fix2(35.0)}};
  const auto kept = filter_tracks({from25, from15, edge});
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].id, "b");
}

TEST(TrackCsv, ParsesGroupsAndReportsBadRows) {
  std::istringstream in(
      "id,timestamp,lat,lon\n"
      "b1,2020-03-01T00:00:00Z,10.0,20.0\n"
      "b2,2020-03-01T00:00:00+02:00,11.0,21.0\n"
      "b1,2020-03-02T12:30:00Z,12.0,190.0\n"
      "b2,not-a-time,11.0,21.0\n"
      "b2,2020-03-02T00:00:00Z,13.0,22.0\n"
      "b3,2020-03-02T00:00:00Z,95.0,22.0\n");
  const ParseResult r = parse_track_csv(in);
  ASSERT_EQ(r.tracks.size(), 2u);
  EXPECT_EQ(r.tracks[0].id, "b1");
  EXPECT_DOUBLE_EQ(r.tracks[0].fixes[1].lon, -170.0);
  EXPECT_EQ(format_rfc3339(r.tracks[1].fixes[0].time), "2020-02-29T22:00:00Z");
  EXPECT_EQ(r.error_count(), 2u);
  EXPECT_TRUE(has_issue(r, 5, ErrorCode::MalformedDataLine, false));

  std::istringstream bad_header("name,time,lat,lon\nx,2020-01-01T00:00:00Z,0,0\n");
  EXPECT_TRUE(parse_track_csv(bad_header).tracks.empty());
}

TEST(TrackCsv, FormatIsChosenFromTheFirstLine) {
  std::istringstream csv("\nid,timestamp,lat,lon\na,2020-01-01T00:00:00Z,0,0\na,2020-01-01T06:00:00Z,1,1\n");
  EXPECT_EQ(parse_tracks(csv).tracks.size(), 1u);
  std::istringstream hurdat("AL012000, X, 2,\n20000101, 0000, , TS, 15.0N, 59.0W,\n20000101, 0600, , TS, 16.0N, 60.0W,\n");
  EXPECT_EQ(parse_tracks(hurdat).tracks.size(), 1u);
}

TEST(Rfc3339, ParsesAndFormats) {
  EXPECT_EQ(parse_rfc3339("1970-01-01T00:00:00Z"), 0.0);
  EXPECT_EQ(parse_rfc3339("2000-02-29T12:00:00.5z"), 951825600.5);
  EXPECT_EQ(parse_rfc3339("1970-01-01T01:00:00+01:00"), 0.0);
  EXPECT_EQ(parse_rfc3339("1970-01-01 00:00:00-00:30"), 1800.0);
  EXPECT_FALSE(parse_rfc3339("2001-02-29T00:00:00Z"));
  EXPECT_FALSE(parse_rfc3339("2001-01-01T24:00:00Z"));
  EXPECT_FALSE(parse_rfc3339("2001-01-01"));
  EXPECT_EQ(format_rfc3339(951825600.5), "2000-02-29T12:00:00.500000Z");
  for (double t : {0.0, 1.0e9, 1.6e9 + 17.0}) EXPECT_EQ(parse_rfc3339(format_rfc3339(t)), t);
}

TEST(Conversion, AnchorsAndInverse) {
  EXPECT_LT((to_sphere(90.0, 123.0).coords() - Vec3(0, 0, 1)).norm(), 1e-15);
  EXPECT_LT((to_sphere(0.0, 0.0).coords() - Vec3(1, 0, 0)).norm(), 1e-15);
  EXPECT_LT((to_sphere(0.0, 90.0).coords() - Vec3(0, 1, 0)).norm(), 1e-15);
  Rng rng(1);
  std::uniform_real_distribution<double> lat(-89.0, 89.0), lon(-180.0, 180.0);
  for (int i = 0; i < 1000; ++i) {
    const SpherePoint p = to_sphere(lat(rng), lon(rng));
    const auto [a, b] = to_lat_lon(p);
    EXPECT_LT((to_sphere(a, b).coords() - p.coords()).norm(), 1e-12);
  }
  EXPECT_DOUBLE_EQ(normalize_longitude(-180.0), 180.0);
  EXPECT_DOUBLE_EQ(normalize_longitude(540.0), 180.0);
  EXPECT_DOUBLE_EQ(normalize_longitude(-190.0), 170.0);
}

TEST(Conversion, GreatCircleDistanceMatchesHaversine) {
  Rng rng(2);
  std::uniform_real_distribution<double> lat(-90.0, 90.0), lon(-180.0, 180.0);
  for (int i = 0; i < 2000; ++i) {
    const double a1 = lat(rng), o1 = lon(rng), a2 = lat(rng), o2 = lon(rng);
    EXPECT_NEAR(s2::distance(to_sphere(a1, o1).coords(), to_sphere(a2, o2).coords()), haversine(a1, o1, a2, o2),
                1e-9);
  }
}

TEST(Conversion, ResamplingFollowsTimestamps) {
  // Fixes 1 h and then 3 h apart along the equator: uniform time puts the middle
  // sample a quarter of the way along the long segment.
  const GeoTrack t{"x", "x", {{0.0, 0.0, 0.0}, {3600.0, 0.0, 1.0}, {4 * 3600.0, 0.0, 4.0}}};
  const Trajectory traj = to_trajectory(t, 3);
  const auto [lat, lon] = to_lat_lon(traj[1]);
  EXPECT_NEAR(lat, 0.0, 1e-12);
  EXPECT_NEAR(lon, 2.0, 1e-9);
  EXPECT_LT((traj[2].coords() - to_sphere(0.0, 4.0).coords()).norm(), 1e-15);
  EXPECT_THROW(to_trajectory(GeoTrack{"y", "y", {{0.0, 0.0, 0.0}}}, 5), Error);
}

TEST(Synthetic, DeterministicPerSeed) {
  SyntheticSpec spec;
  spec.noise = 0.05;
  const auto a = generate_synthetic(spec), b = generate_synthetic(spec);
  ASSERT_EQ(a.size(), spec.count);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < a[i].size(); ++k) EXPECT_EQ(a[i][k].coords(), b[i][k].coords());
  }
  spec.seed = 2;
  EXPECT_GT(max_deviation(generate_synthetic(spec)[0], a[0]), 1e-6);
}

TEST(Synthetic, IdentityWarpWithoutNoiseIsTheBase) {
  SyntheticSpec spec;
  spec.warp_strength = 0.0;
  spec.count = 2;
  const Trajectory base = synthetic_base(spec);
  for (const auto& t : generate_synthetic(spec)) EXPECT_EQ(max_deviation(t, base), 0.0);
}

TEST(Synthetic, WarpOnlyMembersShareTheImage) {
  SyntheticSpec spec;
  spec.warp_strength = 0.8;
  const SyntheticFamily family = generate_synthetic_family(spec);
  const Trajectory dense = resample(synthetic_base(spec), 4000);
  for (std::size_t i = 0; i < family.members.size(); ++i) {
    for (const auto& p : family.members[i].samples()) {
      double best = 1e9;
      for (const auto& q : dense.samples()) best = std::min(best, s2::distance(p.coords(), q.coords()));
      EXPECT_LT(best, 1e-2);
    }
    const auto& g = family.warps[i];
    EXPECT_EQ(g[0], 0.0);
    EXPECT_EQ(g[g.size() - 1], 1.0);
  }
}

TEST(Synthetic, TwoBumpBaseHasTwoDeviationMaxima) {
  SyntheticSpec spec;
  spec.base = BaseShape::TwoBump;
  spec.grid = 201;
  const Trajectory base = synthetic_base(spec);
  const Vec3 a = to_sphere(spec.start_lat, spec.start_lon).coords();
  const Vec3 b = to_sphere(spec.end_lat, spec.end_lon).coords();
  const Vec3 n = a.cross(b).normalized();
  // Geodesic distance from the great circle through a and b.
  std::vector<double> dev;
  for (const auto& p : base.samples()) dev.push_back(std::abs(std::asin(std::clamp(p.coords().dot(n), -1.0, 1.0))));
  int maxima = 0;
  for (std::size_t k = 1; k + 1 < dev.size(); ++k) maxima += dev[k] > dev[k - 1] && dev[k] >= dev[k + 1];
  EXPECT_EQ(maxima, 2);
  EXPECT_NEAR(*std::max_element(dev.begin(), dev.end()), spec.bump_height, 1e-6);

  spec.base = BaseShape::Bump;
  const Trajectory one = synthetic_base(spec);
  dev.clear();
  for (const auto& p : one.samples()) dev.push_back(std::abs(std::asin(std::clamp(p.coords().dot(n), -1.0, 1.0))));
  maxima = 0;
  for (std::size_t k = 1; k + 1 < dev.size(); ++k) maxima += dev[k] > dev[k - 1] && dev[k] >= dev[k + 1];
  EXPECT_EQ(maxima, 1);
}

TEST(Synthetic, RandomWarpsAreValid) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Warp g = random_warp(100, 0.9, 3, 5.0, seed);
    for (std::size_t k = 1; k < g.size(); ++k) EXPECT_GE(g[k], g[k - 1]);
  }
  EXPECT_EQ(random_warp(10, 0.0, 3, 3.0, 1).linf_distance(Warp::identity(10)), 0.0);
  EXPECT_THROW(random_warp(10, 1.5, 3, 3.0, 1), Error);
}

std::vector<ExportTrack> some_tracks() {
  SyntheticSpec spec;
  spec.count = 3;
  spec.grid = 25;
  spec.noise = 0.05;
  std::vector<ExportTrack> out;
  int i = 0;
  for (auto& t : generate_synthetic(spec)) out.push_back({"track-" + std::to_string(i++), std::move(t), {}, "member"});
  return out;
}

TEST(Export, GeoJsonAndCsvRoundTrip) {
  const auto tracks = some_tracks();
  for (ExportFormat f : {ExportFormat::GeoJson, ExportFormat::Csv, ExportFormat::Json}) {
    const auto back = import_tracks(export_tracks(tracks, f), f);
    ASSERT_EQ(back.size(), tracks.size());
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      EXPECT_EQ(back[i].id, tracks[i].id);
      EXPECT_LT(max_deviation(back[i].track, tracks[i].track), 1e-9);
    }
  }
}

TEST(Export, GeoJsonStructure) {
  const auto tracks = some_tracks();
  const auto doc = nlohmann::json::parse(export_tracks({tracks[0]}, ExportFormat::GeoJson));
  EXPECT_EQ(doc.at("type"), "FeatureCollection");
  ASSERT_EQ(doc.at("features").size(), 1u);
  const auto& f = doc.at("features")[0];
  EXPECT_EQ(f.at("geometry").at("type"), "LineString");
  const auto& coords = f.at("geometry").at("coordinates");
  ASSERT_EQ(coords.size(), tracks[0].track.size());
  // [lon, lat] order.
  const auto [lat, lon] = to_lat_lon(tracks[0].track[0]);
  EXPECT_NEAR(coords[0][0].get<double>(), lon, 1e-12);
  EXPECT_NEAR(coords[0][1].get<double>(), lat, 1e-12);
  EXPECT_EQ(f.at("properties").at("id"), tracks[0].id);
}

TEST(Export, ClusterExportTagsEveryMember) {
  const auto tracks = some_tracks();
  ClusterResult r;
  r.k = 2;
  r.assignments = {0, 1, 1};
  r.centroids = {tsrvc_of(tracks[0].track), tsrvc_of(tracks[1].track)};
  r.distances = {0.0, 0.0, 0.1};
  const auto doc = nlohmann::json::parse(export_clusters(r, tracks, ExportFormat::GeoJson));
  int members = 0, centroids = 0;
  for (const auto& f : doc.at("features")) {
    const auto& p = f.at("properties");
    ASSERT_TRUE(p.contains("cluster"));
    if (p.at("role") == "centroid") {
      ++centroids;
    } else {
      EXPECT_EQ(p.at("cluster").get<int>(), r.assignments[static_cast<std::size_t>(members)]);
      ++members;
    }
  }
  EXPECT_EQ(members, 3);
  EXPECT_EQ(centroids, 2);
  try {
    export_clusters(r, tracks, ExportFormat::Csv);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedCombination);
  }
  EXPECT_THROW(parse_export_format("xml"), Error);
}

TEST(Export, PcaModelJsonRoundTrip) {
  SyntheticSpec spec;
  spec.count = 4;
  spec.grid = 20;
  spec.noise = 0.05;
  std::vector<TsrvcPair> items;
  for (const auto& t : generate_synthetic(spec)) items.push_back(tsrvc_of(t));
  KarcherOptions options;
  options.max_iter = 2;
  const PcaModel m = fit_pca(karcher_mean(items, options), 3);
  const PcaModel back = pca_model_from_json(nlohmann::json::parse(export_pca(m, ExportFormat::Json)));
  EXPECT_EQ(back.w_basis, m.w_basis);
  EXPECT_EQ(back.w_variances, m.w_variances);
  EXPECT_EQ(back.u_basis, m.u_basis);
  EXPECT_EQ(back.v1, m.v1);
  // Tangent re-projection on load may touch the last bits.
  EXPECT_LT(l2_distance_sq(back.mean.q, m.mean.q), 1e-28);
  const auto a = sample_wrapped_gaussian(m, 3, 5), b = sample_wrapped_gaussian(back, 3, 5);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(max_deviation(a[i], b[i]), 1e-12);
  EXPECT_THROW(export_pca(m, ExportFormat::GeoJson), Error);
}

}  // namespace
