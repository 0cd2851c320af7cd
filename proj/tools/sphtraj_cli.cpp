// Command-line front end: ingestion -> analysis -> export.

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <map>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sphtraj/data_io.hpp"
#include "sphtraj/serialization.hpp"

using namespace sphtraj;
using nlohmann::json;

namespace {

struct Common {
  std::size_t grid = kDefaultGridSize;
  int theta_grid = 72;
  std::uint64_t seed = 1;
  std::string format = "geojson";
  std::string out = "-";
  unsigned threads = 0;
};

struct Named {
  std::string id;
  Trajectory track;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--grid", c.grid, "Samples per trajectory (T)")->check(CLI::Range(2, 100000));
  cmd->add_option("--theta-grid", c.theta_grid, "Baseline angles searched before refinement")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "Seed for every random choice");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"geojson", "csv", "json"}));
  cmd->add_option("--out", c.out, "Output path ('-' for stdout)");
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores); results do not depend on it");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::InvalidArgument, "failed writing " + path);
}

void report_issues(const std::string& path, const ParseResult& parsed) {
  for (const auto& issue : parsed.issues) {
    std::cerr << path << ":" << issue.line << ": " << (issue.warning ? "warning" : "error") << " ["
              << to_string(issue.code) << "] " << issue.message << "\n";
  }
}

// Tracks from HURDAT2, id/timestamp CSV, or this tool's own CSV / GeoJSON / JSON exports.
std::vector<Named> load_tracks(const std::string& path, std::size_t grid) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  std::vector<Named> out;
  auto adopt = [&](std::vector<ExportTrack> tracks) {
    for (auto& t : tracks) {
      out.push_back({t.id, t.track.size() == grid ? t.track : resample(t.track, grid)});
    }
  };
  if (first != std::string::npos && text[first] == '{') {
    const bool geojson = json::parse(text).contains("features");
    adopt(import_tracks(text, geojson ? ExportFormat::GeoJson : ExportFormat::Json));
    return out;
  }
  if (text.compare(first == std::string::npos ? 0 : first, 12, "id,k,lat,lon") == 0) {
    adopt(import_tracks(text.substr(first), ExportFormat::Csv));
    return out;
  }
  std::istringstream in(text);
  const ParseResult parsed = parse_tracks(in);
  report_issues(path, parsed);
  for (const auto& t : parsed.tracks) out.push_back({t.id, to_trajectory(t, grid)});
  return out;
}

std::vector<Named> load_all(const std::vector<std::string>& paths, std::size_t grid) {
  std::vector<Named> all;
  for (const auto& p : paths) {
    auto tracks = load_tracks(p, grid);
    all.insert(all.end(), std::make_move_iterator(tracks.begin()), std::make_move_iterator(tracks.end()));
  }
  if (all.empty()) throw Error(ErrorCode::EmptyDataset, "no tracks in the inputs");
  return all;
}

Named first_track(const std::string& path, std::size_t grid) {
  auto tracks = load_tracks(path, grid);
  if (tracks.empty()) throw Error(ErrorCode::EmptyDataset, "no tracks in " + path);
  return std::move(tracks.front());
}

std::vector<TsrvcPair> tsrvcs(const std::vector<Named>& tracks) {
  std::vector<TsrvcPair> out;
  for (const auto& t : tracks) out.push_back(tsrvc_of(t.track));
  return out;
}

std::vector<std::string> ids_of(const std::vector<Named>& tracks) {
  std::vector<std::string> out;
  for (const auto& t : tracks) out.push_back(t.id);
  return out;
}

// Track output with a metadata object: a foreign member in GeoJSON, a sibling of
// "tracks" in JSON, and stderr for CSV.
std::string render(const std::vector<ExportTrack>& tracks, const json& metadata, const std::string& format) {
  const ExportFormat f = parse_export_format(format);
  if (f == ExportFormat::Csv) {
    std::cerr << dump_json(metadata) << "\n";
    return export_tracks(tracks, f);
  }
  json doc = json::parse(export_tracks(tracks, f));
  doc["metadata"] = metadata;
  return dump_json(doc) + "\n";
}

Trajectory sample_arc(const ArcBaseline& arc, std::size_t grid) {
  std::vector<Vec3> pts(grid);
  for (std::size_t k = 0; k < grid; ++k) pts[k] = arc.point(static_cast<double>(k) / static_cast<double>(grid - 1));
  return Trajectory::from_coords(pts);
}

Trajectory great_circle(const SpherePoint& a, const SpherePoint& b, std::size_t grid) {
  std::vector<Vec3> pts(grid);
  for (std::size_t k = 0; k < grid; ++k) {
    pts[k] = s2::slerp(a.coords(), b.coords(), static_cast<double>(k) / static_cast<double>(grid - 1));
  }
  return Trajectory::from_coords(pts);
}

KarcherOptions karcher_options(const Common& c, double step, double tol, int max_iter) {
  KarcherOptions k;
  k.step = step;
  k.tol = tol;
  k.max_iter = max_iter;
  k.alignment.theta_grid = c.theta_grid;
  k.threads = c.threads;
  return k;
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw Error(ErrorCode::InvalidArgument, "expected A..B, got '" + text + "'");
  const int a = std::stoi(text.substr(0, dots)), b = std::stoi(text.substr(dots + 2));
  if (a < 1 || b < a) throw Error(ErrorCode::InvalidArgument, "empty or invalid k range '" + text + "'");
  return {a, b};
}

// Group label = id up to the last '-', e.g. "g2-7" -> "g2".
std::vector<int> labels_from_ids(const std::vector<std::string>& ids) {
  std::map<std::string, int> codes;
  std::vector<int> out;
  for (const auto& id : ids) {
    const auto cut = id.rfind('-');
    const std::string group = cut == std::string::npos ? id : id.substr(0, cut);
    out.push_back(codes.emplace(group, static_cast<int>(codes.size())).first->second);
  }
  return out;
}

BaseShape parse_shape(const std::string& s) {
  if (s == "great_arc") return BaseShape::GreatArc;
  if (s == "bump") return BaseShape::Bump;
  return BaseShape::TwoBump;
}

json cross_section_json(const CrossSectionalSummary& s) {
  json traces = json::array();
  for (const auto& v : s.variance_at) traces.push_back({{"index", v.index}, {"trace", v.trace}});
  return traces;
}

// Principal axes of the cross-sectional covariance, drawn as short segments
// through the mean track at +/- one standard deviation.
std::vector<ExportTrack> ellipse_axes(const CrossSectionalSummary& s, std::size_t every) {
  std::vector<ExportTrack> out;
  for (const auto& v : s.variance_at) {
    if (v.index % every != 0) continue;
    const Vec3 p = s.mean_track[v.index].coords();
    const Mat3 proj = Mat3::Identity() - p * p.transpose();
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(proj * v.covariance * proj);
    for (int axis = 2; axis >= 1; --axis) {
      const double sd = std::sqrt(std::max(eig.eigenvalues()(axis), 0.0));
      const Vec3 dir = s2::project_tangent(p, eig.eigenvectors().col(axis)).normalized() * sd;
      out.push_back({"axis-" + std::to_string(v.index) + "-" + std::to_string(3 - axis),
                     Trajectory::from_coords({s2::exp(p, -dir), p, s2::exp(p, dir)}), std::nullopt,
                     "variance-axis"});
    }
  }
  return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t k = 0; k < n; ++k) idx[k] = k;
  return idx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-amplitude analysis of trajectories on the sphere"};
  app.require_subcommand(1);
  Common common;

  // geodesic
  auto* geo = app.add_subcommand("geodesic", "Bundle geodesic between two tracks");
  std::string geo_a, geo_b;
  int steps = 5;
  geo->add_option("a", geo_a, "First track file")->required();
  geo->add_option("b", geo_b, "Second track file")->required();
  geo->add_option("--steps", steps, "Number of intermediate tracks, ends included")->check(CLI::Range(2, 1000));
  add_common(geo, common);

  // align
  auto* align = app.add_subcommand("align", "Amplitude distance and relative phase of b against a");
  std::string al_a, al_b;
  align->add_option("a", al_a, "Reference track file")->required();
  align->add_option("b", al_b, "Track file to warp")->required();
  add_common(align, common);

  // mean / pca share the Karcher settings
  double step = 0.5, tol = 1e-3;
  int max_iter = 50;
  auto add_karcher = [&](CLI::App* cmd) {
    cmd->add_option("--step", step, "Initial Karcher step size")->check(CLI::PositiveNumber);
    cmd->add_option("--tol", tol, "Gradient-norm threshold")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", max_iter, "Karcher iteration cap")->check(CLI::PositiveNumber);
  };

  auto* mean = app.add_subcommand("mean", "Karcher mean of amplitudes");
  std::vector<std::string> inputs;
  mean->add_option("inputs", inputs, "Track files")->required();
  add_karcher(mean);
  add_common(mean, common);

  auto* pca = app.add_subcommand("pca", "Tangent-space PCA at the Karcher mean");
  int rank = 0;
  std::string model_out;
  pca->add_option("inputs", inputs, "Track files")->required();
  pca->add_option("--rank", rank, "Retained w components (default min(n-1, 3))");
  pca->add_option("--model-out", model_out, "Also write the model JSON here");
  add_karcher(pca);
  add_common(pca, common);

  auto* sample = app.add_subcommand("sample", "Draw trajectories from the wrapped Gaussian model");
  std::string model_in;
  std::size_t count = 10;
  sample->add_option("--model", model_in, "PCA model JSON written by 'pca --model-out'")->required();
  sample->add_option("--n", count, "Number of samples")->check(CLI::PositiveNumber);
  add_common(sample, common);

  auto* cluster = app.add_subcommand("cluster", "Vote-based k-means under the amplitude distance");
  int k = 0, restarts = 10;
  std::string k_range;
  bool truth_from_ids = false;
  cluster->add_option("inputs", inputs, "Track files")->required();
  cluster->add_option("--k", k, "Number of clusters (default: elbow choice over --k-range)");
  cluster->add_option("--k-range", k_range, "Elbow curve over k = A..B");
  cluster->add_option("--restarts", restarts, "k-means runs per k and in the consensus")->check(CLI::PositiveNumber);
  cluster->add_flag("--truth-from-ids", truth_from_ids, "Report ARI against labels taken from 'group-index' ids");
  add_karcher(cluster);
  add_common(cluster, common);

  auto* simulate = app.add_subcommand("simulate", "Synthetic warped families");
  SyntheticSpec spec;
  std::string shape = "two_bump";
  int groups = 1;
  simulate->add_option("--base", shape, "Base path")->check(CLI::IsMember({"great_arc", "bump", "two_bump"}));
  simulate->add_option("--count", spec.count, "Members per group")->check(CLI::PositiveNumber);
  simulate->add_option("--groups", groups, "Groups with distinct base paths")->check(CLI::Range(1, 12));
  simulate->add_option("--noise", spec.noise, "Sideways perturbation scale (radians)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--warp-strength", spec.warp_strength, "Warp mixing weight in [0, 1]")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--bump-height", spec.bump_height, "Bump height (radians)");
  add_common(simulate, common);

  auto* import = app.add_subcommand("import", "Read HURDAT2 or CSV tracks, optionally filtered");
  std::string import_path;
  bool filter = false;
  TrackFilter tf;
  std::string years = "1969..2014";
  import->add_option("input", import_path, "HURDAT2 or id,timestamp,lat,lon file")->required();
  import->add_flag("--filter", filter, "Keep tracks starting south of --start-lat-max and ending north of --end-lat-min");
  import->add_option("--start-lat-max", tf.start_lat_max, "Degrees");
  import->add_option("--end-lat-min", tf.end_lat_min, "Degrees");
  import->add_option("--years", years, "First-fix year range A..B");
  add_common(import, common);

  CLI11_PARSE(app, argc, argv);

  try {
    GeodesicOptions theta;
    theta.theta_grid = common.theta_grid;

    if (*geo) {
      const Named a = first_track(geo_a, common.grid), b = first_track(geo_b, common.grid);
      const TsrvcPair pa = tsrvc_of(a.track), pb = tsrvc_of(b.track);
      const BundleGeodesic g = geodesic(pa, pb, theta);
      std::vector<ExportTrack> tracks;
      for (int i = 0; i < steps; ++i) {
        const double s = static_cast<double>(i) / (steps - 1);
        tracks.push_back({"s" + std::to_string(i), integrate(g.at(s)), std::nullopt, "geodesic"});
      }
      tracks.push_back({"baseline", sample_arc(g.baseline, common.grid), std::nullopt, "baseline"});
      tracks.push_back({"great-circle", great_circle(pa.start, pb.start, common.grid), std::nullopt, "great-circle"});
      const json meta = {{"length", g.length}, {"theta", g.baseline.theta}, {"baseline_length", g.baseline.speed()},
                         {"a", a.id}, {"b", b.id}};
      write_output(common.out, render(tracks, meta, common.format));
      std::cerr << "geodesic length " << g.length << "\n";
    } else if (*align) {
      const Named a = first_track(al_a, common.grid), b = first_track(al_b, common.grid);
      const TsrvcPair pa = tsrvc_of(a.track), pb = tsrvc_of(b.track);
      const double d = geodesic(pa, pb, theta).length;
      const AlignmentResult r = amplitude_distance(pa, pb, theta);
      json meta = to_json(r);
      meta.erase("aligned");
      meta["d"] = d;
      meta["d_a"] = r.distance;
      meta["drop"] = d - r.distance;
      meta["a"] = a.id;
      meta["b"] = b.id;
      std::vector<ExportTrack> tracks{{a.id, a.track, std::nullopt, "reference"},
                                      {b.id, b.track, std::nullopt, "original"},
                                      {b.id + "-aligned", integrate(r.aligned), std::nullopt, "aligned"}};
      write_output(common.out, render(tracks, meta, common.format));
      std::cerr << "d = " << d << ", d_a = " << r.distance << "\n";
    } else if (*mean || *pca) {
      const auto tracks = load_all(inputs, common.grid);
      const KarcherResult kr = karcher_mean(tsrvcs(tracks), karcher_options(common, step, tol, max_iter));
      if (!kr.converged) {
        std::cerr << "warning: Karcher mean stopped after " << kr.iterations << " iterations with gradient "
                  << kr.final_gradient_norm << "\n";
      }
      if (*mean) {
        std::vector<Trajectory> before, after;
        for (std::size_t i = 0; i < tracks.size(); ++i) {
          before.push_back(tracks[i].track);
          after.push_back(integrate(kr.aligned[i]));
        }
        const auto idx = all_indices(common.grid);
        const auto pre = cross_sectional_summary(before, idx);
        const auto post = cross_sectional_summary(after, idx);
        if (common.format == "json") {
          json doc = json::parse(export_karcher(kr, ids_of(tracks), ExportFormat::Json));
          doc["variance_before"] = cross_section_json(pre);
          doc["variance_after"] = cross_section_json(post);
          write_output(common.out, dump_json(doc) + "\n");
        } else {
          std::vector<ExportTrack> out{{"mean", integrate(kr.mean), std::nullopt, "mean"}};
          for (std::size_t i = 0; i < tracks.size(); ++i) out.push_back({tracks[i].id, after[i], std::nullopt, "aligned"});
          const auto axes = ellipse_axes(post, std::max<std::size_t>(1, common.grid / 10));
          out.insert(out.end(), axes.begin(), axes.end());
          const json meta = {{"iterations", kr.iterations}, {"converged", kr.converged},
                             {"objective", kr.objective}, {"variance_before", cross_section_json(pre)},
                             {"variance_after", cross_section_json(post)}};
          write_output(common.out, render(out, meta, common.format));
        }
      } else {
        const int n = static_cast<int>(tracks.size());
        const int r = rank > 0 ? rank : std::min(n - 1, 3);
        const PcaModel model = fit_pca(kr, r);
        if (!model_out.empty()) write_output(model_out, export_pca(model, ExportFormat::Json));
        if (common.format == "json") {
          write_output(common.out, export_pca(model, ExportFormat::Json));
        } else {
          std::vector<ExportTrack> out;
          const double taus[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
          for (int c = 0; c < 2; ++c) {
            for (double tau : taus) {
              out.push_back({"u" + std::to_string(c + 1) + "@" + std::to_string(tau),
                             pca_mode_path(model, PcaComponent::U, c, tau), std::nullopt, "pc-u" + std::to_string(c + 1)});
            }
          }
          for (int c = 0; c < model.rank(); ++c) {
            for (double tau : taus) {
              out.push_back({"w" + std::to_string(c + 1) + "@" + std::to_string(tau),
                             pca_mode_path(model, PcaComponent::W, c, tau), std::nullopt, "pc-w" + std::to_string(c + 1)});
            }
          }
          const json meta = {{"u_explained_ratio", to_json(model)["u_explained_ratio"]},
                             {"w_explained_ratio", to_json(model)["w_explained_ratio"]}};
          write_output(common.out, render(out, meta, common.format));
        }
      }
    } else if (*sample) {
      const PcaModel model = pca_model_from_json(json::parse(read_file(model_in)));
      const auto draws = sample_wrapped_gaussian(model, count, common.seed);
      std::vector<ExportTrack> out;
      for (std::size_t i = 0; i < draws.size(); ++i) out.push_back({"sample-" + std::to_string(i), draws[i], std::nullopt, "sample"});
      write_output(common.out, export_tracks(out, parse_export_format(common.format)));
    } else if (*cluster) {
      const auto tracks = load_all(inputs, common.grid);
      const auto data = tsrvcs(tracks);
      ClusterOptions options;
      options.karcher = karcher_options(common, step, tol, max_iter);
      options.threads = common.threads;
      const DistanceMatrix members = pairwise_distance_matrix(data, options.karcher.alignment, common.threads);
      json report;
      if (!k_range.empty()) {
        const auto [lo, hi] = parse_range(k_range);
        std::vector<int> ks;
        for (int kk = lo; kk <= std::min<int>(hi, static_cast<int>(data.size())); ++kk) ks.push_back(kk);
        const auto curve = elbow_curve(data, ks, restarts, common.seed, options, &members);
        report["elbow"] = to_json(curve);
        if (k == 0 && curve.size() >= 2) k = elbow_choice(curve);
        report["elbow_choice"] = curve.size() >= 2 ? elbow_choice(curve) : curve.front().k;
      }
      if (k == 0) throw Error(ErrorCode::InvalidK, "give --k or a --k-range with at least two values");
      const ConsensusResult cr = consensus(data, k, restarts, common.seed, options, &members);
      report["result"] = to_json(cr.clusters);
      report["co_assignment"] = to_json(cr.co_assignment);
      report["ids"] = ids_of(tracks);
      if (truth_from_ids) {
        report["ari"] = adjusted_rand_index(labels_from_ids(ids_of(tracks)), cr.clusters.assignments);
        std::cerr << "ARI " << report["ari"].get<double>() << "\n";
      }
      std::vector<ExportTrack> member_tracks;
      for (const auto& t : tracks) member_tracks.push_back({t.id, t.track, std::nullopt, "member"});
      if (common.format == "json") {
        write_output(common.out, dump_json(report) + "\n");
      } else {
        json doc = json::parse(export_clusters(cr.clusters, member_tracks, parse_export_format(common.format)));
        report.erase("result");
        doc["metadata"] = report;
        write_output(common.out, dump_json(doc) + "\n");
      }
    } else if (*simulate) {
      spec.base = parse_shape(shape);
      spec.grid = common.grid;
      std::vector<ExportTrack> out;
      for (int g = 0; g < groups; ++g) {
        SyntheticSpec s = spec;
        s.seed = derive_seed(common.seed, static_cast<std::uint64_t>(g));
        // Groups fan out in longitude and alternate the bump side.
        s.start_lon += 20.0 * g;
        s.end_lon += 20.0 * g;
        if (g % 2 == 1) s.bump_height = -s.bump_height;
        const auto family = generate_synthetic(s);
        for (std::size_t i = 0; i < family.size(); ++i) {
          const std::string id = groups > 1 ? "g" + std::to_string(g) + "-" + std::to_string(i) : "sim-" + std::to_string(i);
          out.push_back({id, family[i], std::nullopt, "synthetic"});
        }
      }
      write_output(common.out, export_tracks(out, parse_export_format(common.format)));
    } else if (*import) {
      std::istringstream in(read_file(import_path));
      const ParseResult parsed = parse_tracks(in);
      report_issues(import_path, parsed);
      std::vector<GeoTrack> selected = parsed.tracks;
      if (filter) {
        const auto [y0, y1] = parse_range(years);
        tf.year_min = y0;
        tf.year_max = y1;
        selected = filter_tracks(parsed.tracks, tf);
      }
      std::cerr << "parsed " << parsed.tracks.size() << " tracks (" << parsed.header_lines << " headers, "
                << parsed.data_lines << " data lines, " << parsed.error_count() << " errors, "
                << parsed.warning_count() << " warnings); selected " << selected.size() << "\n";
      if (common.format == "json") {
        json storms = json::array();
        for (const auto& t : selected) storms.push_back({{"id", t.id}, {"name", t.name}, {"fixes", t.fixes.size()}});
        json issues = json::array();
        for (const auto& i : parsed.issues) {
          issues.push_back({{"line", i.line}, {"code", std::string(to_string(i.code))}, {"message", i.message},
                            {"warning", i.warning}});
        }
        write_output(common.out, dump_json({{"storms", storms}, {"issues", issues}, {"selected", selected.size()},
                                            {"parsed", parsed.tracks.size()}}) + "\n");
      } else {
        std::vector<ExportTrack> out;
        for (const auto& t : selected) out.push_back({t.id, to_trajectory(t, common.grid), std::nullopt, "track"});
        write_output(common.out, export_tracks(out, parse_export_format(common.format)));
      }
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
