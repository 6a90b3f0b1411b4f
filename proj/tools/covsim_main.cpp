// Command-line entry points: simulate, check, geodesic, partition.
//
// Exit codes: 0 success, 1 failure/fault, 2 warnings (check).

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "covsim/eng/checkers.hpp"
#include "covsim/eng/engine.hpp"
#include "covsim/errors.hpp"
#include "covsim/geo/geodesic.hpp"
#include "covsim/io/scenario_io.hpp"
#include "covsim/io/writers.hpp"

namespace {

using namespace covsim;

constexpr double kDegree = M_PI / 180.0;

std::string resolve_output_dir(const eng::Scenario& s,
                               const std::string& cli_override) {
  if (!cli_override.empty()) return cli_override;
  if (const char* env = std::getenv("COVSIM_OUTPUT_DIR")) {
    if (*env) return env;
  }
  return s.output_dir;
}

int cmd_simulate(const std::string& path, std::optional<std::uint64_t> seed,
                 std::optional<double> dt, std::optional<double> duration,
                 const std::string& out_override, bool quiet) {
  eng::Scenario s = io::load_scenario(path);
  if (seed) s.seed = *seed;
  if (dt) s.dt = *dt;
  if (duration) s.duration = *duration;
  s.output_dir = resolve_output_dir(s, out_override);
  for (const auto& w : eng::validate(s)) {
    std::cerr << "warning: " << w << "\n";
  }

  eng::Engine engine(s);
  io::RunWriter writer(s.output_dir, s.n_agents);
  io::write_file_atomic(
      std::filesystem::path(s.output_dir) / "scenario.effective.yaml",
      io::serialize_scenario(s));
  io::write_file_atomic(std::filesystem::path(s.output_dir) / "checker.json",
                        io::checker_report_json(eng::check_theorems(s)));

  eng::RunSinks sinks;
  sinks.event = [&](const nlohmann::ordered_json& e) { writer.event(e); };
  sinks.metrics = [&](const eng::MetricsRow& r) { writer.metrics(r); };
  if (s.snapshot_period > 0.0) {
    sinks.snapshot = [&](double t, const cov::CoverageField& f,
                         const cov::SurfaceMesh& m) {
      writer.snapshot(t, f, m);
    };
  }
  const eng::RunResult result = engine.run(sinks);
  writer.finish();

  int intercepted = 0, impacted = 0, missed = 0;
  for (const auto& p : result.particles) {
    if (p.impact_time >= 0.0) {
      ++impacted;
      if (p.intercepted) {
        ++intercepted;
      } else {
        ++missed;
      }
    }
  }
  if (!quiet) {
    std::cout << "steps: " << result.steps << "\n"
              << "final normalized coverage error: " << result.e_norm_final
              << "\n"
              << "min pairwise distance: " << result.min_pair_dist_ever << "\n"
              << "min normal length: " << result.min_normal_length_ever << "\n"
              << "particles impacted/intercepted/missed: " << impacted << "/"
              << intercepted << "/" << missed << "\n"
              << "outputs: " << writer.directory().string() << "\n";
  }
  if (result.halted_on_fault) {
    std::cerr << "fault: " << result.fault_message << "\n";
    return 1;
  }
  return 0;
}

int cmd_check(const std::string& path, const std::string& out_override) {
  eng::Scenario s = io::load_scenario(path);
  s.output_dir = resolve_output_dir(s, out_override);
  const eng::CheckerReport r = eng::check_theorems(s);
  const std::string json = io::checker_report_json(r);
  io::write_file_atomic(std::filesystem::path(s.output_dir) / "checker.json",
                        json);
  std::cout << json;
  switch (r.overall()) {
    case eng::CheckStatus::PASS: return 0;
    case eng::CheckStatus::WARN: return 2;
    case eng::CheckStatus::FAIL: return 1;
  }
  return 1;
}

int cmd_geodesic(double a, double c, double lat1, double lon1, double lat2,
                 double lon2) {
  const geo::Spheroid s(a, c);
  const auto p1 = s.point_from_geodetic(lat1 * kDegree, lon1 * kDegree);
  const auto p2 = s.point_from_geodetic(lat2 * kDegree, lon2 * kDegree);
  const auto sol = geo::vincenty_inverse(s, p1, p2);
  std::cout << "distance: " << sol.distance << "\n"
            << "heading_deg: " << sol.initial_heading / kDegree << "\n"
            << "converged: " << (sol.converged ? "true" : "false") << "\n"
            << "antipodal_fallback: "
            << (sol.used_antipodal_fallback ? "true" : "false") << "\n";
  return sol.converged ? 0 : 1;
}

int cmd_partition(double a, double c, int n) {
  const geo::Spheroid s(a, c);
  const auto bounds = geo::partition_bounds(s, n);
  const double band = geo::surface_area(s) / (n - 1);
  std::cout << "bounds:";
  for (double z : bounds) std::cout << " " << z;
  std::cout << "\n";
  for (int i = 0; i + 1 < n; ++i) {
    const double area = geo::zone_area(s, bounds[i + 1], bounds[i]);
    std::cout << "band " << i << ": area " << area << " (target " << band
              << ", rel err " << std::abs(area - band) / band << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"persistent-coverage simulator on an ellipsoid of revolution"};
  app.require_subcommand(1);

  std::string scenario_path, out_override;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt, duration;
  bool quiet = false;

  auto* sim = app.add_subcommand("simulate", "run a scenario");
  sim->add_option("scenario", scenario_path, "scenario file")->required();
  sim->add_option("--seed", seed, "override the RNG seed");
  sim->add_option("--dt", dt, "override the time step");
  sim->add_option("--duration", duration, "override the duration");
  sim->add_option("--out", out_override, "output directory");
  sim->add_flag("--quiet", quiet, "suppress the summary");

  auto* chk = app.add_subcommand("check", "evaluate the design conditions");
  chk->add_option("scenario", scenario_path, "scenario file")->required();
  chk->add_option("--out", out_override, "output directory");

  double a = 80.0, c = 20.0;
  double lat1 = 0, lon1 = 0, lat2 = 0, lon2 = 90;
  int n_parts = 4;
  auto* geo_cmd = app.add_subcommand("geodesic", "inverse geodesic debug");
  geo_cmd->add_option("--a", a, "equatorial semi-axis");
  geo_cmd->add_option("--c", c, "polar semi-axis");
  geo_cmd->add_option("--lat1", lat1, "degrees")->required();
  geo_cmd->add_option("--lon1", lon1, "degrees")->required();
  geo_cmd->add_option("--lat2", lat2, "degrees")->required();
  geo_cmd->add_option("--lon2", lon2, "degrees")->required();

  auto* part = app.add_subcommand("partition", "equal-area latitude bands");
  part->add_option("--a", a, "equatorial semi-axis");
  part->add_option("--c", c, "polar semi-axis");
  part->add_option("-n", n_parts, "number of agents")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return cmd_simulate(scenario_path, seed, dt, duration, out_override,
                          quiet);
    }
    if (chk->parsed()) {
      return cmd_check(scenario_path, out_override);
    }
    if (geo_cmd->parsed()) {
      return cmd_geodesic(a, c, lat1, lon1, lat2, lon2);
    }
    if (part->parsed()) {
      return cmd_partition(a, c, n_parts);
    }
  } catch (const covsim::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const covsim::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
