#include "covsim/io/scenario_io.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "covsim/errors.hpp"

namespace covsim::io {

namespace {

constexpr double kDegree = M_PI / 180.0;

struct Section {
  const YAML::Node node;
  const std::string name;
  std::set<std::string> known;

  Section(const YAML::Node& parent, const std::string& key)
      : node(parent[key]), name(key) {}

  template <typename T>
  void get(const char* key, T& out) {
    known.insert(key);
    if (node && node[key]) {
      try {
        out = node[key].as<T>();
      } catch (const YAML::Exception&) {
        throw ParseError("bad value for " + name + "." + key);
      }
    }
  }

  void finish() const {
    if (!node) return;
    if (!node.IsMap()) {
      throw ParseError("section '" + name + "' must be a mapping");
    }
    for (const auto& it : node) {
      const std::string key = it.first.as<std::string>();
      if (!known.count(key)) {
        throw ParseError("unknown key '" + name + "." + key + "'");
      }
    }
  }
};

}  // namespace

eng::Scenario parse_scenario(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("scenario parse error: ") + e.what());
  }
  if (!root.IsMap()) {
    throw ParseError("scenario file must be a mapping");
  }
  const std::set<std::string> sections = {"spheroid", "agents",  "intruders",
                                          "sensor",   "simulation", "outputs"};
  for (const auto& it : root) {
    const std::string key = it.first.as<std::string>();
    if (!sections.count(key)) {
      throw ParseError("unknown section '" + key + "'");
    }
  }

  eng::Scenario s;

  Section sph(root, "spheroid");
  double a = s.spheroid.a, c = s.spheroid.c;
  sph.get("equatorial_radius", a);
  sph.get("polar_radius", c);
  sph.finish();
  s.spheroid = geo::Spheroid(a, c);

  Section ag(root, "agents");
  double half_angle_deg = s.agent.half_angle / kDegree;
  ag.get("count", s.n_agents);
  ag.get("power_lifespan", s.t_star);
  ag.get("body_radius", s.agent.body_radius);
  ag.get("sensing_range", s.agent.sensing_range);
  ag.get("half_angle_deg", half_angle_deg);
  ag.get("eta", s.agent.eta);
  ag.get("gain_u", s.agent.k_u);
  ag.get("gain_v", s.agent.k_v);
  ag.get("gain_w", s.agent.k_w);
  ag.get("gain_r", s.agent.k_r);
  ag.get("gain_s", s.agent.k_s);
  ag.get("rate_limit_r", s.agent.r_max);
  ag.get("rate_limit_s", s.agent.s_max);
  ag.get("max_speed", s.agent.max_speed);
  ag.get("xi", s.agent.xi);
  ag.get("gamma", s.agent.gamma);
  ag.get("arrival_epsilon", s.eps1);
  ag.get("transfer_epsilon", s.eps2);
  ag.finish();
  s.agent.half_angle = half_angle_deg * kDegree;

  Section in(root, "intruders");
  in.get("enabled", s.spawning_enabled);
  in.get("max_speed", s.intruder_max_speed);
  in.get("detection_range", s.detection_range);
  in.get("spawn_period", s.spawn_period);
  in.get("first_spawn", s.first_spawn);
  in.get("spawn_lead", s.spawn_lead);
  in.get("decay_lambda", s.decay_lambda);
  in.get("decay_pad", s.decay_pad);
  in.finish();

  Section se(root, "sensor");
  double saz_deg = s.noise.sigma_azimuth / kDegree;
  double spo_deg = s.noise.sigma_polar / kDegree;
  se.get("sigma_range", s.noise.sigma_range);
  se.get("sigma_azimuth_deg", saz_deg);
  se.get("sigma_polar_deg", spo_deg);
  se.finish();
  s.noise.sigma_azimuth = saz_deg * kDegree;
  s.noise.sigma_polar = spo_deg * kDegree;

  Section si(root, "simulation");
  si.get("dt", s.dt);
  si.get("duration", s.duration);
  si.get("seed", s.seed);
  si.get("mesh_cells", s.mesh_cells);
  si.get("coverage_target", s.coverage_target);
  si.get("initial_coverage", s.initial_coverage);
  si.get("dwell_min", s.dwell_min);
  si.finish();

  Section ou(root, "outputs");
  ou.get("directory", s.output_dir);
  ou.get("snapshot_period", s.snapshot_period);
  ou.finish();

  eng::validate(s);
  return s;
}

eng::Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    throw ParseError("cannot open scenario file: " + path);
  }
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const eng::Scenario& s) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "spheroid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "equatorial_radius" << YAML::Value << s.spheroid.a;
  out << YAML::Key << "polar_radius" << YAML::Value << s.spheroid.c;
  out << YAML::EndMap;

  out << YAML::Key << "agents" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "count" << YAML::Value << s.n_agents;
  out << YAML::Key << "power_lifespan" << YAML::Value << s.t_star;
  out << YAML::Key << "body_radius" << YAML::Value << s.agent.body_radius;
  out << YAML::Key << "sensing_range" << YAML::Value << s.agent.sensing_range;
  out << YAML::Key << "half_angle_deg" << YAML::Value
      << s.agent.half_angle / kDegree;
  out << YAML::Key << "eta" << YAML::Value << s.agent.eta;
  out << YAML::Key << "gain_u" << YAML::Value << s.agent.k_u;
  out << YAML::Key << "gain_v" << YAML::Value << s.agent.k_v;
  out << YAML::Key << "gain_w" << YAML::Value << s.agent.k_w;
  out << YAML::Key << "gain_r" << YAML::Value << s.agent.k_r;
  out << YAML::Key << "gain_s" << YAML::Value << s.agent.k_s;
  out << YAML::Key << "rate_limit_r" << YAML::Value << s.agent.r_max;
  out << YAML::Key << "rate_limit_s" << YAML::Value << s.agent.s_max;
  out << YAML::Key << "max_speed" << YAML::Value << s.agent.max_speed;
  out << YAML::Key << "xi" << YAML::Value << s.agent.xi;
  out << YAML::Key << "gamma" << YAML::Value << s.agent.gamma;
  out << YAML::Key << "arrival_epsilon" << YAML::Value << s.eps1;
  out << YAML::Key << "transfer_epsilon" << YAML::Value << s.eps2;
  out << YAML::EndMap;

  out << YAML::Key << "intruders" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "enabled" << YAML::Value << s.spawning_enabled;
  out << YAML::Key << "max_speed" << YAML::Value << s.intruder_max_speed;
  out << YAML::Key << "detection_range" << YAML::Value << s.detection_range;
  out << YAML::Key << "spawn_period" << YAML::Value << s.spawn_period;
  out << YAML::Key << "first_spawn" << YAML::Value << s.first_spawn;
  out << YAML::Key << "spawn_lead" << YAML::Value << s.spawn_lead;
  out << YAML::Key << "decay_lambda" << YAML::Value << s.decay_lambda;
  out << YAML::Key << "decay_pad" << YAML::Value << s.decay_pad;
  out << YAML::EndMap;

  out << YAML::Key << "sensor" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "sigma_range" << YAML::Value << s.noise.sigma_range;
  out << YAML::Key << "sigma_azimuth_deg" << YAML::Value
      << s.noise.sigma_azimuth / kDegree;
  out << YAML::Key << "sigma_polar_deg" << YAML::Value
      << s.noise.sigma_polar / kDegree;
  out << YAML::EndMap;

  out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dt" << YAML::Value << s.dt;
  out << YAML::Key << "duration" << YAML::Value << s.duration;
  out << YAML::Key << "seed" << YAML::Value << s.seed;
  out << YAML::Key << "mesh_cells" << YAML::Value << s.mesh_cells;
  out << YAML::Key << "coverage_target" << YAML::Value << s.coverage_target;
  out << YAML::Key << "initial_coverage" << YAML::Value << s.initial_coverage;
  out << YAML::Key << "dwell_min" << YAML::Value << s.dwell_min;
  out << YAML::EndMap;

  out << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "directory" << YAML::Value << s.output_dir;
  out << YAML::Key << "snapshot_period" << YAML::Value << s.snapshot_period;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace covsim::io
