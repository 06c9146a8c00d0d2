#include "orbitfit/session/config.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/session/wire.hpp"
#include "orbitfit/util/io.hpp"

#include <functional>
#include <map>

namespace orbitfit {

using wire::Json;

namespace {

using Setter = std::function<void(const Json&, const std::string&)>;

void apply_section(const Json& section, const std::string& name, const std::map<std::string, Setter>& setters) {
  if (!section.is_object()) fail(ErrorKind::InvalidInput, "config section '" + name + "' must be an object");
  for (auto it = section.begin(); it != section.end(); ++it) {
    const auto s = setters.find(it.key());
    if (s == setters.end()) fail(ErrorKind::InvalidInput, "unknown config key '" + name + "." + it.key() + "'");
    s->second(it.value(), name + "." + it.key());
  }
}

Setter real(double& target) {
  return [&target](const Json& v, const std::string& key) { target = wire::number(v, key); };
}

template <typename T>
Setter count(T& target) {
  return [&target](const Json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      fail(ErrorKind::InvalidInput, key + " must be a non-negative integer");
    }
    target = static_cast<T>(v.get<std::uint64_t>());
  };
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text) {
  const Json j = wire::parse(json_text, "config");
  RunConfig c;
  auto& icp = c.reconstruction.icp;
  auto& cpd = c.reconstruction.cpd;
  apply_section(
      j, "config",
      {{"icp",
        [&](const Json& v, const std::string& key) {
          apply_section(v, key,
                        {{"max_iterations", count(icp.max_iterations)},
                         {"convergence_tol", real(icp.convergence_tol)},
                         {"trim_fraction", real(icp.trim_fraction)},
                         {"max_correspondence_distance", real(icp.max_correspondence_distance)},
                         {"sample_count", count(icp.sample_count)},
                         {"seed", count(icp.seed)}});
        }},
       {"cpd",
        [&](const Json& v, const std::string& key) {
          apply_section(v, key,
                        {{"beta", real(cpd.beta)},
                         {"lambda", real(cpd.lambda)},
                         {"outlier_weight", real(cpd.outlier_weight)},
                         {"max_iterations", count(cpd.max_iterations)},
                         {"sigma2_tol", real(cpd.sigma2_tol)},
                         {"sample_count", count(c.reconstruction.cpd_sample_count)},
                         {"target_sample_count", count(c.reconstruction.cpd_target_sample_count)}});
        }},
       {"fit",
        [&](const Json& v, const std::string& key) {
          apply_section(v, key,
                        {{"samples_per_curve", count(c.fit.samples_per_curve)},
                         {"penetration_tol", real(c.fit.penetration_tol)}});
        }},
       {"seed", [&](const Json& v, const std::string& key) {
          std::uint64_t seed = 0;
          count(seed)(v, key);
          apply_seed(c, seed);
        }}});
  icp.validate();
  cpd.validate();
  if (c.fit.samples_per_curve < 2) fail(ErrorKind::InvalidInput, "fit.samples_per_curve must be at least 2");
  if (!(c.fit.penetration_tol >= 0.0)) fail(ErrorKind::InvalidInput, "fit.penetration_tol must be >= 0");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  try {
    return parse_run_config(util::read_text(path));
  } catch (const Error& e) {
    if (e.is_io()) throw;
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

void apply_seed(RunConfig& config, std::uint64_t seed) {
  config.reconstruction.seed = seed;
  config.reconstruction.icp.seed = seed;
}

}  // namespace orbitfit
