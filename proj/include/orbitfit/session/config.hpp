#pragma once

#include "orbitfit/plate/fit.hpp"
#include "orbitfit/registration/reconstruction.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

namespace orbitfit {

// Run configuration (JSON, every key optional, unknown keys rejected):
//   {"icp": {"max_iterations", "convergence_tol", "trim_fraction",
//            "max_correspondence_distance", "sample_count", "seed"},
//    "cpd": {"beta", "lambda", "outlier_weight", "max_iterations", "sigma2_tol",
//            "sample_count", "target_sample_count"},
//    "fit": {"samples_per_curve", "penetration_tol"},
//    "seed": 42}
struct RunConfig {
  ReconstructionOptions reconstruction;
  FitOptions fit;
};

RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Seeds every sampler in the config.
void apply_seed(RunConfig& config, std::uint64_t seed);

}  // namespace orbitfit
