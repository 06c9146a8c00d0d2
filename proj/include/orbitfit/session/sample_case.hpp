#pragma once

#include "orbitfit/session/session.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace orbitfit {

/// Writes the synthetic demo case into dir: a closed bone block with a
/// floor defect, the reconstructed orbit patch, orbit landmarks and four
/// plates stored in their own vendor frames. Returns the case.json path.
std::filesystem::path write_sample_case(const std::filesystem::path& dir);

/// Landmark placement followed by posterior stop alignment, logged as two
/// events per plate. Empty `plate_ids` means every plate in case order.
void register_plates(Session& session, const std::vector<std::string>& plate_ids, const std::string& actor);

}  // namespace orbitfit
