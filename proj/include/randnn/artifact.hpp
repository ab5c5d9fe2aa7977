#pragma once

#include "randnn/config.hpp"
#include "randnn/rvfl.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace randnn::artifact {

/// Versioned on-disk model container: magic header, format version, resolved
/// config block, optional named weight blocks, optional trained readout, and
/// a trailing CRC32 over everything before it.
struct ModelArtifact {
    config::ExperimentConfig config;
    bool weights_materialized = false;
    std::vector<std::pair<std::string, Matrix>> weights;  // ordered blocks
    std::optional<rvfl::Readout> readout;
};

inline constexpr std::uint32_t kFormatVersion = 1;

void save_model(const std::string& path, const ModelArtifact& artifact);
ModelArtifact load_model(const std::string& path);

std::string serialize_model(const ModelArtifact& artifact);
ModelArtifact deserialize_model(const std::string& bytes, const std::string& origin);

}  // namespace randnn::artifact
