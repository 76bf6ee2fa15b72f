#pragma once

#include "holoseries/generator.hpp"
#include "holoseries/mc.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>

namespace holoseries {

/// A parsed model document: everything build_generator needs, plus the
/// optional jump-size law the Monte Carlo oracle needs for sampling.
struct ModelSpec {
    ModelParts parts;
    std::optional<JumpLaw> jump_law;
};

ModelSpec parse_model_json(const nlohmann::json& doc);
ModelSpec parse_model_file(const std::string& path);
nlohmann::json model_to_json(const ModelSpec& spec);

GeneratorSpec to_generator(const ModelSpec& spec);
/// Throws ConfigError when the model has jumps but no sampling law.
SdeModel to_sde_model(const ModelSpec& spec);

} // namespace holoseries
