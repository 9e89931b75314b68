#pragma once

#include <filesystem>

#include "json.hpp"

#include "correct/autodiff/tape.hpp"

namespace correct::ad {

/// Single-file archive: one line of JSON manifest, then little-endian float64 blobs.
///
///   {"format":"correct-checkpoint","version":1,"meta":{...},
///    "tensors":[{"name":..,"shape":[r,c],"dtype":"f64","offset":..,"bytes":..}, ...]}\n
///   <blob bytes, offsets relative to the first byte after the newline>
struct Checkpoint {
    ParameterStore params;
    nlohmann::json meta = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& params,
                     const nlohmann::json& meta);

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace correct::ad
