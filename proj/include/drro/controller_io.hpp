#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "drro/synthesis.hpp"

namespace drro {

/// JSON controller cache. Samples are stored as shortest round-trip decimal
/// doubles so reading back is bit-exact.
struct ControllerCache {
  std::uint64_t plant_hash = 0;
  ControllerSamples controller;
};

std::string controller_to_json(const ControllerCache& cache);
ControllerCache controller_from_json(const std::string& text);

void save_controller(const std::filesystem::path& path, const ControllerCache& cache);
ControllerCache load_controller(const std::filesystem::path& path);

// True if the JSON text looks like a controller cache rather than a
// state-space file.
bool is_controller_cache(const std::string& text);

std::string hash_to_hex(std::uint64_t h);

// Writes via a temporary file in the same directory followed by a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace drro
