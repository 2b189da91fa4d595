#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pico/envsim.hpp"
#include "pico/models.hpp"

namespace pico::io {

// Dataset files are line-delimited JSON: one header object followed by one
// record per trajectory. Text was chosen for diffability; doubles are written
// in shortest round-trip form, so read-back is lossless.
inline constexpr int kDatasetVersion = 1;
// Checkpoints follow the same layout: a header object with the library
// metadata, then one named parameter block per line with an explicit shape.
inline constexpr int kCheckpointVersion = 1;

void write_dataset(const Dataset& dataset, std::ostream& out);
Dataset read_dataset(std::istream& in);
void write_dataset_file(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset_file(const std::filesystem::path& path);

void write_checkpoint(const PicoNetwork& net, std::ostream& out);
PicoNetwork read_checkpoint(std::istream& in);
void write_checkpoint_file(const PicoNetwork& net, const std::filesystem::path& path);
PicoNetwork read_checkpoint_file(const std::filesystem::path& path);

// Deterministic decimal formatting for metric CSVs (%.10g).
std::string format_double(double v);

// Writes rows as CSV; the first row is the header. Values are written as-is,
// so callers quote if needed (none of ours require it).
void write_csv(const std::vector<std::vector<std::string>>& rows,
               const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace pico::io
