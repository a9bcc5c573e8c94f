#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "isac/estimation.hpp"
#include "isac/fusion.hpp"
#include "isac/geometry.hpp"
#include "isac/tensor_data.hpp"

namespace isac::io {

/// Binary tensor layout: 8-byte magic "ISACTNSR", uint32 version, uint32 ndim,
/// ndim x uint64 dims, then interleaved re/im float64 in C order. Little-endian.
inline constexpr char kTensorMagic[8] = {'I', 'S', 'A', 'C', 'T', 'N', 'S', 'R'};
inline constexpr std::uint32_t kTensorVersion = 1;

template <std::size_t Order>
void write_tensor(const std::filesystem::path& path, const CTensor<Order>& t);

template <std::size_t Order>
CTensor<Order> read_tensor(const std::filesystem::path& path);

/// Wire format version of the estimate and track documents.
inline constexpr int kWireVersion = 1;

struct StationRecord {
  int bs_id = 0;
  Vec3 position = Vec3::Zero();
  double panel_azimuth = 0.0;
};

/// {"version", "sites": [{bs_id, position, panel_azimuth}], "estimates":
///  [{bs_id, target_idx, theta, phi, range, radial_velocity, alpha_re, alpha_im}]}
std::string estimates_to_json(std::span<const BsSite> sites, std::span<const EstimateSet> sets);

struct EstimateDocument {
  std::vector<BsSite> sites;  // indexed by bs_id; only geometry fields are meaningful
  std::vector<EstimateSet> sets;
};
/// Throws IoError on a malformed document or an unsupported version.
EstimateDocument estimates_from_json(const std::string& text);

std::string tracks_to_json(const SceneFusion& fusion);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace isac::io
