#include "isac/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "isac/error.hpp"

namespace isac::io {

static_assert(std::endian::native == std::endian::little, "tensor files assume a little-endian host");

namespace {

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorCode::IoError, "truncated tensor file");
  return v;
}

nlohmann::json vec3_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

}  // namespace

template <std::size_t Order>
void write_tensor(const std::filesystem::path& path, const CTensor<Order>& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  out.write(kTensorMagic, sizeof(kTensorMagic));
  put<std::uint32_t>(out, kTensorVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(Order));
  for (std::size_t a = 0; a < Order; ++a) put<std::uint64_t>(out, static_cast<std::uint64_t>(t.dim(a)));
  out.write(reinterpret_cast<const char*>(t.data().data()), static_cast<std::streamsize>(t.size() * sizeof(cd)));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

template <std::size_t Order>
CTensor<Order> read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kTensorMagic, sizeof(magic)) != 0) throw Error(ErrorCode::IoError, "bad tensor magic");
  if (get<std::uint32_t>(in) != kTensorVersion) throw Error(ErrorCode::IoError, "unsupported tensor version");
  if (get<std::uint32_t>(in) != Order) throw Error(ErrorCode::ShapeMismatch, "tensor order mismatch");
  typename CTensor<Order>::Shape shape;
  for (std::size_t a = 0; a < Order; ++a) shape[a] = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  CTensor<Order> t(shape);
  in.read(reinterpret_cast<char*>(t.data().data()), static_cast<std::streamsize>(t.size() * sizeof(cd)));
  if (!in) throw Error(ErrorCode::IoError, "truncated tensor payload");
  return t;
}

template void write_tensor<3>(const std::filesystem::path&, const CTensor<3>&);
template void write_tensor<4>(const std::filesystem::path&, const CTensor<4>&);
template CTensor<3> read_tensor<3>(const std::filesystem::path&);
template CTensor<4> read_tensor<4>(const std::filesystem::path&);

std::string estimates_to_json(std::span<const BsSite> sites, std::span<const EstimateSet> sets) {
  nlohmann::json doc;
  doc["version"] = kWireVersion;
  doc["sites"] = nlohmann::json::array();
  for (std::size_t j = 0; j < sites.size(); ++j)
    doc["sites"].push_back(
        {{"bs_id", j}, {"position", vec3_json(sites[j].position)}, {"panel_azimuth", sites[j].panel_azimuth}});
  doc["estimates"] = nlohmann::json::array();
  for (const auto& s : sets)
    for (std::size_t k = 0; k < s.targets.size(); ++k) {
      const auto& t = s.targets[k];
      doc["estimates"].push_back({{"bs_id", s.bs_id},
                                  {"target_idx", k},
                                  {"theta", t.elevation},
                                  {"phi", t.azimuth},
                                  {"range", t.range},
                                  {"radial_velocity", t.radial_velocity},
                                  {"alpha_re", t.alpha.real()},
                                  {"alpha_im", t.alpha.imag()}});
    }
  return doc.dump(2);
}

EstimateDocument estimates_from_json(const std::string& text) {
  EstimateDocument out;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("version").get<int>() != kWireVersion) throw Error(ErrorCode::IoError, "unsupported wire version");
    for (const auto& s : doc.at("sites")) {
      const auto id = s.at("bs_id").get<std::size_t>();
      if (out.sites.size() <= id) out.sites.resize(id + 1);
      const auto p = s.at("position").get<std::vector<double>>();
      if (p.size() != 3) throw Error(ErrorCode::IoError, "site position must have 3 entries");
      out.sites[id].position = Vec3(p[0], p[1], p[2]);
      out.sites[id].panel_azimuth = s.at("panel_azimuth").get<double>();
    }
    for (const auto& e : doc.at("estimates")) {
      const int id = e.at("bs_id").get<int>();
      auto it = std::find_if(out.sets.begin(), out.sets.end(), [&](const EstimateSet& s) { return s.bs_id == id; });
      if (it == out.sets.end()) {
        out.sets.push_back({id, {}});
        it = std::prev(out.sets.end());
      }
      const auto idx = e.at("target_idx").get<std::size_t>();
      if (it->targets.size() <= idx) it->targets.resize(idx + 1);
      TargetEstimate& t = it->targets[idx];
      t.elevation = e.at("theta").get<double>();
      t.azimuth = e.at("phi").get<double>();
      t.range = e.at("range").get<double>();
      t.radial_velocity = e.at("radial_velocity").get<double>();
      t.alpha = {e.value("alpha_re", 0.0), e.value("alpha_im", 0.0)};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("malformed estimate document: ") + e.what());
  }
  return out;
}

std::string tracks_to_json(const SceneFusion& fusion) {
  nlohmann::json doc;
  doc["version"] = kWireVersion;
  doc["tracks"] = nlohmann::json::array();
  for (const auto& t : fusion.tracks) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : t.members) members.push_back({{"bs_id", m.bs_id}, {"target_idx", m.target}});
    doc["tracks"].push_back({{"members", members},
                             {"position", vec3_json(t.position)},
                             {"mean_position", vec3_json(t.mean_position)},
                             {"range_loss", t.range_loss},
                             {"direction_loss", t.direction_loss},
                             {"pareto_size", t.pareto_size},
                             {"velocity", t.velocity ? vec3_json(*t.velocity) : nlohmann::json(nullptr)},
                             {"velocity_wls", t.velocity_wls ? vec3_json(*t.velocity_wls) : nlohmann::json(nullptr)},
                             {"residuals", t.residuals}});
  }
  nlohmann::json removed = nlohmann::json::array();
  for (const auto& m : fusion.removed) removed.push_back({{"bs_id", m.bs_id}, {"target_idx", m.target}});
  doc["removed"] = removed;
  return doc.dump(2);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

}  // namespace isac::io
